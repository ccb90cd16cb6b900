//! Canonical-ensemble initial conditions for atoms inside the separatrix.
//!
//! Radii are drawn from `ρ·exp(-V(ρ)/kT)` on `[0, ρ₀]` by rejection against a
//! uniform envelope, the polar angle uniformly, and the canonical momenta
//! `p_ρ`, `p_θ` from zero-mean normals of widths `sqrt(m kT)` and
//! `ρ·sqrt(m kT)`. Candidates with `E ≥ 0` are discarded. The temperature is
//! that of the ensemble before this truncation.
//!
//! Every particle index owns its own ChaCha stream derived from
//! `(seed, index)`, so the ensemble does not depend on how the work is split
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trap::{ParticleState, PotentialKind, TrapConfig};

/// Attempts allowed per particle before the configuration is declared
/// hopeless.
pub const MAX_ATTEMPTS_PER_PARTICLE: u64 = 1_000;

/// Rejection iterations allowed for a single radius draw.
pub const MAX_RADIUS_ITERATIONS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// `kT/U₀` of the untruncated canonical ensemble.
    pub temperature_ratio: f64,
    /// Cut-off radius `ρ₀` in units of the trap waist.
    pub cutoff_over_waist: f64,
    /// Number of bound particles to return.
    pub count: usize,
    pub seed: u64,
    /// Runs whose overall bound fraction falls below this are rejected.
    pub min_acceptance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            temperature_ratio: 1.0,
            cutoff_over_waist: 1.5,
            count: 50_000,
            seed: 0,
            min_acceptance: 0.01,
        }
    }
}

impl SamplerConfig {
    pub fn new(temperature_ratio: f64, count: usize, seed: u64) -> Self {
        Self {
            temperature_ratio,
            count,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature_ratio.is_finite() && self.temperature_ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature_ratio",
                reason: format!("must be positive, got {}", self.temperature_ratio),
            });
        }
        if !(self.cutoff_over_waist.is_finite() && self.cutoff_over_waist >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "cutoff_over_waist",
                reason: format!(
                    "cut-off must be at least one waist, got {}",
                    self.cutoff_over_waist
                ),
            });
        }
        if self.count == 0 {
            return Err(Error::InvalidParameter {
                name: "count",
                reason: "at least one particle is required".into(),
            });
        }
        if !(0.0..1.0).contains(&self.min_acceptance) {
            return Err(Error::InvalidParameter {
                name: "min_acceptance",
                reason: format!("must lie in [0, 1), got {}", self.min_acceptance),
            });
        }
        Ok(())
    }
}

/// Unnormalized radial density `ρ·exp(-V(ρ)/kT)`, zero outside `[0, ρ₀]`.
pub fn radial_pdf(trap: &TrapConfig, kt: f64, rho0: f64, rho: f64) -> f64 {
    if !(0.0..=rho0).contains(&rho) {
        return 0.0;
    }
    rho * (-trap.potential_rho2(rho * rho) / kt).exp()
}

/// Rejection sampler for the radial density with a precomputed envelope.
#[derive(Clone, Copy, Debug)]
pub struct RadialSampler {
    trap: TrapConfig,
    kt: f64,
    rho0: f64,
    log_ceiling: f64,
}

impl RadialSampler {
    pub fn new(trap: &TrapConfig, kt: f64, rho0: f64) -> Result<Self> {
        if !(kt.is_finite() && kt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "kT",
                reason: format!("must be positive, got {kt}"),
            });
        }
        if !(rho0.is_finite() && rho0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho0",
                reason: format!("must be positive, got {rho0}"),
            });
        }
        let rho_max = density_argmax(trap, kt, rho0);
        let log_ceiling = log_density(trap, kt, rho_max) + 1e-12;
        Ok(Self {
            trap: *trap,
            kt,
            rho0,
            log_ceiling,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.rho0
    }

    /// Height of the uniform envelope.
    pub fn ceiling(&self) -> f64 {
        self.log_ceiling.exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_RADIUS_ITERATIONS {
            let rho = self.rho0 * rng.random::<f64>();
            let u: f64 = rng.random();
            if u.ln() <= log_density(&self.trap, self.kt, rho) - self.log_ceiling {
                return Ok(rho);
            }
        }
        Err(Error::InvalidParameter {
            name: "radial density",
            reason: format!("rejection loop exceeded {MAX_RADIUS_ITERATIONS} iterations"),
        })
    }
}

fn log_density(trap: &TrapConfig, kt: f64, rho: f64) -> f64 {
    rho.ln() - trap.potential_rho2(rho * rho) / kt
}

/// Location of the supremum of `ρ·exp(-V/kT)` on `[0, ρ₀]`.
///
/// Stationary points satisfy `ρ·V'(ρ) = kT`. With `s = ρ²/w₀²` the left side
/// is `4U₀·s·exp(-2s)` for the Gaussian (rising on `s < 1/2`, falling after)
/// and `4U₀·s` for the harmonic kind. The only interior maximum is the first
/// root; otherwise the density rises all the way to the cut-off.
fn density_argmax(trap: &TrapConfig, kt: f64, rho0: f64) -> f64 {
    let u0 = trap.depth();
    let w = trap.waist();
    let s_root = match trap.kind() {
        PotentialKind::HarmonicApproximation => Some(kt / (4.0 * u0)),
        PotentialKind::Gaussian => {
            let g = |s: f64| 4.0 * u0 * s * (-2.0 * s).exp() - kt;
            if g(0.5) <= 0.0 {
                None
            } else {
                let (mut lo, mut hi) = (0.0, 0.5);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(0.5 * (lo + hi))
            }
        }
    };
    match s_root.map(|s| w * s.sqrt()) {
        Some(rho) if rho < rho0 => {
            if log_density(trap, kt, rho) >= log_density(trap, kt, rho0) {
                rho
            } else {
                rho0
            }
        }
        _ => rho0,
    }
}

/// One radius draw; builds the envelope on every call.
pub fn sample_radius<R: Rng + ?Sized>(
    trap: &TrapConfig,
    kt: f64,
    rho0: f64,
    rng: &mut R,
) -> Result<f64> {
    RadialSampler::new(trap, kt, rho0)?.sample(rng)
}

/// Canonical momenta `(p_ρ, p_θ)` at radius `rho`.
pub fn sample_momenta<R: Rng + ?Sized>(rho: f64, kt: f64, mass: f64, rng: &mut R) -> (f64, f64) {
    let width = (mass * kt).sqrt();
    let p_rho: f64 = rng.sample::<f64, _>(StandardNormal) * width;
    let p_theta: f64 = rng.sample::<f64, _>(StandardNormal) * rho * width;
    (p_rho, p_theta)
}

/// Deterministic RNG for the given particle index.
pub fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Bound particles plus the bookkeeping of how many candidates were drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub particles: Vec<ParticleState>,
    pub attempts: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn acceptance_fraction(&self) -> f64 {
        self.particles.len() as f64 / self.attempts as f64
    }

    pub fn mean_energy(&self, trap: &TrapConfig) -> f64 {
        mean(self.particles.iter().map(|p| trap.total_energy(p)))
    }

    /// Temperature of the truncated ensemble estimated from the mean kinetic
    /// energy (two quadratic degrees of freedom).
    pub fn kinetic_temperature(&self, trap: &TrapConfig) -> f64 {
        mean(self.particles.iter().map(|p| trap.kinetic_energy(p)))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Draws `config.count` bound particles.
pub fn sample_ensemble(trap: &TrapConfig, config: &SamplerConfig) -> Result<Ensemble> {
    config.validate()?;
    let kt = config.temperature_ratio * trap.depth();
    let radial = RadialSampler::new(trap, kt, config.cutoff_over_waist * trap.waist())?;

    // every particle runs to success or its cap so the acceptance estimate
    // covers the whole batch, then the floor is checked before the cap
    let drawn: Vec<(Option<ParticleState>, u64)> = (0..config.count)
        .into_par_iter()
        .map(|index| sample_bound_particle(trap, &radial, kt, config.seed, index))
        .collect::<Result<_>>()?;

    let attempts: u64 = drawn.iter().map(|(_, a)| a).sum();
    let bound = drawn.iter().filter(|(p, _)| p.is_some()).count();
    let fraction = bound as f64 / attempts as f64;
    if fraction < config.min_acceptance {
        return Err(Error::AcceptanceTooLow {
            fraction,
            minimum: config.min_acceptance,
        });
    }
    if let Some(index) = drawn.iter().position(|(p, _)| p.is_none()) {
        return Err(Error::AttemptCapExceeded {
            index,
            attempts: MAX_ATTEMPTS_PER_PARTICLE,
        });
    }
    Ok(Ensemble {
        particles: drawn.into_iter().filter_map(|(p, _)| p).collect(),
        attempts,
    })
}

/// A bound particle and the number of candidates drawn, or `None` once the
/// per-particle cap is reached.
fn sample_bound_particle(
    trap: &TrapConfig,
    radial: &RadialSampler,
    kt: f64,
    seed: u64,
    index: usize,
) -> Result<(Option<ParticleState>, u64)> {
    let mut rng = particle_rng(seed, index);
    for attempt in 1..=MAX_ATTEMPTS_PER_PARTICLE {
        let rho = radial.sample(&mut rng)?;
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        let (p_rho, p_theta) = sample_momenta(rho, kt, trap.mass(), &mut rng);
        let particle = ParticleState::from_polar(rho, theta, p_rho, p_theta);
        if trap.is_bound(&particle) {
            return Ok((Some(particle), attempt));
        }
    }
    Ok((None, MAX_ATTEMPTS_PER_PARTICLE))
}
