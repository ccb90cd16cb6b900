//! Phase imprints, echo phases and the probe-weighted fringe contrast.
//!
//! Time origin is the first perturbing light pulse. With `τ₁` the delay from
//! that pulse to the echo π-pulse and `τ₂` the delay from the echo to the
//! second light pulse, the events seen by each atom are
//!
//! | event             | time      |
//! |-------------------|-----------|
//! | first light pulse | `0`       |
//! | second light pulse| `τ₁ + τ₂` |
//! | probe             | `τ₁ + t₂` |
//!
//! where `t₂` is the delay from the echo pulse to the final π/2-pulse. For the
//! symmetric choice `τ₁ = τ₂ = t/2` the probe sits at `t/2 + t₂`. Light and
//! microwave pulses are instantaneous.
//!
//! The contrast is
//!
//! ```text
//! F = Σ_j w_j cos(φ_f,j) / Σ_j w_j,   w_j = exp(-k ρ_j²(probe) / γ²w₀²)
//! ```
//!
//! with `k = 1` by default and `k = 2` available for the intensity-profile
//! weight.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{radius_at_times, IntegratorConfig};
use crate::error::{Error, Result};
use crate::trap::{ParticleState, TrapConfig};

/// Exponent factor `k` in the probe weight `exp(-k ρ²/γ²w₀²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightExponent {
    #[default]
    One,
    Two,
}

impl WeightExponent {
    pub fn factor(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Two => 2.0,
        }
    }
}

impl TryFrom<u8> for WeightExponent {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            other => Err(Error::InvalidParameter {
                name: "weight_exponent",
                reason: format!("must be 1 or 2, got {other}"),
            }),
        }
    }
}

/// The perturbing beam (which also defines the probe profile).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Ratio of perturbing-beam waist to trap waist.
    pub gamma: f64,
    /// Peak phase shift per perturbing photon.
    pub phi0_per_photon: f64,
    /// Number of perturbing photons.
    pub n_pert: f64,
    pub weight_exponent: WeightExponent,
}

impl ProbeConfig {
    pub fn new(gamma: f64, phi0_per_photon: f64, n_pert: f64) -> Result<Self> {
        let probe = Self {
            gamma,
            phi0_per_photon,
            n_pert,
            weight_exponent: WeightExponent::One,
        };
        probe.validate()?;
        Ok(probe)
    }

    /// Probe with peak phase `phi0` given directly (one "photon").
    pub fn with_phi0(gamma: f64, phi0: f64) -> Result<Self> {
        Self::new(gamma, phi0, 1.0)
    }

    pub fn with_weight_exponent(self, weight_exponent: WeightExponent) -> Self {
        Self {
            weight_exponent,
            ..self
        }
    }

    pub fn with_n_pert(self, n_pert: f64) -> Self {
        Self { n_pert, ..self }
    }

    /// Peak phase shift `φ₀ = (φ₀/N_pert)·N_pert`.
    pub fn phi0(&self) -> f64 {
        self.phi0_per_photon * self.n_pert
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("waist ratio must be positive, got {}", self.gamma),
            });
        }
        if !(self.phi0_per_photon.is_finite() && self.phi0_per_photon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "phi0_per_photon",
                reason: format!("must be non-negative, got {}", self.phi0_per_photon),
            });
        }
        if !(self.n_pert.is_finite() && self.n_pert >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "n_pert",
                reason: format!("must be non-negative, got {}", self.n_pert),
            });
        }
        Ok(())
    }

    #[inline]
    fn scaled_rho2(&self, trap: &TrapConfig, rho: f64) -> f64 {
        let width = self.gamma * trap.waist();
        rho * rho / (width * width)
    }
}

/// Pulse timing of one echo sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoSequence {
    /// First light pulse to echo π-pulse.
    pub tau1: f64,
    /// Echo π-pulse to second light pulse.
    pub tau2: f64,
    /// First π/2-pulse to echo π-pulse.
    pub t1: f64,
    /// Echo π-pulse to final π/2-pulse and probe.
    pub t2: f64,
    /// Microwave detuning `Ω - Ω₀` (angular frequency).
    pub detuning: f64,
}

impl EchoSequence {
    pub fn new(tau1: f64, tau2: f64, t1: f64, t2: f64, detuning: f64) -> Result<Self> {
        let seq = Self {
            tau1,
            tau2,
            t1,
            t2,
            detuning,
        };
        seq.validate()?;
        Ok(seq)
    }

    /// Light pulses placed symmetrically around the echo, `τ₁ = τ₂ = separation/2`.
    pub fn symmetric(separation: f64, t1: f64, t2: f64, detuning: f64) -> Result<Self> {
        Self::new(0.5 * separation, 0.5 * separation, t1, t2, detuning)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.tau1, self.tau2, self.t1, self.t2, self.detuning]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidSequence("non-finite timing".into()));
        }
        if !(0.0 <= self.tau1 && self.tau1 <= self.t1) {
            return Err(Error::InvalidSequence(format!(
                "need 0 <= tau1 <= t1, got tau1={} t1={}",
                self.tau1, self.t1
            )));
        }
        if !(0.0 <= self.tau2 && self.tau2 <= self.t2) {
            return Err(Error::InvalidSequence(format!(
                "need 0 <= tau2 <= t2, got tau2={} t2={}",
                self.tau2, self.t2
            )));
        }
        Ok(())
    }

    /// Separation `τ₁ + τ₂` between the light pulses.
    pub fn separation(&self) -> f64 {
        self.tau1 + self.tau2
    }

    /// Probe time measured from the first light pulse.
    pub fn probe_time(&self) -> f64 {
        self.tau1 + self.t2
    }

    /// `[first pulse, second pulse, probe]`, ascending.
    pub fn event_times(&self) -> [f64; 3] {
        [0.0, self.separation(), self.probe_time()]
    }
}

/// Abscissa of a [`FringeTrace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    /// Delay `t₂` from echo to final π/2-pulse.
    FinalPulseTime,
    /// Light-pulse separation `τ₁ + τ₂`.
    PulseSeparation,
    /// Optical power of the trapping beam.
    Power,
}

/// Sampled `(abscissa, value)` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeTrace {
    pub axis: AxisKind,
    pub samples: Vec<(f64, f64)>,
    pub metadata: BTreeMap<String, String>,
}

impl FringeTrace {
    /// Rejects abscissas that are not strictly increasing.
    pub fn new(axis: AxisKind, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::UnsortedTimes);
        }
        Ok(Self {
            axis,
            samples,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn abscissa(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

/// Phase written at radius `rho`: `φ₀·exp(-2ρ²/γ²w₀²)`.
pub fn phase_imprint(probe: &ProbeConfig, trap: &TrapConfig, rho: f64) -> f64 {
    probe.phi0() * (-2.0 * probe.scaled_rho2(trap, rho)).exp()
}

/// Net phase after the echo: the imprint at the first pulse minus the imprint
/// at the second (the π-pulse inverts the sign of what came before).
pub fn echo_phase(probe: &ProbeConfig, trap: &TrapConfig, rho_first: f64, rho_second: f64) -> f64 {
    phase_imprint(probe, trap, rho_first) - phase_imprint(probe, trap, rho_second)
}

/// Relative contribution of an atom at radius `rho` to the probe signal.
pub fn probe_weight(probe: &ProbeConfig, trap: &TrapConfig, rho: f64) -> f64 {
    (-probe.weight_exponent.factor() * probe.scaled_rho2(trap, rho)).exp()
}

/// Stores the first-pulse imprint in each particle's phase tag.
pub fn tag_phases(particles: &mut [ParticleState], probe: &ProbeConfig, trap: &TrapConfig) {
    for p in particles {
        p.phase = phase_imprint(probe, trap, p.radius());
    }
}

/// Per-particle radii at the events of a batch of sequences.
///
/// Each particle is integrated once through the union of all event times.
#[derive(Clone, Debug)]
pub struct EventRadii {
    sequences: Vec<EchoSequence>,
    /// Row-major: particle, then sequence, then `[first, second, probe]`.
    radii: Vec<[f64; 3]>,
    particles: usize,
}

impl EventRadii {
    pub fn compute(
        particles: &[ParticleState],
        trap: &TrapConfig,
        sequences: &[EchoSequence],
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        for seq in sequences {
            seq.validate()?;
        }
        let mut times: Vec<f64> = sequences.iter().flat_map(|s| s.event_times()).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let lookup = |t: f64| {
            times
                .binary_search_by(|x| x.total_cmp(&t))
                .expect("event time in schedule")
        };
        let slots: Vec<[usize; 3]> = sequences
            .iter()
            .map(|s| s.event_times().map(lookup))
            .collect();

        let per_particle: Vec<Vec<[f64; 3]>> = particles
            .par_iter()
            .map(|p| {
                let r = radius_at_times(trap, p, &times, cfg)?;
                Ok(slots.iter().map(|idx| idx.map(|i| r[i])).collect())
            })
            .collect::<Result<_>>()?;

        Ok(Self {
            sequences: sequences.to_vec(),
            radii: per_particle.into_iter().flatten().collect(),
            particles: particles.len(),
        })
    }

    pub fn sequences(&self) -> &[EchoSequence] {
        &self.sequences
    }

    pub fn particle_count(&self) -> usize {
        self.particles
    }

    /// `[first pulse, second pulse, probe]` radii for one particle and sequence.
    pub fn radii(&self, particle: usize, sequence: usize) -> [f64; 3] {
        self.radii[particle * self.sequences.len() + sequence]
    }

    /// Fringe contrast of sequence `index`, summed in particle order.
    pub fn contrast(&self, trap: &TrapConfig, probe: &ProbeConfig, index: usize) -> Result<f64> {
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for j in 0..self.particles {
            let [r0, r1, rp] = self.radii(j, index);
            let w = probe_weight(probe, trap, rp);
            numerator += w * echo_phase(probe, trap, r0, r1).cos();
            denominator += w;
        }
        if denominator == 0.0 {
            return Err(Error::ZeroWeight);
        }
        Ok(numerator / denominator)
    }

    pub fn contrasts(&self, trap: &TrapConfig, probe: &ProbeConfig) -> Result<Vec<f64>> {
        (0..self.sequences.len())
            .map(|i| self.contrast(trap, probe, i))
            .collect()
    }
}

/// Probe-weighted ensemble average of `cos φ_f`, normalized to the
/// unperturbed fringe.
pub fn fringe_contrast(
    particles: &[ParticleState],
    trap: &TrapConfig,
    probe: &ProbeConfig,
    seq: &EchoSequence,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    probe.validate()?;
    EventRadii::compute(particles, trap, std::slice::from_ref(seq), cfg)?.contrast(trap, probe, 0)
}

/// Upper-state population `P↑ = ½[1 - A cos(δ(t₂ - t₁))]` versus `t₂`, where
/// `A` is the fringe contrast with that `t₂`.
///
/// With no light and no detuning the π/2–π–π/2 sequence returns every atom
/// to the initial state, so `P↑ = 0`.
pub fn ramsey_trace(
    particles: &[ParticleState],
    trap: &TrapConfig,
    probe: &ProbeConfig,
    template: &EchoSequence,
    t2_values: &[f64],
    cfg: &IntegratorConfig,
) -> Result<FringeTrace> {
    probe.validate()?;
    if t2_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnsortedTimes);
    }
    let sequences: Vec<EchoSequence> = t2_values
        .iter()
        .map(|&t2| {
            EchoSequence::new(
                template.tau1,
                template.tau2,
                template.t1,
                t2,
                template.detuning,
            )
        })
        .collect::<Result<_>>()?;
    let radii = EventRadii::compute(particles, trap, &sequences, cfg)?;
    let amplitudes = radii.contrasts(trap, probe)?;
    let samples = sequences
        .iter()
        .zip(amplitudes)
        .map(|(s, a)| {
            let population = 0.5 * (1.0 - a * (s.detuning * (s.t2 - s.t1)).cos());
            (s.t2, population)
        })
        .collect();
    Ok(FringeTrace::new(AxisKind::FinalPulseTime, samples)?
        .with_metadata("tau1", template.tau1)
        .with_metadata("tau2", template.tau2)
        .with_metadata("t1", template.t1)
        .with_metadata("detuning", template.detuning)
        .with_metadata("gamma", probe.gamma)
        .with_metadata("phi0", probe.phi0()))
}

/// Central-fringe contrast versus light-pulse separation with `t₁ = t₂ =
/// t_fixed` and `τ₁ = τ₂ = separation/2`.
pub fn revival_trace(
    particles: &[ParticleState],
    trap: &TrapConfig,
    probe: &ProbeConfig,
    t_fixed: f64,
    separations: &[f64],
    cfg: &IntegratorConfig,
) -> Result<FringeTrace> {
    let mut traces = revival_traces(
        particles,
        trap,
        std::slice::from_ref(probe),
        t_fixed,
        separations,
        cfg,
    )?;
    Ok(traces.remove(0))
}

/// Revival traces for several probe settings sharing one set of trajectories.
pub fn revival_traces(
    particles: &[ParticleState],
    trap: &TrapConfig,
    probes: &[ProbeConfig],
    t_fixed: f64,
    separations: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<FringeTrace>> {
    let radii = revival_radii(particles, trap, t_fixed, separations, cfg)?;
    probes
        .iter()
        .map(|probe| revival_from_radii(&radii, trap, probe, t_fixed))
        .collect()
}

/// Trajectory radii for a revival scan; reusable across probe settings.
pub fn revival_radii(
    particles: &[ParticleState],
    trap: &TrapConfig,
    t_fixed: f64,
    separations: &[f64],
    cfg: &IntegratorConfig,
) -> Result<EventRadii> {
    if separations.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnsortedTimes);
    }
    let sequences: Vec<EchoSequence> = separations
        .iter()
        .map(|&sep| {
            if sep > 2.0 * t_fixed {
                return Err(Error::InvalidSequence(format!(
                    "separation {sep} exceeds the sequence window 2*t = {}",
                    2.0 * t_fixed
                )));
            }
            EchoSequence::symmetric(sep, t_fixed, t_fixed, 0.0)
        })
        .collect::<Result<_>>()?;
    EventRadii::compute(particles, trap, &sequences, cfg)
}

/// Builds a revival trace from precomputed radii.
pub fn revival_from_radii(
    radii: &EventRadii,
    trap: &TrapConfig,
    probe: &ProbeConfig,
    t_fixed: f64,
) -> Result<FringeTrace> {
    probe.validate()?;
    let values = radii.contrasts(trap, probe)?;
    let samples = radii
        .sequences()
        .iter()
        .zip(values)
        .map(|(s, v)| (s.separation(), v))
        .collect();
    Ok(FringeTrace::new(AxisKind::PulseSeparation, samples)?
        .with_metadata("t_fixed", t_fixed)
        .with_metadata("gamma", probe.gamma)
        .with_metadata("phi0", probe.phi0())
        .with_metadata("n_pert", probe.n_pert))
}
