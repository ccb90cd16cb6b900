//! Least-squares fit of `(kT/U₀, γ, φ₀/N_pert)` to families of revival traces.
//!
//! The simulator is re-run for every parameter vector with the same sampler
//! seed, so the objective is a deterministic function of the parameters
//! (common random numbers). The search runs in coordinates normalized to the
//! bound box, where the convergence tolerance is relative to the box size.

use serde::{Deserialize, Serialize};

use super::simplex::{minimize, SimplexOptions};
use crate::dynamics::IntegratorConfig;
use crate::echo::{revival_from_radii, revival_radii, FringeTrace, ProbeConfig, WeightExponent};
use crate::error::{Error, Result};
use crate::sampler::{sample_ensemble, SamplerConfig};
use crate::trap::TrapConfig;

/// Model parameters fitted to revival data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub temperature_ratio: f64,
    pub gamma: f64,
    pub phi0_per_photon: f64,
}

impl Theta {
    pub fn new(temperature_ratio: f64, gamma: f64, phi0_per_photon: f64) -> Self {
        Self {
            temperature_ratio,
            gamma,
            phi0_per_photon,
        }
    }

    fn to_array(self) -> [f64; 3] {
        [self.temperature_ratio, self.gamma, self.phi0_per_photon]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub lower: Theta,
    pub upper: Theta,
}

impl FitBounds {
    fn validate(&self) -> Result<()> {
        let finite = self
            .lower
            .to_array()
            .iter()
            .chain(self.upper.to_array().iter())
            .all(|v| v.is_finite());
        let ordered = self
            .lower
            .to_array()
            .iter()
            .zip(self.upper.to_array())
            .all(|(lo, hi)| *lo < hi);
        if !(finite && ordered) {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: "bounds must be finite with lower < upper".into(),
            });
        }
        if self.lower.temperature_ratio <= 0.0
            || self.lower.gamma <= 0.0
            || self.lower.phi0_per_photon < 0.0
        {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: "kT/U0 and gamma must stay positive, phi0 non-negative".into(),
            });
        }
        Ok(())
    }

    fn normalize(&self, theta: Theta) -> [f64; 3] {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        let t = theta.to_array();
        [0, 1, 2].map(|i| (t[i] - lo[i]) / (hi[i] - lo[i]))
    }

    fn denormalize(&self, u: &[f64]) -> Theta {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        Theta::from_slice(&[0, 1, 2].map(|i| lo[i] + u[i] * (hi[i] - lo[i])))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub start: Theta,
    pub bounds: FitBounds,
    /// Maximum number of simulator runs.
    pub budget: usize,
    /// Simplex diameter, relative to the bound box, at which to stop.
    pub tolerance: f64,
    /// Initial simplex edge, relative to the bound box.
    pub initial_step: f64,
}

impl FitOptions {
    pub fn new(start: Theta, bounds: FitBounds, budget: usize) -> Self {
        Self {
            start,
            bounds,
            budget,
            tolerance: 1e-3,
            initial_step: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: Theta,
    /// Sum of squared differences over every trace and sample.
    pub residual: f64,
    pub per_trace_residuals: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Produces one revival trace per perturbing-photon number for a parameter
/// vector.
pub trait RevivalSimulator {
    fn simulate(&self, theta: &Theta) -> Result<Vec<FringeTrace>>;
}

impl<F> RevivalSimulator for F
where
    F: Fn(&Theta) -> Result<Vec<FringeTrace>>,
{
    fn simulate(&self, theta: &Theta) -> Result<Vec<FringeTrace>> {
        self(theta)
    }
}

/// Monte Carlo simulator of a revival-trace family.
#[derive(Clone, Debug, PartialEq)]
pub struct RevivalModel {
    pub trap: TrapConfig,
    /// Sampler settings; `temperature_ratio` is overridden by the fit.
    pub sampler: SamplerConfig,
    pub integrator: IntegratorConfig,
    /// `t₁ = t₂` held fixed during the scan.
    pub t_fixed: f64,
    pub separations: Vec<f64>,
    pub n_pert: Vec<f64>,
    pub weight_exponent: WeightExponent,
}

impl RevivalSimulator for RevivalModel {
    fn simulate(&self, theta: &Theta) -> Result<Vec<FringeTrace>> {
        let sampler = SamplerConfig {
            temperature_ratio: theta.temperature_ratio,
            ..self.sampler.clone()
        };
        let ensemble = sample_ensemble(&self.trap, &sampler)?;
        let radii = revival_radii(
            &ensemble.particles,
            &self.trap,
            self.t_fixed,
            &self.separations,
            &self.integrator,
        )?;
        self.n_pert
            .iter()
            .map(|&n| {
                let probe = ProbeConfig::new(theta.gamma, theta.phi0_per_photon, n)?
                    .with_weight_exponent(self.weight_exponent);
                revival_from_radii(&radii, &self.trap, &probe, self.t_fixed)
            })
            .collect()
    }
}

fn same_grid(a: &FringeTrace, b: &FringeTrace) -> bool {
    a.len() == b.len()
        && a.samples
            .iter()
            .zip(&b.samples)
            .all(|(x, y)| (x.0 - y.0).abs() <= 1e-9 * x.0.abs().max(y.0.abs()).max(1e-300))
}

fn residuals(simulated: &[FringeTrace], reference: &[FringeTrace]) -> Result<Vec<f64>> {
    if simulated.len() != reference.len() {
        return Err(Error::MismatchedTraces(format!(
            "simulator returned {} traces for {} references",
            simulated.len(),
            reference.len()
        )));
    }
    simulated
        .iter()
        .zip(reference)
        .map(|(s, r)| {
            if !same_grid(s, r) {
                return Err(Error::MismatchedTraces(
                    "simulated and reference grids differ".into(),
                ));
            }
            Ok(s.samples
                .iter()
                .zip(&r.samples)
                .map(|(a, b)| (a.1 - b.1).powi(2))
                .sum())
        })
        .collect()
}

/// Minimizes the summed squared difference between simulated and reference
/// traces over `θ`. Running out of budget is reported through
/// `converged = false`, not as an error.
pub fn fit_parameters<S: RevivalSimulator + ?Sized>(
    reference: &[FringeTrace],
    simulator: &S,
    options: &FitOptions,
) -> Result<FitResult> {
    if reference.is_empty() {
        return Err(Error::MismatchedTraces("no reference traces".into()));
    }
    if reference.iter().any(|r| !same_grid(r, &reference[0])) {
        return Err(Error::MismatchedTraces(
            "reference traces do not share an abscissa grid".into(),
        ));
    }
    if options.budget < 50 {
        return Err(Error::InvalidParameter {
            name: "budget",
            reason: format!("need at least 50 evaluations, got {}", options.budget),
        });
    }
    options.bounds.validate()?;
    let bounds = options.bounds;

    let objective = |u: &[f64]| -> Result<f64> {
        let sim = simulator.simulate(&bounds.denormalize(u))?;
        Ok(residuals(&sim, reference)?.iter().sum())
    };
    let simplex = SimplexOptions {
        initial_step: vec![options.initial_step; 3],
        lower: vec![0.0; 3],
        upper: vec![1.0; 3],
        max_evaluations: options.budget,
        x_tolerance: options.tolerance,
    };
    let outcome = minimize(objective, &bounds.normalize(options.start), &simplex)?;
    let theta = bounds.denormalize(&outcome.x);
    let per_trace_residuals = residuals(&simulator.simulate(&theta)?, reference)?;

    Ok(FitResult {
        theta,
        residual: outcome.value,
        per_trace_residuals,
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        converged: outcome.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::AxisKind;

    fn bounds() -> FitBounds {
        FitBounds {
            lower: Theta::new(0.1, 0.2, 0.0),
            upper: Theta::new(3.0, 1.5, 2.0e-6),
        }
    }

    /// Cheap analytic stand-in for the Monte Carlo simulator.
    fn toy(theta: &Theta) -> Result<Vec<FringeTrace>> {
        [1.0e6, 2.0e6]
            .iter()
            .map(|&n| {
                let phi = theta.phi0_per_photon * n;
                let samples = (0..20)
                    .map(|i| {
                        let t = i as f64 * 0.1;
                        let v = 1.0
                            - phi
                                * phi
                                * theta.gamma
                                * (1.0 - (-t * theta.temperature_ratio).exp())
                                * (0.5 + 0.5 * (3.0 * t).cos().powi(2));
                        (t, v)
                    })
                    .collect();
                FringeTrace::new(AxisKind::PulseSeparation, samples)
            })
            .collect()
    }

    #[test]
    fn recovers_toy_parameters() {
        let truth = Theta::new(1.0, 0.6, 5.0e-7);
        let reference = toy(&truth).unwrap();
        let opts = FitOptions::new(Theta::new(0.5, 0.45, 2.0e-7), bounds(), 400);
        let fit = fit_parameters(&reference, &toy, &opts).unwrap();
        assert!(fit.residual <= toy_residual(&fit.theta, &reference) + 1e-15);
        assert!((fit.theta.temperature_ratio / truth.temperature_ratio - 1.0).abs() < 0.1);
        assert_eq!(fit.per_trace_residuals.len(), 2);
    }

    fn toy_residual(theta: &Theta, reference: &[FringeTrace]) -> f64 {
        residuals(&toy(theta).unwrap(), reference)
            .unwrap()
            .iter()
            .sum()
    }

    #[test]
    fn zero_signal_drives_phase_to_zero() {
        let reference: Vec<FringeTrace> = (0..2)
            .map(|_| {
                FringeTrace::new(
                    AxisKind::PulseSeparation,
                    (0..20).map(|i| (i as f64 * 0.1, 1.0)).collect(),
                )
                .unwrap()
            })
            .collect();
        let opts = FitOptions::new(Theta::new(0.5, 0.45, 8.0e-7), bounds(), 300);
        let fit = fit_parameters(&reference, &toy, &opts).unwrap();
        assert!(
            fit.theta.phi0_per_photon < 0.02 * bounds().upper.phi0_per_photon,
            "{fit:?}"
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let reference = toy(&Theta::new(1.0, 0.6, 5e-7)).unwrap();
        let opts = FitOptions::new(Theta::new(0.5, 0.45, 2.0e-7), bounds(), 10);
        assert!(fit_parameters(&reference, &toy, &opts).is_err());

        let mut shifted = reference.clone();
        shifted[1].samples[3].0 += 0.01;
        let opts = FitOptions::new(Theta::new(0.5, 0.45, 2.0e-7), bounds(), 100);
        assert!(matches!(
            fit_parameters(&shifted, &toy, &opts),
            Err(Error::MismatchedTraces(_))
        ));

        let wrong_count = |t: &Theta| {
            toy(t).map(|mut v| {
                v.pop();
                v
            })
        };
        assert!(matches!(
            fit_parameters(&reference, &wrong_count, &opts),
            Err(Error::MismatchedTraces(_))
        ));
    }

    #[test]
    fn deterministic() {
        let reference = toy(&Theta::new(1.2, 0.7, 4e-7)).unwrap();
        let opts = FitOptions::new(Theta::new(0.5, 0.45, 2.0e-7), bounds(), 150);
        let a = fit_parameters(&reference, &toy, &opts).unwrap();
        let b = fit_parameters(&reference, &toy, &opts).unwrap();
        assert_eq!(a, b);
    }
}
