//! Monte Carlo model of Ramsey-fringe collapse and revival in echo
//! spectroscopy of atoms moving in a Gaussian optical dipole trap.
//!
//! The pipeline runs
//! [`sample_ensemble`] → [`EventRadii`] (velocity-Verlet trajectories) →
//! [`fringe_contrast`] / [`revival_trace`] / [`ramsey_trace`] → the fitting
//! and frequency tools in [`analysis`].

pub mod analysis;
pub mod dynamics;
pub mod echo;
mod error;
pub mod sampler;
pub mod trap;

pub use analysis::{
    central_fringe_amplitude, extract_revival_frequency, fit_parameters, fit_sqrt_scaling,
    FitBounds, FitOptions, FitResult, PowerScanResult, RevivalModel, RevivalSimulator, Theta,
};
pub use dynamics::{propagate, radius_at_times, verlet_step, IntegratorConfig, Scheme, Trajectory};
pub use echo::{
    echo_phase, fringe_contrast, phase_imprint, probe_weight, ramsey_trace, revival_from_radii,
    revival_radii, revival_trace, revival_traces, AxisKind, EchoSequence, EventRadii, FringeTrace,
    ProbeConfig, WeightExponent,
};
pub use error::{Error, Result};
pub use sampler::{
    radial_pdf, sample_ensemble, sample_momenta, sample_radius, Ensemble, SamplerConfig,
};
pub use trap::{ParticleState, PotentialKind, TrapConfig, UnitSystem};
