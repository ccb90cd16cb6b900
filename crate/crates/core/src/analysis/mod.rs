//! Revival-frequency extraction, power-law scaling and model fitting.

mod fit;
mod frequency;
mod fringe;
mod scaling;
pub mod simplex;

pub use fit::{
    fit_parameters, FitBounds, FitOptions, FitResult, RevivalModel, RevivalSimulator, Theta,
};
pub use frequency::{extract_revival_frequency, spectrum_peak};
pub use fringe::central_fringe_amplitude;
pub use scaling::{fit_sqrt_scaling, PowerScanResult, SQRT_CONSISTENCY_TOLERANCE};
