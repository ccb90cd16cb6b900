use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative RMS misfit below which the constrained `f = c·√P` model is
/// considered consistent with the data.
pub const SQRT_CONSISTENCY_TOLERANCE: f64 = 0.05;

/// Power-law fit of revival frequency against trap power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerScanResult {
    /// `(power, revival frequency)` pairs as supplied.
    pub points: Vec<(f64, f64)>,
    /// Prefactor `c` of the free fit `f = c·P^β`.
    pub coefficient: f64,
    pub exponent: f64,
    /// Standard error of `β`; undefined for two points.
    pub exponent_stderr: Option<f64>,
    /// Prefactor of the constrained fit `f = c·√P`.
    pub sqrt_coefficient: f64,
    /// Sum of squared residuals of the constrained fit.
    pub sqrt_residual: f64,
    /// Relative RMS misfit of the constrained fit.
    pub sqrt_relative_rms: f64,
    pub sqrt_consistent: bool,
}

/// Fits `log f = log c + β log P` by ordinary least squares and, separately,
/// the one-parameter model `f = c·√P`.
///
/// At least two points are needed for the slope; the standard error of `β`
/// needs three.
pub fn fit_sqrt_scaling(points: &[(f64, f64)]) -> Result<PowerScanResult> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: format!(
                "need at least 2 (power, frequency) pairs, got {}",
                points.len()
            ),
        });
    }
    if points
        .iter()
        .any(|&(p, f)| !(p.is_finite() && p > 0.0 && f.is_finite() && f > 0.0))
    {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: "powers and frequencies must be positive".into(),
        });
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: "powers must be distinct".into(),
        });
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let exponent_stderr = (points.len() > 2).then(|| {
        let ssr: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(x, y)| (y - intercept - exponent * x).powi(2))
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    });

    let sqrt_coefficient = points.iter().map(|&(p, f)| f * p.sqrt()).sum::<f64>()
        / points.iter().map(|&(p, _)| p).sum::<f64>();
    let sqrt_residual = points
        .iter()
        .map(|&(p, f)| (f - sqrt_coefficient * p.sqrt()).powi(2))
        .sum();
    let sqrt_relative_rms = (points
        .iter()
        .map(|&(p, f)| ((f - sqrt_coefficient * p.sqrt()) / f).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    Ok(PowerScanResult {
        points: points.to_vec(),
        coefficient: intercept.exp(),
        exponent,
        exponent_stderr,
        sqrt_coefficient,
        sqrt_residual,
        sqrt_relative_rms,
        sqrt_consistent: sqrt_relative_rms <= SQRT_CONSISTENCY_TOLERANCE,
    })
}
