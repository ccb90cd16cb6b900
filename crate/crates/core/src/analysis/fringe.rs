use std::f64::consts::PI;

use crate::echo::FringeTrace;
use crate::error::{Error, Result};

/// Contrast of the central Ramsey fringe of a population trace.
///
/// Fits `a·cos(δ(t₂-t₁)) + b·sin(δ(t₂-t₁)) + c` by linear least squares over
/// one detuning period centred on `t₂ = t₁` and returns `2·sqrt(a² + b²)`,
/// the peak-to-peak population swing, which equals the fringe contrast of the
/// generating model. When `reference` is given (the same scan without light),
/// the result is divided by the reference contrast.
pub fn central_fringe_amplitude(
    trace: &FringeTrace,
    t1: f64,
    detuning: f64,
    reference: Option<&FringeTrace>,
) -> Result<f64> {
    let amplitude = fringe_window_fit(trace, t1, detuning)?;
    match reference {
        None => Ok(amplitude),
        Some(r) => {
            let norm = fringe_window_fit(r, t1, detuning)?;
            if norm == 0.0 {
                return Err(Error::ZeroWeight);
            }
            Ok(amplitude / norm)
        }
    }
}

fn fringe_window_fit(trace: &FringeTrace, t1: f64, detuning: f64) -> Result<f64> {
    if !(detuning.is_finite() && detuning != 0.0) {
        return Err(Error::InvalidParameter {
            name: "detuning",
            reason: "a non-zero detuning is needed to resolve fringes".into(),
        });
    }
    let half = PI / detuning.abs();
    let (lo, hi) = (t1 - half, t1 + half);
    let x = trace.abscissa();
    let slack = 1e-9 * half;
    let (Some(&first), Some(&last)) = (x.first(), x.last()) else {
        return Err(Error::WindowOutOfRange("empty trace".into()));
    };
    if first > lo + slack || last < hi - slack {
        return Err(Error::WindowOutOfRange(format!(
            "trace covers [{first}, {last}], fit needs [{lo}, {hi}]"
        )));
    }
    let window: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo - slack && t <= hi + slack)
        .collect();
    if window.len() < 4 {
        return Err(Error::WindowOutOfRange(format!(
            "only {} samples inside the fit window",
            window.len()
        )));
    }

    // normal equations for the basis [cos, sin, 1]
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for &(t, y) in &window {
        let (s, c) = (detuning * (t - t1)).sin_cos();
        let row = [c, s, 1.0];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let [a, b, _] = solve3(ata, aty)
        .ok_or_else(|| Error::WindowOutOfRange("samples do not resolve the fringe".into()))?;
    Ok(2.0 * a.hypot(b))
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - tail) / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::AxisKind;

    fn population(amplitude: f64, offset: f64, detuning: f64, t1: f64) -> FringeTrace {
        let samples = (0..200)
            .map(|i| {
                let t = 0.5 + 2.0 * i as f64 / 199.0;
                (
                    t,
                    offset + 0.5 * (1.0 - amplitude * (detuning * (t - t1)).cos()),
                )
            })
            .collect();
        FringeTrace::new(AxisKind::FinalPulseTime, samples).unwrap()
    }

    #[test]
    fn recovers_known_contrast() {
        let d = std::f64::consts::TAU * 3.0;
        let a = central_fringe_amplitude(&population(0.63, 0.0, d, 1.5), 1.5, d, None).unwrap();
        assert!((a - 0.63).abs() < 1e-12);
    }

    #[test]
    fn offset_invariant() {
        let d = std::f64::consts::TAU * 3.0;
        let a = central_fringe_amplitude(&population(0.4, 0.0, d, 1.5), 1.5, d, None).unwrap();
        let b = central_fringe_amplitude(&population(0.4, 0.37, d, 1.5), 1.5, d, None).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn flat_trace_is_zero() {
        let d = std::f64::consts::TAU * 3.0;
        let flat = population(0.0, 0.0, d, 1.5);
        assert!(central_fringe_amplitude(&flat, 1.5, d, None).unwrap() < 1e-12);
    }

    #[test]
    fn normalization() {
        let d = std::f64::consts::TAU * 3.0;
        let light = population(0.3, 0.0, d, 1.5);
        let dark = population(0.6, 0.0, d, 1.5);
        let r = central_fringe_amplitude(&light, 1.5, d, Some(&dark)).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn window_must_fit() {
        let d = std::f64::consts::TAU * 3.0;
        let tr = population(0.5, 0.0, d, 1.5);
        assert!(matches!(
            central_fringe_amplitude(&tr, 0.55, d, None),
            Err(Error::WindowOutOfRange(_))
        ));
        assert!(central_fringe_amplitude(&tr, 1.5, 0.0, None).is_err());
    }
}
