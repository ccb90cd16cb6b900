use std::f64::consts::TAU;

use crate::echo::FringeTrace;
use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 16;
const MIN_PERIODS: f64 = 1.5;

/// Dominant oscillation frequency of a uniformly sampled trace, in cycles per
/// abscissa unit.
///
/// The mean is removed, a Hann taper applied, and the magnitude spectrum
/// evaluated on a zero-padded grid. The largest spectral peak away from zero
/// frequency is then refined by fitting a parabola through it and its two
/// neighbours.
pub fn extract_revival_frequency(trace: &FringeTrace) -> Result<f64> {
    let n = trace.len();
    if n < MIN_SAMPLES {
        return Err(Error::TraceTooShort(format!(
            "{n} samples, need at least {MIN_SAMPLES}"
        )));
    }
    let x = trace.abscissa();
    let span = x[n - 1] - x[0];
    let step = span / (n - 1) as f64;
    if x.windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step)
    {
        return Err(Error::TraceTooShort(
            "abscissa must be uniformly spaced".into(),
        ));
    }
    let frequency = spectrum_peak(&trace.values(), step)?;
    if frequency * span < MIN_PERIODS {
        return Err(Error::TraceTooShort(format!(
            "trace spans {:.2} periods, need at least {MIN_PERIODS}",
            frequency * span
        )));
    }
    Ok(frequency)
}

/// Peak frequency of `values` sampled every `step`.
pub fn spectrum_peak(values: &[f64], step: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TraceTooShort(format!("{n} samples")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let scale = values
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let detrended: Vec<f64> = values.iter().map(|v| v - mean).collect();
    if detrended.iter().all(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::NoOscillation);
    }
    let tapered: Vec<f64> = detrended
        .iter()
        .enumerate()
        .map(|(i, d)| d * 0.5 * (1.0 - (TAU * i as f64 / (n - 1) as f64).cos()))
        .collect();

    let padded = (8 * n).max(4096);
    let bins = padded / 2 + 1;
    let spectrum: Vec<f64> = (0..bins)
        .map(|k| {
            let omega = TAU * k as f64 / padded as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in tapered.iter().enumerate() {
                let (s, c) = (omega * i as f64).sin_cos();
                re += v * c;
                im -= v * s;
            }
            (re * re + im * im).sqrt()
        })
        .collect();

    // largest local maximum above the zero-frequency bin
    let peak = (1..bins - 1)
        .filter(|&k| spectrum[k] >= spectrum[k - 1] && spectrum[k] > spectrum[k + 1])
        .filter(|&k| spectrum[k] > spectrum[0])
        .max_by(|&a, &b| spectrum[a].total_cmp(&spectrum[b]))
        .ok_or(Error::NoOscillation)?;

    let (a, b, c) = (spectrum[peak - 1], spectrum[peak], spectrum[peak + 1]);
    let curvature = a - 2.0 * b + c;
    let offset = if curvature != 0.0 {
        0.5 * (a - c) / curvature
    } else {
        0.0
    };
    Ok((peak as f64 + offset) / (padded as f64 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::AxisKind;
    use proptest::prelude::*;

    fn trace(values: impl Fn(f64) -> f64, n: usize, span: f64) -> FringeTrace {
        let samples = (0..n)
            .map(|i| {
                let t = span * i as f64 / (n - 1) as f64;
                (t, values(t))
            })
            .collect();
        FringeTrace::new(AxisKind::PulseSeparation, samples).unwrap()
    }

    #[test]
    fn synthetic_cosine() {
        let f0 = 2.7;
        let tr = trace(|t| (TAU * f0 * t).cos(), 50, 3.0 / f0);
        let f = extract_revival_frequency(&tr).unwrap();
        assert!((f / f0 - 1.0).abs() < 0.01, "f = {f}");
    }

    #[test]
    fn damped_oscillation() {
        let f0 = 1.3;
        let tr = trace(
            |t| 0.6 + 0.3 * (-0.3 * t).exp() * (TAU * f0 * t).cos(),
            120,
            6.0,
        );
        let f = extract_revival_frequency(&tr).unwrap();
        assert!((f / f0 - 1.0).abs() < 0.01, "f = {f}");
    }

    #[test]
    fn constant_trace_has_no_oscillation() {
        let tr = trace(|_| 0.7, 40, 1.0);
        assert!(matches!(
            extract_revival_frequency(&tr),
            Err(Error::NoOscillation)
        ));
    }

    #[test]
    fn short_traces_rejected() {
        let tr = trace(|t| (TAU * t).cos(), 10, 5.0);
        assert!(matches!(
            extract_revival_frequency(&tr),
            Err(Error::TraceTooShort(_))
        ));
        // under one period
        let tr = trace(|t| (TAU * 0.5 * t).cos(), 40, 1.0);
        assert!(extract_revival_frequency(&tr).is_err());
    }

    #[test]
    fn non_uniform_rejected() {
        let samples = (0..20)
            .map(|i| ((i * i) as f64, (i as f64).cos()))
            .collect();
        let tr = FringeTrace::new(AxisKind::PulseSeparation, samples).unwrap();
        assert!(extract_revival_frequency(&tr).is_err());
    }

    proptest! {
        #[test]
        fn affine_invariance(scale in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], offset in -3.0f64..3.0) {
            let f0 = 1.9;
            let base = |t: f64| 0.8 + 0.2 * (-0.2 * t).exp() * (TAU * f0 * t + 0.3).cos();
            let reference = extract_revival_frequency(&trace(base, 80, 4.0)).unwrap();
            let moved = extract_revival_frequency(&trace(|t| scale * base(t) + offset, 80, 4.0)).unwrap();
            prop_assert!((moved - reference).abs() <= 1e-9 * reference);
        }
    }
}
