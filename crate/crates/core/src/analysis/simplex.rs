//! Nelder–Mead simplex minimization inside a box.
//!
//! Trial points are clamped onto the box before evaluation. Evaluation
//! errors abort the search and are passed through.

use crate::error::{Error, Result};

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Maximum number of objective evaluations.
    pub max_evaluations: usize,
    /// Convergence when every vertex lies within this distance of the best.
    pub x_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOutcome {
    /// Best point seen over the whole run.
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
    budget: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counted<F> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.evaluations >= self.budget {
            return Ok(None);
        }
        self.evaluations += 1;
        let v = (self.f)(x)?;
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        Ok(Some(v))
    }
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(best)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn minimize<F>(f: F, x0: &[f64], options: &SimplexOptions) -> Result<SimplexOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    if n == 0
        || options.initial_step.len() != n
        || options.lower.len() != n
        || options.upper.len() != n
    {
        return Err(Error::InvalidParameter {
            name: "simplex",
            reason: "dimension mismatch between start point, steps and bounds".into(),
        });
    }
    if options
        .lower
        .iter()
        .zip(&options.upper)
        .any(|(lo, hi)| !(lo < hi))
    {
        return Err(Error::InvalidParameter {
            name: "simplex",
            reason: "each lower bound must be below its upper bound".into(),
        });
    }
    let mut obj = Counted {
        f,
        evaluations: 0,
        budget: options.max_evaluations,
        best: None,
    };

    let mut start = x0.to_vec();
    clamp(&mut start, &options.lower, &options.upper);
    let mut simplex = vec![start.clone()];
    for i in 0..n {
        let mut v = start.clone();
        let step = options.initial_step[i];
        v[i] = if v[i] + step <= options.upper[i] {
            v[i] + step
        } else {
            v[i] - step
        };
        clamp(&mut v, &options.lower, &options.upper);
        simplex.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &simplex {
        match obj.eval(v)? {
            Some(fv) => values.push(fv),
            None => return Ok(finish(obj, 0, false)),
        }
    }

    let mut iterations = 0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < options.x_tolerance {
            return Ok(finish(obj, iterations, true));
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut p, &options.lower, &options.upper);
            p
        };

        let reflected = along(REFLECTION);
        let Some(f_r) = obj.eval(&reflected)? else {
            break;
        };

        if f_r < values[0] {
            let expanded = along(REFLECTION * EXPANSION);
            let Some(f_e) = obj.eval(&expanded)? else {
                break;
            };
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }

        let (contracted, limit) = if f_r < values[n] {
            (along(REFLECTION * CONTRACTION), f_r)
        } else {
            (along(-CONTRACTION), values[n])
        };
        let Some(f_c) = obj.eval(&contracted)? else {
            break;
        };
        if f_c < limit {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }

        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + SHRINK * (*x - b);
            }
            match obj.eval(&simplex[i])? {
                Some(v) => values[i] = v,
                None => return Ok(finish(obj, iterations, false)),
            }
        }
    }
    Ok(finish(obj, iterations, false))
}

fn finish<F>(obj: Counted<F>, iterations: usize, converged: bool) -> SimplexOutcome {
    let (x, value) = obj.best.unwrap_or_default();
    SimplexOutcome {
        x,
        value,
        iterations,
        evaluations: obj.evaluations,
        converged,
    }
}
