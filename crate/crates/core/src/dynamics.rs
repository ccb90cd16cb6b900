//! Velocity-Verlet integration of single-atom trajectories in the trap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trap::{ParticleState, TrapConfig};

/// Default step as a fraction of the small-amplitude trap period.
pub const DEFAULT_PERIOD_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    VelocityVerlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("step must be positive, got {dt}"),
            });
        }
        Ok(Self {
            dt,
            scheme: Scheme::VelocityVerlet,
        })
    }

    /// `dt = T/1000` for the given trap.
    pub fn for_trap(trap: &TrapConfig) -> Self {
        Self {
            dt: trap.period() * DEFAULT_PERIOD_FRACTION,
            scheme: Scheme::VelocityVerlet,
        }
    }

    pub fn with_period_fraction(trap: &TrapConfig, fraction: f64) -> Result<Self> {
        Self::new(trap.period() * fraction)
    }
}

/// One velocity-Verlet step: half kick, drift, half kick. The phase tag is
/// carried through unchanged.
pub fn verlet_step(trap: &TrapConfig, p: &ParticleState, dt: f64) -> ParticleState {
    let mut out = *p;
    let force = trap.force(p.x, p.y);
    kick_drift_kick(trap, &mut out, force, dt);
    out
}

/// Advances `p` in place given the force at its current position; returns the
/// force at the new position.
#[inline]
fn kick_drift_kick(trap: &TrapConfig, p: &mut ParticleState, force: [f64; 2], dt: f64) -> [f64; 2] {
    let half = 0.5 * dt;
    p.px += half * force[0];
    p.py += half * force[1];
    let inv_m = 1.0 / trap.mass();
    p.x += dt * p.px * inv_m;
    p.y += dt * p.py * inv_m;
    let next = trap.force(p.x, p.y);
    p.px += half * next[0];
    p.py += half * next[1];
    next
}

/// Number of steps and the length of the final step needed to cover
/// `duration` exactly.
fn step_plan(duration: f64, dt: f64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let n = ((duration / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let last = duration - (n - 1) as f64 * dt;
    (n, last)
}

/// A particle moving along its trajectory, with a running step count.
///
/// The force at the current position is cached between steps, so each step
/// costs a single force evaluation.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    trap: &'a TrapConfig,
    dt: f64,
    state: ParticleState,
    force: [f64; 2],
    time: f64,
    steps: u64,
}

impl<'a> Trajectory<'a> {
    pub fn new(trap: &'a TrapConfig, start: ParticleState, cfg: &IntegratorConfig) -> Self {
        Self {
            trap,
            dt: cfg.dt,
            state: start,
            force: trap.force(start.x, start.y),
            time: 0.0,
            steps: 0,
        }
    }

    pub fn state(&self) -> &ParticleState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Integrates forward until the elapsed time equals `t`. The last step is
    /// shortened so `t` is hit exactly.
    pub fn advance_to(&mut self, t: f64) -> Result<&ParticleState> {
        if t < self.time || t.is_nan() {
            return Err(Error::UnsortedTimes);
        }
        let (n, last) = step_plan(t - self.time, self.dt);
        for i in 0..n {
            let h = if i + 1 == n { last } else { self.dt };
            self.force = kick_drift_kick(self.trap, &mut self.state, self.force, h);
        }
        self.steps += n as u64;
        self.time = t;
        Ok(&self.state)
    }
}

/// State after `duration`, using `⌈duration/dt⌉` steps.
pub fn propagate(
    trap: &TrapConfig,
    p: &ParticleState,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<ParticleState> {
    if duration < 0.0 || duration.is_nan() {
        return Err(Error::InvalidParameter {
            name: "duration",
            reason: format!("must be non-negative, got {duration}"),
        });
    }
    let mut traj = Trajectory::new(trap, *p, cfg);
    traj.advance_to(duration).copied()
}

/// Radius at each of the ascending `times`, from a single pass along the
/// trajectory.
pub fn radius_at_times(
    trap: &TrapConfig,
    p: &ParticleState,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    radius_at_times_counted(trap, p, times, cfg).map(|(r, _)| r)
}

/// Like [`radius_at_times`], also returning the number of integration steps.
pub fn radius_at_times_counted(
    trap: &TrapConfig,
    p: &ParticleState,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, u64)> {
    if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }
    let mut traj = Trajectory::new(trap, *p, cfg);
    let mut radii = Vec::with_capacity(times.len());
    for &t in times {
        radii.push(traj.advance_to(t)?.radius());
    }
    Ok((radii, traj.steps()))
}

/// One row of a trajectory dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
    pub energy: f64,
    pub angular_momentum: f64,
}

/// Records the state every `stride` steps over `duration`, including both
/// end points.
pub fn record_trajectory(
    trap: &TrapConfig,
    p: &ParticleState,
    duration: f64,
    stride: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectoryPoint>> {
    let stride = stride.max(1);
    let interval = cfg.dt * stride as f64;
    let mut traj = Trajectory::new(trap, *p, cfg);
    let point = |traj: &Trajectory| {
        let s = traj.state();
        TrajectoryPoint {
            t: traj.time(),
            x: s.x,
            y: s.y,
            px: s.px,
            py: s.py,
            energy: trap.total_energy(s),
            angular_momentum: s.angular_momentum(),
        }
    };
    let mut out = vec![point(&traj)];
    let mut k = 1u64;
    loop {
        let t = (k as f64 * interval).min(duration);
        traj.advance_to(t)?;
        out.push(point(&traj));
        if t >= duration {
            break;
        }
        k += 1;
    }
    Ok(out)
}
