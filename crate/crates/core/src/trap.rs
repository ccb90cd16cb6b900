//! Trap geometry, particle state and the Gaussian confinement potential.
//!
//! Everything in this crate works in whatever consistent unit system the
//! caller picks. The command-line front end uses natural units where the trap
//! waist, the reference trap depth and the particle mass are all 1, so the
//! small-amplitude angular frequency of the default trap is exactly 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the radial confinement potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `V(ρ) = -U₀ exp(-2ρ²/w₀²)`.
    Gaussian,
    /// Second-order Taylor expansion of the Gaussian about the trap centre,
    /// `V(ρ) = -U₀ + 2U₀ρ²/w₀²`. Isochronous, so revivals are perfect.
    HarmonicApproximation,
}

/// A radially symmetric optical dipole trap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    depth: f64,
    waist: f64,
    mass: f64,
    kind: PotentialKind,
}

impl TrapConfig {
    pub fn new(depth: f64, waist: f64, mass: f64, kind: PotentialKind) -> Result<Self> {
        for (name, value) in [("depth", depth), ("waist", waist), ("mass", mass)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        Ok(Self {
            depth,
            waist,
            mass,
            kind,
        })
    }

    /// Gaussian trap with unit depth, waist and mass.
    pub fn natural() -> Self {
        Self {
            depth: 1.0,
            waist: 1.0,
            mass: 1.0,
            kind: PotentialKind::Gaussian,
        }
    }

    /// Same trap with a different potential shape.
    pub fn with_kind(self, kind: PotentialKind) -> Self {
        Self { kind, ..self }
    }

    /// Same trap with a different depth; rejects non-positive depths.
    pub fn with_depth(self, depth: f64) -> Result<Self> {
        Self::new(depth, self.waist, self.mass, self.kind)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    /// Small-amplitude radial angular frequency `sqrt(4U₀/(m w₀²))`.
    ///
    /// Identical for both potential kinds since they share the curvature at
    /// the origin.
    pub fn harmonic_frequency(&self) -> f64 {
        (4.0 * self.depth / (self.mass * self.waist * self.waist)).sqrt()
    }

    /// Small-amplitude oscillation period `2π/ω`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.harmonic_frequency()
    }

    /// Potential energy at radius `rho`.
    pub fn potential(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 || rho.is_nan() {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("radius must be non-negative, got {rho}"),
            });
        }
        Ok(self.potential_rho2(rho * rho))
    }

    /// Potential as a function of the squared radius; infallible.
    #[inline]
    pub fn potential_rho2(&self, rho2: f64) -> f64 {
        let s = rho2 / (self.waist * self.waist);
        match self.kind {
            PotentialKind::Gaussian => -self.depth * (-2.0 * s).exp(),
            PotentialKind::HarmonicApproximation => -self.depth + 2.0 * self.depth * s,
        }
    }

    /// Force `-∇V` at the Cartesian point `(x, y)`.
    #[inline]
    pub fn force(&self, x: f64, y: f64) -> [f64; 2] {
        let w2 = self.waist * self.waist;
        let k = 4.0 * self.depth / w2;
        let scale = match self.kind {
            PotentialKind::Gaussian => k * (-2.0 * (x * x + y * y) / w2).exp(),
            PotentialKind::HarmonicApproximation => k,
        };
        [-scale * x, -scale * y]
    }

    pub fn kinetic_energy(&self, p: &ParticleState) -> f64 {
        (p.px * p.px + p.py * p.py) / (2.0 * self.mass)
    }

    pub fn total_energy(&self, p: &ParticleState) -> f64 {
        self.kinetic_energy(p) + self.potential_rho2(p.x * p.x + p.y * p.y)
    }

    /// Whether the particle lies strictly inside the separatrix (`E < 0`).
    /// The measure-zero set `E = 0` is classified as unbound.
    pub fn is_bound(&self, p: &ParticleState) -> bool {
        self.total_energy(p) < 0.0
    }
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self::natural()
    }
}

/// Position and momentum of one atom in the radial plane, plus its imprint
/// phase tag.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
    /// Phase written by the first perturbing light pulse.
    pub phase: f64,
}

impl ParticleState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self {
            x,
            y,
            px,
            py,
            phase: 0.0,
        }
    }

    /// Builds a Cartesian state from canonical polar coordinates
    /// `(ρ, θ, p_ρ, p_θ)`. The angular momentum `x·py - y·px` equals `p_theta`.
    ///
    /// At `ρ = 0` the tangential velocity is undefined; it is taken as zero,
    /// which is the only value consistent with `p_θ = 0` there.
    pub fn from_polar(rho: f64, theta: f64, p_rho: f64, p_theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        let v_tangential = if rho > 0.0 { p_theta / rho } else { 0.0 };
        Self::new(
            rho * cos,
            rho * sin,
            p_rho * cos - v_tangential * sin,
            p_rho * sin + v_tangential * cos,
        )
    }

    #[inline]
    pub fn radius_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius_squared().sqrt()
    }

    pub fn angular_momentum(&self) -> f64 {
        self.x * self.py - self.y * self.px
    }
}

/// Conversion between natural trap units and a physical unit system.
///
/// Lengths are measured in trap waists, energies in the reference trap depth
/// and masses in the particle mass. The derived time unit is
/// `w₀·sqrt(m/U₀)`, in which the small-amplitude angular frequency of the
/// reference trap equals 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub length_unit: f64,
    pub energy_unit: f64,
    pub mass_unit: f64,
}

impl UnitSystem {
    pub fn new(length_unit: f64, energy_unit: f64, mass_unit: f64) -> Result<Self> {
        for (name, value) in [
            ("length_unit", length_unit),
            ("energy_unit", energy_unit),
            ("mass_unit", mass_unit),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        Ok(Self {
            length_unit,
            energy_unit,
            mass_unit,
        })
    }

    pub fn time_unit(&self) -> f64 {
        self.length_unit * (self.mass_unit / self.energy_unit).sqrt()
    }

    pub fn length_to_natural(&self, value: f64) -> f64 {
        value / self.length_unit
    }

    pub fn length_from_natural(&self, value: f64) -> f64 {
        value * self.length_unit
    }

    pub fn time_to_natural(&self, value: f64) -> f64 {
        value / self.time_unit()
    }

    pub fn time_from_natural(&self, value: f64) -> f64 {
        value * self.time_unit()
    }

    pub fn energy_to_natural(&self, value: f64) -> f64 {
        value / self.energy_unit
    }

    pub fn energy_from_natural(&self, value: f64) -> f64 {
        value * self.energy_unit
    }

    /// Angular frequencies scale inversely with the time unit.
    pub fn angular_frequency_to_natural(&self, value: f64) -> f64 {
        value * self.time_unit()
    }

    pub fn angular_frequency_from_natural(&self, value: f64) -> f64 {
        value / self.time_unit()
    }
}
