//! Conversion of a [`RunConfig`] into natural trap units and back.
//!
//! Lengths are in trap waists, energies in the trap depth at the reference
//! power and masses in the atomic mass; the time unit is `w₀·sqrt(m/U₀)`.
//! The depth scales linearly with optical power.

use std::f64::consts::TAU;

use trapecho_core::{
    EchoSequence, IntegratorConfig, PotentialKind, ProbeConfig, SamplerConfig, TrapConfig,
    UnitSystem, WeightExponent,
};

use crate::config::{
    FitSection, IntegratorSection, PowerScanSection, ProbeSection, RamseySection, RevivalSection,
    RunConfig, SamplerSection, SequenceSection, TrapSection,
};
use crate::error::CliError;

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

pub fn species_mass(label: &str) -> Result<f64, CliError> {
    let amu = match label {
        "cesium" => 132.905_451_961,
        "rubidium87" => 86.909_180_527,
        other => {
            return Err(CliError::Config(format!(
                "trap.mass: unknown species `{other}` (expected cesium or rubidium87)"
            )))
        }
    };
    Ok(amu * ATOMIC_MASS_UNIT)
}

fn potential_kind(label: &str) -> Result<PotentialKind, CliError> {
    match label {
        "gaussian" => Ok(PotentialKind::Gaussian),
        "harmonic" => Ok(PotentialKind::HarmonicApproximation),
        other => Err(CliError::Config(format!(
            "trap.potential: expected gaussian or harmonic, got `{other}`"
        ))),
    }
}

fn potential_label(kind: PotentialKind) -> &'static str {
    match kind {
        PotentialKind::Gaussian => "gaussian",
        PotentialKind::HarmonicApproximation => "harmonic",
    }
}

fn positive(key: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Config(format!(
            "{key}: must be positive, got {value}"
        )))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn grid(key: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 || !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(CliError::Config(format!(
            "{key}: need at least 2 points over an increasing range, got {n} over [{lo}, {hi}]"
        )));
    }
    Ok(linspace(lo, hi, n))
}

/// A run configuration expressed in natural trap units.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalRun {
    pub units: UnitSystem,
    pub mass_label: String,
    pub reference_power_mw: f64,
    pub potential: PotentialKind,
    /// Trap depth at the configured power.
    pub depth: f64,
    pub gamma: f64,
    pub phi0_per_photon: f64,
    pub n_pert: Vec<f64>,
    pub weight_exponent: WeightExponent,
    pub t1: f64,
    pub t2: f64,
    /// Angular detuning.
    pub detuning: f64,
    pub revival_separations: Vec<f64>,
    /// The same grid as configured, for output abscissas.
    pub revival_separations_us: Vec<f64>,
    pub ramsey_separations: Vec<f64>,
    pub t2_values: Vec<f64>,
    pub t2_values_us: Vec<f64>,
    /// Trap depths of the power scan.
    pub scan_depths: Vec<f64>,
    pub sampler: SamplerConfig,
    pub dt_fraction: f64,
    pub fit: FitSection,
}

impl NaturalRun {
    pub fn from_config(c: &RunConfig) -> Result<Self, CliError> {
        let mass = species_mass(&c.trap.mass)?;
        let waist = positive("trap.waist_um", c.trap.waist_um)? * 1e-6;
        let depth_ref = positive("trap.depth_uk", c.trap.depth_uk)? * 1e-6 * BOLTZMANN;
        let p_ref = positive("trap.reference_power_mw", c.trap.reference_power_mw)?;
        let units = UnitSystem::new(waist, depth_ref, mass)?;
        let tu = units.time_unit();
        let time = |us: f64| us * 1e-6 / tu;

        let depth = positive("trap.power_mw", c.trap.power_mw)? / p_ref;
        let gamma = positive("probe.waist_um", c.probe.waist_um)? / c.trap.waist_um;
        if !(c.probe.phi0_per_photon.is_finite() && c.probe.phi0_per_photon >= 0.0) {
            return Err(CliError::Config(
                "probe.phi0_per_photon: must be non-negative".into(),
            ));
        }
        if c.probe.n_pert.is_empty() || c.probe.n_pert.iter().any(|n| !(n.is_finite() && *n >= 0.0))
        {
            return Err(CliError::Config(
                "probe.n_pert: need at least one non-negative value".into(),
            ));
        }
        let weight_exponent = WeightExponent::try_from(c.probe.weight_exponent).map_err(|_| {
            CliError::Config(format!(
                "probe.weight_exponent: expected 1 or 2, got {}",
                c.probe.weight_exponent
            ))
        })?;

        let t1 = time(positive("sequence.t1_us", c.sequence.t1_us)?);
        let t2 = time(positive("sequence.t2_us", c.sequence.t2_us)?);
        if !c.sequence.detuning_khz.is_finite() {
            return Err(CliError::Config(
                "sequence.detuning_khz: must be finite".into(),
            ));
        }
        let detuning = units.angular_frequency_to_natural(TAU * 1e3 * c.sequence.detuning_khz);

        let r = &c.revival;
        let revival_separations_us = grid(
            "revival",
            r.separation_min_us,
            r.separation_max_us,
            r.points,
        )?;
        let revival_separations: Vec<f64> =
            revival_separations_us.iter().map(|&s| time(s)).collect();
        if r.separation_min_us < 0.0 || r.separation_max_us > 2.0 * c.sequence.t1_us {
            return Err(CliError::Config(format!(
                "revival: separations must lie in [0, 2*sequence.t1_us] = [0, {}] us",
                2.0 * c.sequence.t1_us
            )));
        }
        let ramsey_separations: Vec<f64> =
            c.ramsey.separations_us.iter().map(|&s| time(s)).collect();
        let t2_values_us = grid(
            "ramsey",
            c.ramsey.t2_min_us,
            c.ramsey.t2_max_us,
            c.ramsey.points,
        )?;
        let t2_values: Vec<f64> = t2_values_us.iter().map(|&t| time(t)).collect();
        for &sep in &ramsey_separations {
            for &t2v in [t2_values[0], t2_values[t2_values.len() - 1]].iter() {
                EchoSequence::symmetric(sep, t1, t2v, detuning)
                    .map_err(|e| CliError::Config(format!("ramsey.separations_us: {e}")))?;
            }
        }
        let scan_depths = c
            .power_scan
            .powers_mw
            .iter()
            .map(|&p| positive("power_scan.powers_mw", p).map(|p| p / p_ref))
            .collect::<Result<_, _>>()?;

        let sampler = SamplerConfig {
            temperature_ratio: c.sampler.kt_over_u0,
            cutoff_over_waist: c.sampler.rho0_over_w0,
            count: c.sampler.n,
            seed: c.sampler.seed,
            min_acceptance: c.sampler.min_acceptance,
        };
        sampler
            .validate()
            .map_err(|e| CliError::Config(format!("sampler: {e}")))?;
        let dt_fraction = c.integrator.dt_fraction;
        if !(dt_fraction.is_finite() && dt_fraction > 0.0 && dt_fraction <= 0.1) {
            return Err(CliError::Config(format!(
                "integrator.dt_fraction: must lie in (0, 0.1], got {dt_fraction}"
            )));
        }

        Ok(Self {
            units,
            mass_label: c.trap.mass.clone(),
            reference_power_mw: p_ref,
            potential: potential_kind(&c.trap.potential)?,
            depth,
            gamma,
            phi0_per_photon: c.probe.phi0_per_photon,
            n_pert: c.probe.n_pert.clone(),
            weight_exponent,
            t1,
            t2,
            detuning,
            revival_separations,
            revival_separations_us,
            ramsey_separations,
            t2_values,
            t2_values_us,
            scan_depths,
            sampler,
            dt_fraction,
            fit: c.fit.clone(),
        })
    }

    /// Inverse of [`NaturalRun::from_config`].
    pub fn to_config(&self) -> RunConfig {
        let u = &self.units;
        let us = |t: f64| u.time_from_natural(t) * 1e6;
        let waist_um = u.length_from_natural(1.0) * 1e6;
        let first_last = |v: &[f64]| (us(v[0]), us(v[v.len() - 1]), v.len());
        let (rev_lo, rev_hi, rev_n) = first_last(&self.revival_separations);
        let (t2_lo, t2_hi, t2_n) = first_last(&self.t2_values);
        RunConfig {
            trap: TrapSection {
                power_mw: self.depth * self.reference_power_mw,
                reference_power_mw: self.reference_power_mw,
                depth_uk: u.energy_from_natural(1.0) / BOLTZMANN * 1e6,
                waist_um,
                mass: self.mass_label.clone(),
                potential: potential_label(self.potential).into(),
            },
            probe: ProbeSection {
                waist_um: self.gamma * waist_um,
                phi0_per_photon: self.phi0_per_photon,
                n_pert: self.n_pert.clone(),
                weight_exponent: match self.weight_exponent {
                    WeightExponent::One => 1,
                    WeightExponent::Two => 2,
                },
            },
            sequence: SequenceSection {
                t1_us: us(self.t1),
                t2_us: us(self.t2),
                detuning_khz: u.angular_frequency_from_natural(self.detuning) / (TAU * 1e3),
            },
            revival: RevivalSection {
                separation_min_us: rev_lo,
                separation_max_us: rev_hi,
                points: rev_n,
            },
            ramsey: RamseySection {
                separations_us: self.ramsey_separations.iter().map(|&s| us(s)).collect(),
                t2_min_us: t2_lo,
                t2_max_us: t2_hi,
                points: t2_n,
            },
            power_scan: PowerScanSection {
                powers_mw: self
                    .scan_depths
                    .iter()
                    .map(|d| d * self.reference_power_mw)
                    .collect(),
            },
            sampler: SamplerSection {
                kt_over_u0: self.sampler.temperature_ratio,
                n: self.sampler.count,
                rho0_over_w0: self.sampler.cutoff_over_waist,
                seed: self.sampler.seed,
                min_acceptance: self.sampler.min_acceptance,
            },
            integrator: IntegratorSection {
                dt_fraction: self.dt_fraction,
            },
            fit: self.fit.clone(),
        }
    }

    pub fn trap_with_depth(&self, depth: f64) -> Result<TrapConfig, CliError> {
        Ok(TrapConfig::new(depth, 1.0, 1.0, self.potential)?)
    }

    pub fn trap(&self) -> Result<TrapConfig, CliError> {
        self.trap_with_depth(self.depth)
    }

    pub fn integrator(&self, trap: &TrapConfig) -> Result<IntegratorConfig, CliError> {
        Ok(IntegratorConfig::with_period_fraction(
            trap,
            self.dt_fraction,
        )?)
    }

    pub fn probe(&self, n_pert: f64) -> Result<ProbeConfig, CliError> {
        Ok(ProbeConfig::new(self.gamma, self.phi0_per_photon, n_pert)?
            .with_weight_exponent(self.weight_exponent))
    }

    pub fn max_n_pert(&self) -> f64 {
        self.n_pert.iter().copied().fold(0.0, f64::max)
    }

    pub fn time_to_us(&self, t: f64) -> f64 {
        self.units.time_from_natural(t) * 1e6
    }

    pub fn time_from_us(&self, us: f64) -> f64 {
        self.units.time_to_natural(us * 1e-6)
    }

    /// Ordinary frequency in Hz of a natural-unit frequency.
    pub fn frequency_to_hz(&self, f: f64) -> f64 {
        f / self.units.time_unit()
    }

    pub fn length_to_um(&self, x: f64) -> f64 {
        self.units.length_from_natural(x) * 1e6
    }

    /// Momentum in kg·m/s.
    pub fn momentum_to_si(&self, p: f64) -> f64 {
        let u = &self.units;
        p * u.mass_unit * u.length_unit / u.time_unit()
    }

    pub fn energy_to_uk(&self, e: f64) -> f64 {
        self.units.energy_from_natural(e) / BOLTZMANN * 1e6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    fn assert_close_configs(a: &RunConfig, b: &RunConfig) {
        let ta = toml::Table::try_from(a).unwrap();
        let tb = toml::Table::try_from(b).unwrap();
        fn walk(x: &toml::Value, y: &toml::Value, path: &str) {
            match (x, y) {
                (toml::Value::Float(p), toml::Value::Float(q)) => {
                    assert!(close(*p, *q), "{path}: {p} vs {q}")
                }
                (toml::Value::Table(p), toml::Value::Table(q)) => {
                    assert_eq!(p.len(), q.len(), "{path}");
                    for (k, v) in p {
                        walk(v, &q[k], &format!("{path}.{k}"));
                    }
                }
                (toml::Value::Array(p), toml::Value::Array(q)) => {
                    assert_eq!(p.len(), q.len(), "{path}");
                    for (v, w) in p.iter().zip(q) {
                        walk(v, w, path);
                    }
                }
                _ => assert_eq!(x, y, "{path}"),
            }
        }
        walk(&toml::Value::Table(ta), &toml::Value::Table(tb), "");
    }

    #[test]
    fn default_round_trip() {
        let c = RunConfig::default();
        assert_close_configs(&NaturalRun::from_config(&c).unwrap().to_config(), &c);
    }

    #[test]
    fn varied_round_trip() {
        let mut c = RunConfig::default();
        c.trap.waist_um = 33.3;
        c.trap.depth_uk = 123.4;
        c.trap.power_mw = 1234.5;
        c.trap.mass = "rubidium87".into();
        c.probe.waist_um = 21.7;
        c.sequence.t1_us = 1700.3;
        c.sequence.t2_us = 1650.1;
        c.sequence.detuning_khz = -2.71;
        c.revival.separation_max_us = 3400.0;
        c.ramsey.separations_us = vec![7.0, 333.3];
        c.power_scan.powers_mw = vec![100.0, 250.5, 999.9];
        assert_close_configs(&NaturalRun::from_config(&c).unwrap().to_config(), &c);
    }

    #[test]
    fn default_trap_period_is_about_a_millisecond() {
        let n = NaturalRun::from_config(&RunConfig::default()).unwrap();
        let period_us = n.time_to_us(n.trap().unwrap().period());
        assert!((900.0..1100.0).contains(&period_us), "{period_us}");
        assert!((n.gamma - 0.45).abs() < 1e-15);
    }

    #[test]
    fn detuning_period() {
        let n = NaturalRun::from_config(&RunConfig::default()).unwrap();
        let period_us = n.time_to_us(TAU / n.detuning);
        assert!(close(period_us, 1000.0 / 3.0) || (period_us - 1000.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = RunConfig::default();
        c.revival.separation_max_us = 3500.0;
        assert_eq!(NaturalRun::from_config(&c).unwrap_err().exit_code(), 2);
        let mut c = RunConfig::default();
        c.trap.mass = "lead".into();
        assert!(NaturalRun::from_config(&c)
            .unwrap_err()
            .to_string()
            .contains("lead"));
        let mut c = RunConfig::default();
        c.probe.weight_exponent = 3;
        assert_eq!(NaturalRun::from_config(&c).unwrap_err().exit_code(), 2);
        let mut c = RunConfig::default();
        c.ramsey.separations_us = vec![2000.0];
        assert_eq!(NaturalRun::from_config(&c).unwrap_err().exit_code(), 2);
    }
}
