//! Run configuration in laboratory units.
//!
//! The file format is TOML restricted to dotted section keys
//! (`trap.waist_um = 40`). Every section and field has a default, so an empty
//! file is a complete configuration. Unknown keys are rejected by name.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub trap: TrapSection,
    pub probe: ProbeSection,
    pub sequence: SequenceSection,
    pub revival: RevivalSection,
    pub ramsey: RamseySection,
    pub power_scan: PowerScanSection,
    pub sampler: SamplerSection,
    pub integrator: IntegratorSection,
    pub fit: FitSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrapSection {
    /// Optical power of the trapping beam.
    pub power_mw: f64,
    /// Power at which the trap depth equals `depth_uk`.
    pub reference_power_mw: f64,
    /// Trap depth `U₀/k_B` at the reference power.
    pub depth_uk: f64,
    pub waist_um: f64,
    /// `cesium` or `rubidium87`.
    pub mass: String,
    /// `gaussian` or `harmonic`.
    pub potential: String,
}

impl Default for TrapSection {
    fn default() -> Self {
        Self {
            power_mw: 4000.0,
            reference_power_mw: 4000.0,
            depth_uk: 250.0,
            waist_um: 40.0,
            mass: "cesium".into(),
            potential: "gaussian".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSection {
    /// Waist of the perturbing beam; `γ` is this over the trap waist.
    pub waist_um: f64,
    pub phi0_per_photon: f64,
    /// Perturbing photon numbers, one revival trace each.
    pub n_pert: Vec<f64>,
    /// 1 uses `exp(-ρ²/γ²w₀²)` for the probe weight, 2 the intensity profile.
    pub weight_exponent: u8,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            waist_um: 18.0,
            phi0_per_photon: 5.0e-7,
            n_pert: (1..=10).map(|i| 0.5e6 * i as f64).collect(),
            weight_exponent: 1,
        }
    }
}

impl ProbeSection {
    /// Largest configured photon number, used by single-trace commands.
    pub fn max_n_pert(&self) -> f64 {
        self.n_pert.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SequenceSection {
    pub t1_us: f64,
    pub t2_us: f64,
    pub detuning_khz: f64,
}

impl Default for SequenceSection {
    fn default() -> Self {
        Self {
            t1_us: 1500.0,
            t2_us: 1500.0,
            detuning_khz: 3.0,
        }
    }
}

/// Separation grid of the revival scan; `t₁ = t₂ = sequence.t1_us`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RevivalSection {
    pub separation_min_us: f64,
    pub separation_max_us: f64,
    pub points: usize,
}

impl Default for RevivalSection {
    fn default() -> Self {
        Self {
            separation_min_us: 0.0,
            separation_max_us: 3000.0,
            points: 61,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RamseySection {
    /// Light-pulse separations, one trace each.
    pub separations_us: Vec<f64>,
    pub t2_min_us: f64,
    pub t2_max_us: f64,
    pub points: usize,
}

impl Default for RamseySection {
    fn default() -> Self {
        Self {
            separations_us: vec![12.0, 250.0, 500.0],
            t2_min_us: 500.0,
            t2_max_us: 2500.0,
            points: 601,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerScanSection {
    pub powers_mw: Vec<f64>,
}

impl Default for PowerScanSection {
    fn default() -> Self {
        Self {
            powers_mw: vec![1000.0, 2000.0, 4000.0, 7000.0, 10000.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerSection {
    pub kt_over_u0: f64,
    pub n: usize,
    pub rho0_over_w0: f64,
    pub seed: u64,
    pub min_acceptance: f64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            kt_over_u0: 1.0,
            n: 50_000,
            rho0_over_w0: 1.5,
            seed: 1,
            min_acceptance: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSection {
    /// Time step as a fraction of the small-amplitude trap period.
    pub dt_fraction: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { dt_fraction: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSection {
    pub start_kt_over_u0: f64,
    pub start_gamma: f64,
    pub start_phi0_per_photon: f64,
    pub lower_kt_over_u0: f64,
    pub lower_gamma: f64,
    pub lower_phi0_per_photon: f64,
    pub upper_kt_over_u0: f64,
    pub upper_gamma: f64,
    pub upper_phi0_per_photon: f64,
    pub budget: usize,
    /// Simplex diameter relative to the bound box.
    pub tolerance: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            start_kt_over_u0: 0.5,
            start_gamma: 0.45,
            start_phi0_per_photon: 2.0e-7,
            lower_kt_over_u0: 0.1,
            lower_gamma: 0.2,
            lower_phi0_per_photon: 1.0e-8,
            upper_kt_over_u0: 3.0,
            upper_gamma: 1.5,
            upper_phi0_per_photon: 2.0e-6,
            budget: 400,
            tolerance: 1e-3,
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeSet<String>) {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            toml::Value::Table(t) => flatten(&path, t, out),
            _ => {
                out.insert(path);
            }
        }
    }
}

/// Dotted keys of every configurable field.
pub fn known_keys() -> BTreeSet<String> {
    let table = toml::Table::try_from(RunConfig::default()).expect("default config serializes");
    let mut keys = BTreeSet::new();
    flatten("", &table, &mut keys);
    keys
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            CliError::Config(format!("malformed config: {}", e.message()))
        })?;
        let mut present = BTreeSet::new();
        flatten("", &table, &mut present);
        let known = known_keys();
        if let Some(bad) = present.iter().find(|k| !known.contains(*k)) {
            return Err(CliError::Config(format!("unknown config key `{bad}`")));
        }
        table.try_into().map_err(|e: toml::de::Error| {
            CliError::Config(format!("invalid config value: {}", e.message()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// One `section.key = value` line per field, sorted by key.
    pub fn to_toml_string(&self) -> String {
        let table = toml::Table::try_from(self).expect("config serializes");
        let mut out = String::new();
        for (section, fields) in &table {
            let toml::Value::Table(fields) = fields else {
                unreachable!("every top-level field is a section")
            };
            for (key, value) in fields {
                out.push_str(&format!("{section}.{key} = {value}\n"));
            }
        }
        out
    }
}
