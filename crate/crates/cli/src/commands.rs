use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use trapecho_core::{
    central_fringe_amplitude, extract_revival_frequency, fit_parameters, fit_sqrt_scaling,
    ramsey_trace, revival_from_radii, revival_radii, sample_ensemble, AxisKind, EchoSequence,
    FitBounds, FitOptions, FringeTrace, RevivalModel, Theta,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::natural::NaturalRun;
use crate::output::{csv, json_text, read_trace_csv, sha256_file, OutputDir};

pub const SNAPSHOT_FILE: &str = "config.snapshot.toml";

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Sample,
    RevivalScan { per_npert: bool },
    PowerScan,
    Ramsey,
    Fit { references: Vec<PathBuf> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::RevivalScan { .. } => "revival-scan",
            Command::PowerScan => "power-scan",
            Command::Ramsey => "ramsey",
            Command::Fit { .. } => "fit",
        }
    }
}

/// Runs one command and writes its artifacts plus a config snapshot into
/// `out`. Returns the written paths.
pub fn execute(
    command: &Command,
    config: &RunConfig,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let nat = NaturalRun::from_config(config)?;
    let out = OutputDir::create(out)?;
    let mut written = match command {
        Command::Sample => sample(config, &nat, &out)?,
        Command::RevivalScan { per_npert } => revival_scan(config, &nat, &out, *per_npert)?,
        Command::PowerScan => power_scan(config, &nat, &out)?,
        Command::Ramsey => ramsey(config, &nat, &out)?,
        Command::Fit { references } => fit(config, &nat, &out, references)?,
    };
    written.push(out.write(SNAPSHOT_FILE, &config.to_toml_string())?);
    Ok(written)
}

fn sidecar(config: &RunConfig, command: &str, summary: Value) -> String {
    json_text(&json!({
        "command": command,
        "config": config,
        "summary": summary,
    }))
}

/// Trace rows with the abscissa taken from the configured microsecond grid.
fn trace_csv(abscissa_us: &[f64], trace: &FringeTrace) -> String {
    csv(
        ["abscissa", "value"],
        abscissa_us
            .iter()
            .zip(&trace.samples)
            .map(|(&x, &(_, v))| [x, v]),
    )
}

fn sample(config: &RunConfig, nat: &NaturalRun, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let trap = nat.trap()?;
    let ensemble = sample_ensemble(&trap, &nat.sampler)?;
    let mut text = String::from("index,x,y,px,py\n");
    for (i, p) in ensemble.particles.iter().enumerate() {
        text.push_str(&format!(
            "{i},{:?},{:?},{:?},{:?}\n",
            nat.length_to_um(p.x),
            nat.length_to_um(p.y),
            nat.momentum_to_si(p.px),
            nat.momentum_to_si(p.py)
        ));
    }
    let summary = json!({
        "count": ensemble.len(),
        "attempts": ensemble.attempts,
        "acceptance_fraction": ensemble.acceptance_fraction(),
        "all_bound": ensemble.particles.iter().all(|p| trap.is_bound(p)),
        "mean_energy_over_u0": ensemble.mean_energy(&trap) / trap.depth(),
        "mean_energy_uk": nat.energy_to_uk(ensemble.mean_energy(&trap)),
        "kinetic_temperature_over_u0": ensemble.kinetic_temperature(&trap) / trap.depth(),
        "units": {"x": "um", "y": "um", "px": "kg m/s", "py": "kg m/s"},
    });
    println!(
        "[sample] {} particles, acceptance {:.4}",
        ensemble.len(),
        ensemble.acceptance_fraction()
    );
    Ok(vec![
        out.write("ensemble.csv", &text)?,
        out.write("sample.json", &sidecar(config, "sample", summary))?,
    ])
}

fn revival_scan(
    config: &RunConfig,
    nat: &NaturalRun,
    out: &OutputDir,
    per_npert: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let trap = nat.trap()?;
    let cfg = nat.integrator(&trap)?;
    let ensemble = sample_ensemble(&trap, &nat.sampler)?;
    let radii = revival_radii(
        &ensemble.particles,
        &trap,
        nat.t1,
        &nat.revival_separations,
        &cfg,
    )?;
    let n_perts = if per_npert {
        nat.n_pert.clone()
    } else {
        vec![nat.max_n_pert()]
    };

    let mut written = Vec::new();
    let mut traces = Vec::new();
    for (i, &n) in n_perts.iter().enumerate() {
        let trace = revival_from_radii(&radii, &trap, &nat.probe(n)?, nat.t1)?;
        let name = if per_npert {
            format!("revival_npert_{i:02}.csv")
        } else {
            "revival.csv".into()
        };
        written.push(out.write(&name, &trace_csv(&nat.revival_separations_us, &trace))?);
        let frequency = extract_revival_frequency(&trace)
            .ok()
            .map(|f| nat.frequency_to_hz(f));
        let minimum = trace.values().into_iter().fold(f64::INFINITY, f64::min);
        traces.push(json!({
            "file": name,
            "n_pert": n,
            "phi0": nat.phi0_per_photon * n,
            "minimum": minimum,
            "revival_frequency_hz": frequency,
        }));
    }
    let summary = json!({
        "acceptance_fraction": ensemble.acceptance_fraction(),
        "trap_period_us": nat.time_to_us(trap.period()),
        "traces": traces,
    });
    println!(
        "[revival-scan] {} trace(s) over {} separations",
        n_perts.len(),
        nat.revival_separations.len()
    );
    written.push(out.write("revival.json", &sidecar(config, "revival-scan", summary))?);
    Ok(written)
}

fn ramsey(config: &RunConfig, nat: &NaturalRun, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let trap = nat.trap()?;
    let cfg = nat.integrator(&trap)?;
    let ensemble = sample_ensemble(&trap, &nat.sampler)?;
    let probe = nat.probe(nat.max_n_pert())?;
    let mut written = Vec::new();
    let mut traces = Vec::new();
    for (i, &sep) in nat.ramsey_separations.iter().enumerate() {
        let template = EchoSequence::symmetric(sep, nat.t1, nat.t2, nat.detuning)?;
        let trace = ramsey_trace(
            &ensemble.particles,
            &trap,
            &probe,
            &template,
            &nat.t2_values,
            &cfg,
        )?;
        let name = format!("ramsey_{i:02}.csv");
        written.push(out.write(&name, &trace_csv(&nat.t2_values_us, &trace))?);
        let amplitude = central_fringe_amplitude(&trace, nat.t1, nat.detuning, None).ok();
        traces.push(json!({
            "file": name,
            "separation_us": nat.time_to_us(sep),
            "central_fringe_amplitude": amplitude,
        }));
    }
    let summary = json!({
        "n_pert": nat.max_n_pert(),
        "phi0": nat.phi0_per_photon * nat.max_n_pert(),
        "traces": traces,
    });
    println!("[ramsey] {} trace(s)", traces.len());
    written.push(out.write("ramsey.json", &sidecar(config, "ramsey", summary))?);
    Ok(written)
}

fn power_scan(
    config: &RunConfig,
    nat: &NaturalRun,
    out: &OutputDir,
) -> Result<Vec<PathBuf>, CliError> {
    if nat.scan_depths.len() < 3 {
        return Err(CliError::Config(format!(
            "power_scan.powers_mw: need at least 3 powers, got {}",
            nat.scan_depths.len()
        )));
    }
    let probe = nat.probe(nat.max_n_pert())?;
    let mut points = Vec::new();
    for (&power, &depth) in config.power_scan.powers_mw.iter().zip(&nat.scan_depths) {
        let trap = nat.trap_with_depth(depth)?;
        let cfg = nat.integrator(&trap)?;
        let ensemble = sample_ensemble(&trap, &nat.sampler)?;
        let radii = revival_radii(
            &ensemble.particles,
            &trap,
            nat.t1,
            &nat.revival_separations,
            &cfg,
        )?;
        let trace = revival_from_radii(&radii, &trap, &probe, nat.t1)?;
        let frequency = nat.frequency_to_hz(extract_revival_frequency(&trace)?);
        println!("[power-scan] {power} mW -> {frequency:.3} Hz");
        points.push((power, frequency));
    }
    let fit = fit_sqrt_scaling(&points)?;
    let summary = json!({
        "coefficient": fit.coefficient,
        "exponent": fit.exponent,
        "exponent_stderr": fit.exponent_stderr,
        "sqrt_coefficient": fit.sqrt_coefficient,
        "sqrt_residual": fit.sqrt_residual,
        "sqrt_relative_rms": fit.sqrt_relative_rms,
        "sqrt_consistent": fit.sqrt_consistent,
        "units": {"power": "mW", "revival_frequency": "Hz"},
    });
    Ok(vec![
        out.write(
            "power_scan.csv",
            &csv(
                ["power", "revival_frequency"],
                points.iter().map(|&(p, f)| [p, f]),
            ),
        )?,
        out.write("power_scan.json", &sidecar(config, "power-scan", summary))?,
    ])
}

fn fit(
    config: &RunConfig,
    nat: &NaturalRun,
    out: &OutputDir,
    references: &[PathBuf],
) -> Result<Vec<PathBuf>, CliError> {
    if references.len() != nat.n_pert.len() {
        return Err(CliError::Config(format!(
            "{} reference file(s) given for {} probe.n_pert value(s)",
            references.len(),
            nat.n_pert.len()
        )));
    }
    let mut traces = Vec::new();
    let mut checksums = Vec::new();
    for path in references {
        let rows = read_trace_csv(path)?;
        let samples: Vec<(f64, f64)> = rows
            .iter()
            .map(|&(x, v)| (nat.time_from_us(x), v))
            .collect();
        let trace = FringeTrace::new(AxisKind::PulseSeparation, samples)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(first) = traces.first() {
            let grid: &FringeTrace = first;
            if grid.abscissa() != trace.abscissa() {
                return Err(CliError::Config(format!(
                    "{}: abscissa differs from the first reference",
                    path.display()
                )));
            }
        }
        checksums.push(json!({"file": path.display().to_string(), "sha256": sha256_file(path)?}));
        traces.push(trace);
    }
    let separations = traces[0].abscissa();
    if separations.iter().any(|&s| s < 0.0 || s > 2.0 * nat.t1) {
        return Err(CliError::Config(
            "reference separations must lie in [0, 2*sequence.t1_us]".into(),
        ));
    }

    let trap = nat.trap()?;
    let model = RevivalModel {
        trap,
        sampler: nat.sampler.clone(),
        integrator: nat.integrator(&trap)?,
        t_fixed: nat.t1,
        separations,
        n_pert: nat.n_pert.clone(),
        weight_exponent: nat.weight_exponent,
    };
    let f = &nat.fit;
    let mut options = FitOptions::new(
        Theta::new(f.start_kt_over_u0, f.start_gamma, f.start_phi0_per_photon),
        FitBounds {
            lower: Theta::new(f.lower_kt_over_u0, f.lower_gamma, f.lower_phi0_per_photon),
            upper: Theta::new(f.upper_kt_over_u0, f.upper_gamma, f.upper_phi0_per_photon),
        },
        f.budget,
    );
    options.tolerance = f.tolerance;
    let result = fit_parameters(&traces, &model, &options).map_err(|e| match e {
        trapecho_core::Error::InvalidParameter { .. } => CliError::Config(format!("fit: {e}")),
        other => CliError::Model(other),
    })?;
    println!(
        "[fit] kT/U0 = {:.5}, gamma = {:.5}, phi0/N = {:.5e}, residual {:.3e}, converged {}",
        result.theta.temperature_ratio,
        result.theta.gamma,
        result.theta.phi0_per_photon,
        result.residual,
        result.converged
    );
    let report = json!({
        "command": "fit",
        "config": config,
        "references": checksums,
        "theta": result.theta,
        "residual": result.residual,
        "per_trace_residuals": result.per_trace_residuals,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "converged": result.converged,
    });
    Ok(vec![out.write("fit.json", &json_text(&report))?])
}
