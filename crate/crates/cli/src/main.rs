use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trapecho_cli::{execute, CliError, Command, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "trapecho",
    version,
    about = "Echo-spectroscopy fringe revival simulator"
)]
struct Cli {
    /// Config file with dotted keys, e.g. `trap.waist_um = 40`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `sampler.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Use the harmonic approximation of the trap potential.
    #[arg(long, global = true)]
    harmonic: bool,
    #[arg(long, global = true)]
    weight_exponent: Option<Exponent>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Exponent {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Sample a bound thermal ensemble.
    Sample,
    /// Central-fringe contrast versus light-pulse separation.
    RevivalScan {
        /// One trace per configured `probe.n_pert` value.
        #[arg(long)]
        per_npert: bool,
    },
    /// Revival frequency versus trap power with a square-root fit.
    PowerScan,
    /// Ramsey fringes versus final pulse time.
    Ramsey,
    /// Fit (kT/U0, gamma, phi0/N) to reference revival traces.
    Fit {
        /// One `abscissa,value` file per `probe.n_pert` value, in order.
        #[arg(long = "reference", required = true, num_args = 1..)]
        references: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.sampler.seed = seed;
    }
    if cli.harmonic {
        config.trap.potential = "harmonic".into();
    }
    match cli.weight_exponent {
        Some(Exponent::One) => config.probe.weight_exponent = 1,
        Some(Exponent::Two) => config.probe.weight_exponent = 2,
        None => {}
    }
    let command = match cli.command {
        Sub::Sample => Command::Sample,
        Sub::RevivalScan { per_npert } => Command::RevivalScan { per_npert },
        Sub::PowerScan => Command::PowerScan,
        Sub::Ramsey => Command::Ramsey,
        Sub::Fit { references } => Command::Fit { references },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    let written = pool.install(|| execute(&command, &config, &cli.out))?;
    for path in written {
        println!("[{}] wrote {}", command.name(), path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
