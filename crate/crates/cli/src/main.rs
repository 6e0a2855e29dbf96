//! `thermoshift`: batch front end for pressures, equilibrium states,
//! annealing schedules, maximizing cycles and verification suites.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Geometric, Overrides};
use verify::Suite;

#[derive(Debug, Parser)]
#[command(name = "thermoshift", version, about = "Thermodynamic formalism on finite Markov shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pressure and eigenvector residuals at each t.
    Pressure(ModelArgs),
    /// Symbol masses of the equilibrium state at each t.
    Equilibrium(ModelArgs),
    /// Annealing records along the schedule.
    Anneal(ModelArgs),
    /// Maximum ergodic average and an optimal cycle.
    Maximize(ModelArgs),
    /// Pressure of successive truncations.
    Truncate(ModelArgs),
    /// Run a verification suite; exits nonzero when a check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// renewal:neg_x0 or renewal:x0_minus_x1
    #[arg(long, value_name = "NAME", conflicts_with = "config", required_unless_present = "config")]
    model: Option<String>,
    /// JSON document with "shift" and "potential" specs
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Number of states of the truncation
    #[arg(long = "K", value_name = "INT")]
    k: Option<usize>,
    /// Comma-separated inverse temperatures
    #[arg(long, value_name = "LIST", value_delimiter = ',', conflicts_with = "t0")]
    t: Option<Vec<f64>>,
    /// First t of a geometric schedule
    #[arg(long, value_name = "F", requires_all = ["ratio", "steps"])]
    t0: Option<f64>,
    #[arg(long, value_name = "F", requires = "t0")]
    ratio: Option<f64>,
    #[arg(long, value_name = "N", requires = "t0")]
    steps: Option<usize>,
    /// Comma-separated symbol labels to report
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    watch: Option<Vec<usize>>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Seed for randomized suites
    #[arg(long, value_name = "INT", default_value_t = 20_240_601)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV
    #[arg(long)]
    json: bool,
}

impl ModelArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            config: self.config.clone(),
            k: self.k,
            t: self.t.clone(),
            geometric: self.t0.map(|t0| Geometric {
                t0,
                ratio: self.ratio.unwrap_or(2.0),
                steps: self.steps.unwrap_or(1),
            }),
            watch: self.watch.clone(),
        }
    }
}

/// Some checks of a verification suite failed.
#[derive(Debug)]
struct ChecksFailed(usize, usize);

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} of {} checks failed", self.0, self.1)
    }
}

impl std::error::Error for ChecksFailed {}

fn run(cli: Cli) -> Result<()> {
    let (name, args) = match &cli.command {
        Command::Verify(v) => {
            let checks = verify::run(v.suite, v.seed)?;
            verify::report(v.suite, v.seed, &checks).emit("verify", v.out.json, v.out.out.as_deref())?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(ChecksFailed(failed, checks.len()).into());
            }
            return Ok(());
        }
        Command::Pressure(a) => ("pressure", a),
        Command::Equilibrium(a) => ("equilibrium", a),
        Command::Anneal(a) => ("anneal", a),
        Command::Maximize(a) => ("maximize", a),
        Command::Truncate(a) => ("truncate", a),
    };
    let resolved = config::resolve(&args.overrides())?;
    let report = match &cli.command {
        Command::Pressure(_) => commands::pressure(&resolved)?,
        Command::Equilibrium(_) => commands::equilibrium(&resolved)?,
        Command::Anneal(_) => commands::anneal(&resolved)?,
        Command::Maximize(_) => commands::maximize(&resolved)?,
        Command::Truncate(_) => commands::truncate(&resolved)?,
        Command::Verify(_) => unreachable!("handled above"),
    };
    report.emit(name, args.out.json, args.out.out.as_deref())
}

/// 2 for numerical failures and failed checks, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.downcast_ref::<thermoshift::Error>().is_some_and(|e| e.is_numerical());
    if numerical || err.is::<ChecksFailed>() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
