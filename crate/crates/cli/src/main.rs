//! `kol`: command-line entry point.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kol_cli::commands::run;
use kol_cli::config::{read_config_file, resolve, ExperimentKind, Overrides, Recipe};
use kol_cli::CliError;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "kol", version, about = "Waiting times of a killed Ornstein-Uhlenbeck process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Drift strength ε; replaces the ε list of multi-ε recipes.
    #[arg(long, global = true, value_name = "FLOAT")]
    eps: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    samples: Option<u64>,
    /// Time step for the simulation and the PDE.
    #[arg(long, global = true, value_name = "FLOAT")]
    dt: Option<f64>,
    /// Simulation horizon and PDE end time.
    #[arg(long, global = true, value_name = "FLOAT")]
    tmax: Option<f64>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; falls back to KOL_WORKERS, then to all cores.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a batch of waiting times.
    Simulate,
    /// Histogram, survival curve and tail fits of a dataset CSV.
    Analyze {
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
    },
    /// Transform of the waiting-time density and its numerical inverse.
    Analytic,
    /// Fokker-Planck solution with the killing term.
    Pde,
    /// Identity checks of the special functions.
    VerifySpecfun,
    /// Run a reproduction recipe.
    Reproduce {
        /// One of the recipe names or their short aliases.
        recipe: String,
    },
}

fn execute(cli: Cli) -> Result<serde_json::Value, CliError> {
    let (kind, recipe, input) = match cli.command {
        Command::Simulate => (ExperimentKind::Simulate, None, None),
        Command::Analyze { input } => (ExperimentKind::Analyze, None, Some(input)),
        Command::Analytic => (ExperimentKind::Analytic, None, None),
        Command::Pde => (ExperimentKind::Pde, None, None),
        Command::VerifySpecfun => (ExperimentKind::VerifySpecfun, None, None),
        Command::Reproduce { recipe } => (ExperimentKind::Reproduce, Some(recipe.parse::<Recipe>()?), None),
    };
    let f = cli.flags;
    let file = f.config.as_deref().map(read_config_file).transpose()?;
    let overrides = Overrides {
        seed: f.seed,
        eps: f.eps,
        samples: f.samples,
        dt: f.dt,
        tmax: f.tmax,
        out: f.out,
        workers: f.workers,
        input,
    };
    let config = resolve(kind, recipe, file.as_ref(), &overrides)?;
    let summary = run(&config)?;
    Ok(json!({
        "status": "ok",
        "kind": summary.kind,
        "recipe": config.recipe.map(|r| r.name()),
        "results": summary.results,
        "artifacts": summary.artifacts,
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(v) => {
            let _ = writeln!(std::io::stdout(), "{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
