//! `achlioptas`: simulate, solve and compare Achlioptas processes.

mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use achlioptas::error::Error;
use clap::{Parser, Subcommand};
use thiserror::Error as ThisError;

use args::{CompareArgs, DiagnoseArgs, GelationArgs, SimulateArgs, SolveArgs};

/// Config files are TOML (or JSON, including the metadata file of any
/// artifact this tool wrote). Flags override values from the file, which
/// override the built-in defaults.
#[derive(Parser, Debug)]
#[command(name = "achlioptas", version, about)]
struct Cli {
    /// Read settings from this file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads for seed sweeps and size ladders.
    #[arg(long, global = true, env = "ACHLIOPTAS_WORKERS")]
    workers: Option<usize>,
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the random graph process and write snapshot traces.
    Simulate(SimulateArgs),
    /// Integrate the truncated rate equations.
    Solve(SolveArgs),
    /// Measure the deviation between traces and an ODE series.
    Compare(CompareArgs),
    /// Bracket the gelation time, optionally against simulated crossings.
    Gelation(GelationArgs),
    /// Martingale and unique-giant checks on fresh runs.
    Diagnose(DiagnoseArgs),
    /// List the built-in rules.
    RulesList,
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                Error::Dimension { .. }
                | Error::InvalidInput(_)
                | Error::UnknownRule(_)
                | Error::Params { .. }
                | Error::Format(_)
                | Error::Json(_) => 1,
                Error::Resource(_) | Error::Integration { .. } | Error::Invariant(_) | Error::Io(_) => 2,
            },
        }
    }
}

pub struct Global {
    pub config: Option<PathBuf>,
    pub force: bool,
    pub json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let g = Global {
        config: cli.config,
        force: cli.force,
        json: cli.json,
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a, &g),
        Command::Solve(a) => commands::solve(a, &g),
        Command::Compare(a) => commands::compare(a, &g),
        Command::Gelation(a) => commands::gelation(a, &g),
        Command::Diagnose(a) => commands::diagnose(a, &g),
        Command::RulesList => commands::rules_list(&g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
