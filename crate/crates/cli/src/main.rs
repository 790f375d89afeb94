//! `kkwin` command-line front end.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for unreadable
//! or invalid input data, 4 when a computation failed (including partial
//! failures recorded in the `errors` column of an output table).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};
use crate::output::Meta;

#[derive(Debug, Parser)]
#[command(name = "kkwin", version, about = "Windowed Kramers-Kronig transforms and Casimir pressures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate a synthetic optical dataset.
    Synth(Common),
    /// Imaginary-axis permittivity per window, with cut fractions.
    Epsilon(Common),
    /// Lifshitz pressure per window and prescription.
    Pressure(Common),
    /// Monte Carlo uncertainty of the imaginary-axis permittivity.
    Mc(Common),
    /// Plasma-frequency fits and dataset consistency.
    Fit(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel loops.
    #[arg(long)]
    threads: Option<usize>,
    /// Omit the timestamp line from output headers.
    #[arg(long)]
    no_timestamp: bool,
}

fn run(cli: Cli) -> CliResult<commands::Outcome> {
    let (name, common): (&'static str, &Common) = match &cli.command {
        Command::Synth(c) => ("synth", c),
        Command::Epsilon(c) => ("epsilon", c),
        Command::Pressure(c) => ("pressure", c),
        Command::Mc(c) => ("mc", c),
        Command::Fit(c) => ("fit", c),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(CliError::config)?;
    }
    let cfg = LoadedConfig::load(&common.config)?;
    let out = cfg.output_dir(common.out.as_deref());
    std::fs::create_dir_all(&out)?;
    let meta = Meta {
        command: name,
        config_sha256: cfg.sha256.clone(),
        timestamp: !common.no_timestamp,
    };
    match cli.command {
        Command::Synth(_) => commands::synth(&cfg, &out, &meta),
        Command::Epsilon(_) => commands::epsilon(&cfg, &out, &meta),
        Command::Pressure(_) => commands::pressure_cmd(&cfg, &out, &meta),
        Command::Mc(_) => commands::mc(&cfg, &out, &meta),
        Command::Fit(_) => commands::fit(&cfg, &out, &meta),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.errors > 0 {
                eprintln!("kkwin: {} table entries failed; see the errors column", o.errors);
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("kkwin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
