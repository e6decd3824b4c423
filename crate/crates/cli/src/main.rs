//! `levy-mp`: closed forms, numerical checks and path simulation for
//! multiple points of operator semistable Lévy processes.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use config::{CommandName, ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "levy-mp", version, about)]
struct Cli {
    /// What to run. May also come from the config file.
    #[arg(value_enum)]
    command: Option<CommandName>,
    /// JSON or TOML file with the same fields as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

fn init_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("LEVY_MP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| ConfigError(format!("LEVY_MP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))
}

fn real_main() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    init_threads()?;
    let mut flags = cli.flags;
    flags.command = cli.command;
    let base = match &cli.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = config::merge(base, &flags);
    let (plan, common) = config::plan(&cfg)?;

    let mut outcome = commands::run(&plan)?;
    if let Some(dir) = &common.output {
        outcome.artifacts.push(output::Artifact::json("config.json", &cfg)?);
        output::write_all(dir, &outcome.artifacts).with_context(|| format!("writing reports to {}", dir.display()))?;
    }
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    if let Some(t) = &outcome.table {
        eprint!("{t}");
    }
    if common.strict && outcome.inconclusive {
        eprintln!("strict: result is inconclusive");
        return Ok(EXIT_INCONCLUSIVE);
    }
    Ok(0)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<levy_multipoint::Error>().is_some() {
        EXIT_VALIDATION
    } else {
        EXIT_FAILURE
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
