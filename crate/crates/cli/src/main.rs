mod args;
mod commands;
mod config;
mod error;
mod output;
mod parse;

use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches};
use serde_json::{Map, Value};

use crate::args::{Cli, Command};
use crate::error::{usage, CliResult};

const JOBS_ENV: &str = "RESFORGE_JOBS";

/// Thread count: `--jobs`, then the config file, then the environment, then
/// rayon's default.
fn jobs(cli: &Cli, matches: &ArgMatches, config: &Map<String, Value>) -> CliResult<Option<usize>> {
    let from_flag = config::from_command_line(matches, "jobs");
    let n = match (from_flag, config.get("jobs")) {
        (false, Some(v)) => Some(
            v.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| usage(format!("config: jobs must be a non-negative integer, got {v}")))?,
        ),
        _ => cli.jobs,
    };
    if n == Some(0) {
        return Err(usage(format!("--jobs (or {JOBS_ENV}) must be at least 1")));
    }
    Ok(n)
}

fn merged(command: Command, matches: &ArgMatches, config: &Map<String, Value>) -> CliResult<Command> {
    if config.is_empty() {
        return Ok(command);
    }
    let root = Cli::command();
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let cmd = root.find_subcommand(name).expect("subcommand exists");
    Ok(match command {
        Command::Resonances(a) => Command::Resonances(config::merge(a, cmd, sub, config)?),
        Command::Optimize(a) => Command::Optimize(config::merge(a, cmd, sub, config)?),
        Command::Transmission(a) => Command::Transmission(config::merge(a, cmd, sub, config)?),
        Command::Bounds(a) => Command::Bounds(config::merge(a, cmd, sub, config)?),
        Command::Bragg(a) => Command::Bragg(config::merge(a, cmd, sub, config)?),
        Command::Radial(a) => Command::Radial(config::merge(a, cmd, sub, config)?),
        Command::Verify(a) => Command::Verify(config::merge(a, cmd, sub, config)?),
    })
}

fn run(matches: ArgMatches) -> CliResult<()> {
    let cli = Cli::from_arg_matches(&matches).map_err(|e| usage(e.to_string()))?;
    let config = match &cli.config {
        Some(path) => config::load(path)?,
        None => Map::new(),
    };
    let threads = jobs(&cli, &matches, &config)?;
    let command = merged(cli.command, &matches, &config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| commands::dispatch(command))
}

fn main() -> ExitCode {
    let matches = Cli::command().try_get_matches().unwrap_or_else(|e| e.exit());
    match run(matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
