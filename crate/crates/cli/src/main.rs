//! `cone`: reproducible experiments on central-force orbits on a cone.
//!
//! ```text
//! cone simulate --config run.json [--output traj.csv] [--format csv|jsonl]
//! cone bertrand --config scan.json
//! cone actions --config levels.json
//! cone verify-algebra --config algebra.json --seed 7
//! ```
//!
//! Results go to the output file; a JSON run summary goes to stdout and
//! diagnostics (level from `CONE_LOG`) to stderr. Exit codes: 0 ok,
//! 2 config, 3 dynamics, 4 scan infeasible, 5 irrational `s`, 1 i/o.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use cone_cli::commands::{self, Target};
use cone_cli::config::{self, Format, RunConfig};
use cone_cli::error::CliError;

#[derive(Parser)]
#[command(name = "cone", version, about = "Central-force orbits on a cone")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one orbit and write its trajectory
    Simulate(Common),
    /// Scan power-law exponents for energy-independent apsidal angles
    Bertrand(Common),
    /// Actions, frequencies and frequency ratios for a list of levels
    Actions(Common),
    /// Check the bracket algebra of H, J, Z at random bound points
    VerifyAlgebra(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output file (overrides the config)
    #[arg(long)]
    output: Option<String>,
    /// Seed for random sampling (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output format (overrides the config)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Bertrand(_) => "bertrand",
            Command::Actions(_) => "actions",
            Command::VerifyAlgebra(_) => "verify-algebra",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c) | Command::Bertrand(c) | Command::Actions(c) | Command::VerifyAlgebra(c) => c,
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Simulate(_) | Command::Bertrand(_) => Format::Csv,
            Command::Actions(_) | Command::VerifyAlgebra(_) => Format::Jsonl,
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    command: &'static str,
    wall_time_s: f64,
    seed: Option<u64>,
    output: Option<String>,
    format: Option<Format>,
    exit_status: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    results: Value,
}

fn run(cmd: &Command, seed: &mut Option<u64>, target: &mut Option<(String, Format)>) -> Result<Value, CliError> {
    let common = cmd.common();
    let cfg = RunConfig::load(&common.config)?;
    let run_seed = common.seed.unwrap_or(cfg.seed());
    *seed = Some(run_seed);
    let out_cfg = cfg.output.clone().unwrap_or(config::OutputConfig {
        path: None,
        format: None,
    });
    let format = common.format.or(out_cfg.format).unwrap_or(cmd.default_format());
    let ext = match format {
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    };
    let path = common
        .output
        .clone()
        .or(out_cfg.path)
        .unwrap_or_else(|| format!("cone-{}.{ext}", cmd.name()));
    *target = Some((path.clone(), format));
    let out = Target { path: &path, format };
    log::info!("{} with {} -> {path}", cmd.name(), common.config.display());
    match cmd {
        Command::Simulate(_) => commands::simulate(&cfg, &out),
        Command::Bertrand(_) => commands::bertrand(&cfg, &out),
        Command::Actions(_) => commands::actions(&cfg, &out),
        Command::VerifyAlgebra(_) => commands::verify_algebra(&cfg, run_seed, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONE_LOG", "warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    let (mut seed, mut target) = (None, None);
    let result = run(&cli.command, &mut seed, &mut target);
    let (exit_status, error, results) = match result {
        Ok(v) => (0, None, v),
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            (e.exit_code(), Some(e.to_string()), Value::Null)
        }
    };
    let summary = RunSummary {
        command: cli.command.name(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed,
        output: target.as_ref().map(|t| t.0.clone()),
        format: target.map(|t| t.1),
        exit_status,
        error,
        results,
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    ExitCode::from(exit_status as u8)
}
