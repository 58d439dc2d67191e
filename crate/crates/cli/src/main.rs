//! Thin command-line shell over the simulator library. Every behavior here
//! is a direct call into the library API; the shell only parses arguments,
//! applies config overrides, and writes files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bridge_sim_core::engine::{run_experiment, ExperimentConfig};
use bridge_sim_core::Error;

mod commands;

use commands::{cmd_check_graph, cmd_gen_data, cmd_sweep, CheckGraphArgs, GenDataArgs, SweepArgs};

#[derive(Parser)]
#[command(name = "bridge-sim", version, about = "Byzantine-resilient decentralized learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv + summary.json.
    Run(RunArgs),
    /// Run one config across many seeds and aggregate final metrics.
    Sweep(SweepArgs),
    /// Check a graph against the b-resilience conditions.
    CheckGraph(CheckGraphArgs),
    /// Generate a synthetic dataset on disk.
    GenData(GenDataArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Shorthand for --override seed=N.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for --override rounds=N.
    #[arg(long)]
    rounds: Option<u64>,
    /// KEY=VAL pairs applied to the config; KEY may be a dotted path
    /// (for example schedule.lambda=0.05).
    #[arg(long = "override", value_name = "KEY=VAL")]
    overrides: Vec<String>,
}

/// Config-shaped failures exit 2, everything else 3.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Json(_)
        | Error::InsufficientNeighbors { .. }
        | Error::DimensionMismatch { .. }
        | Error::BadMagic { .. }
        | Error::TruncatedFile { .. }
        | Error::CountMismatch { .. }
        | Error::MalformedGraphFile { .. }
        | Error::MalformedDatasetFile { .. }
        | Error::MissingTarget
        | Error::EmptyDataset
        | Error::EmptyTestSet
        | Error::GraphGenerationExhausted { .. } => 2,
        _ => 3,
    }
}

fn fail(err: Error) -> ExitCode {
    let code = exit_code_for(&err);
    eprintln!(
        "{}",
        json!({ "error": err.to_string(), "exit_code": code })
    );
    ExitCode::from(code)
}

/// Parse KEY=VAL into a dotted JSON path and a value. Values that parse as
/// JSON are used as-is, anything else becomes a string.
fn parse_override(spec: &str) -> Result<(Vec<String>, serde_json::Value), Error> {
    let (key, val) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not KEY=VAL")))?;
    let value = serde_json::from_str(val).unwrap_or(serde_json::Value::String(val.to_string()));
    Ok((key.split('.').map(str::to_string).collect(), value))
}

fn apply_override(
    root: &mut serde_json::Value,
    path: &[String],
    value: serde_json::Value,
) -> Result<(), Error> {
    let mut node = root;
    for key in &path[..path.len() - 1] {
        node = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override path '{key}' is not an object")))?
            .entry(key.clone())
            .or_insert_with(|| json!({}));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config("override target is not an object".into()))?;
    obj.insert(path.last().unwrap().clone(), value);
    Ok(())
}

/// Load a config file and apply override pairs, re-validating the result
/// against the schema.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    for spec in overrides {
        let (path, val) = parse_override(spec)?;
        apply_override(&mut value, &path, val)?;
    }
    ExperimentConfig::from_json(&value.to_string())
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(rounds) = args.rounds {
        overrides.push(format!("rounds={rounds}"));
    }
    let cfg = load_config(&args.config, &overrides)?;
    std::fs::create_dir_all(&args.out)?;
    let trace = run_experiment(&cfg)?;
    std::fs::write(args.out.join("trace.csv"), trace.to_csv())?;
    let summary = serde_json::to_string_pretty(&trace.summary(&cfg))?;
    std::fs::write(args.out.join("summary.json"), summary)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::CheckGraph(args) => cmd_check_graph(args),
        Command::GenData(args) => cmd_gen_data(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => fail(err),
    }
}
