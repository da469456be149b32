//! Command-line front end wiring the segmentation engine into reproducible
//! workflows: corpus generation, target export, decoding, evaluation,
//! rendering, and benchmarking.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, malformed
//! values), 2 for data errors (unreadable or inconsistent inputs). stderr
//! carries diagnostics; stdout carries only requested payloads.

mod cmd_bench;
mod cmd_decode;
mod cmd_eval;
mod cmd_flows;
mod cmd_gen;
mod cmd_render;
mod corpus;
mod manifest;
mod palette;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "densflow", version, about = "Flow-field instance segmentation toolkit")]
struct Cli {
    /// Worker thread cap; falls back to DENSFLOW_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus (images, label maps, scene sidecars).
    Gen(cmd_gen::GenArgs),
    /// Compute flow-field training targets for every label map.
    Flows(cmd_flows::FlowsArgs),
    /// Decode flow fields back into instance label maps.
    Decode(cmd_decode::DecodeArgs),
    /// Score predictions against ground truth and emit the metrics report.
    Eval(cmd_eval::EvalArgs),
    /// Render a label map or flow field to a PNG for inspection.
    Render(cmd_render::RenderArgs),
    /// Time the pipeline stages per density class over a corpus.
    Bench(cmd_bench::BenchArgs),
}

/// A command failure, split by whose fault it is.
pub enum Failure {
    /// The invocation itself is wrong; exit 1.
    Usage(String),
    /// Inputs are unreadable or inconsistent; exit 2.
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub type CmdResult = Result<(), Failure>;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    if let Err(e) = init_threads(cli.threads) {
        report(e);
    }
    let result = match cli.command {
        Command::Gen(args) => cmd_gen::run(args),
        Command::Flows(args) => cmd_flows::run(args),
        Command::Decode(args) => cmd_decode::run(args),
        Command::Eval(args) => cmd_eval::run(args),
        Command::Render(args) => cmd_render::run(args),
        Command::Bench(args) => cmd_bench::run(args),
    };
    if let Err(e) = result {
        report(e);
    }
}

fn report(e: Failure) -> ! {
    match e {
        Failure::Usage(msg) => {
            eprintln!("usage error: {msg}");
            std::process::exit(1);
        }
        Failure::Data(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

/// Applies the thread cap: `--threads` wins, then `DENSFLOW_THREADS`, then
/// the rayon default. Outputs never depend on the cap, only timings do.
fn init_threads(flag: Option<usize>) -> CmdResult {
    let from_env = match std::env::var("DENSFLOW_THREADS") {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| usage(format!("DENSFLOW_THREADS must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    let Some(n) = flag.or(from_env) else {
        return Ok(());
    };
    if n == 0 {
        return Err(usage("thread count must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("could not configure {n} threads: {e}")))?;
    Ok(())
}
