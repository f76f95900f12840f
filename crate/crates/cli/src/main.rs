use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use rigidity_lab::config::kind_name;
use rigidity_lab::{run, ExperimentConfig, ExperimentKind, Sink};

#[derive(Parser)]
#[command(name = "rigidity-lab", version, about = "Rigidity experiments for determinantal point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; overrides the config. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the kernel at the configured pairs.
    Eval(Common),
    /// Check the decay conditions on the kernel.
    Bounds(Common),
    /// Variance of the taper statistic along a list of T.
    VarianceScan(Common),
    /// Exact samples of the process on a window.
    Sample(Common),
    /// Reconstruct the number of particles in B from the outside.
    Demo(Common),
    /// Compare the Fredholm determinant with sampled generating functions.
    FredholmCheck(Common),
}

fn execute(kind: ExperimentKind, common: Common) -> Result<Option<String>> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(k) = config.kind {
        if k != kind {
            bail!("config is for {}, not {}", kind_name(k), kind_name(kind));
        }
    }
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    if common.out.is_some() {
        config.output = common.out;
    }
    let sink = Sink {
        hash: config.hash(),
        path: config.output.clone(),
    };
    let outcome = run(kind, &config, &sink)?;
    for line in &outcome.lines {
        eprintln!("{line}");
    }
    Ok(outcome.flag)
}

fn main() -> ExitCode {
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
    let (kind, common) = match cli.command {
        Command::Eval(c) => (ExperimentKind::Eval, c),
        Command::Bounds(c) => (ExperimentKind::Bounds, c),
        Command::VarianceScan(c) => (ExperimentKind::VarianceScan, c),
        Command::Sample(c) => (ExperimentKind::Sample, c),
        Command::Demo(c) => (ExperimentKind::Demo, c),
        Command::FredholmCheck(c) => (ExperimentKind::FredholmCheck, c),
    };
    match execute(kind, common) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(flag)) => {
            eprintln!("flagged: {flag}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
