//! `gridledger` command-line harness: runs the five experiments, writes CSV
//! results under `--out`, and exits nonzero if any acceptance gate fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gridledger::experiments::{run_all, run_experiment, write_all, ExpResult, RunConfig, Summary};

mod plots;

#[derive(Parser, Debug)]
#[command(name = "gridledger", version, about = "Hybrid settlement ledger experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// `key=value` run configuration; defaults apply to omitted keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Also render SVG figures from the gas series.
    #[arg(long, global = true)]
    emit_plots: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Tamper detection by replay audit.
    Exp1,
    /// Gas comparison of full submission versus digest commitment.
    Exp2,
    /// Carbon registry invariant enforcement.
    Exp3,
    /// Accumulator verification gas across set sizes.
    Exp4,
    /// Identity-gated selective disclosure.
    Exp5,
    /// Every experiment plus `summary.csv`.
    All,
}

impl Command {
    fn id(self) -> Option<&'static str> {
        match self {
            Command::Exp1 => Some("exp1"),
            Command::Exp2 => Some("exp2"),
            Command::Exp3 => Some("exp3"),
            Command::Exp4 => Some("exp4"),
            Command::Exp5 => Some("exp5"),
            Command::All => None,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.workload.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn print_result(res: &ExpResult) {
    println!("== {} ==", res.id);
    for m in &res.metrics {
        println!("  {:<32} {} {}", m.name, m.value, m.unit);
    }
    for g in &res.gates {
        println!("  [{}] {} ({})", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
}

fn print_summary(summary: &Summary, config: &RunConfig) {
    println!("== summary ==");
    println!("  gas schedule: {}", config.schedule);
    println!("  {:<6} {:<24} {:<24} {:<16} status", "exp", "metric", "measured", "reported");
    for r in &summary.rows {
        println!("  {:<6} {:<24} {:<24} {:<16} {}", r.experiment, r.metric, r.measured, r.reported, r.status);
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let config = load_config(cli)?;
    let started = Instant::now();
    let results = match cli.command.id() {
        Some(id) => {
            let res = run_experiment(id, &config)?;
            res.write(&cli.out.join(id), &config).with_context(|| format!("writing {}", cli.out.display()))?;
            print_result(&res);
            vec![res]
        }
        None => {
            let summary = run_all(&config)?;
            write_all(&summary, &config, &cli.out)?;
            summary.results.iter().for_each(print_result);
            print_summary(&summary, &config);
            summary.results
        }
    };
    if cli.emit_plots {
        for path in plots::emit(&results, &cli.out)? {
            println!("  plot {}", path.display());
        }
    }
    println!("finished in {:.2} s, output in {}", started.elapsed().as_secs_f64(), cli.out.display());
    Ok(results.iter().all(ExpResult::passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more acceptance gates failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
