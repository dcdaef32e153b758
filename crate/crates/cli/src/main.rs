//! `adaptsync` — runs synchronization/identification sweeps from a config
//! file and inspects the directories they write.

use std::path::{Path, PathBuf};
use std::thread;

use adaptsync::experiment::{self, PlotQuantity};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Drive/response synchronization experiments: run configured method sweeps,
/// re-derive their reports, and export plot-ready data.
#[derive(Parser)]
#[command(name = "adaptsync", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment configuration and write all artifacts.
    Run {
        /// Bundled config name or path to a TOML file.
        ///
        /// Bundled: `lorenz-table1`, `rossler`.
        config: String,
        /// Output directory (overrides the config's `out_dir`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Concurrent simulations (default: all cores).
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
    },
    /// Recompute and print a run directory's time-to-threshold report.
    Report {
        /// Directory a `run` invocation wrote.
        trace_dir: PathBuf,
    },
    /// Write one multi-series CSV (t plus one column per run) for plotting.
    PlotData {
        /// Directory a `run` invocation wrote.
        trace_dir: PathBuf,
        /// What to extract from each trace.
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// 1-based parameter index; required for `param`.
        #[arg(long, value_name = "I")]
        index: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Quantity {
    /// A parameter estimate (pick one with --index).
    Param,
    /// Lyapunov function of the synchronization error.
    #[value(name = "V", alias = "v")]
    V,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            workers,
        } => run(&config, out, workers),
        Command::Report { trace_dir } => {
            let report = experiment::recompute_report(&trace_dir)
                .with_context(|| format!("reading run directory {}", trace_dir.display()))?;
            print!("{}", report.render_text());
            Ok(())
        }
        Command::PlotData {
            trace_dir,
            quantity,
            index,
        } => plot(&trace_dir, quantity, index),
    }
}

fn run(config: &str, out: Option<PathBuf>, workers: Option<usize>) -> Result<()> {
    let cfg = experiment::load_config(config)?;
    let out_dir = out
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .context("no output directory: pass --out or set out_dir in the config")?;
    let workers = workers.unwrap_or_else(|| {
        thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let outcome = experiment::run_experiment(&cfg, &out_dir, workers)?;
    for run in &outcome.runs {
        if let Some(t) = run.diverged {
            eprintln!("warning: run '{}' diverged at t = {t}", run.label);
        }
    }
    print!("{}", outcome.report.render_text());
    println!("artifacts in {}", out_dir.display());
    Ok(())
}

fn plot(dir: &Path, quantity: Quantity, index: Option<usize>) -> Result<()> {
    let quantity = match (quantity, index) {
        (Quantity::Param, Some(i)) => PlotQuantity::Param(i),
        (Quantity::Param, None) => bail!("--quantity param needs --index"),
        (Quantity::V, None) => PlotQuantity::V,
        (Quantity::V, Some(_)) => bail!("--index only applies to --quantity param"),
    };
    let (_, traces) = experiment::load_dir_traces(dir)?;
    let csv = experiment::plot_data(&traces, quantity)?;
    let path = dir.join(format!("plot_{}.csv", quantity.file_stem()));
    std::fs::write(&path, csv)?;
    println!("{}", path.display());
    Ok(())
}
