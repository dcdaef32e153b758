//! Executes a configured sweep and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::analysis::{self, ThresholdReport, ThresholdRow};
use crate::error::{Error, Result};
use crate::simulator::{simulate, Method, SimSetup, Trace};

use super::config::{ExperimentConfig, RunPlan};

/// Everything computed about one finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    pub method: Method,
    pub r: usize,
    /// Trace file name inside the output directory.
    pub file: String,
    /// Last recorded time (shorter than the horizon when diverged).
    pub final_t: f64,
    pub diverged: Option<f64>,
    /// `α(T) − θ`, per parameter.
    pub final_err: Vec<f64>,
    /// Time-to-threshold of the report parameter, one entry per configured
    /// threshold, `None` when never permanently inside the band.
    pub times: Vec<Option<f64>>,
    /// CoV of the report parameter's windowed RMSE; `None` when the window
    /// does not fit or the error is identically zero.
    pub cov: Option<f64>,
    /// Median of `λ_min(G*)` over the recorded samples.
    pub median_min_eig: f64,
}

/// Result of [`run_experiment`]: per-run summaries plus the aggregate table.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub out_dir: PathBuf,
    pub runs: Vec<RunSummary>,
    pub report: ThresholdReport,
}

/// Absolute half-width of a `pct`-percent identification band around
/// `theta[idx]`. A zero parameter has no relative scale of its own, so the
/// band falls back to unit scale: `pct` percent of 1.0. Tying it to the other
/// parameters' magnitudes instead would make the zero-parameter band orders
/// of magnitude wider than any estimate bias of interest.
pub fn band_half_width(theta: &[f64], idx: usize, pct: f64) -> f64 {
    let scale = if theta[idx] != 0.0 {
        theta[idx].abs()
    } else {
        1.0
    };
    pct / 100.0 * scale
}

/// Runs every (method, r) combination of `cfg`, at most `workers` at a time,
/// and writes all artifacts into `out_dir`:
/// `config.toml`, one `trace_<label>.csv` per run, `runs.csv`,
/// `thresholds.txt` / `thresholds.csv`, and `summary.csv`.
///
/// Byte-identical artifacts for identical configs, whatever the worker
/// count. A diverging run is recorded (truncated trace, `diverged` column),
/// never an error.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
) -> Result<ExperimentOutcome> {
    let plans = cfg.expand()?;
    let setups: Result<Vec<SimSetup<f64>>> = plans.iter().map(|p| cfg.to_setup(p)).collect();
    let setups = setups?;

    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.toml"), cfg.to_toml()?)?;

    let traces = simulate_all(&setups, workers)?;

    let mut runs = Vec::with_capacity(plans.len());
    for (plan, trace) in plans.iter().zip(&traces) {
        let file = format!("trace_{}.csv", plan.label);
        trace.write_csv(&out_dir.join(&file))?;
        runs.push(summarize(cfg, plan, trace, file)?);
    }

    let report = build_report(cfg, &runs)?;
    fs::write(out_dir.join("thresholds.txt"), report.render_text())?;
    fs::write(out_dir.join("thresholds.csv"), report.to_csv())?;
    fs::write(out_dir.join("runs.csv"), runs_csv(&runs))?;
    fs::write(out_dir.join("summary.csv"), summary_csv(cfg, &runs))?;

    Ok(ExperimentOutcome {
        out_dir: out_dir.to_path_buf(),
        runs,
        report,
    })
}

/// Simulates all setups, claiming work through a shared counter.
fn simulate_all(setups: &[SimSetup<f64>], workers: usize) -> Result<Vec<Trace<f64>>> {
    let count = setups.len();
    let workers = workers.max(1).min(count.max(1));
    if workers <= 1 {
        return setups.iter().map(simulate).collect();
    }

    let slots: Vec<Mutex<Option<Result<Trace<f64>>>>> =
        (0..count).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let result = simulate(&setups[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .unwrap()
                .expect("every claimed slot is filled")
        })
        .collect()
}

/// Threshold times of the report parameter, one per configured threshold.
fn threshold_times(cfg: &ExperimentConfig, trace: &Trace<f64>) -> Result<Vec<Option<f64>>> {
    let idx = cfg.report_param - 1;
    cfg.thresholds
        .iter()
        .map(|&pct| {
            let band = band_half_width(&cfg.theta, idx, pct);
            analysis::time_to_band(trace, idx, cfg.theta[idx], band)
        })
        .collect()
}

fn summarize(
    cfg: &ExperimentConfig,
    plan: &RunPlan,
    trace: &Trace<f64>,
    file: String,
) -> Result<RunSummary> {
    let rows = trace.rows();
    let last = rows.last().expect("traces always hold the initial sample");
    let idx = cfg.report_param - 1;
    Ok(RunSummary {
        label: plan.label.clone(),
        method: plan.method,
        r: plan.r,
        file,
        final_t: last.t,
        diverged: trace.diverged(),
        final_err: (0..trace.param_dim())
            .map(|i| last.alpha[i] - cfg.theta[i])
            .collect(),
        times: threshold_times(cfg, trace)?,
        cov: analysis::cov_rmse(trace, idx, cfg.theta[idx], cfg.cov_window).ok(),
        median_min_eig: analysis::median(rows.iter().map(|row| row.min_eig_g))
            .expect("traces are never empty"),
    })
}

fn build_report(cfg: &ExperimentConfig, runs: &[RunSummary]) -> Result<ThresholdReport> {
    let report = ThresholdReport {
        thresholds_pct: cfg.thresholds.clone(),
        rows: runs
            .iter()
            .map(|run| ThresholdRow {
                label: run.label.clone(),
                times: run.times.clone(),
            })
            .collect(),
    };
    report.validate()?;
    Ok(report)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn runs_csv(runs: &[RunSummary]) -> String {
    let mut out = String::from("label,method,r,file,final_t,diverged\n");
    for run in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            run.label,
            run.method,
            run.r,
            run.file,
            run.final_t,
            run.diverged.map(|t| t.to_string()).unwrap_or_default(),
        ));
    }
    out
}

fn summary_csv(cfg: &ExperimentConfig, runs: &[RunSummary]) -> String {
    let m = cfg.theta.len();
    let mut out = String::from("label,method,r,diverged,final_t");
    for i in 1..=m {
        out.push_str(&format!(",final_err_{i}"));
    }
    out.push_str(&format!(
        ",cov_rmse_param{},median_min_eig_g\n",
        cfg.report_param
    ));
    for run in runs {
        out.push_str(&format!(
            "{},{},{},{},{}",
            run.label,
            run.method,
            run.r,
            run.diverged.map(|t| t.to_string()).unwrap_or_default(),
            fmt(run.final_t),
        ));
        for err in &run.final_err {
            out.push(',');
            out.push_str(&fmt(*err));
        }
        out.push(',');
        out.push_str(&run.cov.map(fmt).unwrap_or_default());
        out.push(',');
        out.push_str(&fmt(run.median_min_eig));
        out.push('\n');
    }
    out
}

/// Reads the resolved config stored in a run directory.
pub fn load_dir_config(dir: &Path) -> Result<ExperimentConfig> {
    let path = dir.join("config.toml");
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text, &path.display().to_string())
}

/// A run directory's traces, each tagged with its run label.
pub type LabeledTraces = Vec<(String, Trace<f64>)>;

/// Reads back all traces of a run directory, labeled as in the manifest.
pub fn load_dir_traces(dir: &Path) -> Result<(ExperimentConfig, LabeledTraces)> {
    let cfg = load_dir_config(dir)?;
    let mut traces = Vec::new();
    for plan in cfg.expand()? {
        let trace = Trace::read_csv(&dir.join(format!("trace_{}.csv", plan.label)))?;
        traces.push((plan.label, trace));
    }
    Ok((cfg, traces))
}

/// Recomputes the threshold report from the traces stored in a run
/// directory and rewrites `thresholds.txt` / `thresholds.csv`.
pub fn recompute_report(dir: &Path) -> Result<ThresholdReport> {
    let (cfg, traces) = load_dir_traces(dir)?;
    let report = ThresholdReport {
        thresholds_pct: cfg.thresholds.clone(),
        rows: traces
            .iter()
            .map(|(label, trace)| {
                Ok(ThresholdRow {
                    label: label.clone(),
                    times: threshold_times(&cfg, trace)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    report.validate()?;
    fs::write(dir.join("thresholds.txt"), report.render_text())?;
    fs::write(dir.join("thresholds.csv"), report.to_csv())?;
    Ok(report)
}
