//! Plot-ready multi-series files: one time column, one value column per run.

use crate::error::{Error, Result};
use crate::simulator::Trace;

/// What to extract from each trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotQuantity {
    /// A parameter estimate, 1-based (matching the `alphaI` trace columns).
    Param(usize),
    /// Lyapunov function of the undelayed synchronization error.
    V,
}

impl PlotQuantity {
    /// Stem for the output file name: `param3`, `V`, ...
    pub fn file_stem(&self) -> String {
        match self {
            PlotQuantity::Param(i) => format!("param{i}"),
            PlotQuantity::V => "V".to_string(),
        }
    }
}

/// Renders labeled traces into one CSV with columns `t,<label>,...`.
///
/// All traces must live on the same time grid (same horizon, decimation and
/// no early divergence); anything else is reported as an error rather than
/// silently resampled.
pub fn plot_data(traces: &[(String, Trace<f64>)], quantity: PlotQuantity) -> Result<String> {
    let (first_label, base) = traces
        .first()
        .ok_or_else(|| Error::Query("no traces to plot".into()))?;
    for (label, trace) in traces {
        let same_grid = trace.rows().len() == base.rows().len()
            && trace
                .rows()
                .iter()
                .zip(base.rows())
                .all(|(a, b)| a.t == b.t);
        if !same_grid {
            return Err(Error::Query(format!(
                "trace '{label}' is not on the same time grid as '{first_label}'"
            )));
        }
        if let PlotQuantity::Param(i) = quantity {
            if i == 0 || i > trace.param_dim() {
                return Err(Error::Query(format!(
                    "parameter index {i} out of range 1..={} for trace '{label}'",
                    trace.param_dim()
                )));
            }
        }
    }

    let mut out = String::from("t");
    for (label, _) in traces {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for row_idx in 0..base.rows().len() {
        out.push_str(&format!("{:.16e}", base.rows()[row_idx].t));
        for (_, trace) in traces {
            let row = &trace.rows()[row_idx];
            let value = match quantity {
                PlotQuantity::Param(i) => row.alpha[i - 1],
                PlotQuantity::V => row.v,
            };
            out.push_str(&format!(",{value:.16e}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::config::{load_config, GainSpec};
    use super::super::runner::run_experiment;
    use super::*;

    fn two_traces() -> Vec<(String, Trace<f64>)> {
        let mut cfg = load_config("lorenz-table1").unwrap();
        cfg.r = vec![1];
        cfg.t_final = 0.2;
        // Coarser, unit-gain variant so the unit test stays fast; the
        // bundled step size is tied to the bundled L (see the config).
        cfg.h = 0.001;
        cfg.l = GainSpec::Scalar(1.0);
        cfg.decimation = 50;
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_experiment(&cfg, dir.path(), 1).unwrap();
        super::super::runner::load_dir_traces(outcome.out_dir.as_path())
            .unwrap()
            .1
    }

    #[test]
    fn emits_one_column_per_series() {
        let traces = two_traces();
        let csv = plot_data(&traces, PlotQuantity::Param(3)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,chen,proposed-r1"));
        assert_eq!(lines.count(), 5); // 0, 0.05, 0.1, 0.15, 0.2

        let v_csv = plot_data(&traces, PlotQuantity::V).unwrap();
        // Both methods start from the same error, so V(0) must agree.
        let first = v_csv.lines().nth(1).unwrap();
        let cells: Vec<&str> = first.split(',').collect();
        assert_eq!(cells[1], cells[2]);
        assert_eq!(cells[0].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn rejects_empty_sets_mismatched_grids_and_bad_indices() {
        assert!(plot_data(&[], PlotQuantity::V).is_err());

        let traces = two_traces();
        assert!(plot_data(&traces, PlotQuantity::Param(0)).is_err());
        assert!(plot_data(&traces, PlotQuantity::Param(5)).is_err());

        let mut short = two_traces();
        short[1].1 = {
            let rows = short[0].1.rows()[..3].to_vec();
            Trace::from_rows(3, 4, 0, rows, None).unwrap()
        };
        let err = plot_data(&short, PlotQuantity::V).unwrap_err().to_string();
        assert!(err.contains("time grid"), "{err}");
    }

    #[test]
    fn file_stems_name_the_quantity() {
        assert_eq!(PlotQuantity::Param(4).file_stem(), "param4");
        assert_eq!(PlotQuantity::V.file_stem(), "V");
    }
}
