//! Convergence metrics and identifiability diagnostics.
//!
//! Quadratic Lyapunov functions measure how far a run is from synchronization
//! ([`lyapunov_sync`]) and from full parameter identification
//! ([`lyapunov_joint`]). The Gram matrix `G(x) = Fᵀ(x) Lᵀ F(x)` ([`gram`],
//! [`gram_augmented`]) is the quantity whose positive definiteness decides
//! whether the parameter error can keep shrinking; [`min_r`] gives the
//! smallest number of delay blocks that can make the augmented Gram matrix
//! full rank. [`time_to_threshold`] and [`cov_rmse`] condense traces into the
//! tabulated statistics used to compare methods.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gains::Gain;
use crate::scalar::Real;
use crate::simulator::Trace;

/// Sub-window length (seconds) for the RMSE series inside [`cov_rmse`].
pub const RMSE_SUBWINDOW_SECS: f64 = 1.0;

/// Synchronization Lyapunov function `V(e) = ½ eᵀe`.
pub fn lyapunov_sync<T: Real>(e: &DVector<T>) -> T {
    e.norm_squared() * T::from_config(0.5)
}

/// Joint Lyapunov function `V(e, Δ) = ½ eᵀe + ½ ΔᵀΔ`.
///
/// Zero exactly when the response is synchronized *and* the estimate matches
/// the true parameters. For the delay-augmented scheme, pass the stacked
/// error of all blocks.
pub fn lyapunov_joint<T: Real>(e: &DVector<T>, delta: &DVector<T>) -> T {
    lyapunov_sync(e) + lyapunov_sync(delta)
}

/// Gram matrix `G(x) = Fᵀ(x) Lᵀ F(x)`.
///
/// Symmetric positive semidefinite for SPD `L`; positive *definite* only if
/// `F(x)` has full column rank, which requires `m ≤ n`.
pub fn gram<T: Real>(fx: &DMatrix<T>, l: &Gain<T>) -> Result<DMatrix<T>> {
    if fx.nrows() != l.dim() {
        return Err(Error::DimensionMismatch {
            context: "gram coupling rows vs L",
            expected: l.dim(),
            actual: fx.nrows(),
        });
    }
    Ok(fx.transpose() * l.matrix().transpose() * fx)
}

/// Augmented Gram matrix `G* = Σᵢ Fᵀ(xᵢ) Lᵀ F(xᵢ)` over delay blocks.
///
/// Equals the Gram matrix of the vertically stacked coupling under the
/// block-diagonal extension of `L`. Summing over blocks at different states
/// can restore full rank when a single block cannot (`m > n`).
pub fn gram_augmented<'a, T, I>(blocks: I, l: &Gain<T>) -> Result<DMatrix<T>>
where
    T: Real,
    I: IntoIterator<Item = &'a DMatrix<T>>,
{
    let mut sum: Option<DMatrix<T>> = None;
    for fx in blocks {
        let g = gram(fx, l)?;
        sum = Some(match sum {
            Some(acc) => acc + g,
            None => g,
        });
    }
    sum.ok_or_else(|| Error::InvalidSetup("augmented Gram needs at least one block".into()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eig<T: Real>(matrix: &DMatrix<T>) -> T {
    SymmetricEigen::new(matrix.clone()).eigenvalues.min()
}

/// Smallest number of delay blocks `r` such that the stacked coupling can
/// have full column rank: `r = ⌈m/n − 1⌉`, clamped at zero.
pub fn min_r(n: usize, m: usize) -> usize {
    assert!(n >= 1 && m >= 1, "dimensions must be positive");
    if m <= n {
        0
    } else {
        (m - 1) / n
    }
}

/// Earliest time after which `|αᵢ(t) − θᵢ| ≤ rel_tol·|θᵢ|` holds for the rest
/// of the trace, or `None` if the estimate keeps leaving the band.
///
/// "Reached" means *permanent* entry: a transient swing through the band does
/// not count. `theta_true` must be nonzero for a relative band to make sense;
/// use [`time_to_band`] for parameters whose true value is zero.
pub fn time_to_threshold<T: Real>(
    trace: &Trace<T>,
    param_index: usize,
    theta_true: T,
    rel_tol: T,
) -> Result<Option<T>> {
    if theta_true == T::zero() {
        return Err(Error::Query(
            "relative threshold is undefined for a zero true value; use an absolute band".into(),
        ));
    }
    time_to_band(trace, param_index, theta_true, rel_tol * theta_true.abs())
}

/// Like [`time_to_threshold`] but with an absolute band half-width.
pub fn time_to_band<T: Real>(
    trace: &Trace<T>,
    param_index: usize,
    center: T,
    band: T,
) -> Result<Option<T>> {
    if trace.rows().is_empty() {
        return Err(Error::Query("empty trace".into()));
    }
    if param_index >= trace.param_dim() {
        return Err(Error::Query(format!(
            "parameter index {param_index} out of range for m = {}",
            trace.param_dim()
        )));
    }
    if !(band > T::zero() && band.is_finite()) {
        return Err(Error::Query(format!(
            "band must be positive and finite, got {band}"
        )));
    }
    let rows = trace.rows();
    let last_outside = rows
        .iter()
        .rposition(|row| (row.alpha[param_index] - center).abs() > band);
    Ok(match last_outside {
        None => Some(rows[0].t),
        Some(i) if i + 1 == rows.len() => None,
        Some(i) => Some(rows[i + 1].t),
    })
}

/// Coefficient of variation (σ/|μ|) of the windowed RMSE of `αᵢ − θᵢ` over
/// the last `window` seconds of the trace.
///
/// The RMSE series has one entry per output sample inside the window, each
/// taken over the trailing [`RMSE_SUBWINDOW_SECS`] of samples. A series with
/// zero mean (perfect identification throughout) has no meaningful CoV and
/// is reported as an error.
pub fn cov_rmse<T: Real>(
    trace: &Trace<T>,
    param_index: usize,
    theta_true: T,
    window: T,
) -> Result<T> {
    let rows = trace.rows();
    if rows.len() < 2 {
        return Err(Error::Query("trace too short for a CoV window".into()));
    }
    if param_index >= trace.param_dim() {
        return Err(Error::Query(format!(
            "parameter index {param_index} out of range for m = {}",
            trace.param_dim()
        )));
    }
    let t_start = rows[0].t;
    let t_end = rows[rows.len() - 1].t;
    let window_ok = window > T::zero() && window <= t_end - t_start;
    if !window_ok {
        return Err(Error::Query(format!(
            "CoV window {window} must be positive and within the trace span {}",
            t_end - t_start
        )));
    }

    let sub = T::from_config(RMSE_SUBWINDOW_SECS);
    let cutoff = t_end - window;
    let mut rmse = Vec::new();
    let mut lo = 0usize;
    for (k, row) in rows.iter().enumerate() {
        if row.t <= cutoff {
            continue;
        }
        while rows[lo].t <= row.t - sub {
            lo += 1;
        }
        let mut acc = T::zero();
        for r in &rows[lo..=k] {
            let err = r.alpha[param_index] - theta_true;
            acc += err * err;
        }
        let count = T::from_config((k - lo + 1) as f64);
        rmse.push((acc / count).sqrt());
    }

    let len = T::from_config(rmse.len() as f64);
    let mean = rmse.iter().copied().fold(T::zero(), |a, b| a + b) / len;
    if mean == T::zero() {
        return Err(Error::Query(
            "RMSE series has zero mean; CoV is undefined".into(),
        ));
    }
    if rmse.len() < 2 {
        return Ok(T::zero());
    }
    let var = rmse
        .iter()
        .map(|v| (*v - mean) * (*v - mean))
        .fold(T::zero(), |a, b| a + b)
        / T::from_config((rmse.len() - 1) as f64);
    Ok(var.sqrt() / mean.abs())
}

/// Median of a list of values (mean of the middle pair for even lengths).
pub fn median<T: Real>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut xs: Vec<T> = values.into_iter().collect();
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mid = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) * T::from_config(0.5)
    })
}

/// Time-to-threshold table: one row per method/augmentation setting, one
/// column per band width.
///
/// Thresholds are percentages (1.0 means a ±1% band) and must be listed from
/// loosest to tightest; `None` marks a band the estimate never permanently
/// entered.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub thresholds_pct: Vec<f64>,
    pub rows: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub label: String,
    pub times: Vec<Option<f64>>,
}

impl ThresholdReport {
    /// Checks internal consistency: thresholds strictly decreasing, row
    /// lengths matching, and times non-decreasing as the band tightens
    /// (a tighter band can never be reached earlier).
    pub fn validate(&self) -> Result<()> {
        let ordered = self
            .thresholds_pct
            .windows(2)
            .all(|w| w[1] < w[0] && w[1] > 0.0);
        if !ordered {
            return Err(Error::InvalidSetup(
                "thresholds must be positive and strictly decreasing".into(),
            ));
        }
        for row in &self.rows {
            if row.times.len() != self.thresholds_pct.len() {
                return Err(Error::InvalidSetup(format!(
                    "row '{}' has {} entries for {} thresholds",
                    row.label,
                    row.times.len(),
                    self.thresholds_pct.len()
                )));
            }
            let mut prev: Option<f64> = None;
            let mut unreached = false;
            for entry in &row.times {
                match entry {
                    Some(t) => {
                        if unreached || prev.is_some_and(|p| *t < p - 1e-12) {
                            return Err(Error::InvalidSetup(format!(
                                "row '{}' times decrease as the band tightens",
                                row.label
                            )));
                        }
                        prev = Some(*t);
                    }
                    None => unreached = true,
                }
            }
        }
        Ok(())
    }

    /// Aligned, human-readable table.
    pub fn render_text(&self) -> String {
        let mut header = vec!["method".to_string()];
        header.extend(self.thresholds_pct.iter().map(|p| format!("{p}%")));
        let mut body: Vec<Vec<String>> = vec![header];
        for row in &self.rows {
            let mut cells = vec![row.label.clone()];
            cells.extend(row.times.iter().map(|t| match t {
                Some(t) => format!("{t:.1}"),
                None => "not reached".to_string(),
            }));
            body.push(cells);
        }
        let cols = body[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| body.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &body {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                line.push_str(&format!("{cell:<width$}", width = widths[c]));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// Long-format CSV: `method,threshold_pct,time_s` with an empty time for
    /// bands that were never reached.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,threshold_pct,time_s\n");
        for row in &self.rows {
            for (pct, t) in self.thresholds_pct.iter().zip(&row.times) {
                match t {
                    Some(t) => out.push_str(&format!("{},{},{}\n", row.label, pct, t)),
                    None => out.push_str(&format!("{},{},\n", row.label, pct)),
                }
            }
        }
        out
    }
}
