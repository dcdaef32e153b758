//! Recorded simulation output and its CSV form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{Params, State};
use crate::scalar::Real;

/// One recorded instant of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T: Real> {
    pub t: T,
    /// Drive state.
    pub x: State<T>,
    /// Response blocks; block 0 tracks the undelayed drive.
    pub y_blocks: Vec<State<T>>,
    /// Parameter estimate.
    pub alpha: Params<T>,
    /// Synchronization Lyapunov value ½‖e₀‖².
    pub v: T,
    /// Joint Lyapunov value ½Σᵢ‖eᵢ‖² + ½‖Δ‖².
    pub v1: T,
    /// Smallest eigenvalue of the (augmented) Gram matrix at this sample.
    pub min_eig_g: T,
}

/// Uniformly decimated record of a simulation run.
///
/// Times are strictly increasing. A run that blew up carries the divergence
/// time; its rows stop at the last finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T: Real> {
    n: usize,
    m: usize,
    r: usize,
    rows: Vec<Sample<T>>,
    diverged: Option<f64>,
}

impl<T: Real> Trace<T> {
    /// Builds a trace from raw rows, validating shapes and time ordering.
    pub fn from_rows(
        n: usize,
        m: usize,
        r: usize,
        rows: Vec<Sample<T>>,
        diverged: Option<f64>,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSetup(
                "trace dimensions must be positive".into(),
            ));
        }
        if rows.is_empty() {
            return Err(Error::InvalidSetup(
                "trace must contain at least one row".into(),
            ));
        }
        let mut prev_t: Option<T> = None;
        for row in &rows {
            if row.x.len() != n
                || row.alpha.len() != m
                || row.y_blocks.len() != r + 1
                || row.y_blocks.iter().any(|y| y.len() != n)
            {
                return Err(Error::DimensionMismatch {
                    context: "trace row",
                    expected: n,
                    actual: row.x.len(),
                });
            }
            if let Some(p) = prev_t {
                if row.t <= p {
                    return Err(Error::InvalidSetup(
                        "trace times must be strictly increasing".into(),
                    ));
                }
            }
            prev_t = Some(row.t);
        }
        Ok(Self {
            n,
            m,
            r,
            rows,
            diverged,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn param_dim(&self) -> usize {
        self.m
    }

    /// Number of *extra* delay blocks (0 for plain runs).
    pub fn delay_blocks(&self) -> usize {
        self.r
    }

    pub fn rows(&self) -> &[Sample<T>] {
        &self.rows
    }

    /// Divergence time, if the run blew up before its horizon.
    pub fn diverged(&self) -> Option<f64> {
        self.diverged
    }

    /// Column header, matching [`Trace::to_csv`].
    pub fn header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=self.n).map(|j| format!("x{j}")));
        cols.extend((1..=self.n).map(|j| format!("y{j}")));
        for i in 1..=self.r {
            cols.extend((1..=self.n).map(|j| format!("y{j}_b{i}")));
        }
        cols.extend((1..=self.m).map(|j| format!("alpha{j}")));
        cols.extend(["V".to_string(), "V1".to_string(), "min_eig_G".to_string()]);
        cols.join(",")
    }

    /// Serializes with ≥ 15 significant digits per value (exact round-trip
    /// for doubles), plus a trailing marker line if the run diverged.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = vec![fmt_val(row.t)];
            cells.extend(row.x.iter().map(|v| fmt_val(*v)));
            for block in &row.y_blocks {
                cells.extend(block.iter().map(|v| fmt_val(*v)));
            }
            cells.extend(row.alpha.iter().map(|v| fmt_val(*v)));
            cells.push(fmt_val(row.v));
            cells.push(fmt_val(row.v1));
            cells.push(fmt_val(row.min_eig_g));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        if let Some(t) = self.diverged {
            let _ = writeln!(out, "# diverged t={t}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads a trace back from [`Trace::to_csv`] output.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_csv(&text).map_err(|e| match e {
            Error::Parse { reason, .. } => Error::Parse {
                path: path.display().to_string(),
                reason,
            },
            other => other,
        })
    }

    /// Parses CSV text produced by [`Trace::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            path: "<csv>".into(),
            reason,
        };
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err("missing header".into()))?;
        let (n, m, r) = dims_from_header(header)?;

        let mut rows = Vec::new();
        let mut diverged = None;
        let width = 1 + n * (r + 2) + m + 3;
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# diverged t=") {
                diverged = Some(
                    rest.trim()
                        .parse::<f64>()
                        .map_err(|e| parse_err(format!("bad divergence marker: {e}")))?,
                );
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != width {
                return Err(parse_err(format!(
                    "line {}: expected {} columns, got {}",
                    lineno + 2,
                    width,
                    cells.len()
                )));
            }
            let mut vals = Vec::with_capacity(width);
            for cell in cells {
                let v: f64 = cell.parse().map_err(|e| {
                    parse_err(format!("line {}: bad number '{cell}': {e}", lineno + 2))
                })?;
                vals.push(T::from_config(v));
            }
            fn take<T: Real>(vals: &[T], pos: &mut usize, count: usize) -> State<T> {
                let slice = State::from_row_slice(&vals[*pos..*pos + count]);
                *pos += count;
                slice
            }
            let t = vals[0];
            let mut pos = 1usize;
            let x = take(&vals, &mut pos, n);
            let y_blocks: Vec<State<T>> = (0..=r).map(|_| take(&vals, &mut pos, n)).collect();
            let alpha = take(&vals, &mut pos, m);
            rows.push(Sample {
                t,
                x,
                y_blocks,
                alpha,
                v: vals[pos],
                v1: vals[pos + 1],
                min_eig_g: vals[pos + 2],
            });
        }
        Self::from_rows(n, m, r, rows, diverged)
    }
}

fn fmt_val<T: Real>(v: T) -> String {
    format!("{v:.16e}")
}

/// Recovers `(n, m, r)` from a header line, insisting on the exact column
/// naming this module writes.
fn dims_from_header(header: &str) -> Result<(usize, usize, usize)> {
    let parse_err = |reason: String| Error::Parse {
        path: "<csv>".into(),
        reason,
    };
    let cols: Vec<&str> = header.split(',').collect();
    let n = cols
        .iter()
        .skip(1)
        .take_while(|c| c.starts_with('x'))
        .count();
    let m = cols.iter().filter(|c| c.starts_with("alpha")).count();
    if n == 0 || m == 0 {
        return Err(parse_err(format!("unrecognized header '{header}'")));
    }
    let y_cols = cols.iter().filter(|c| c.starts_with('y')).count();
    if y_cols % n != 0 || y_cols == 0 {
        return Err(parse_err(format!(
            "header has {y_cols} response columns, not a multiple of n = {n}"
        )));
    }
    let r = y_cols / n - 1;
    let expected = Trace::<f64> {
        n,
        m,
        r,
        rows: Vec::new(),
        diverged: None,
    }
    .header();
    if expected != header {
        return Err(parse_err(format!(
            "header mismatch: expected '{expected}', got '{header}'"
        )));
    }
    Ok((n, m, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn sample(t: f64, r: usize) -> Sample<f64> {
        Sample {
            t,
            x: DVector::from_vec(vec![8.0, 9.0, 10.0]),
            y_blocks: (0..=r)
                .map(|i| DVector::from_vec(vec![3.0 + i as f64, 4.0, 5.0]))
                .collect(),
            alpha: DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]),
            v: 37.5,
            v1: 38.0,
            min_eig_g: 1e-12,
        }
    }

    #[test]
    fn header_matches_the_documented_layout() {
        let trace = Trace::from_rows(3, 4, 0, vec![sample(0.0, 0)], None).unwrap();
        assert_eq!(
            trace.header(),
            "t,x1,x2,x3,y1,y2,y3,alpha1,alpha2,alpha3,alpha4,V,V1,min_eig_G"
        );
        let trace = Trace::from_rows(3, 4, 2, vec![sample(0.0, 2)], None).unwrap();
        assert_eq!(
            trace.header(),
            "t,x1,x2,x3,y1,y2,y3,y1_b1,y2_b1,y3_b1,y1_b2,y2_b2,y3_b2,\
             alpha1,alpha2,alpha3,alpha4,V,V1,min_eig_G"
        );
    }

    #[test]
    fn csv_round_trips_exactly() {
        let rows = vec![sample(0.0, 2), sample(0.1, 2), sample(0.2, 2)];
        let trace = Trace::from_rows(3, 4, 2, rows, None).unwrap();
        let text = trace.to_csv();
        let back = Trace::<f64>::from_csv(&text).unwrap();
        assert_eq!(trace, back);
        // Serialization itself is deterministic.
        assert_eq!(text, back.to_csv());
    }

    #[test]
    fn awkward_floats_survive_the_round_trip() {
        let mut row = sample(0.0, 0);
        row.x[0] = 1.0 / 3.0;
        row.alpha[2] = 2.6666666666666665;
        row.v = 1e-300;
        row.min_eig_g = -3.7e-17;
        let trace = Trace::from_rows(3, 4, 0, vec![row], None).unwrap();
        let back = Trace::<f64>::from_csv(&trace.to_csv()).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn divergence_marker_round_trips() {
        let trace = Trace::from_rows(3, 4, 0, vec![sample(0.0, 0)], Some(0.123)).unwrap();
        let text = trace.to_csv();
        assert!(text.trim_end().ends_with("# diverged t=0.123"));
        let back = Trace::<f64>::from_csv(&text).unwrap();
        assert_eq!(back.diverged(), Some(0.123));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(Trace::<f64>::from_csv("").is_err());
        assert!(Trace::<f64>::from_csv("a,b,c\n1,2,3\n").is_err());
        let trace = Trace::from_rows(3, 4, 0, vec![sample(0.0, 0)], None).unwrap();
        let text = trace.to_csv();
        let truncated: String = text.lines().next().unwrap().to_string() + "\n1.0,2.0\n";
        assert!(Trace::<f64>::from_csv(&truncated).is_err());
    }

    #[test]
    fn shape_and_ordering_violations_are_rejected() {
        let rows = vec![sample(0.0, 0), sample(0.0, 0)];
        assert!(Trace::from_rows(3, 4, 0, rows, None).is_err());
        let rows = vec![sample(0.0, 1)];
        assert!(Trace::from_rows(3, 4, 0, rows, None).is_err());
        assert!(Trace::<f64>::from_rows(3, 4, 0, Vec::new(), None).is_err());
    }
}
