//! Lock-step integration of drive, response block(s) and parameter estimate.
//!
//! A run integrates, on one fixed grid of step `h`:
//!
//! * the drive `ẋ = f(x) + F(x)θ`,
//! * `r + 1` response copies `ẏᵢ = f(yᵢ) + F(yᵢ)α + uᵢ`, block `i` coupled
//!   to the delayed drive state `xᵢ(t) = x(t − i·δ)` (block 0 undelayed),
//! * the shared estimate `α` under the selected adaptation law, with `ėᵢ`
//!   supplied analytically from the derivatives already computed in-step.
//!
//! Undelayed runs (`r = 0`) carry the drive inside the integrated vector, so
//! controller cancellations hold exactly at every integrator stage. Delayed
//! runs integrate the drive separately on a half-step grid: the RK4 stage
//! times `t`, `t + h/2`, `t + h` then always hit stored history samples and
//! no interpolation is ever needed. Delays must be integer multiples of `h`
//! for the same reason; this also pins the pre-history kink of each delayed
//! block (the moment `x(t − i·δ)` starts moving) to a step boundary, so no
//! integration step straddles a derivative discontinuity.
//!
//! Pre-history is constant: `x(s) = x0` for `s ≤ 0`, and all response blocks
//! start at `y0`. Adaptation is held (`α̇ = 0`) until `t ≥ r·δ`: before that,
//! the delayed blocks all read the same pre-history point, the stacked
//! regressor is rank-deficient, and the start-up transient would kick `α`
//! along its null space. Controllers stay active throughout, so the blocks
//! synchronize during the warm-up and the law starts from live data.

mod history;
mod rk4;
mod trace;

pub use history::DelayHistory;
pub use rk4::rk4_step;
pub use trace::{Sample, Trace};

use nalgebra::{DMatrix, DVector};

use crate::adaptation::{self, EdotWeighting};
use crate::analysis;
use crate::controllers;
use crate::error::{Error, Result};
use crate::gains::Gain;
use crate::models::{ParametricModel, Params, State};
use crate::scalar::Real;

/// Synchronization/identification scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Unit-gain controller with the gradient law `α̇ = −Fᵀ(x)e`.
    Chen,
    /// Gain-weighted controller with the derivative-aware law.
    Proposed,
    /// Proposed scheme on `r + 1` delay blocks sharing one estimate.
    ProposedAugmented,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Chen => "chen",
            Method::Proposed => "proposed",
            Method::ProposedAugmented => "proposed-augmented",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chen" => Ok(Method::Chen),
            "proposed" => Ok(Method::Proposed),
            "proposed-augmented" => Ok(Method::ProposedAugmented),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected chen, proposed or proposed-augmented)"
            ))),
        }
    }
}

/// Everything needed to run one simulation.
///
/// `delta` is only consulted when `r > 0`; the plain methods require
/// `r = 0`. The horizon is rounded to the nearest whole step.
#[derive(Debug)]
pub struct SimSetup<T: Real> {
    pub model: ParametricModel<T>,
    pub method: Method,
    /// Number of extra delay blocks.
    pub r: usize,
    /// Delay spacing δ in seconds; must be an integer multiple of `h`.
    pub delta: T,
    /// Integration step in seconds.
    pub h: T,
    /// Simulated horizon in seconds.
    pub t_final: T,
    pub x0: State<T>,
    pub y0: State<T>,
    /// True drive parameters.
    pub theta: Params<T>,
    /// Initial estimate.
    pub alpha0: Params<T>,
    pub k: Gain<T>,
    pub l: Gain<T>,
    /// Record every `decimation`-th grid point (plus the final one).
    pub decimation: usize,
    /// Freeze `α` at `alpha0` (isolates the controller from the law).
    pub hold_alpha: bool,
    /// `ė` weighting inside the augmented law.
    pub edot_weighting: EdotWeighting,
}

struct Plan {
    n: usize,
    m: usize,
    steps: usize,
    /// δ/h (0 when no delays are in play).
    delay_ratio: usize,
}

impl<T: Real> SimSetup<T> {
    fn plan(&self) -> Result<Plan> {
        let n = self.model.state_dim();
        let m = self.model.param_dim();
        let check = |name: &str, v: &DVector<T>, want: usize| -> Result<()> {
            if v.len() != want {
                return Err(Error::InvalidSetup(format!(
                    "{name} has length {}, model wants {want}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSetup(format!(
                    "{name} has non-finite entries"
                )));
            }
            Ok(())
        };
        check("x0", &self.x0, n)?;
        check("y0", &self.y0, n)?;
        check("theta", &self.theta, m)?;
        check("alpha0", &self.alpha0, m)?;
        if self.k.dim() != n || self.l.dim() != n {
            return Err(Error::InvalidSetup(format!(
                "gains must be {n}x{n} to match the model state"
            )));
        }
        if !(self.h > T::zero() && self.h.is_finite()) {
            return Err(Error::InvalidSetup(format!(
                "step h must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_final >= T::zero() && self.t_final.is_finite()) {
            return Err(Error::InvalidSetup(format!(
                "horizon t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.decimation == 0 {
            return Err(Error::InvalidSetup("decimation must be at least 1".into()));
        }
        if self.r > 0 && self.method != Method::ProposedAugmented {
            return Err(Error::InvalidSetup(format!(
                "method '{}' does not use delay blocks; set r = 0",
                self.method
            )));
        }

        let ratio = (self.t_final / self.h)
            .to_f64()
            .ok_or(Error::NonFinite("step count"))?;
        let steps = ratio.round();
        if steps > 1e9 {
            return Err(Error::InvalidSetup(format!(
                "horizon of {steps} steps is out of range"
            )));
        }
        let steps = steps as usize;

        let delay_ratio = if self.r > 0 {
            if !(self.delta > T::zero() && self.delta.is_finite()) {
                return Err(Error::InvalidSetup(format!(
                    "delay delta must be positive, got {}",
                    self.delta
                )));
            }
            let ratio = (self.delta / self.h)
                .to_f64()
                .ok_or(Error::NonFinite("delay ratio"))?;
            let d = ratio.round();
            if d < 1.0 || (ratio - d).abs() > 1e-6 * ratio.max(1.0) {
                return Err(Error::InvalidSetup(format!(
                    "delta = {} must be a whole multiple of h = {}",
                    self.delta, self.h
                )));
            }
            d as usize
        } else {
            0
        };

        Ok(Plan {
            n,
            m,
            steps,
            delay_ratio,
        })
    }
}

/// Runs the configured simulation.
///
/// Divergence (any non-finite value while stepping) truncates the trace and
/// stamps it with the divergence time rather than failing the call; genuine
/// setup problems are returned as errors.
pub fn simulate<T: Real>(setup: &SimSetup<T>) -> Result<Trace<T>> {
    let plan = setup.plan()?;
    if setup.r == 0 {
        simulate_undelayed(setup, &plan)
    } else {
        simulate_augmented(setup, &plan)
    }
}

fn simulate_undelayed<T: Real>(setup: &SimSetup<T>, plan: &Plan) -> Result<Trace<T>> {
    let (n, m) = (plan.n, plan.m);
    let h = setup.h;
    let mut s = concat(&[&setup.x0, &setup.y0, &setup.alpha0]);
    let mut rows = Vec::with_capacity(plan.steps / setup.decimation + 2);
    let mut diverged = None;

    for k in 0..=plan.steps {
        let t = h * T::from_config(k as f64);
        if k % setup.decimation == 0 || k == plan.steps {
            rows.push(undelayed_sample(setup, n, m, t, &s)?);
        }
        if k == plan.steps {
            break;
        }
        let mut rhs = |ts: T, ss: &DVector<T>| undelayed_rhs(setup, n, m, ts, ss);
        match rk4_step(&mut rhs, t, &s, h) {
            Ok(next) => s = next,
            Err(Error::Divergence { t }) => {
                diverged = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Trace::from_rows(n, m, 0, rows, diverged)
}

fn undelayed_rhs<T: Real>(
    setup: &SimSetup<T>,
    n: usize,
    m: usize,
    _t: T,
    s: &DVector<T>,
) -> Result<DVector<T>> {
    let x = s.rows(0, n).into_owned();
    let y = s.rows(n, n).into_owned();
    let alpha = s.rows(2 * n, m).into_owned();

    let xdot = setup.model.drive_deriv(&x, &setup.theta)?;
    let u = match setup.method {
        Method::Chen => controllers::chen_controller(&setup.model, &y, &x, &alpha)?,
        _ => controllers::proposed_controller(&setup.model, &y, &x, &alpha, &setup.k)?,
    };
    let ydot = setup.model.response_deriv(&y, &alpha, &u)?;

    let alphadot = if setup.hold_alpha {
        DVector::zeros(m)
    } else {
        let fx = setup.model.coupling(&x)?;
        let e = &y - &x;
        match setup.method {
            Method::Chen => adaptation::chen_law(&fx, &e)?,
            _ => {
                let edot = &ydot - &xdot;
                adaptation::proposed_law(&fx, &e, &edot, &setup.k, &setup.l)?
            }
        }
    };
    Ok(concat(&[&xdot, &ydot, &alphadot]))
}

fn undelayed_sample<T: Real>(
    setup: &SimSetup<T>,
    n: usize,
    m: usize,
    t: T,
    s: &DVector<T>,
) -> Result<Sample<T>> {
    let x = s.rows(0, n).into_owned();
    let y = s.rows(n, n).into_owned();
    let alpha = s.rows(2 * n, m).into_owned();
    let e = &y - &x;
    let delta = &alpha - &setup.theta;
    let fx = setup.model.coupling(&x)?;
    let g = analysis::gram(&fx, &setup.l)?;
    Ok(Sample {
        t,
        v: analysis::lyapunov_sync(&e),
        v1: analysis::lyapunov_joint(&e, &delta),
        min_eig_g: analysis::min_symmetric_eig(&g),
        x,
        y_blocks: vec![y],
        alpha,
    })
}

fn simulate_augmented<T: Real>(setup: &SimSetup<T>, plan: &Plan) -> Result<Trace<T>> {
    let (n, m, r, d) = (plan.n, plan.m, setup.r, plan.delay_ratio);
    let h = setup.h;
    let half = h * T::from_config(0.5);

    // Enough history for the oldest lookup, t + h − r·δ, plus slack.
    let capacity = 2 * r * d + 8;
    let mut hist = DelayHistory::new(half, T::zero(), setup.x0.clone(), capacity)?;
    let mut xcur = setup.x0.clone();
    let mut drive_rhs = |_t: T, xs: &DVector<T>| setup.model.drive_deriv(xs, &setup.theta);

    let mut parts: Vec<&DVector<T>> = vec![&setup.y0; r + 1];
    parts.push(&setup.alpha0);
    let mut s = concat(&parts);

    let mut frozen = vec![false; r + 1];
    let mut rows = Vec::with_capacity(plan.steps / setup.decimation + 2);
    let mut diverged = None;

    'main: for k in 0..=plan.steps {
        let t = h * T::from_config(k as f64);
        if k % setup.decimation == 0 || k == plan.steps {
            rows.push(augmented_sample(setup, n, m, r, t, &s, &hist)?);
        }
        if k == plan.steps {
            break;
        }

        // Drive runs ahead to t + h on the half grid so every stage lookup
        // of this step (including block 0 at t + h) is already stored.
        for sub in 0..2u32 {
            let th = half * T::from_config((2 * k + sub as usize) as f64);
            match rk4_step(&mut drive_rhs, th, &xcur, half) {
                Ok(next) => {
                    xcur = next;
                    hist.push(xcur.clone());
                }
                Err(Error::Divergence { t }) => {
                    diverged = Some(t);
                    break 'main;
                }
                Err(e) => return Err(e),
            }
        }

        // A block is frozen while its delayed state is still pre-history for
        // this whole step; the boundary lands exactly on the grid.
        for (i, f) in frozen.iter_mut().enumerate() {
            *f = k < i * d;
        }

        let mut rhs =
            |ts: T, ss: &DVector<T>| augmented_rhs(setup, n, m, r, &hist, &frozen, ts, ss);
        match rk4_step(&mut rhs, t, &s, h) {
            Ok(next) => s = next,
            Err(Error::Divergence { t }) => {
                diverged = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Trace::from_rows(n, m, r, rows, diverged)
}

#[allow(clippy::too_many_arguments)]
fn augmented_rhs<T: Real>(
    setup: &SimSetup<T>,
    n: usize,
    m: usize,
    r: usize,
    hist: &DelayHistory<T>,
    frozen: &[bool],
    t: T,
    s: &DVector<T>,
) -> Result<DVector<T>> {
    let alpha = s.rows((r + 1) * n, m).into_owned();
    let mut out = DVector::zeros((r + 1) * n + m);

    // While any block still reads constant pre-history, the regressor stack
    // is rank-deficient (all delayed states coincide) and the transient would
    // push α along its null space with nothing to pull it back. Hold the law
    // until t ≥ rδ, when every block sees live drive data; the joint energy
    // identity holds from that instant on.
    let hold = setup.hold_alpha || frozen[r];

    let mut fxs: Vec<DMatrix<T>> = Vec::with_capacity(r + 1);
    let mut es: Vec<DVector<T>> = Vec::with_capacity(r + 1);
    let mut edots: Vec<DVector<T>> = Vec::with_capacity(r + 1);

    for (i, &frozen_i) in frozen.iter().enumerate() {
        let y_i = s.rows(i * n, n).into_owned();
        let x_i = hist.delayed_state(t, i, setup.delta)?;
        let u_i = controllers::proposed_controller(&setup.model, &y_i, x_i, &alpha, &setup.k)?;
        let ydot_i = setup.model.response_deriv(&y_i, &alpha, &u_i)?;
        let xdot_i = if frozen_i {
            DVector::zeros(n)
        } else {
            setup.model.drive_deriv(x_i, &setup.theta)?
        };
        out.rows_mut(i * n, n).copy_from(&ydot_i);
        if !hold {
            fxs.push(setup.model.coupling(x_i)?);
            es.push(&y_i - x_i);
            edots.push(ydot_i - xdot_i);
        }
    }

    if !hold {
        let blocks = fxs
            .iter()
            .zip(&es)
            .zip(&edots)
            .map(|((fx, e), edot)| (fx, e, edot));
        let alphadot = adaptation::augmented_law(blocks, &setup.k, &setup.l, setup.edot_weighting)?;
        out.rows_mut((r + 1) * n, m).copy_from(&alphadot);
    }
    Ok(out)
}

fn augmented_sample<T: Real>(
    setup: &SimSetup<T>,
    n: usize,
    m: usize,
    r: usize,
    t: T,
    s: &DVector<T>,
    hist: &DelayHistory<T>,
) -> Result<Sample<T>> {
    let alpha = s.rows((r + 1) * n, m).into_owned();
    let delta = &alpha - &setup.theta;

    let mut y_blocks = Vec::with_capacity(r + 1);
    let mut fxs = Vec::with_capacity(r + 1);
    let mut v = T::zero();
    let mut e_sum = T::zero();
    let mut x0_state = None;
    for i in 0..=r {
        let y_i = s.rows(i * n, n).into_owned();
        let x_i = hist.delayed_state(t, i, setup.delta)?;
        let e_i = &y_i - x_i;
        let vi = analysis::lyapunov_sync(&e_i);
        if i == 0 {
            v = vi;
            x0_state = Some(x_i.clone());
        }
        e_sum += vi;
        fxs.push(setup.model.coupling(x_i)?);
        y_blocks.push(y_i);
    }
    let g = analysis::gram_augmented(fxs.iter(), &setup.l)?;
    Ok(Sample {
        t,
        x: x0_state.expect("block 0 always present"),
        y_blocks,
        v,
        v1: e_sum + analysis::lyapunov_sync(&delta),
        min_eig_g: analysis::min_symmetric_eig(&g),
        alpha,
    })
}

/// Concatenates vectors into one flat vector.
fn concat<T: Real>(parts: &[&DVector<T>]) -> DVector<T> {
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = DVector::zeros(len);
    let mut pos = 0;
    for p in parts {
        out.rows_mut(pos, p.len()).copy_from(*p);
        pos += p.len();
    }
    out
}
