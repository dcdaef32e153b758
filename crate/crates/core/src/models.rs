//! Parameter-affine dynamical system models `ẋ = f(x) + F(x)θ`.
//!
//! A [`ParametricModel`] bundles the parameter-free drift `f`, the coupling
//! matrix `F` and the dimensions `(n, m)`. The drive system evaluates
//! `f(x) + F(x)θ` with the true parameters `θ`; the response evaluates
//! `f(y) + F(y)α + u` with its own estimate `α` and a control input `u`.
//!
//! Built-in instances cover the Lorenz and Rössler oscillators in both the
//! square form (`m = n = 3`) and the over-parameterized response form
//! (`m = 4 > n`) whose extra coupling column makes the single-state Gram
//! matrix rank deficient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// State vector of a model (length `n`).
pub type State<T> = DVector<T>;
/// Parameter vector of a model (length `m`).
pub type Params<T> = DVector<T>;

type DriftFn<T> = dyn Fn(&State<T>) -> State<T> + Send + Sync;
type CouplingFn<T> = dyn Fn(&State<T>) -> DMatrix<T> + Send + Sync;

/// A dynamical system family `ẋ = f(x) + F(x)θ`, linear in the parameters.
///
/// Immutable after construction; a single instance can be shared by
/// concurrently running simulations.
pub struct ParametricModel<T: Real> {
    name: String,
    n: usize,
    m: usize,
    drift: Box<DriftFn<T>>,
    coupling: Box<CouplingFn<T>>,
}

impl<T: Real> std::fmt::Debug for ParametricModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

impl<T: Real> ParametricModel<T> {
    /// Wraps user-supplied `f` and `F` into a model.
    ///
    /// `f` must map a length-`n` state to a length-`n` vector and `F` to an
    /// `n × m` matrix; both must be pure. Shapes are re-checked on every
    /// evaluation.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        drift: impl Fn(&State<T>) -> State<T> + Send + Sync + 'static,
        coupling: impl Fn(&State<T>) -> DMatrix<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSetup(
                "model dimensions n and m must be positive".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            n,
            m,
            drift: Box::new(drift),
            coupling: Box::new(coupling),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// State dimension `n`.
    pub fn state_dim(&self) -> usize {
        self.n
    }

    /// Parameter dimension `m`.
    pub fn param_dim(&self) -> usize {
        self.m
    }

    /// Evaluates the parameter-free drift `f(x)`.
    pub fn drift(&self, x: &State<T>) -> Result<State<T>> {
        check_len("f input", self.n, x.len())?;
        let out = (self.drift)(x);
        check_len("f output", self.n, out.len())?;
        Ok(out)
    }

    /// Evaluates the coupling matrix `F(x)`.
    pub fn coupling(&self, x: &State<T>) -> Result<DMatrix<T>> {
        check_len("F input", self.n, x.len())?;
        let out = (self.coupling)(x);
        if out.nrows() != self.n || out.ncols() != self.m {
            return Err(Error::DimensionMismatch {
                context: "F output rows*cols",
                expected: self.n * self.m,
                actual: out.nrows() * out.ncols(),
            });
        }
        Ok(out)
    }

    /// Drive derivative `f(x) + F(x)θ`.
    pub fn drive_deriv(&self, x: &State<T>, theta: &Params<T>) -> Result<State<T>> {
        check_len("drive state", self.n, x.len())?;
        check_len("drive params", self.m, theta.len())?;
        let out = self.drift(x)? + self.coupling(x)? * theta;
        ensure_finite(&out)?;
        Ok(out)
    }

    /// Response derivative `f(y) + F(y)α + u`.
    pub fn response_deriv(
        &self,
        y: &State<T>,
        alpha: &Params<T>,
        u: &State<T>,
    ) -> Result<State<T>> {
        check_len("response state", self.n, y.len())?;
        check_len("response params", self.m, alpha.len())?;
        check_len("control input", self.n, u.len())?;
        let out = self.drift(y)? + self.coupling(y)? * alpha + u;
        ensure_finite(&out)?;
        Ok(out)
    }
}

fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

fn ensure_finite<T: Real>(v: &DVector<T>) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("model derivative"))
    }
}

/// Keys accepted by [`by_key`].
pub const MODEL_KEYS: [&str; 4] = ["lorenz", "lorenz-m4", "rossler", "rossler-m4"];

/// Looks a built-in model up by its registry key.
pub fn by_key<T: Real>(key: &str) -> Option<ParametricModel<T>> {
    match key {
        "lorenz" => Some(lorenz(false)),
        "lorenz-m4" => Some(lorenz(true)),
        "rossler" => Some(rossler(false)),
        "rossler-m4" => Some(rossler(true)),
        _ => None,
    }
}

/// Lorenz oscillator.
///
/// Drift `f(x) = [0, −x₂ − x₁x₃, x₁x₂]` with coupling columns scaling
/// `x₂ − x₁`, `x₁` and `−x₃`; the classical parameters are
/// `θ = [10, 28, 8/3]`. With `m4` the coupling gains a fourth column
/// `[0, 0, 1]ᵀ`, an extra parameter with true value zero used to exercise
/// the `m > n` regime.
pub fn lorenz<T: Real>(m4: bool) -> ParametricModel<T> {
    let m = if m4 { 4 } else { 3 };
    let name = if m4 { "lorenz-m4" } else { "lorenz" };
    ParametricModel::new(
        name,
        3,
        m,
        |x: &State<T>| DVector::from_vec(vec![T::zero(), -x[1] - x[0] * x[2], x[0] * x[1]]),
        move |x: &State<T>| {
            let mut f = DMatrix::zeros(3, m);
            f[(0, 0)] = x[1] - x[0];
            f[(1, 1)] = x[0];
            f[(2, 2)] = -x[2];
            if m4 {
                f[(2, 3)] = T::one();
            }
            f
        },
    )
    .expect("built-in model dimensions are valid")
}

/// Rössler oscillator.
///
/// Drift `f(x) = [−x₂ − x₃, x₁, x₁x₃]`; the customary parameters are
/// `θ = [0.1, 0.1, 14]`. With `m4` the coupling gains a fourth column
/// `[0, 1, 0]ᵀ` (true value zero).
pub fn rossler<T: Real>(m4: bool) -> ParametricModel<T> {
    let m = if m4 { 4 } else { 3 };
    let name = if m4 { "rossler-m4" } else { "rossler" };
    ParametricModel::new(
        name,
        3,
        m,
        |x: &State<T>| DVector::from_vec(vec![-x[1] - x[2], x[0], x[0] * x[2]]),
        move |x: &State<T>| {
            let mut f = DMatrix::zeros(3, m);
            f[(1, 0)] = x[1];
            f[(2, 1)] = T::one();
            f[(2, 2)] = -x[2];
            if m4 {
                f[(1, 3)] = T::one();
            }
            f
        },
    )
    .expect("built-in model dimensions are valid")
}
