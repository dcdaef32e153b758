//! Parameter-estimate update laws.
//!
//! All laws take the coupling matrix `F(x)` evaluated at the *drive* state —
//! the quantity that multiplies the parameter mismatch in the error dynamics
//! — together with the synchronization error `e` and, for the gradient-aware
//! laws, its analytic derivative `ė`.
//!
//! [`chen_law`] is the classical gradient law `α̇ = −Fᵀ(x)e`. It stalls
//! whenever `e` reaches zero (or `Fᵀ(x)e` does), no matter how wrong the
//! estimate still is. [`proposed_law`] adds the `ė` term,
//! `α̇ = −Fᵀ(x)[(LK + I)e + Lė]`, which keeps adapting as long as the
//! mismatch is observable through `F(x)`. [`augmented_law`] sums the same
//! expression over a stack of delay blocks so that more parameters than
//! state variables can be identified.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gains::Gain;
use crate::models::Params;
use crate::scalar::Real;

/// How the `ė` term enters the augmented law.
///
/// Expanding the stacked law with the block-diagonal adaptation gain gives
/// `L·ėᵢ` inside every block; that is the default. [`Plain`] drops the `L`
/// factor, which changes the effective adaptation rate of the derivative
/// term but not the structure of the law.
///
/// [`Plain`]: EdotWeighting::Plain
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdotWeighting {
    /// `(LK + I)eᵢ + L·ėᵢ` — consistent with the stacked derivation.
    #[default]
    LWeighted,
    /// `(LK + I)eᵢ + ėᵢ`.
    Plain,
}

/// Gradient law `α̇ = −Fᵀ(x)e`.
pub fn chen_law<T: Real>(fx: &DMatrix<T>, e: &DVector<T>) -> Result<Params<T>> {
    if fx.nrows() != e.len() {
        return Err(Error::DimensionMismatch {
            context: "chen law error vector",
            expected: fx.nrows(),
            actual: e.len(),
        });
    }
    Ok(-(fx.transpose() * e))
}

/// Derivative-aware law `α̇ = −Fᵀ(x)[(LK + I)e + L·ė]`.
pub fn proposed_law<T: Real>(
    fx: &DMatrix<T>,
    e: &DVector<T>,
    edot: &DVector<T>,
    k: &Gain<T>,
    l: &Gain<T>,
) -> Result<Params<T>> {
    let weight = l.matrix() * k.matrix() + DMatrix::identity(l.dim(), l.dim());
    law_term(fx, e, edot, &weight, Some(l)).map(|t| -t)
}

/// Delay-augmented law summing the per-block contribution
/// `Fᵀ(xᵢ)[(LK + I)eᵢ + L·ėᵢ]` over all blocks (block 0 undelayed).
///
/// Each block is `(F(xᵢ), eᵢ, ėᵢ)`. With a single block this reduces to
/// [`proposed_law`].
pub fn augmented_law<'a, T, I>(
    blocks: I,
    k: &Gain<T>,
    l: &Gain<T>,
    weighting: EdotWeighting,
) -> Result<Params<T>>
where
    T: Real,
    I: IntoIterator<Item = (&'a DMatrix<T>, &'a DVector<T>, &'a DVector<T>)>,
{
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            context: "gain dimensions K vs L",
            expected: k.dim(),
            actual: l.dim(),
        });
    }
    let weight = l.matrix() * k.matrix() + DMatrix::identity(l.dim(), l.dim());
    let l_factor = match weighting {
        EdotWeighting::LWeighted => Some(l),
        EdotWeighting::Plain => None,
    };
    let mut sum: Option<Params<T>> = None;
    for (fx, e, edot) in blocks {
        let term = law_term(fx, e, edot, &weight, l_factor)?;
        sum = Some(match sum {
            Some(acc) => acc + term,
            None => term,
        });
    }
    match sum {
        Some(s) => Ok(-s),
        None => Err(Error::InvalidSetup(
            "augmented law needs at least one block".into(),
        )),
    }
}

/// One block's (un-negated) contribution `Fᵀ(x)[W·e + L·ė]`.
fn law_term<T: Real>(
    fx: &DMatrix<T>,
    e: &DVector<T>,
    edot: &DVector<T>,
    weight: &DMatrix<T>,
    l: Option<&Gain<T>>,
) -> Result<DVector<T>> {
    let n = fx.nrows();
    if e.len() != n || edot.len() != n || weight.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "adaptation law block",
            expected: n,
            actual: if e.len() != n { e.len() } else { edot.len() },
        });
    }
    let inner = match l {
        Some(l) => weight * e + l.matrix() * edot,
        None => weight * e + edot,
    };
    Ok(fx.transpose() * inner)
}

/// Centered finite-difference estimate `(e_next − e_prev) / (2·dt)`.
///
/// A measurement-based fallback for `ė`; the simulator itself uses the exact
/// model-based derivative.
pub fn edot_centered_difference<T: Real>(
    e_prev: &DVector<T>,
    e_next: &DVector<T>,
    dt: T,
) -> Result<DVector<T>> {
    if e_prev.len() != e_next.len() {
        return Err(Error::DimensionMismatch {
            context: "finite difference samples",
            expected: e_prev.len(),
            actual: e_next.len(),
        });
    }
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::InvalidSetup(format!(
            "finite difference step must be positive and finite, got {dt}"
        )));
    }
    Ok((e_next - e_prev) / (dt + dt))
}
