//! Classical fixed-step 4th-order Runge–Kutta.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One RK4 step of size `h` from state `s` at time `t`.
///
/// `deriv` may fail (e.g. a model evaluation blowing up); both that and a
/// non-finite result are reported as divergence at `t`. The combination is
/// evaluated as `s + ((k1 + 2k2 + 2k3 + k4)/6)·h`, which leaves `s` bit-exact
/// for a zero derivative and adds exactly `h` for a unit one.
pub fn rk4_step<T, F>(deriv: &mut F, t: T, s: &DVector<T>, h: T) -> Result<DVector<T>>
where
    T: Real,
    F: FnMut(T, &DVector<T>) -> Result<DVector<T>>,
{
    if !(h > T::zero() && h.is_finite()) {
        return Err(Error::InvalidSetup(format!(
            "integration step must be positive and finite, got {h}"
        )));
    }
    let half = h * T::from_config(0.5);
    let two = T::from_config(2.0);
    let six = T::from_config(6.0);

    let step = |deriv: &mut F| -> Result<DVector<T>> {
        let k1 = deriv(t, s)?;
        let k2 = deriv(t + half, &(s + &k1 * half))?;
        let k3 = deriv(t + half, &(s + &k2 * half))?;
        let k4 = deriv(t + h, &(s + &k3 * h))?;
        Ok(s + (k1 + (k2 + k3) * two + k4).unscale(six) * h)
    };

    match step(deriv) {
        Ok(next) if next.iter().all(|c| c.is_finite()) => Ok(next),
        Ok(_) | Err(Error::NonFinite(_)) => Err(Error::Divergence {
            t: t.to_f64().unwrap_or(f64::NAN),
        }),
        Err(e) => Err(e),
    }
}
