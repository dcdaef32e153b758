//! Control inputs that shape the synchronization error dynamics.
//!
//! Both controllers cancel the model nonlinearity so that the error
//! `e = y − x` obeys a linear equation driven only by the parameter
//! mismatch `Δ = α − θ`:
//!
//! * [`chen_controller`] yields `ė = −e + F(x)Δ`,
//! * [`proposed_controller`] yields `ė = −Ke + F(x)Δ` with a configurable
//!   SPD gain `K`,
//! * [`augmented_controller`] applies the proposed controller blockwise to a
//!   stack of delayed drive/response pairs sharing one parameter estimate.
//!
//! Every controller vanishes when the response already tracks the drive
//! (`y = x`), whatever the current estimate `α` is.

use crate::error::{Error, Result};
use crate::gains::Gain;
use crate::models::{ParametricModel, Params, State};
use crate::scalar::Real;

/// Unit-gain cancellation controller
/// `u = −e + f(x) − f(y) + [F(x) − F(y)]α`.
pub fn chen_controller<T: Real>(
    model: &ParametricModel<T>,
    y: &State<T>,
    x: &State<T>,
    alpha: &Params<T>,
) -> Result<State<T>> {
    let e = y - x;
    let df = model.drift(x)? - model.drift(y)?;
    let dcoupling = model.coupling(x)? - model.coupling(y)?;
    Ok(-e + df + dcoupling * alpha)
}

/// Gain-weighted cancellation controller
/// `u = −Ke + f(x) − f(y) − [F(y) − F(x)]α`.
pub fn proposed_controller<T: Real>(
    model: &ParametricModel<T>,
    y: &State<T>,
    x: &State<T>,
    alpha: &Params<T>,
    k: &Gain<T>,
) -> Result<State<T>> {
    if k.dim() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            context: "controller gain K",
            expected: model.state_dim(),
            actual: k.dim(),
        });
    }
    let e = y - x;
    let df = model.drift(x)? - model.drift(y)?;
    let dcoupling = model.coupling(x)? - model.coupling(y)?;
    Ok(-(k.matrix() * e) + df + dcoupling * alpha)
}

/// Blockwise proposed controller for the delay-augmented scheme.
///
/// `x_blocks[i]` and `y_blocks[i]` hold the drive and response states of
/// delay block `i` (block 0 is undelayed); all blocks share the single
/// estimate `alpha`. Returns one control input per block.
pub fn augmented_controller<T: Real>(
    model: &ParametricModel<T>,
    y_blocks: &[State<T>],
    x_blocks: &[State<T>],
    alpha: &Params<T>,
    k: &Gain<T>,
) -> Result<Vec<State<T>>> {
    if y_blocks.is_empty() || y_blocks.len() != x_blocks.len() {
        return Err(Error::DimensionMismatch {
            context: "controller delay blocks",
            expected: y_blocks.len().max(1),
            actual: x_blocks.len(),
        });
    }
    y_blocks
        .iter()
        .zip(x_blocks)
        .map(|(y, x)| proposed_controller(model, y, x, alpha, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn vec3(a: f64, b: f64, c: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b, c])
    }

    #[test]
    fn chen_controller_matches_hand_evaluation() {
        let model = models::lorenz::<f64>(true);
        let u = chen_controller(
            &model,
            &vec3(3.0, 4.0, 5.0),
            &vec3(8.0, 9.0, 10.0),
            &DVector::zeros(4),
        )
        .unwrap();
        assert_eq!(u, vec3(5.0, -65.0, 65.0));
    }

    #[test]
    fn chen_controller_with_nonzero_estimate() {
        let model = models::lorenz::<f64>(false);
        let theta = vec3(10.0, 28.0, 8.0 / 3.0);
        let u =
            chen_controller(&model, &vec3(3.0, 4.0, 5.0), &vec3(8.0, 9.0, 10.0), &theta).unwrap();
        assert_relative_eq!(u[0], 5.0, max_relative = 1e-14);
        assert_relative_eq!(u[1], 75.0, max_relative = 1e-14);
        assert_relative_eq!(u[2], 155.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn proposed_controller_matches_hand_evaluation() {
        let model = models::lorenz::<f64>(true);
        let k = Gain::scaled_identity(3, 0.1).unwrap();
        let u = proposed_controller(
            &model,
            &vec3(3.0, 4.0, 5.0),
            &vec3(8.0, 9.0, 10.0),
            &DVector::zeros(4),
            &k,
        )
        .unwrap();
        assert_relative_eq!(u[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(u[1], -69.5, max_relative = 1e-14);
        assert_relative_eq!(u[2], 60.5, max_relative = 1e-14);
    }

    #[test]
    fn controllers_vanish_when_synchronized() {
        let model = models::rossler::<f64>(true);
        let k = Gain::scaled_identity(3, 0.1).unwrap();
        let x = vec3(1.3, -0.4, 2.2);
        let alpha = DVector::from_vec(vec![5.0, -3.0, 0.7, 2.0]);
        assert_eq!(
            chen_controller(&model, &x, &x, &alpha).unwrap(),
            vec3(0.0, 0.0, 0.0)
        );
        assert_eq!(
            proposed_controller(&model, &x, &x, &alpha, &k).unwrap(),
            vec3(0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn augmented_controller_is_blockwise_proposed() {
        let model = models::lorenz::<f64>(true);
        let k = Gain::scaled_identity(3, 0.1).unwrap();
        let xs = vec![vec3(8.0, 9.0, 10.0), vec3(7.0, 8.5, 9.0)];
        let ys = vec![vec3(3.0, 4.0, 5.0), vec3(2.0, 3.0, 4.0)];
        let alpha = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let us = augmented_controller(&model, &ys, &xs, &alpha, &k).unwrap();
        assert_eq!(us.len(), 2);
        for i in 0..2 {
            assert_eq!(
                us[i],
                proposed_controller(&model, &ys[i], &xs[i], &alpha, &k).unwrap()
            );
        }
    }

    #[test]
    fn mismatched_block_counts_are_rejected() {
        let model = models::lorenz::<f64>(false);
        let k = Gain::scaled_identity(3, 0.1).unwrap();
        let xs = vec![vec3(1.0, 2.0, 3.0)];
        let alpha = DVector::zeros(3);
        assert!(augmented_controller(&model, &[], &xs, &alpha, &k).is_err());
    }

    #[test]
    fn wrong_gain_dimension_is_rejected() {
        let model = models::lorenz::<f64>(false);
        let k = Gain::scaled_identity(2, 0.1).unwrap();
        let x = vec3(1.0, 2.0, 3.0);
        assert!(proposed_controller(&model, &x, &x, &DVector::zeros(3), &k).is_err());
    }

    proptest! {
        /// Closing the loop with the proposed controller gives exactly
        /// ė = −Ke + F(x)(α − θ).
        #[test]
        fn proposed_loop_has_linear_error_dynamics(
            xs in proptest::collection::vec(-20.0f64..20.0, 3),
            ys in proptest::collection::vec(-20.0f64..20.0, 3),
            al in proptest::collection::vec(-30.0f64..30.0, 4),
            kscale in 0.05f64..5.0,
        ) {
            let model = models::lorenz::<f64>(true);
            let theta = DVector::from_vec(vec![10.0, 28.0, 8.0 / 3.0, 0.0]);
            let x = DVector::from_vec(xs);
            let y = DVector::from_vec(ys);
            let alpha = DVector::from_vec(al);
            let k = Gain::scaled_identity(3, kscale).unwrap();

            let u = proposed_controller(&model, &y, &x, &alpha, &k).unwrap();
            let edot = model.response_deriv(&y, &alpha, &u).unwrap()
                - model.drive_deriv(&x, &theta).unwrap();
            let expected = -(k.matrix() * (&y - &x))
                + model.coupling(&x).unwrap() * (&alpha - &theta);
            let scale = expected.amax().max(1.0);
            prop_assert!((edot - expected).amax() <= 1e-12 * scale);
        }

        /// The unit-gain controller is the K = I special case.
        #[test]
        fn chen_is_proposed_with_unit_gain(
            xs in proptest::collection::vec(-20.0f64..20.0, 3),
            ys in proptest::collection::vec(-20.0f64..20.0, 3),
            al in proptest::collection::vec(-30.0f64..30.0, 3),
        ) {
            let model = models::rossler::<f64>(false);
            let x = DVector::from_vec(xs);
            let y = DVector::from_vec(ys);
            let alpha = DVector::from_vec(al);
            let k = Gain::scaled_identity(3, 1.0).unwrap();
            let a = chen_controller(&model, &y, &x, &alpha).unwrap();
            let b = proposed_controller(&model, &y, &x, &alpha, &k).unwrap();
            let scale = b.amax().max(1.0);
            prop_assert!((a - b).amax() <= 1e-12 * scale);
        }
    }
}
