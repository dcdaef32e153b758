//! Dense stacked-form reference implementations.
//!
//! The production code applies gains and couplings block by block and never
//! materializes the stacked matrices. This module builds them explicitly —
//! the stacked coupling `F*`, the block-diagonal gain lifts `K*`, `L*` — and
//! evaluates the controller, adaptation law and Gram matrix in that dense
//! form. Slow and allocation-happy by design; used by tests to pin the
//! blockwise implementations against the definitions.

use nalgebra::{DMatrix, DVector};

use crate::adaptation::EdotWeighting;
use crate::error::{Error, Result};
use crate::gains::Gain;
use crate::models::{ParametricModel, Params, State};
use crate::scalar::Real;

/// `copies` copies of `block` along the diagonal.
pub fn block_diag<T: Real>(block: &DMatrix<T>, copies: usize) -> DMatrix<T> {
    let (rows, cols) = block.shape();
    let mut out = DMatrix::zeros(rows * copies, cols * copies);
    for i in 0..copies {
        out.view_mut((i * rows, i * cols), (rows, cols))
            .copy_from(block);
    }
    out
}

/// Vertical concatenation of equally sized vectors.
pub fn stack_vectors<T: Real>(blocks: &[DVector<T>]) -> DVector<T> {
    let len = blocks.iter().map(|b| b.len()).sum();
    let mut out = DVector::zeros(len);
    let mut pos = 0;
    for b in blocks {
        out.rows_mut(pos, b.len()).copy_from(b);
        pos += b.len();
    }
    out
}

/// The stacked coupling `F*`: coupling matrices of all blocks stacked
/// vertically into an `(r+1)n × m` matrix.
pub fn stacked_coupling<T: Real>(
    model: &ParametricModel<T>,
    x_blocks: &[State<T>],
) -> Result<DMatrix<T>> {
    let n = model.state_dim();
    let m = model.param_dim();
    let mut out = DMatrix::zeros(n * x_blocks.len(), m);
    for (i, x) in x_blocks.iter().enumerate() {
        out.view_mut((i * n, 0), (n, m))
            .copy_from(&model.coupling(x)?);
    }
    Ok(out)
}

/// The stacked drift: `f` evaluated at each block, concatenated.
pub fn stacked_drift<T: Real>(
    model: &ParametricModel<T>,
    blocks: &[State<T>],
) -> Result<DVector<T>> {
    let evaluated: Result<Vec<_>> = blocks.iter().map(|b| model.drift(b)).collect();
    Ok(stack_vectors(&evaluated?))
}

/// Stacked-form controller
/// `u* = −K*e* + f*(x*) − f*(y*) − [F*(y*) − F*(x*)]α`
/// with `K*` the block-diagonal lift of `K`. Returns the stacked input.
pub fn dense_augmented_controller<T: Real>(
    model: &ParametricModel<T>,
    y_blocks: &[State<T>],
    x_blocks: &[State<T>],
    alpha: &Params<T>,
    k: &Gain<T>,
) -> Result<DVector<T>> {
    if y_blocks.is_empty() || y_blocks.len() != x_blocks.len() {
        return Err(Error::DimensionMismatch {
            context: "dense controller blocks",
            expected: y_blocks.len().max(1),
            actual: x_blocks.len(),
        });
    }
    let k_star = block_diag(k.matrix(), y_blocks.len());
    let e_star = stack_vectors(y_blocks) - stack_vectors(x_blocks);
    let df = stacked_drift(model, x_blocks)? - stacked_drift(model, y_blocks)?;
    let dcoupling = stacked_coupling(model, y_blocks)? - stacked_coupling(model, x_blocks)?;
    Ok(-(k_star * e_star) + df - dcoupling * alpha)
}

/// Stacked-form adaptation law
/// `α̇ = −(F*)ᵀ[(L*K* + I)e* + L*ė*]`
/// (or with unweighted `ė*` for [`EdotWeighting::Plain`]).
pub fn dense_augmented_law<T: Real>(
    fx_blocks: &[DMatrix<T>],
    e_blocks: &[DVector<T>],
    edot_blocks: &[DVector<T>],
    k: &Gain<T>,
    l: &Gain<T>,
    weighting: EdotWeighting,
) -> Result<Params<T>> {
    if fx_blocks.is_empty()
        || fx_blocks.len() != e_blocks.len()
        || fx_blocks.len() != edot_blocks.len()
    {
        return Err(Error::DimensionMismatch {
            context: "dense law blocks",
            expected: fx_blocks.len().max(1),
            actual: e_blocks.len().min(edot_blocks.len()),
        });
    }
    let copies = fx_blocks.len();
    let n = k.dim();
    let m = fx_blocks[0].ncols();
    let mut f_star = DMatrix::zeros(n * copies, m);
    for (i, fx) in fx_blocks.iter().enumerate() {
        if fx.nrows() != n || fx.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "dense law coupling block",
                expected: n * m,
                actual: fx.nrows() * fx.ncols(),
            });
        }
        f_star.view_mut((i * n, 0), (n, m)).copy_from(fx);
    }
    let k_star = block_diag(k.matrix(), copies);
    let l_star = block_diag(l.matrix(), copies);
    let e_star = stack_vectors(e_blocks);
    let edot_star = stack_vectors(edot_blocks);

    let weight = &l_star * &k_star + DMatrix::identity(n * copies, n * copies);
    let inner = match weighting {
        EdotWeighting::LWeighted => weight * e_star + l_star * edot_star,
        EdotWeighting::Plain => weight * e_star + edot_star,
    };
    Ok(-(f_star.transpose() * inner))
}

/// Stacked-form Gram matrix `(F*)ᵀ (L*)ᵀ F*`.
pub fn dense_gram_augmented<T: Real>(fx_blocks: &[DMatrix<T>], l: &Gain<T>) -> Result<DMatrix<T>> {
    if fx_blocks.is_empty() {
        return Err(Error::InvalidSetup(
            "dense Gram needs at least one block".into(),
        ));
    }
    let copies = fx_blocks.len();
    let n = l.dim();
    let m = fx_blocks[0].ncols();
    let mut f_star = DMatrix::zeros(n * copies, m);
    for (i, fx) in fx_blocks.iter().enumerate() {
        f_star.view_mut((i * n, 0), (n, m)).copy_from(fx);
    }
    let l_star = block_diag(l.matrix(), copies);
    Ok(f_star.transpose() * l_star.transpose() * f_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::augmented_law;
    use crate::analysis::gram_augmented;
    use crate::controllers::augmented_controller;
    use crate::models;
    use proptest::prelude::*;

    #[test]
    fn block_diag_places_copies_on_the_diagonal() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let d = block_diag(&b, 2);
        assert_eq!(d.shape(), (4, 4));
        assert_eq!(d[(0, 1)], 2.0);
        assert_eq!(d[(2, 3)], 2.0);
        assert_eq!(d[(0, 2)], 0.0);
        assert_eq!(d[(3, 1)], 0.0);
    }

    fn vec3_strategy() -> impl Strategy<Value = DVector<f64>> {
        proptest::collection::vec(-20.0f64..20.0, 3).prop_map(DVector::from_vec)
    }

    proptest! {
        /// Per-block controller outputs concatenate to the dense stacked
        /// controller to roundoff.
        #[test]
        fn controller_blockwise_equals_dense(
            xs in proptest::collection::vec(vec3_strategy(), 1..5),
            ys_seed in proptest::collection::vec(vec3_strategy(), 1..5),
            al in proptest::collection::vec(-30.0f64..30.0, 4),
            kscale in 0.05f64..5.0,
        ) {
            let blocks = xs.len().min(ys_seed.len());
            let xs = &xs[..blocks];
            let ys = &ys_seed[..blocks];
            let model = models::lorenz::<f64>(true);
            let alpha = DVector::from_vec(al);
            let k = Gain::scaled_identity(3, kscale).unwrap();

            let per_block = augmented_controller(&model, ys, xs, &alpha, &k).unwrap();
            let dense = dense_augmented_controller(&model, ys, xs, &alpha, &k).unwrap();
            let stacked = stack_vectors(&per_block);
            let scale = dense.amax().max(1.0);
            prop_assert!((stacked - dense).amax() <= 1e-12 * scale);
        }

        /// The summed law equals the dense stacked law for both ė
        /// weightings.
        #[test]
        fn law_blockwise_equals_dense(
            xs in proptest::collection::vec(vec3_strategy(), 1..5),
            es in proptest::collection::vec(vec3_strategy(), 1..5),
            eds in proptest::collection::vec(vec3_strategy(), 1..5),
            kscale in 0.05f64..5.0,
            lscale in 0.5f64..50.0,
            plain in proptest::bool::ANY,
        ) {
            let blocks = xs.len().min(es.len()).min(eds.len());
            let model = models::rossler::<f64>(true);
            let fxs: Vec<DMatrix<f64>> = xs[..blocks]
                .iter()
                .map(|x| model.coupling(x).unwrap())
                .collect();
            let es = &es[..blocks];
            let eds = &eds[..blocks];
            let k = Gain::scaled_identity(3, kscale).unwrap();
            let l = Gain::scaled_identity(3, lscale).unwrap();
            let weighting = if plain { EdotWeighting::Plain } else { EdotWeighting::LWeighted };

            let summed = augmented_law(
                fxs.iter().zip(es).zip(eds).map(|((f, e), ed)| (f, e, ed)),
                &k,
                &l,
                weighting,
            )
            .unwrap();
            let dense = dense_augmented_law(&fxs, es, eds, &k, &l, weighting).unwrap();
            let scale = dense.amax().max(1.0);
            prop_assert!((summed - dense).amax() <= 1e-12 * scale);
        }

        /// Summed Gram equals the stacked-form Gram.
        #[test]
        fn gram_blockwise_equals_dense(
            xs in proptest::collection::vec(vec3_strategy(), 1..5),
            lscale in 0.5f64..50.0,
        ) {
            let model = models::lorenz::<f64>(true);
            let fxs: Vec<DMatrix<f64>> = xs.iter().map(|x| model.coupling(x).unwrap()).collect();
            let l = Gain::scaled_identity(3, lscale).unwrap();
            let summed = gram_augmented(fxs.iter(), &l).unwrap();
            let dense = dense_gram_augmented(&fxs, &l).unwrap();
            let scale = dense.amax().max(1.0);
            prop_assert!((summed - dense).amax() <= 1e-12 * scale);
        }
    }

    #[test]
    fn controller_blocks_do_not_interact() {
        // Block-diagonality: perturbing one block's drive state leaves every
        // other block's output bit-identical.
        let model = models::lorenz::<f64>(true);
        let k = Gain::scaled_identity(3, 0.1).unwrap();
        let alpha = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let xs: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_vec(vec![8.0 + i as f64, 9.0, 10.0]))
            .collect();
        let ys: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_vec(vec![3.0, 4.0 + i as f64, 5.0]))
            .collect();
        let base = augmented_controller(&model, &ys, &xs, &alpha, &k).unwrap();
        let mut xs2 = xs.clone();
        xs2[2][0] += 1.5;
        let perturbed = augmented_controller(&model, &ys, &xs2, &alpha, &k).unwrap();
        assert_eq!(base[0], perturbed[0]);
        assert_eq!(base[1], perturbed[1]);
        assert_ne!(base[2], perturbed[2]);
    }
}
