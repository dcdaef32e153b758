//! Symmetric positive definite gain matrices.
//!
//! Both the feedback gain `K` and the adaptation gain `L` must be symmetric
//! positive definite for the Lyapunov argument behind the update law to hold,
//! so they are wrapped in a newtype that checks this once at construction.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A validated symmetric positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gain<T: Real> {
    matrix: DMatrix<T>,
    min_eig: T,
}

impl<T: Real> Gain<T> {
    /// Validates and wraps a gain matrix.
    ///
    /// The matrix must be square, symmetric to within `1e-12` relative to its
    /// largest entry and have strictly positive eigenvalues.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidSetup(format!(
                "gain must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.amax().max(T::one());
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > T::from_config(1e-12) * scale {
            return Err(Error::InvalidSetup(format!(
                "gain is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let min_eig = eig.eigenvalues.min();
        let positive = min_eig > T::zero();
        if !positive {
            return Err(Error::InvalidSetup(format!(
                "gain is not positive definite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { matrix, min_eig })
    }

    /// The gain `c·I`, the form used throughout the reference experiments.
    pub fn scaled_identity(dim: usize, scale: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSetup(
                "gain dimension must be positive".into(),
            ));
        }
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(Error::InvalidSetup(format!(
                "identity gain scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self {
            matrix: DMatrix::identity(dim, dim) * scale,
            min_eig: scale,
        })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Smallest eigenvalue, computed once at construction.
    pub fn min_eigenvalue(&self) -> T {
        self.min_eig
    }
}
