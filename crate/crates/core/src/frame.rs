//! Orthonormal frames: a subspace `V` together with its projection `π_V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pivoted_basis, Mat};
use crate::scalar::Scalar;

/// `n × k` matrix with orthonormal columns spanning a subspace `V ⊆ ℝⁿ`.
///
/// Construction validates orthonormality and never repairs it; use
/// [`Frame::gram_schmidt`] to build a frame from arbitrary vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame<T> {
    basis: Mat<T>,
}

impl<T: Scalar> Frame<T> {
    pub fn new(basis: Mat<T>) -> Result<Self> {
        if basis.cols() > basis.rows() {
            return Err(Error::DimensionMismatch {
                expected: basis.rows(),
                got: basis.cols(),
            });
        }
        if basis.cols() > 0 {
            let dev = basis.orthonormality_defect();
            if !(dev <= T::ortho_tol()) {
                return Err(Error::NotOrthonormal(dev.to_f64_lossy()));
            }
        }
        Ok(Self { basis })
    }

    /// Frame spanned by the standard basis vectors with the given (0-based) indices.
    pub fn coordinate(n: usize, indices: &[usize]) -> Result<Self> {
        let mut cols = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: i + 1,
                });
            }
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            cols.push(e);
        }
        Self::new(Mat::from_cols(n, &cols))
    }

    /// Orthonormal frame for the span of `vectors` (column-pivoted, dependent
    /// vectors dropped).
    pub fn gram_schmidt(n: usize, vectors: &[Vec<T>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let basis = pivoted_basis(vectors, T::rank_tol());
        Self::new(Mat::from_cols(n, &basis))
    }

    pub fn n(&self) -> usize {
        self.basis.rows()
    }

    pub fn k(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Mat<T> {
        &self.basis
    }

    /// `π_V = B·Bᵀ`.
    pub fn projector(&self) -> Mat<T> {
        self.basis.matmul(&self.basis.transpose())
    }
}
