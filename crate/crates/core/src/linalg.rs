//! Symmetric eigendecomposition helpers: matrix square roots, inverse square
//! roots and log-determinants of symmetric positive definite matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues are floored at this value before taking square roots.
pub const EIGEN_FLOOR: f64 = 1e-20;

/// Eigendecomposition `A = B diag(λ) Bᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymmetricDecomposition {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("eigendecomposition of a non-finite matrix".into()));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("eigendecomposition did not converge".into()));
        }
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    /// Rebuilds `B diag(f(λ)) Bᵀ` and symmetrizes the result.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[j]);
        }
        let mut out = scaled * self.eigenvectors.transpose();
        symmetrize(&mut out);
        out
    }

    /// Symmetric square root, eigenvalues floored at [`EIGEN_FLOOR`].
    pub fn sqrt(&self) -> DMatrix<f64> {
        self.map_eigenvalues(|l| l.max(EIGEN_FLOOR).sqrt())
    }

    /// Symmetric inverse square root. Fails when an eigenvalue is at or below
    /// [`EIGEN_FLOOR`].
    pub fn inv_sqrt(&self) -> Result<DMatrix<f64>> {
        let min = self.min_eigenvalue();
        if min <= EIGEN_FLOOR {
            return Err(Error::SingularMetric { min_eigenvalue: min });
        }
        Ok(self.map_eigenvalues(|l| 1.0 / l.sqrt()))
    }

    /// `ln det` from the eigenvalues; fails on a nonpositive eigenvalue.
    pub fn log_det(&self) -> Result<f64> {
        let mut acc = 0.0;
        for &l in self.eigenvalues.iter() {
            if l <= 0.0 {
                return Err(Error::Numerical(format!(
                    "nonpositive eigenvalue {l:e} in log-determinant"
                )));
            }
            acc += l.ln();
        }
        Ok(acc)
    }
}

/// Replaces `m` with `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| ((i + 1)..n).all(|j| m[(i, j)] == m[(j, i)]))
}
