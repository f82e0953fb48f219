// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Spectral data of a symmetric matrix, computed on first use.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(*lambda);
            scaled.column_mut(j).scale_mut(fl);
        }
        scaled * v.transpose()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.min()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.max()
    }
}

/// Dense real operator between finite-dimensional spaces.
///
/// Entries are validated finite on construction. For exactly symmetric
/// square matrices the eigendecomposition is cached and shared between
/// clones, which makes repeated exponentials at different times cheap.
#[derive(Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    spectrum: Arc<OnceLock<Option<Spectrum>>>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseOperator")
            .field("rows", &self.rows())
            .field("cols", &self.cols())
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl PartialEq for DenseOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::Shape(
                "operator must have positive dimensions".into(),
            ));
        }
        if let Some(bad) = matrix.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry {bad}")));
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix,
            spectrum: Arc::new(OnceLock::new()),
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.matrix.transpose().as_slice().to_vec()
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows();
        (0..n).all(|i| (0..i).all(|j| self.matrix[(i, j)] == self.matrix[(j, i)]))
    }

    /// Eigendecomposition if the matrix is exactly symmetric.
    pub fn spectrum(&self) -> Option<&Spectrum> {
        self.spectrum
            .get_or_init(|| {
                if !self.is_symmetric() {
                    return None;
                }
                let eig = SymmetricEigen::new(self.matrix.clone());
                Some(Spectrum {
                    eigenvalues: eig.eigenvalues,
                    eigenvectors: eig.eigenvectors,
                })
            })
            .as_ref()
    }

    /// Symmetric with strictly positive spectrum.
    pub fn is_spd(&self) -> bool {
        self.spectrum().is_some_and(|s| s.min() > 0.0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_matrix_unchecked(self.matrix.transpose())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_matrix_unchecked(&self.matrix * factor)
    }

    pub fn mul(&self, rhs: &DenseOperator) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self::from_matrix_unchecked(&self.matrix * &rhs.matrix))
    }

    pub fn add(&self, rhs: &DenseOperator) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self::from_matrix_unchecked(&self.matrix + &rhs.matrix))
    }

    pub fn sub(&self, rhs: &DenseOperator) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self::from_matrix_unchecked(&self.matrix - &rhs.matrix))
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.cols() {
            return Err(Error::Shape(format!(
                "vector of length {} for operator with {} columns",
                x.len(),
                self.cols()
            )));
        }
        Ok(&self.matrix * x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square("inverse")?;
        self.matrix
            .clone()
            .try_inverse()
            .map(Self::from_matrix_unchecked)
            .ok_or_else(|| Error::Domain("operator is singular".into()))
    }

    /// Largest absolute entry of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &DenseOperator) -> f64 {
        self.matrix
            .iter()
            .zip(rhs.matrix.iter())
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what} needs a square operator, got {}x{}",
                self.rows(),
                self.cols()
            )))
        }
    }

    fn check_same_shape(&self, rhs: &DenseOperator) -> Result<()> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(())
    }
}

impl From<DenseOperator> for DMatrix<f64> {
    fn from(op: DenseOperator) -> Self {
        op.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DenseOperator::from_row_major(1, 2, &[1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        let err = DenseOperator::from_row_major(2, 2, &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn row_major_round_trip() {
        let entries = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let op = DenseOperator::from_row_major(2, 3, &entries).unwrap();
        assert_eq!(op.get(0, 2), 3.0);
        assert_eq!(op.get(1, 0), 4.0);
        assert_eq!(op.to_row_major(), entries);
    }

    #[test]
    fn spectrum_only_for_symmetric() {
        let sym = DenseOperator::from_row_major(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = sym.spectrum().unwrap();
        assert!((s.min() - 1.0).abs() < 1e-14 && (s.max() - 3.0).abs() < 1e-14);
        assert!(sym.is_spd());
        let nonsym = DenseOperator::from_row_major(2, 2, &[2.0, 1.0, 0.0, 2.0]).unwrap();
        assert!(nonsym.spectrum().is_none());
        assert!(!nonsym.is_spd());
    }
}
