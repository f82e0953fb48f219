// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use super::{matrix_norm, operator_norm, DenseOperator};
use crate::error::{Error, Result};

/// 2×2 block operator on `X₁ × X₂`:
///
/// ```text
/// [ b11 : X₁→X₁   b12 : X₂→X₁ ]
/// [ b21 : X₁→X₂   b22 : X₂→X₂ ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub b11: DenseOperator,
    pub b12: DenseOperator,
    pub b21: DenseOperator,
    pub b22: DenseOperator,
}

impl BlockOperator {
    pub fn new(
        b11: DenseOperator,
        b12: DenseOperator,
        b21: DenseOperator,
        b22: DenseOperator,
    ) -> Result<Self> {
        let ok = b11.rows() == b12.rows()
            && b21.rows() == b22.rows()
            && b11.cols() == b21.cols()
            && b12.cols() == b22.cols();
        if !ok {
            return Err(Error::Shape(format!(
                "incompatible blocks {}x{}, {}x{}, {}x{}, {}x{}",
                b11.rows(),
                b11.cols(),
                b12.rows(),
                b12.cols(),
                b21.rows(),
                b21.cols(),
                b22.rows(),
                b22.cols()
            )));
        }
        Ok(Self { b11, b12, b21, b22 })
    }

    pub fn identity(n1: usize, n2: usize) -> Self {
        Self::diagonal(DenseOperator::identity(n1), DenseOperator::identity(n2))
    }

    /// `diag(a1, a2)`; both blocks must be square.
    pub fn diagonal(a1: DenseOperator, a2: DenseOperator) -> Self {
        let (n1, n2) = (a1.rows(), a2.rows());
        Self {
            b11: a1,
            b12: DenseOperator::zeros(n1, n2),
            b21: DenseOperator::zeros(n2, n1),
            b22: a2,
        }
    }

    /// `[[0, b1], [b2, 0]]` with `b1 : X₂→X₁`, `b2 : X₁→X₂`.
    pub fn off_diagonal(b1: DenseOperator, b2: DenseOperator) -> Result<Self> {
        let (n1, n2) = (b1.rows(), b1.cols());
        Self::new(
            DenseOperator::zeros(n1, n1),
            b1,
            b2,
            DenseOperator::zeros(n2, n2),
        )
    }

    /// Dimensions `(n₁, n₂)` of the domain factors.
    pub fn dims(&self) -> (usize, usize) {
        (self.b11.cols(), self.b12.cols())
    }

    pub fn is_square(&self) -> bool {
        self.b11.is_square() && self.b22.is_square()
    }

    pub fn flatten(&self) -> DMatrix<f64> {
        let (r1, r2) = (self.b11.rows(), self.b21.rows());
        let (c1, c2) = (self.b11.cols(), self.b12.cols());
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(self.b11.matrix());
        m.view_mut((0, c1), (r1, c2)).copy_from(self.b12.matrix());
        m.view_mut((r1, 0), (r2, c1)).copy_from(self.b21.matrix());
        m.view_mut((r1, c1), (r2, c2)).copy_from(self.b22.matrix());
        m
    }

    pub fn flatten_operator(&self) -> DenseOperator {
        DenseOperator::from_matrix_unchecked(self.flatten())
    }

    /// Split a square flat matrix at `n1`.
    pub fn from_flat(m: &DMatrix<f64>, n1: usize) -> Result<Self> {
        if m.nrows() != m.ncols() || n1 == 0 || n1 >= m.nrows() {
            return Err(Error::Shape(format!(
                "cannot split {}x{} at {n1}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n2 = m.nrows() - n1;
        Self::new(
            DenseOperator::new(m.view((0, 0), (n1, n1)).into_owned())?,
            DenseOperator::new(m.view((0, n1), (n1, n2)).into_owned())?,
            DenseOperator::new(m.view((n1, 0), (n2, n1)).into_owned())?,
            DenseOperator::new(m.view((n1, n1), (n2, n2)).into_owned())?,
        )
    }

    /// Blockwise product by the 2×2 matrix multiplication rule.
    pub fn mul(&self, rhs: &BlockOperator) -> Result<Self> {
        let m = |a: &DenseOperator, b: &DenseOperator| a.mul(b);
        Self::new(
            m(&self.b11, &rhs.b11)?.add(&m(&self.b12, &rhs.b21)?)?,
            m(&self.b11, &rhs.b12)?.add(&m(&self.b12, &rhs.b22)?)?,
            m(&self.b21, &rhs.b11)?.add(&m(&self.b22, &rhs.b21)?)?,
            m(&self.b21, &rhs.b12)?.add(&m(&self.b22, &rhs.b22)?)?,
        )
    }

    pub fn add(&self, rhs: &BlockOperator) -> Result<Self> {
        Self::new(
            self.b11.add(&rhs.b11)?,
            self.b12.add(&rhs.b12)?,
            self.b21.add(&rhs.b21)?,
            self.b22.add(&rhs.b22)?,
        )
    }

    pub fn sub(&self, rhs: &BlockOperator) -> Result<Self> {
        Self::new(
            self.b11.sub(&rhs.b11)?,
            self.b12.sub(&rhs.b12)?,
            self.b21.sub(&rhs.b21)?,
            self.b22.sub(&rhs.b22)?,
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            b11: self.b11.scale(factor),
            b12: self.b12.scale(factor),
            b21: self.b21.scale(factor),
            b22: self.b22.scale(factor),
        }
    }

    /// `(u, v) ↦ (b11 u + b12 v, b21 u + b22 v)`.
    pub fn apply(
        &self,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let top = self.b11.apply(u)? + self.b12.apply(v)?;
        let bottom = self.b21.apply(u)? + self.b22.apply(v)?;
        Ok((top, bottom))
    }

    pub fn max_abs_diff(&self, rhs: &BlockOperator) -> f64 {
        [
            self.b11.max_abs_diff(&rhs.b11),
            self.b12.max_abs_diff(&rhs.b12),
            self.b21.max_abs_diff(&rhs.b21),
            self.b22.max_abs_diff(&rhs.b22),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        matrix_norm(&self.flatten())
    }
}

/// Bracket `(lower, upper)` for the product-space norm of a block operator.
///
/// The lower bound is the largest blockwise norm. The upper bound is
/// `√2 · max{(‖b11‖² + ‖b21‖²)^½, (‖b12‖² + ‖b22‖²)^½}`. For purely
/// off-diagonal operators the lower bound is the exact norm.
pub fn block_norm_bounds(b: &BlockOperator) -> (f64, f64) {
    let n11 = operator_norm(&b.b11);
    let n12 = operator_norm(&b.b12);
    let n21 = operator_norm(&b.b21);
    let n22 = operator_norm(&b.b22);
    let lower = n11.max(n12).max(n21).max(n22);
    let col1 = (n11 * n11 + n21 * n21).sqrt();
    let col2 = (n12 * n12 + n22 * n22).sqrt();
    (lower, std::f64::consts::SQRT_2 * col1.max(col2))
}
