// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use crate::linop::DenseOperator;
use crate::rng::SplitMix64;

/// Above this dimension the spectral norm switches from a full SVD to power
/// iteration on `AᵀA`.
pub const SVD_DIMENSION_LIMIT: usize = 512;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &DenseOperator) -> f64 {
    matrix_norm(a.matrix())
}

pub(crate) fn matrix_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows().max(a.ncols()) <= SVD_DIMENSION_LIMIT {
        svd_norm(a)
    } else {
        power_norm(a)
    }
}

pub(crate) fn svd_norm(a: &DMatrix<f64>) -> f64 {
    if a.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    a.singular_values().max()
}

/// Power iteration on the Gram matrix with a deterministic start vector.
pub(crate) fn power_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut rng = SplitMix64::new(0x0005_eed0_f5ca_1e00);
    let mut x = DVector::from_fn(n, |_, _| rng.next_symmetric());
    let mut prev = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let nx = x.norm();
        if nx == 0.0 {
            return 0.0;
        }
        x /= nx;
        let y = a * &x;
        let sigma = y.norm();
        x = a.transpose() * y;
        if (sigma - prev).abs() <= POWER_TOL * sigma {
            return sigma;
        }
        prev = sigma;
    }
    prev
}
