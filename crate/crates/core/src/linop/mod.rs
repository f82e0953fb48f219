// SPDX-License-Identifier: Apache-2.0

//! Dense operator arithmetic on `X₁ × X₂` with the ℓ² product norm.

mod block;
mod bounds;
mod dense;
mod expm;
mod norm;

pub use block::{block_norm_bounds, BlockOperator};
pub use bounds::{certification_grid, log_grid, SemigroupBounds, CONTRACTION_TOL};
pub use dense::{DenseOperator, Spectrum};
pub use expm::{
    expm, expm_pade_route, fractional_power, phi1_augmented_route, phi1_integral, shift,
};
pub use norm::{operator_norm, SVD_DIMENSION_LIMIT};

pub(crate) use norm::matrix_norm;
