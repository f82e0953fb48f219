// SPDX-License-Identifier: Apache-2.0

//! Split-step approximation of semigroups generated by 2×2 block operator
//! matrices `𝒞 = 𝒜 - ℬ` with diagonal `𝒜 = diag(A₁, A₂)` and off-diagonal
//! coupling `ℬ`.
//!
//! One step `T(τ) = T₂(τ)T₁(τ)` solves each component exactly while the
//! other is frozen. The crate provides dense operators and the matrix
//! functions they need ([`linop`]), a catalog of test problems
//! ([`gallery`]), the schemes ([`schemes`]), an independent ODE reference
//! ([`oracle`]) and the experiment harness ([`harness`]).

pub mod error;
pub mod gallery;
pub mod harness;
pub mod linop;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod schemes;

pub use error::{Error, Result};
pub use gallery::{find_recipe, gallery_list, GalleryRecipe, ProblemInstance};
pub use linop::{BlockOperator, DenseOperator};
pub use par::Execution;
pub use schemes::{assemble, Scheme};
