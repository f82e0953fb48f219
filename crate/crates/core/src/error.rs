// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operator: {0}")]
    Unsupported(String),

    #[error("reference validation failed: {0}")]
    OracleMismatch(String),

    #[error("scheme assembly mismatch: closed form differs from factor product by {0:e}")]
    AssemblyMismatch(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ode integration failed: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
