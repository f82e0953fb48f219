// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gallery::ProblemInstance;
use crate::linop::{expm, matrix_norm, DenseOperator};
use crate::oracle::{ode_exponential, OdeOptions};

/// Agreement required between the exponential and the ODE reference,
/// `‖E - U‖ ≤ tol · (1 + ‖E‖)`.
pub const ORACLE_TOL: f64 = 1e-9;

/// Eigenvalues with real part below this trigger a shift of the weight.
pub const SHIFT_THRESHOLD: f64 = 1e-8;

/// `e^{-t𝒞}` computed directly at time `t` and cross-validated.
#[derive(Debug, Clone)]
pub struct ExactReference {
    pub t: f64,
    pub semigroup: DMatrix<f64>,
    /// `‖expm - ode‖ / (1 + ‖expm‖)`.
    pub oracle_discrepancy: f64,
}

impl ExactReference {
    pub fn compute(p: &ProblemInstance, t: f64, ode: OdeOptions) -> Result<Self> {
        let c = p.generator().flatten_operator();
        let semigroup = expm(&c, t)?.into_matrix();
        let ode_result = ode_exponential(c.matrix(), t, ode)?;
        let scale = 1.0 + matrix_norm(&semigroup);
        let oracle_discrepancy = matrix_norm(&(&semigroup - ode_result)) / scale;
        if !(oracle_discrepancy <= ORACLE_TOL) {
            return Err(Error::OracleMismatch(format!(
                "{}: exponential and ODE references differ by {oracle_discrepancy:e} (relative) at t = {t}",
                p.id()
            )));
        }
        Ok(Self {
            t,
            semigroup,
            oracle_discrepancy,
        })
    }
}

/// `(𝒜 + η)^{-1}` for the weighted error norm; `η = 0` unless `𝒜` or `𝒞`
/// has an eigenvalue with real part below [`SHIFT_THRESHOLD`], in which case
/// `η = 1 + |min real part|`.
#[derive(Debug, Clone)]
pub struct Weight {
    pub inverse: DMatrix<f64>,
    pub shift: Option<f64>,
}

impl Weight {
    pub fn for_problem(p: &ProblemInstance) -> Result<Self> {
        let min_a = min_real_eigenvalue(p.a1()).min(min_real_eigenvalue(p.a2()));
        let min_c = min_real_eigenvalue(&p.generator().flatten_operator());
        let lowest = min_a.min(min_c);
        let shift = (lowest < SHIFT_THRESHOLD).then(|| 1.0 + lowest.abs());
        let mut a = p.diagonal_generator().flatten();
        if let Some(eta) = shift {
            for i in 0..a.nrows() {
                a[(i, i)] += eta;
            }
        }
        let inverse = a
            .try_inverse()
            .ok_or_else(|| Error::Domain(format!("{}: weight is singular", p.id())))?;
        Ok(Self { inverse, shift })
    }
}

pub(crate) fn min_real_eigenvalue(a: &DenseOperator) -> f64 {
    match a.spectrum() {
        Some(s) => s.min(),
        None => {
            let eig: DVector<nalgebra::Complex<f64>> = a.matrix().complex_eigenvalues();
            eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
        }
    }
}
