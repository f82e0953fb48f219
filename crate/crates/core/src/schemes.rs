// SPDX-License-Identifier: Apache-2.0

//! Split-step one-step maps built from frozen-component solves.
//!
//! With `E_j(τ) = e^{-τA_j}` and `X_j(τ) = F_τ(A_j) B_j`:
//!
//! ```text
//! T₁(τ) = [[E₁, X₁], [0, I]]        T₂(τ) = [[I, 0], [X₂, E₂]]
//! AO          T₂T₁ = [[E₁, X₁], [X₂E₁, X₂X₁ + E₂]]
//! transposed  T₁T₂
//! symmetrized T₁ + T₂ - I = [[E₁, X₁], [X₂, E₂]]
//! naive       [[E₁, τB₁], [τB₂, E₂]]
//! exact       e^{-τ𝒞}
//! ```

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gallery::ProblemInstance;
use crate::linop::{expm, matrix_norm, phi1_integral, BlockOperator, DenseOperator};

/// Entrywise tolerance between the AO closed form and `T₂·T₁`.
pub const AO_PRODUCT_TOL: f64 = 1e-12;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Ao,
    Transposed,
    Symmetrized,
    Naive,
    Exact,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Ao,
        Scheme::Transposed,
        Scheme::Symmetrized,
        Scheme::Naive,
        Scheme::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ao => "ao",
            Scheme::Transposed => "transposed",
            Scheme::Symmetrized => "symmetrized",
            Scheme::Naive => "naive",
            Scheme::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The building blocks `E_j(τ)`, `X_j(τ)` shared by all split-step schemes.
#[derive(Debug, Clone)]
pub struct StepParts {
    pub tau: f64,
    pub e1: DenseOperator,
    pub e2: DenseOperator,
    pub x1: DenseOperator,
    pub x2: DenseOperator,
}

impl StepParts {
    pub fn new(p: &ProblemInstance, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            tau,
            e1: expm(p.a1(), tau)?,
            e2: expm(p.a2(), tau)?,
            x1: phi1_integral(p.a1(), tau)?.mul(p.b1())?,
            x2: phi1_integral(p.a2(), tau)?.mul(p.b2())?,
        })
    }

    pub fn frozen_step_1(&self) -> BlockOperator {
        let n2 = self.x1.cols();
        BlockOperator {
            b11: self.e1.clone(),
            b12: self.x1.clone(),
            b21: DenseOperator::zeros(n2, self.e1.rows()),
            b22: DenseOperator::identity(n2),
        }
    }

    pub fn frozen_step_2(&self) -> BlockOperator {
        let n1 = self.x2.cols();
        BlockOperator {
            b11: DenseOperator::identity(n1),
            b12: DenseOperator::zeros(n1, self.e2.rows()),
            b21: self.x2.clone(),
            b22: self.e2.clone(),
        }
    }

    /// Closed block form of `T₂T₁`.
    pub fn ao_closed_form(&self) -> Result<BlockOperator> {
        BlockOperator::new(
            self.e1.clone(),
            self.x1.clone(),
            self.x2.mul(&self.e1)?,
            self.x2.mul(&self.x1)?.add(&self.e2)?,
        )
    }

    pub fn symmetrized(&self) -> BlockOperator {
        BlockOperator {
            b11: self.e1.clone(),
            b12: self.x1.clone(),
            b21: self.x2.clone(),
            b22: self.e2.clone(),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "step size must be nonnegative, got {tau}"
        )))
    }
}

/// `T₁(τ)`: evolve the first component with the second frozen.
pub fn frozen_step_1(p: &ProblemInstance, tau: f64) -> Result<BlockOperator> {
    check_tau(tau)?;
    Ok(BlockOperator {
        b11: expm(p.a1(), tau)?,
        b12: phi1_integral(p.a1(), tau)?.mul(p.b1())?,
        b21: DenseOperator::zeros(p.dims().1, p.dims().0),
        b22: DenseOperator::identity(p.dims().1),
    })
}

/// `T₂(τ)`: evolve the second component with the first frozen.
pub fn frozen_step_2(p: &ProblemInstance, tau: f64) -> Result<BlockOperator> {
    check_tau(tau)?;
    Ok(BlockOperator {
        b11: DenseOperator::identity(p.dims().0),
        b12: DenseOperator::zeros(p.dims().0, p.dims().1),
        b21: phi1_integral(p.a2(), tau)?.mul(p.b2())?,
        b22: expm(p.a2(), tau)?,
    })
}

/// One-step map of a scheme at step size `τ`.
#[derive(Debug, Clone)]
pub struct SteppedFamily<'a> {
    pub problem: &'a ProblemInstance,
    pub scheme: Scheme,
    pub tau: f64,
    pub operator: BlockOperator,
}

/// Build the one-step operator. For AO both the closed block form and the
/// literal product `T₂·T₁` are formed; a disagreement above
/// [`AO_PRODUCT_TOL`] is reported as an error.
pub fn assemble(p: &ProblemInstance, scheme: Scheme, tau: f64) -> Result<SteppedFamily<'_>> {
    check_tau(tau)?;
    let operator = match scheme {
        Scheme::Exact => exact_step(p, tau)?,
        Scheme::Naive => BlockOperator {
            b11: expm(p.a1(), tau)?,
            b12: p.b1().scale(tau),
            b21: p.b2().scale(tau),
            b22: expm(p.a2(), tau)?,
        },
        _ => {
            let parts = StepParts::new(p, tau)?;
            match scheme {
                Scheme::Ao => {
                    let closed = parts.ao_closed_form()?;
                    let product = parts.frozen_step_2().mul(&parts.frozen_step_1())?;
                    let defect = closed.max_abs_diff(&product);
                    if !(defect <= AO_PRODUCT_TOL) {
                        return Err(Error::AssemblyMismatch(defect));
                    }
                    closed
                }
                Scheme::Transposed => parts.frozen_step_1().mul(&parts.frozen_step_2())?,
                Scheme::Symmetrized => parts.symmetrized(),
                Scheme::Naive | Scheme::Exact => unreachable!(),
            }
        }
    };
    Ok(SteppedFamily {
        problem: p,
        scheme,
        tau,
        operator,
    })
}

fn exact_step(p: &ProblemInstance, tau: f64) -> Result<BlockOperator> {
    let c = p.generator().flatten_operator();
    let e = expm(&c, tau)?;
    BlockOperator::from_flat(e.matrix(), p.dims().0)
}

/// `m^n` by binary powering; `m^0 = I`.
pub fn matrix_power(m: &DMatrix<f64>, n: u64) -> DMatrix<f64> {
    let mut result: Option<DMatrix<f64>> = None;
    let mut base = m.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r * &base,
            });
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result.unwrap_or_else(|| DMatrix::identity(m.nrows(), m.ncols()))
}

/// `T(τ)ⁿ` by repeated squaring; `n = 0` gives the identity.
pub fn iterate(fam: &SteppedFamily<'_>, n: u64) -> BlockOperator {
    if n == 1 {
        return fam.operator.clone();
    }
    let flat = matrix_power(&fam.operator.flatten(), n);
    BlockOperator::from_flat(&flat, fam.problem.dims().0).expect("power keeps block shape")
}

/// `‖(T(τ) - I)/τ + 𝒞‖` for the AO scheme at every `τ` of a positive,
/// strictly decreasing grid.
pub fn derivative_defects(p: &ProblemInstance, tau_grid: &[f64]) -> Result<Vec<f64>> {
    if tau_grid.is_empty() || tau_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Domain(
            "step grid must be positive and finite".into(),
        ));
    }
    if tau_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "step grid must be strictly decreasing".into(),
        ));
    }
    let c = p.generator().flatten();
    let n = c.nrows();
    tau_grid
        .iter()
        .map(|&tau| {
            let t = assemble(p, Scheme::Ao, tau)?.operator.flatten();
            let defect = (t - DMatrix::<f64>::identity(n, n)) / tau + &c;
            Ok(matrix_norm(&defect))
        })
        .collect()
}

/// Largest defect over the two smallest step sizes of the grid.
pub fn derivative_check(p: &ProblemInstance, tau_grid: &[f64]) -> Result<f64> {
    let defects = derivative_defects(p, tau_grid)?;
    Ok(defects.iter().rev().take(2).fold(0.0, |m, d| m.max(*d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{find_recipe, make_laplacian_problem};

    fn scalar() -> ProblemInstance {
        find_recipe("scalar2x2").unwrap().build().unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let p = make_laplacian_problem(3, 2, 1.0, 5).unwrap();
        for scheme in Scheme::ALL {
            let fam = assemble(&p, scheme, 0.0).unwrap();
            assert!(fam.operator.max_abs_diff(&BlockOperator::identity(3, 2)) < 1e-15);
        }
        assert!(frozen_step_1(&p, 0.0).unwrap() == BlockOperator::identity(3, 2));
        assert!(frozen_step_2(&p, 0.0).unwrap() == BlockOperator::identity(3, 2));
    }

    #[test]
    fn scalar_frozen_steps() {
        let p = scalar();
        let t1 = frozen_step_1(&p, 1.0).unwrap();
        assert!((t1.b12.get(0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((t1.b11.get(0, 0) - (-1.0f64).exp()).abs() < 1e-15);
        let t2 = frozen_step_2(&p, 1.0).unwrap();
        assert!((t2.b21.get(0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(t2.b11.get(0, 0), 1.0);
    }

    #[test]
    fn negative_step_rejected() {
        let p = scalar();
        assert!(assemble(&p, Scheme::Ao, -0.1).is_err());
        assert!(frozen_step_1(&p, f64::NAN).is_err());
    }

    #[test]
    fn power_zero_and_one() {
        let p = scalar();
        let fam = assemble(&p, Scheme::Ao, 0.3).unwrap();
        assert!(iterate(&fam, 0) == BlockOperator::identity(1, 1));
        assert!(iterate(&fam, 1) == fam.operator);
    }

    #[test]
    fn derivative_grid_validation() {
        let p = scalar();
        assert!(derivative_defects(&p, &[1e-2, 1e-1]).is_err());
        assert!(derivative_defects(&p, &[1e-1, 0.0]).is_err());
        assert!(derivative_defects(&p, &[]).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::parse(s.name()), Some(s));
        }
        assert_eq!(Scheme::default(), Scheme::Ao);
    }
}
