// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gallery::{
    fractional_coupling_unchecked, make_scalar_model, scalar_model_eigenpair, ProblemInstance,
};
use crate::linop::matrix_norm;
use crate::par::Execution;
use crate::schemes::{assemble, Scheme};

/// Growth over the control that counts as unstable.
pub const INSTABILITY_FACTOR: f64 = 4.0;

/// Seed of the orthonormal factors in the fractional couplings.
pub const SWEEP_SEED: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstabilityRow {
    pub beta: f64,
    pub n: u64,
    /// `‖T(t/n)ⁿ‖`; `+∞` once it leaves the `f64` range.
    pub norm_of_power: f64,
    /// `n^β t^{1-β}`.
    pub lower_bound: f64,
    /// `‖P(x)ⁿ‖` with `x = (t/n)^{1-β}`.
    pub scalar_norm_power: f64,
    /// `λ(x)ⁿ`.
    pub scalar_lambda_power: f64,
    /// Natural logarithms of the three quantities above, always finite.
    pub log_norm_of_power: f64,
    pub log_scalar_norm_power: f64,
    pub log_scalar_lambda_power: f64,
}

impl InstabilityRow {
    /// `‖P(x)ⁿ‖ ≥ λ(x)ⁿ ≥ n^β t^{1-β}`, compared in log space.
    pub fn scalar_chain_holds(&self) -> bool {
        let slack = 1e-12 * self.log_scalar_lambda_power.abs().max(1.0);
        self.log_scalar_norm_power + slack >= self.log_scalar_lambda_power
            && self.log_scalar_lambda_power + slack >= self.lower_bound.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityVerdict {
    pub unstable: bool,
    /// β with the largest growth over the control at the largest `n`.
    pub worst_beta: Option<f64>,
    /// `‖T(t/n)ⁿ‖_β / ‖T(t/n)ⁿ‖_0` at the largest `n`.
    pub growth_factor: f64,
    pub n: u64,
}

impl InstabilityVerdict {
    pub fn label(&self) -> &'static str {
        if self.unstable {
            "unstable"
        } else {
            "stable"
        }
    }
}

/// `ln ‖mⁿ‖` by squaring with renormalisation, so it stays finite where
/// `mⁿ` itself overflows.
pub fn log_norm_of_power(m: &DMatrix<f64>, n: u64) -> f64 {
    let mut log_scale = 0.0f64;
    let mut result = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut base_log = 0.0f64;
    let mut k = n;
    let renorm = |a: &mut DMatrix<f64>, log: &mut f64| {
        let s = a.amax();
        if s > 0.0 && s.is_finite() {
            *a /= s;
            *log += s.ln();
        }
    };
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
            log_scale += base_log;
            renorm(&mut result, &mut log_scale);
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
            base_log *= 2.0;
            renorm(&mut base, &mut base_log);
        }
    }
    let norm = matrix_norm(&result);
    if norm == 0.0 {
        f64::NEG_INFINITY
    } else {
        log_scale + norm.ln()
    }
}

/// Scalar-model columns for one `(β, t, n)`.
fn scalar_columns(beta: f64, t: f64, n: u64) -> Result<(f64, f64)> {
    let x = (t / n as f64).powf(1.0 - beta);
    let p = make_scalar_model(x)?;
    let (lambda, _) = scalar_model_eigenpair(x);
    Ok((log_norm_of_power(p.matrix(), n), n as f64 * lambda.ln()))
}

/// Norms of the AO powers under fractional couplings `B_i = A_i^β R_i`
/// built on `base`, for each β of `beta_list` plus a β = 0 control.
pub fn instability_sweep(
    base: &ProblemInstance,
    beta_list: &[f64],
    t: f64,
    n_list: &[u64],
    exec: Execution,
) -> Result<Vec<InstabilityRow>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if let Some(b) = beta_list.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(Error::Domain(format!("beta must lie in (0, 1], got {b}")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Domain("n list must be nonempty and positive".into()));
    }
    let mut betas = vec![0.0];
    betas.extend_from_slice(beta_list);
    let problems = betas
        .iter()
        .map(|&b| fractional_coupling_unchecked(base, b, 1.0, SWEEP_SEED))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, u64)> = (0..betas.len())
        .flat_map(|i| n_list.iter().map(move |&n| (i, n)))
        .collect();
    exec.map(&cells, |&(i, n)| {
        let beta = betas[i];
        let fam = assemble(&problems[i], Scheme::Ao, t / n as f64)?;
        let log_norm = log_norm_of_power(&fam.operator.flatten(), n);
        let (log_scalar, log_lambda) = scalar_columns(beta, t, n)?;
        Ok(InstabilityRow {
            beta,
            n,
            norm_of_power: log_norm.exp(),
            lower_bound: (n as f64).powf(beta) * t.powf(1.0 - beta),
            scalar_norm_power: log_scalar.exp(),
            scalar_lambda_power: log_lambda.exp(),
            log_norm_of_power: log_norm,
            log_scalar_norm_power: log_scalar,
            log_scalar_lambda_power: log_lambda,
        })
    })
    .into_iter()
    .collect()
}

/// Compare every β > 0 against the control at the largest `n` of the sweep.
pub fn verdict(rows: &[InstabilityRow]) -> InstabilityVerdict {
    let n = rows.iter().map(|r| r.n).max().unwrap_or(0);
    let at_n: Vec<&InstabilityRow> = rows.iter().filter(|r| r.n == n).collect();
    let control = at_n
        .iter()
        .find(|r| r.beta == 0.0)
        .map(|r| r.log_norm_of_power);
    let mut worst: Option<(f64, f64)> = None;
    if let Some(c) = control {
        for r in at_n.iter().filter(|r| r.beta > 0.0) {
            let g = r.log_norm_of_power - c;
            if worst.is_none_or(|(_, w)| g > w) {
                worst = Some((r.beta, g));
            }
        }
    }
    let growth_factor = worst.map_or(1.0, |(_, g)| g.exp());
    InstabilityVerdict {
        unstable: growth_factor >= INSTABILITY_FACTOR,
        worst_beta: worst.map(|(b, _)| b),
        growth_factor,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::matrix_power;

    #[test]
    fn log_norm_matches_direct_power() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.25]);
        for n in [1, 2, 7, 64] {
            let direct = matrix_norm(&matrix_power(&m, n)).ln();
            assert!((log_norm_of_power(&m, n) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn log_norm_survives_overflow() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        let l = log_norm_of_power(&m, 4096);
        let lambda = (3.0 + 5f64.sqrt()) / 2.0;
        assert!(l.is_finite());
        assert!((l - 4096.0 * lambda.ln()).abs() < 1e-8 * l);
    }

    #[test]
    fn scalar_lower_bound() {
        let (log_norm, log_lambda) = scalar_columns(0.5, 1.0, 256).unwrap();
        assert!(log_norm >= log_lambda - 1e-12);
        assert!(log_lambda >= 16f64.ln());
    }

    #[test]
    fn empty_verdict_is_stable() {
        let v = verdict(&[]);
        assert!(!v.unstable);
        assert_eq!(v.label(), "stable");
    }
}
