// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::reference::{ExactReference, Weight};
use crate::error::{Error, Result};
use crate::gallery::ProblemInstance;
use crate::linop::matrix_norm;
use crate::oracle::OdeOptions;
use crate::par::Execution;
use crate::schemes::{assemble, matrix_power, Scheme};

/// Relative slack on the stability envelope before a row counts as a
/// violation.
pub const BOUND_TOL: f64 = 1e-9;

/// Default least-squares window on `n`.
pub const DEFAULT_FIT_WINDOW: (u64, u64) = (128, 2048);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: u64,
    pub error_op: f64,
    pub error_weighted: f64,
    pub norm_of_power: f64,
    pub bound_rhs: f64,
    /// Wall time of the cell; zero unless timing was requested.
    pub wall_ns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RateFit {
    Slope(f64),
    /// Every error in the window is zero.
    Exact,
    /// Fewer than four usable rows.
    Insufficient,
}

impl RateFit {
    pub fn slope(self) -> Option<f64> {
        match self {
            RateFit::Slope(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub problem_id: String,
    pub scheme: Scheme,
    pub dims: (usize, usize),
    pub t: f64,
    pub rows: Vec<RateRow>,
    pub fitted_slope_op: RateFit,
    pub fitted_slope_weighted: RateFit,
    pub bound_violations: usize,
    pub fit_window: (u64, u64),
    pub weight_shift: Option<f64>,
    pub oracle_discrepancy: f64,
    /// `sup_n error·n / (e^{4t(‖B₁‖+‖B₂‖)} (log n + t²))`, n ≥ 2.
    pub envelope_constant_statement: f64,
    /// Same with the sharper `e^{2t‖ℬ‖}` factor.
    pub envelope_constant_proof: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RateOptions {
    pub fit_window: (u64, u64),
    pub execution: Execution,
    pub record_timing: bool,
    pub ode: OdeOptions,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            fit_window: DEFAULT_FIT_WINDOW,
            execution: Execution::default(),
            record_timing: false,
            ode: OdeOptions::default(),
        }
    }
}

/// Least-squares slope of `log error` against `log n`.
///
/// Needs at least four points; zero errors are dropped, and if nothing is
/// left the data are reported as [`RateFit::Exact`].
pub fn fit_rate(points: &[(u64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 rows, got {}",
            points.len()
        )));
    }
    if let Some((n, e)) = points
        .iter()
        .find(|(n, e)| *n == 0 || !(*e >= 0.0) || !e.is_finite())
    {
        return Err(Error::Domain(format!("invalid row (n = {n}, error = {e})")));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if logs.is_empty() {
        return Ok(RateFit::Exact);
    }
    if logs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "only {} rows with nonzero error",
            logs.len()
        )));
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all rows share the same n".into()));
    }
    Ok(RateFit::Slope(sxy / sxx))
}

/// Rows used for the slope: those inside `window`, else the largest decade
/// of `n`, else all rows.
pub fn select_fit_rows(rows: &[RateRow], window: (u64, u64)) -> Vec<RateRow> {
    let inside: Vec<RateRow> = rows
        .iter()
        .copied()
        .filter(|r| r.n >= window.0 && r.n <= window.1)
        .collect();
    if inside.len() >= 4 {
        return inside;
    }
    let n_max = rows.iter().map(|r| r.n).max().unwrap_or(0);
    let decade: Vec<RateRow> = rows
        .iter()
        .copied()
        .filter(|r| r.n as f64 >= n_max as f64 / 10.0)
        .collect();
    if decade.len() >= 4 {
        decade
    } else {
        rows.to_vec()
    }
}

fn fit_column(rows: &[RateRow], column: impl Fn(&RateRow) -> f64) -> RateFit {
    let points: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, column(r))).collect();
    fit_rate(&points).unwrap_or(RateFit::Insufficient)
}

/// Convergence table of `‖T(t/n)ⁿ - e^{-t𝒞}‖` over `n_list`.
pub fn error_curve(
    p: &ProblemInstance,
    scheme: Scheme,
    t: f64,
    n_list: &[u64],
    opts: &RateOptions,
) -> Result<RateReport> {
    let reference = ExactReference::compute(p, t, opts.ode)?;
    let weight = Weight::for_problem(p)?;
    error_curve_with_reference(p, scheme, &reference, &weight, n_list, opts)
}

/// As [`error_curve`] with a precomputed, already validated reference.
pub fn error_curve_with_reference(
    p: &ProblemInstance,
    scheme: Scheme,
    reference: &ExactReference,
    weight: &Weight,
    n_list: &[u64],
    opts: &RateOptions,
) -> Result<RateReport> {
    let t = reference.t;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "n list must be strictly ascending positive integers".into(),
        ));
    }
    let bound_rhs = p.stability_bound(t);
    let cells = opts.execution.map(n_list, |&n| -> Result<RateRow> {
        let start = Instant::now();
        let fam = assemble(p, scheme, t / n as f64)?;
        let power = matrix_power(&fam.operator.flatten(), n);
        let diff = &power - &reference.semigroup;
        let error_op = matrix_norm(&diff);
        let error_weighted = matrix_norm(&(&diff * &weight.inverse));
        let norm_of_power = matrix_norm(&power);
        let wall_ns = if opts.record_timing {
            start.elapsed().as_nanos() as u64
        } else {
            0
        };
        Ok(RateRow {
            n,
            error_op,
            error_weighted,
            norm_of_power,
            bound_rhs,
            wall_ns,
        })
    });
    let rows = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let fit_rows = select_fit_rows(&rows, opts.fit_window);
    let fitted_slope_op = fit_column(&fit_rows, |r| r.error_op);
    let fitted_slope_weighted = fit_column(&fit_rows, |r| r.error_weighted);
    let bound_violations = rows
        .iter()
        .filter(|r| r.norm_of_power > r.bound_rhs * (1.0 + BOUND_TOL))
        .count();

    let (b1, b2) = p.coupling_norms();
    let statement_growth = (4.0 * t * (b1 + b2)).exp();
    let proof_growth = (2.0 * t * b1.max(b2)).exp();
    let envelope = |growth: f64| {
        rows.iter()
            .filter(|r| r.n >= 2)
            .map(|r| r.error_op * r.n as f64 / (growth * ((r.n as f64).ln() + t * t)))
            .fold(0.0, f64::max)
    };

    Ok(RateReport {
        problem_id: p.id().to_string(),
        scheme,
        dims: p.dims(),
        t,
        envelope_constant_statement: envelope(statement_growth),
        envelope_constant_proof: envelope(proof_growth),
        rows,
        fitted_slope_op,
        fitted_slope_weighted,
        bound_violations,
        fit_window: opts.fit_window,
        weight_shift: weight.shift,
        oracle_discrepancy: reference.oracle_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(f: impl Fn(f64) -> f64, ns: &[u64]) -> Vec<(u64, f64)> {
        ns.iter().map(|&n| (n, f(n as f64))).collect()
    }

    #[test]
    fn exact_inverse_power() {
        let pts = rows(|n| 1.0 / n, &[1, 2, 4, 8, 16, 32]);
        let s = fit_rate(&pts).unwrap().slope().unwrap();
        assert!((s + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_error() {
        let pts = rows(|_| 0.25, &[3, 5, 9, 17]);
        assert!(fit_rate(&pts).unwrap().slope().unwrap().abs() < 1e-14);
    }

    #[test]
    fn log_factor_slope() {
        // Least squares of log(log n) - log n gives -1 + 0.1837 on this grid.
        let pts = rows(|n| n.ln() / n, &[64, 128, 256, 512, 1024]);
        let s = fit_rate(&pts).unwrap().slope().unwrap();
        assert!((s + 0.8163).abs() < 1e-3, "{s}");
    }

    #[test]
    fn zero_errors_are_exact() {
        let pts = rows(|_| 0.0, &[1, 2, 3, 4]);
        assert_eq!(fit_rate(&pts).unwrap(), RateFit::Exact);
    }

    #[test]
    fn too_few_rows() {
        let pts = rows(|n| 1.0 / n, &[1, 2, 3]);
        assert!(matches!(fit_rate(&pts), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn window_selection_fallbacks() {
        let mk = |n| RateRow {
            n,
            error_op: 1.0,
            error_weighted: 1.0,
            norm_of_power: 1.0,
            bound_rhs: 1.0,
            wall_ns: 0,
        };
        let all: Vec<RateRow> = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048]
            .into_iter()
            .map(mk)
            .collect();
        let w = select_fit_rows(&all, (128, 2048));
        assert_eq!(
            w.iter().map(|r| r.n).collect::<Vec<_>>(),
            [128, 256, 512, 1024, 2048]
        );
        let small: Vec<RateRow> = (1..=20).map(mk).collect();
        let w = select_fit_rows(&small, (128, 2048));
        assert_eq!(w.first().unwrap().n, 2);
    }
}
