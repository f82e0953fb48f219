// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{expm, operator_norm, DenseOperator};
use crate::error::Result;

/// Tolerance used when certifying contraction on the t-grid.
pub const CONTRACTION_TOL: f64 = 1e-9;

/// Logarithmic time grid `[10⁻⁶, 10³]` with 200 points.
pub fn certification_grid() -> Vec<f64> {
    log_grid(1e-6, 1e3, 200)
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Numerically certified semigroup constants of `e^{-tA}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupBounds {
    pub is_contraction: bool,
    /// `sup_t ‖tA e^{-tA}‖` over the certification grid.
    pub holomorphy_constant: Option<f64>,
    /// `(M, β)` with `‖e^{-tA}‖ ≤ M e^{βt}` on the grid.
    pub growth_constants: (f64, f64),
    pub invertible: bool,
    pub spd: bool,
}

impl SemigroupBounds {
    /// Measure the constants on [`certification_grid`].
    pub fn certify(a: &DenseOperator) -> Result<Self> {
        a.require_square("certify")?;
        let grid = certification_grid();
        let (sup_semigroup, sup_holo) = match a.spectrum() {
            // Normal operator: norms of functions of A are spectral maxima.
            Some(spectrum) => grid.iter().fold((1.0f64, 0.0f64), |(s, h), &t| {
                let (es, hs) = spectrum
                    .eigenvalues
                    .iter()
                    .fold((0.0f64, 0.0f64), |(e, h), &l| {
                        let el = (-t * l).exp();
                        (e.max(el), h.max((t * l * el).abs()))
                    });
                (s.max(es), h.max(hs))
            }),
            None => {
                let mut s = 1.0f64;
                let mut h = 0.0f64;
                for &t in &grid {
                    let e = expm(a, t)?;
                    s = s.max(operator_norm(&e));
                    let tae = a.mul(&e)?.scale(t);
                    h = h.max(operator_norm(&tae));
                }
                (s, h)
            }
        };
        let invertible = match a.spectrum() {
            Some(spectrum) => {
                let scale = spectrum.eigenvalues.amax();
                spectrum
                    .eigenvalues
                    .iter()
                    .all(|l| l.abs() > 1e-12 * scale.max(1.0))
            }
            None => {
                let sv = a.matrix().singular_values();
                sv.min() > 1e-12 * sv.max().max(1.0)
            }
        };
        Ok(Self {
            is_contraction: sup_semigroup <= 1.0 + CONTRACTION_TOL,
            holomorphy_constant: sup_holo.is_finite().then_some(sup_holo),
            growth_constants: (sup_semigroup, 0.0),
            invertible,
            spd: a.is_spd(),
        })
    }
}
