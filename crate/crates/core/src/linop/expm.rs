// SPDX-License-Identifier: Apache-2.0

//! Semigroup exponentials `e^{-tA}`, the integral `F_t = ∫₀ᵗ e^{-sA} ds`,
//! shifts and fractional powers.
//!
//! Exactly symmetric inputs go through the cached eigendecomposition; all
//! other inputs use scaling-and-squaring with the diagonal [13/13] Padé
//! approximant, the scaling exponent being chosen from the spectral norm.

use nalgebra::DMatrix;

use super::norm::matrix_norm;
use super::DenseOperator;
use crate::error::{Error, Result};

/// Numerator/denominator coefficients of the [13/13] Padé approximant.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest norm for which the unscaled [13/13] approximant is accurate to
/// unit roundoff.
const THETA_13: f64 = 5.371_920_351_148_152;

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time must be finite and nonnegative, got {t}"
        )))
    }
}

/// `e^{-tA}`.
pub fn expm(a: &DenseOperator, t: f64) -> Result<DenseOperator> {
    a.require_square("expm")?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(DenseOperator::identity(a.rows()));
    }
    if let Some(spectrum) = a.spectrum() {
        return Ok(DenseOperator::from_matrix_unchecked(
            spectrum.apply_fn(|l| (-t * l).exp()),
        ));
    }
    let scaled = a.matrix() * (-t);
    DenseOperator::new(expm_pade(&scaled))
}

/// `e^{-tA}` always via Padé, even for symmetric input. Used as the second,
/// independent route in cross-checks.
pub fn expm_pade_route(a: &DenseOperator, t: f64) -> Result<DenseOperator> {
    a.require_square("expm")?;
    check_time(t)?;
    DenseOperator::new(expm_pade(&(a.matrix() * (-t))))
}

/// `exp(M)` by scaling and squaring with the [13/13] Padé approximant.
pub(crate) fn expm_pade(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = matrix_norm(m);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = m * 2f64.powi(-squarings);
    let mut result = pade13(&scaled, n);
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn pade13(a: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let b = &PADE13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_outer = &a6 * u_inner + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = a * u_outer;

    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_inner + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let numer = &v + &u;
    let denom = &v - &u;
    denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for scaled arguments")
}

/// `F_t = ∫₀ᵗ e^{-sA} ds`.
///
/// Symmetric inputs use `(1 - e^{-tλ})/λ` on the spectrum (`t` on the kernel).
/// Otherwise `F_t` is read off the top-right block of the exponential of the
/// augmented matrix `[[-A, I], [0, 0]]`, which needs no invertibility.
pub fn phi1_integral(a: &DenseOperator, t: f64) -> Result<DenseOperator> {
    a.require_square("phi1_integral")?;
    check_time(t)?;
    let n = a.rows();
    if t == 0.0 {
        return Ok(DenseOperator::zeros(n, n));
    }
    if let Some(spectrum) = a.spectrum() {
        return Ok(DenseOperator::from_matrix_unchecked(spectrum.apply_fn(
            |l| {
                if l == 0.0 {
                    t
                } else {
                    -(-t * l).exp_m1() / l
                }
            },
        )));
    }
    DenseOperator::new(phi1_augmented(a.matrix(), t))
}

/// Augmented-exponential route for `F_t`, independent of any spectral data.
pub fn phi1_augmented_route(a: &DenseOperator, t: f64) -> Result<DenseOperator> {
    a.require_square("phi1_integral")?;
    check_time(t)?;
    DenseOperator::new(phi1_augmented(a.matrix(), t))
}

fn phi1_augmented(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut aug = DMatrix::<f64>::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * (-t)));
    aug.view_mut((0, n), (n, n)).fill_with_identity();
    aug.view_mut((0, n), (n, n)).scale_mut(t);
    let e = expm_pade(&aug);
    e.view((0, n), (n, n)).into_owned()
}

/// `A + ηI`, so that `e^{-t(A+η)} = e^{-tη} e^{-tA}`.
pub fn shift(a: &DenseOperator, eta: f64) -> Result<DenseOperator> {
    a.require_square("shift")?;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Domain(format!("shift must be positive, got {eta}")));
    }
    let mut m = a.matrix().clone();
    for i in 0..m.nrows() {
        m[(i, i)] += eta;
    }
    DenseOperator::new(m)
}

/// `A^β` for symmetric positive definite `A`, `β ∈ [0, 1]`.
pub fn fractional_power(a: &DenseOperator, beta: f64) -> Result<DenseOperator> {
    a.require_square("fractional_power")?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "exponent must lie in [0, 1], got {beta}"
        )));
    }
    if !a.is_spd() {
        return Err(Error::Unsupported(
            "fractional powers are only defined here for symmetric positive definite operators"
                .into(),
        ));
    }
    if beta == 0.0 {
        return Ok(DenseOperator::identity(a.rows()));
    }
    if beta == 1.0 {
        return Ok(a.clone());
    }
    let spectrum = a.spectrum().expect("spd implies spectrum");
    Ok(DenseOperator::from_matrix_unchecked(
        spectrum.apply_fn(|l| l.powf(beta)),
    ))
}
