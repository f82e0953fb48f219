// SPDX-License-Identifier: Apache-2.0

//! Reference solutions of `U' = -M U` by adaptive extrapolated implicit
//! Euler. This route shares nothing with the Padé or eigendecomposition
//! paths, so agreement between them validates an exact reference before
//! any error against it is reported.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Number of rows in the extrapolation table (harmonic sequence 1..=k).
    pub stages: usize,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-12,
            stages: 7,
            max_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate `U' = -M U`, `U(0) = u0` up to time `t`.
pub fn integrate_linear(
    m: &DMatrix<f64>,
    u0: &DMatrix<f64>,
    t: f64,
    opts: OdeOptions,
) -> Result<(DMatrix<f64>, OdeStats)> {
    if m.nrows() != m.ncols() || u0.nrows() != m.nrows() {
        return Err(Error::Shape(format!(
            "generator {}x{} with initial data {}x{}",
            m.nrows(),
            m.ncols(),
            u0.nrows(),
            u0.ncols()
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!(
            "end time must be nonnegative, got {t}"
        )));
    }
    let k = opts.stages.max(2);
    let n = m.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let mut stats = OdeStats::default();
    let mut u = u0.clone();
    if t == 0.0 {
        return Ok((u, stats));
    }
    let scale_m = m.iter().fold(0.0f64, |a, x| a.max(x.abs())) * n as f64;
    let mut h = if scale_m > 0.0 {
        (1.0 / scale_m).min(t)
    } else {
        t
    };
    let mut now = 0.0;

    while now < t {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget exhausted at t = {now} of {t}"
            )));
        }
        let last = now + h >= t * (1.0 - 1e-14);
        if last {
            h = t - now;
        }
        let (estimate, lower) = extrapolate(m, &ident, &u, h, k)?;
        let err =
            estimate
                .iter()
                .zip(lower.iter())
                .zip(u.iter())
                .fold(0.0f64, |e, ((a, b), u0)| {
                    let sc = opts.atol + opts.rtol * a.abs().max(u0.abs());
                    e.max((a - b).abs() / sc)
                });
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * err.powf(-1.0 / k as f64)).clamp(0.1, 4.0)
        };
        if err <= 1.0 {
            stats.accepted += 1;
            u = estimate;
            now = if last { t } else { now + h };
        } else {
            stats.rejected += 1;
        }
        h *= factor;
    }
    Ok((u, stats))
}

/// One macro step of size `h`; returns the diagonal entry of the table and
/// the entry one order lower.
fn extrapolate(
    m: &DMatrix<f64>,
    ident: &DMatrix<f64>,
    u: &DMatrix<f64>,
    h: f64,
    k: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let mut prev_row: Vec<DMatrix<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let substeps = j + 1;
        let hs = h / substeps as f64;
        let lu = (ident + m * hs).lu();
        let mut y = u.clone();
        for _ in 0..substeps {
            y = lu
                .solve(&y)
                .ok_or_else(|| Error::Integration(format!("singular step matrix at h = {hs}")))?;
        }
        let mut row = Vec::with_capacity(j + 1);
        row.push(y);
        for l in 1..=j {
            let ratio = substeps as f64 / (substeps - l) as f64;
            let next = &row[l - 1] + (&row[l - 1] - &prev_row[l - 1]) / (ratio - 1.0);
            row.push(next);
        }
        prev_row = row;
    }
    let best = prev_row.pop().expect("k >= 2");
    let lower = prev_row.pop().expect("k >= 2");
    Ok((best, lower))
}

/// `e^{-tM}` column by column from the identity.
pub fn ode_exponential(m: &DMatrix<f64>, t: f64, opts: OdeOptions) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    integrate_linear(m, &DMatrix::identity(n, n), t, opts).map(|(u, _)| u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay() {
        let m = DMatrix::from_element(1, 1, 2.0);
        let u = ode_exponential(&m, 1.5, OdeOptions::default()).unwrap();
        assert!((u[(0, 0)] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn rotation() {
        // M = [[0, -1], [1, 0]] gives e^{-tM} = [[cos t, sin t], [-sin t, cos t]].
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let u = ode_exponential(&m, 2.0, OdeOptions::default()).unwrap();
        let (s, c) = 2.0f64.sin_cos();
        let expected = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert!((u - expected).amax() < 1e-11);
    }

    #[test]
    fn stiff_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e2, 1e4]));
        let u = ode_exponential(&m, 1.0, OdeOptions::default()).unwrap();
        assert!((u[(0, 0)] - (-1.0f64).exp()).abs() < 1e-11);
        assert!(u[(1, 1)].abs() < 1e-12 && u[(2, 2)].abs() < 1e-12);
    }

    #[test]
    fn zero_time_and_shape_errors() {
        let m = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(
            ode_exponential(&m, 0.0, OdeOptions::default()).unwrap(),
            DMatrix::identity(2, 2)
        );
        let bad = DMatrix::from_element(3, 1, 1.0);
        assert!(integrate_linear(&m, &bad, 1.0, OdeOptions::default()).is_err());
        assert!(ode_exponential(&m, -1.0, OdeOptions::default()).is_err());
    }
}
