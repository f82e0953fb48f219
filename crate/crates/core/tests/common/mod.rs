// SPDX-License-Identifier: Apache-2.0

//! Reference computations that share no code with the library's matrix
//! functions: cyclic Jacobi eigensolver, Taylor exponential, Gauss-Legendre
//! quadrature, classical RK4 and sequential matrix powers.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use semiflow::rng::SplitMix64;

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// `V f(Λ) Vᵀ` for symmetric `a`.
pub fn symmetric_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, v) = jacobi_eigen(a);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.into_iter().map(f)));
    &v * d * v.transpose()
}

/// Largest singular value as the square root of the top eigenvalue of `AᵀA`.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let (vals, _) = jacobi_eigen(&(a.transpose() * a));
    vals.into_iter().fold(0.0, f64::max).max(0.0).sqrt()
}

/// `e^{-tA}` by scaling, a degree-30 Taylor polynomial and squaring.
pub fn taylor_expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let m = a * (-t);
    let norm = m.iter().map(|x| x.abs()).sum::<f64>();
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let x = m / 2f64.powi(s as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 1..=order {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre quadrature of a matrix-valued integrand.
pub fn quadrature(
    f: impl Fn(f64) -> DMatrix<f64>,
    lo: f64,
    hi: f64,
    panels: usize,
    order: usize,
) -> DMatrix<f64> {
    let rule = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut acc: Option<DMatrix<f64>> = None;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for &(x, w) in &rule {
            let term = f(a + 0.5 * h * (x + 1.0)) * (0.5 * h * w);
            acc = Some(match acc {
                None => term,
                Some(s) => s + term,
            });
        }
    }
    acc.expect("at least one panel")
}

/// `U' = -AU`, `U(0) = I` by classical RK4 with `steps` equal steps.
pub fn rk4_exponential(a: &DMatrix<f64>, t: f64, steps: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let h = t / steps as f64;
    let rhs = |u: &DMatrix<f64>| -(a * u);
    let mut u = DMatrix::<f64>::identity(n, n);
    for _ in 0..steps {
        let k1 = rhs(&u);
        let k2 = rhs(&(&u + &k1 * (h / 2.0)));
        let k3 = rhs(&(&u + &k2 * (h / 2.0)));
        let k4 = rhs(&(&u + &k3 * h));
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    u
}

/// `mⁿ` by `n - 1` successive products.
pub fn sequential_power(m: &DMatrix<f64>, n: u64) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    for _ in 0..n {
        p = &p * m;
    }
    p
}

pub fn random_matrix(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut rng = SplitMix64::new(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.next_symmetric())
}

/// Symmetric positive definite with spectrum in `[shift, shift + 1]`-ish.
pub fn random_spd(seed: u64, n: usize, shift: f64) -> DMatrix<f64> {
    let g = random_matrix(seed, n, n);
    let s = &g * g.transpose() / n as f64;
    let s = (&s + s.transpose()) * 0.5;
    s + DMatrix::<f64>::identity(n, n) * shift
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}
