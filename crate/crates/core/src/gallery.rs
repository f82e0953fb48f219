// SPDX-License-Identifier: Apache-2.0

//! Reproducible generator/coupling pairs with certified semigroup constants.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{
    fractional_power, operator_norm, BlockOperator, DenseOperator, SemigroupBounds,
};
use crate::rng::SplitMix64;

/// Damping added to the skew family, `A = S + εI`.
pub const SKEW_DAMPING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingKind {
    Bounded,
    Fractional { beta: f64 },
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingKind::Bounded => write!(f, "bounded"),
            CouplingKind::Fractional { beta } => write!(f, "fractional({beta})"),
        }
    }
}

/// Generators `A₁, A₂` and couplings `B₁ : X₂→X₁`, `B₂ : X₁→X₂` of
/// `-C = -A + B`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    id: String,
    a1: DenseOperator,
    a2: DenseOperator,
    b1: DenseOperator,
    b2: DenseOperator,
    bounds1: SemigroupBounds,
    bounds2: SemigroupBounds,
    coupling_kind: CouplingKind,
    coupling_norms: (f64, f64),
}

impl ProblemInstance {
    /// Validate shapes and certify both generators.
    pub fn new(
        id: impl Into<String>,
        a1: DenseOperator,
        a2: DenseOperator,
        b1: DenseOperator,
        b2: DenseOperator,
        coupling_kind: CouplingKind,
    ) -> Result<Self> {
        a1.require_square("generator A1")?;
        a2.require_square("generator A2")?;
        let (n1, n2) = (a1.rows(), a2.rows());
        if b1.rows() != n1 || b1.cols() != n2 || b2.rows() != n2 || b2.cols() != n1 {
            return Err(Error::Shape(format!(
                "couplings must be {n1}x{n2} and {n2}x{n1}, got {}x{} and {}x{}",
                b1.rows(),
                b1.cols(),
                b2.rows(),
                b2.cols()
            )));
        }
        let bounds1 = SemigroupBounds::certify(&a1)?;
        let bounds2 = SemigroupBounds::certify(&a2)?;
        let coupling_norms = (operator_norm(&b1), operator_norm(&b2));
        Ok(Self {
            id: id.into(),
            a1,
            a2,
            b1,
            b2,
            bounds1,
            bounds2,
            coupling_kind,
            coupling_norms,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a1.rows(), self.a2.rows())
    }

    pub fn a1(&self) -> &DenseOperator {
        &self.a1
    }

    pub fn a2(&self) -> &DenseOperator {
        &self.a2
    }

    pub fn b1(&self) -> &DenseOperator {
        &self.b1
    }

    pub fn b2(&self) -> &DenseOperator {
        &self.b2
    }

    pub fn bounds1(&self) -> &SemigroupBounds {
        &self.bounds1
    }

    pub fn bounds2(&self) -> &SemigroupBounds {
        &self.bounds2
    }

    pub fn coupling_kind(&self) -> CouplingKind {
        self.coupling_kind
    }

    /// `(‖B₁‖, ‖B₂‖)`.
    pub fn coupling_norms(&self) -> (f64, f64) {
        self.coupling_norms
    }

    /// `e^{t(‖B₁‖+‖B₂‖)}`, the stability envelope of the split-step powers.
    pub fn stability_bound(&self, t: f64) -> f64 {
        let (n1, n2) = self.coupling_norms;
        (t * (n1 + n2)).exp()
    }

    pub fn is_contraction(&self) -> bool {
        self.bounds1.is_contraction && self.bounds2.is_contraction
    }

    pub fn is_holomorphic(&self) -> bool {
        self.bounds1.holomorphy_constant.is_some() && self.bounds2.holomorphy_constant.is_some()
    }

    pub fn is_spd(&self) -> bool {
        self.bounds1.spd && self.bounds2.spd
    }

    /// `max(M_A(A₁), M_A(A₂))`.
    pub fn holomorphy_constant(&self) -> Option<f64> {
        Some(
            self.bounds1
                .holomorphy_constant?
                .max(self.bounds2.holomorphy_constant?),
        )
    }

    /// `𝒜 = diag(A₁, A₂)`.
    pub fn diagonal_generator(&self) -> BlockOperator {
        BlockOperator::diagonal(self.a1.clone(), self.a2.clone())
    }

    /// `ℬ = [[0, B₁], [B₂, 0]]`.
    pub fn coupling(&self) -> BlockOperator {
        BlockOperator::off_diagonal(self.b1.clone(), self.b2.clone())
            .expect("shapes validated on construction")
    }

    /// `𝒞 = 𝒜 - ℬ`.
    pub fn generator(&self) -> BlockOperator {
        self.diagonal_generator()
            .sub(&self.coupling())
            .expect("shapes validated on construction")
    }

    pub fn is_certified(&self) -> bool {
        self.is_contraction() && self.is_holomorphic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Laplacian1d,
    SpdRandom,
    Skew,
    BoundedRandom,
    Scalar2x2,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Laplacian1d,
        Family::SpdRandom,
        Family::Skew,
        Family::BoundedRandom,
        Family::Scalar2x2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Laplacian1d => "laplacian1d",
            Family::SpdRandom => "spd_random",
            Family::Skew => "skew",
            Family::BoundedRandom => "bounded_random",
            Family::Scalar2x2 => "scalar2x2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingRecipe {
    RandomBounded { scale: f64 },
    Fractional { beta: f64, scale: f64 },
    IdentityLike { scale: f64 },
}

impl CouplingRecipe {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingRecipe::RandomBounded { .. } => "random_bounded",
            CouplingRecipe::Fractional { .. } => "fractional",
            CouplingRecipe::IdentityLike { .. } => "identity_like",
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            CouplingRecipe::RandomBounded { scale }
            | CouplingRecipe::Fractional { scale, .. }
            | CouplingRecipe::IdentityLike { scale } => scale,
        }
    }
}

impl fmt::Display for CouplingRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingRecipe::RandomBounded { scale } => write!(f, "random_bounded({scale})"),
            CouplingRecipe::Fractional { beta, scale } => write!(f, "fractional({beta}, {scale})"),
            CouplingRecipe::IdentityLike { scale } => write!(f, "identity_like({scale})"),
        }
    }
}

/// A named, seeded construction rule; the seed fully determines the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryRecipe {
    pub id: String,
    pub family: Family,
    pub dims: (usize, usize),
    pub coupling: CouplingRecipe,
    pub seed: u64,
    pub description: String,
}

impl GalleryRecipe {
    pub fn build(&self) -> Result<ProblemInstance> {
        let (n1, n2) = match self.family {
            Family::Scalar2x2 => (1, 1),
            _ => self.dims,
        };
        if n1 == 0 || n2 == 0 {
            return Err(Error::Domain("dimensions must be positive".into()));
        }
        if self.family == Family::Laplacian1d && (n1 < 2 || n2 < 2) {
            return Err(Error::Domain(
                "laplacian dimensions must be at least 2".into(),
            ));
        }
        let mut rng = SplitMix64::new(self.seed);
        let mut gen_rng1 = rng.fork();
        let mut gen_rng2 = rng.fork();
        let mut coupling_rng = rng.fork();
        let a1 = family_generator(self.family, n1, &mut gen_rng1)?;
        let a2 = family_generator(self.family, n2, &mut gen_rng2)?;
        let (b1, b2, kind) = match self.coupling {
            CouplingRecipe::RandomBounded { scale } => {
                check_scale(scale)?;
                (
                    random_coupling(&mut coupling_rng, n1, n2, scale),
                    random_coupling(&mut coupling_rng, n2, n1, scale),
                    CouplingKind::Bounded,
                )
            }
            CouplingRecipe::IdentityLike { scale } => {
                check_scale(scale)?;
                (
                    rectangular_identity(n1, n2, scale),
                    rectangular_identity(n2, n1, scale),
                    CouplingKind::Bounded,
                )
            }
            CouplingRecipe::Fractional { beta, scale } => {
                check_beta(beta)?;
                check_scale(scale)?;
                let (b1, b2) = fractional_blocks(&a1, &a2, beta, scale, &mut coupling_rng)?;
                (b1, b2, CouplingKind::Fractional { beta })
            }
        };
        ProblemInstance::new(self.id.clone(), a1, a2, b1, b2, kind)
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "coupling scale must be nonnegative, got {scale}"
        )))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "beta must lie in (0, 1], got {beta}"
        )))
    }
}

fn family_generator(family: Family, n: usize, rng: &mut SplitMix64) -> Result<DenseOperator> {
    let m = match family {
        Family::Laplacian1d => return Ok(dirichlet_laplacian(n)),
        Family::Scalar2x2 => DMatrix::from_element(1, 1, 1.0),
        Family::SpdRandom => {
            let g = uniform_matrix(rng, n, n);
            let gram = &g * g.transpose() / n as f64;
            symmetrize(&gram) + DMatrix::identity(n, n) * 0.5
        }
        Family::Skew => {
            let h = uniform_matrix(rng, n, n);
            (&h - h.transpose()) * 0.5 + DMatrix::identity(n, n) * SKEW_DAMPING
        }
        Family::BoundedRandom => {
            let g = uniform_matrix(rng, n, n);
            let h = uniform_matrix(rng, n, n);
            let p = symmetrize(&(&g * g.transpose() / n as f64)) + DMatrix::identity(n, n) * 0.1;
            p + (&h - h.transpose()) * 0.5
        }
    };
    DenseOperator::new(m)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn uniform_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DMatrix<f64> {
    // Filled row by row so the stream order matches the row-major layout.
    let entries: Vec<f64> = (0..rows * cols).map(|_| rng.next_symmetric()).collect();
    DMatrix::from_row_slice(rows, cols, &entries)
}

/// `(n+1)² · tridiag(-1, 2, -1)`, the Dirichlet Laplacian on the unit
/// interval with mesh width `1/(n+1)`.
pub fn dirichlet_laplacian(n: usize) -> DenseOperator {
    let h2 = ((n + 1) * (n + 1)) as f64;
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * h2
        } else if i.abs_diff(j) == 1 {
            -h2
        } else {
            0.0
        }
    });
    DenseOperator::from_matrix_unchecked(m)
}

/// Uniform(-1,1) matrix rescaled to spectral norm `scale`.
fn random_coupling(rng: &mut SplitMix64, rows: usize, cols: usize, scale: f64) -> DenseOperator {
    let g = uniform_matrix(rng, rows, cols);
    if scale == 0.0 {
        return DenseOperator::zeros(rows, cols);
    }
    let norm = operator_norm(&DenseOperator::from_matrix_unchecked(g.clone()));
    DenseOperator::from_matrix_unchecked(g * (scale / norm))
}

fn rectangular_identity(rows: usize, cols: usize, scale: f64) -> DenseOperator {
    DenseOperator::from_matrix_unchecked(DMatrix::from_fn(rows, cols, |i, j| {
        if i == j {
            scale
        } else {
            0.0
        }
    }))
}

/// Random matrix with orthonormal columns (or rows when `rows < cols`), so
/// its spectral norm is exactly one.
fn orthonormal_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DMatrix<f64> {
    if rows < cols {
        return orthonormal_matrix(rng, cols, rows).transpose();
    }
    uniform_matrix(rng, rows, cols).qr().q()
}

fn fractional_blocks(
    a1: &DenseOperator,
    a2: &DenseOperator,
    beta: f64,
    scale: f64,
    rng: &mut SplitMix64,
) -> Result<(DenseOperator, DenseOperator)> {
    let (n1, n2) = (a1.rows(), a2.rows());
    let r1 = orthonormal_matrix(rng, n1, n2);
    let r2 = orthonormal_matrix(rng, n2, n1);
    let p1 = fractional_power(a1, beta)?;
    let p2 = fractional_power(a2, beta)?;
    Ok((
        DenseOperator::new(p1.matrix() * r1 * scale)?,
        DenseOperator::new(p2.matrix() * r2 * scale)?,
    ))
}

/// Laplacian pair with random dense couplings of spectral norm
/// `coupling_scale`.
pub fn make_laplacian_problem(
    n1: usize,
    n2: usize,
    coupling_scale: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    GalleryRecipe {
        id: format!("laplacian1d-{n1}x{n2}-s{seed}"),
        family: Family::Laplacian1d,
        dims: (n1, n2),
        coupling: CouplingRecipe::RandomBounded {
            scale: coupling_scale,
        },
        seed,
        description: String::new(),
    }
    .build()
}

/// Replace the coupling of an SPD problem by `B_i = scale · A_i^β · R_i`
/// with `R_i` orthonormal, so `‖A_i^{-β} B_i‖ = scale` while `‖B_i‖` grows
/// with `‖A_i‖`.
pub fn make_fractional_coupling(
    base: &ProblemInstance,
    beta: f64,
    scale: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    check_beta(beta)?;
    fractional_coupling_unchecked(base, beta, scale, seed)
}

/// As [`make_fractional_coupling`] but also admits `β = 0`, which yields the
/// bounded control coupling `scale · R_i` with the same `R_i`.
pub fn fractional_coupling_unchecked(
    base: &ProblemInstance,
    beta: f64,
    scale: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    check_scale(scale)?;
    if !base.is_spd() {
        return Err(Error::Unsupported(
            "fractional couplings need symmetric positive definite generators".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let (b1, b2) = fractional_blocks(base.a1(), base.a2(), beta, scale, &mut rng)?;
    let kind = if beta == 0.0 {
        CouplingKind::Bounded
    } else {
        CouplingKind::Fractional { beta }
    };
    ProblemInstance::new(
        format!("{}-frac{beta}", base.id()),
        base.a1().clone(),
        base.a2().clone(),
        b1,
        b2,
        kind,
    )
}

/// `P(x) = [[1, x], [x, 1 + x²]]`, the scalar model of one split step with
/// coupling of size `x`.
pub fn make_scalar_model(x: f64) -> Result<DenseOperator> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
    }
    DenseOperator::from_row_major(2, 2, &[1.0, x, x, 1.0 + x * x])
}

/// Dominant eigenpair of [`make_scalar_model`]:
/// `λ(x) = 1 + (x/2)(x + √(4+x²))`, `v(x) = (½(−x + √(4+x²)), 1)`.
pub fn scalar_model_eigenpair(x: f64) -> (f64, [f64; 2]) {
    let root = (4.0 + x * x).sqrt();
    (1.0 + 0.5 * x * (x + root), [0.5 * (root - x), 1.0])
}

/// Built-in catalog.
pub fn gallery_list() -> Vec<GalleryRecipe> {
    let mut recipes: Vec<GalleryRecipe> = [8usize, 16, 32, 64]
        .into_iter()
        .map(|n| GalleryRecipe {
            id: format!("laplacian1d-{n}"),
            family: Family::Laplacian1d,
            dims: (n, n),
            coupling: CouplingRecipe::RandomBounded { scale: 1.0 },
            seed: 1,
            description: format!(
                "Dirichlet Laplacians on {n} interior nodes, scaled by (n+1)^2, with random couplings of norm 1"
            ),
        })
        .collect();
    recipes.extend([
        GalleryRecipe {
            id: "spd-random-6x4".into(),
            family: Family::SpdRandom,
            dims: (6, 4),
            coupling: CouplingRecipe::RandomBounded { scale: 0.5 },
            seed: 2,
            description: "random SPD generators GG^T/n + I/2 of unequal size".into(),
        },
        GalleryRecipe {
            id: "skew-5x5".into(),
            family: Family::Skew,
            dims: (5, 5),
            coupling: CouplingRecipe::RandomBounded { scale: 0.5 },
            seed: 3,
            description: "skew-symmetric generators with 1e-3 damping; large holomorphy constant"
                .into(),
        },
        GalleryRecipe {
            id: "bounded-random-4x3".into(),
            family: Family::BoundedRandom,
            dims: (4, 3),
            coupling: CouplingRecipe::RandomBounded { scale: 1.0 },
            seed: 4,
            description: "non-normal bounded generators P + K, P SPD, K skew".into(),
        },
        GalleryRecipe {
            id: "scalar2x2".into(),
            family: Family::Scalar2x2,
            dims: (1, 1),
            coupling: CouplingRecipe::IdentityLike { scale: 1.0 },
            seed: 0,
            description: "A1 = A2 = 1, B1 = B2 = 1 on R x R".into(),
        },
    ]);
    recipes
}

pub fn find_recipe(id: &str) -> Option<GalleryRecipe> {
    gallery_list().into_iter().find(|r| r.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_stencil() {
        let a = dirichlet_laplacian(2);
        let expected = DenseOperator::from_row_major(2, 2, &[18.0, -9.0, -9.0, 18.0]).unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn zero_scale_decouples() {
        let p = make_laplacian_problem(3, 4, 0.0, 7).unwrap();
        assert_eq!(p.b1(), &DenseOperator::zeros(3, 4));
        assert_eq!(p.b2(), &DenseOperator::zeros(4, 3));
        assert_eq!(p.coupling_norms(), (0.0, 0.0));
    }

    #[test]
    fn coupling_normalized() {
        let p = make_laplacian_problem(5, 3, 0.7, 11).unwrap();
        let (n1, n2) = p.coupling_norms();
        assert!((n1 - 0.7).abs() < 1e-12 && (n2 - 0.7).abs() < 1e-12);
        assert!(p.is_spd() && p.is_contraction() && p.is_holomorphic());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_laplacian_problem(1, 3, 1.0, 0).is_err());
        let p = make_laplacian_problem(4, 4, 1.0, 0).unwrap();
        assert!(matches!(
            make_fractional_coupling(&p, 0.0, 1.0, 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            make_fractional_coupling(&p, 1.2, 1.0, 0),
            Err(Error::Domain(_))
        ));
        let skew = find_recipe("skew-5x5").unwrap().build().unwrap();
        assert!(matches!(
            make_fractional_coupling(&skew, 0.5, 1.0, 0),
            Err(Error::Unsupported(_))
        ));
        assert!(make_scalar_model(-1.0).is_err());
    }

    #[test]
    fn scalar_model_identity_at_zero() {
        assert_eq!(make_scalar_model(0.0).unwrap(), DenseOperator::identity(2));
        let (l, v) = scalar_model_eigenpair(0.0);
        assert_eq!(l, 1.0);
        assert_eq!(v, [1.0, 1.0]);
    }

    #[test]
    fn catalog_ids_unique() {
        let list = gallery_list();
        let mut ids: Vec<_> = list.iter().map(|r| r.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), list.len());
        let families: std::collections::HashSet<_> = list.iter().map(|r| r.family).collect();
        assert!(families.len() >= 5);
    }
}
