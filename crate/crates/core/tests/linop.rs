// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use nalgebra::DMatrix;
use semiflow::linop::*;
use semiflow::{find_recipe, gallery_list, Error};

fn op(m: DMatrix<f64>) -> DenseOperator {
    DenseOperator::new(m).unwrap()
}

#[test]
fn diagonal_exponential_at_ln2() {
    let a = DenseOperator::diagonal(&[1.0, 2.0]).unwrap();
    let e = expm(&a, 2f64.ln()).unwrap();
    let expected = DMatrix::from_diagonal(&nalgebra::dvector![0.5, 0.25]);
    assert!((e.matrix() - expected).amax() < 1e-15);
}

#[test]
fn zero_generator_is_identity() {
    let z = DenseOperator::zeros(3, 3);
    for t in [0.0, 0.3, 17.0] {
        assert_eq!(expm(&z, t).unwrap().matrix(), &DMatrix::identity(3, 3));
    }
}

#[test]
fn expm_against_rk4_on_random_4x4() {
    // Nonsymmetric with spectrum in (0, 2): S + K with S SPD in (0.2, 1.8) and K small skew.
    let g = random_matrix(11, 4, 4);
    let s = symmetric_fn(&((&g + g.transpose()) * 0.5), |l| 1.0 + 0.8 * l.tanh());
    let k = (&g - g.transpose()) * 0.1;
    let a = &s + &k;
    let ours = expm(&op(a.clone()), 1.0).unwrap();
    let reference = rk4_exponential(&a, 1.0, 4000);
    assert!((ours.matrix() - &reference).amax() < 1e-10);
    let pade = expm_pade_route(&op(a.clone()), 1.0).unwrap();
    assert!((pade.matrix() - &reference).amax() < 1e-10);
}

#[test]
fn expm_symmetric_path_against_jacobi() {
    let a = random_spd(5, 6, 0.1);
    let ours = expm(&op(a.clone()), 0.8).unwrap();
    let reference = symmetric_fn(&a, |l| (-0.8 * l).exp());
    assert!((ours.matrix() - reference).amax() < 1e-13);
}

#[test]
fn expm_stiff_against_taylor_reference() {
    let p = find_recipe("laplacian1d-16").unwrap().build().unwrap();
    let c = p.generator().flatten();
    let ours = expm(&op(c.clone()), 0.05).unwrap();
    let reference = taylor_expm(&c, 0.05);
    assert!((ours.matrix() - &reference).amax() < 1e-10);
}

#[test]
fn expm_errors() {
    let rect = DenseOperator::zeros(2, 3);
    assert!(matches!(expm(&rect, 1.0), Err(Error::Shape(_))));
    assert!(matches!(
        expm(&DenseOperator::identity(2), -1.0),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        expm(&DenseOperator::identity(2), f64::NAN),
        Err(Error::Domain(_))
    ));
    assert!(DenseOperator::new(DMatrix::from_element(2, 2, f64::NAN)).is_err());
}

#[test]
fn phi1_examples() {
    let one = DenseOperator::identity(1);
    let f = phi1_integral(&one, 1.0).unwrap();
    assert!((f.get(0, 0) - 0.6321205588).abs() < 1e-10);
    let z = DenseOperator::zeros(2, 2);
    let f = phi1_integral(&z, 3.0).unwrap();
    assert!((f.matrix() - DMatrix::identity(2, 2) * 3.0).amax() < 1e-14);
    assert!(matches!(phi1_integral(&one, -0.1), Err(Error::Domain(_))));
}

#[test]
fn phi1_against_quadrature_spd() {
    let a = random_spd(7, 5, 0.2);
    let ours = phi1_integral(&op(a.clone()), 0.7).unwrap();
    let reference = quadrature(|s| symmetric_fn(&a, |l| (-s * l).exp()), 0.0, 0.7, 8, 12);
    assert!((ours.matrix() - &reference).amax() < 1e-9);
    let augmented = phi1_augmented_route(&op(a), 0.7).unwrap();
    assert!((augmented.matrix() - reference).amax() < 1e-9);
}

#[test]
fn phi1_against_quadrature_singular_nonsymmetric() {
    // Nilpotent plus a zero eigenvalue: no inverse exists.
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
    let ours = phi1_integral(&op(a.clone()), 1.3).unwrap();
    let reference = quadrature(|s| taylor_expm(&a, s), 0.0, 1.3, 8, 12);
    assert!((ours.matrix() - reference).amax() < 1e-12);
}

#[test]
fn phi1_matches_inverse_formula_when_invertible() {
    let a = random_spd(8, 4, 0.5);
    let ours = phi1_integral(&op(a.clone()), 0.9).unwrap();
    let inv = a.clone().try_inverse().unwrap();
    let formula = inv * (DMatrix::identity(4, 4) - taylor_expm(&a, 0.9));
    assert!((ours.matrix() - formula).amax() < 1e-12);
}

#[test]
fn operator_norm_examples() {
    assert!((operator_norm(&DenseOperator::identity(7)) - 1.0).abs() < 1e-12);
    let d = DenseOperator::diagonal(&[3.0, -4.0]).unwrap();
    assert!((operator_norm(&d) - 4.0).abs() < 1e-12);
    let g = random_matrix(21, 6, 4);
    let ours = operator_norm(&op(g.clone()));
    let reference = spectral_norm(&g);
    assert!((ours - reference).abs() <= 1e-10 * reference);
}

#[test]
fn fractional_power_against_jacobi() {
    let a = random_spd(9, 5, 0.3);
    let ours = fractional_power(&op(a.clone()), 0.3).unwrap();
    let reference = symmetric_fn(&a, |l| l.powf(0.3));
    assert!((ours.matrix() - reference).amax() < 1e-9);
    let half = fractional_power(&op(a.clone()), 0.5).unwrap();
    assert!((half.matrix() * half.matrix() - &a).amax() < 1e-12);
    let zero = fractional_power(&op(a), 0.0).unwrap();
    assert!((zero.matrix() - DMatrix::identity(5, 5)).amax() < 1e-15);
}

#[test]
fn fractional_power_diagonal_is_entrywise() {
    let d = DenseOperator::diagonal(&[1.0, 4.0]).unwrap();
    let r = fractional_power(&d, 0.5).unwrap();
    assert_eq!(r.to_row_major(), vec![1.0, 0.0, 0.0, 2.0]);
    let d = DenseOperator::diagonal(&[2.0, 3.0, 5.0]).unwrap();
    let r = fractional_power(&d, 0.7).unwrap();
    for (i, x) in [2.0f64, 3.0, 5.0].iter().enumerate() {
        assert_eq!(r.get(i, i), x.powf(0.7));
    }
}

#[test]
fn fractional_power_rejects_non_spd() {
    let skew = DenseOperator::from_row_major(2, 2, &[1.0, 1.0, -1.0, 1.0]).unwrap();
    assert!(matches!(
        fractional_power(&skew, 0.5),
        Err(Error::Unsupported(_))
    ));
    let indefinite = DenseOperator::diagonal(&[1.0, -1.0]).unwrap();
    assert!(matches!(
        fractional_power(&indefinite, 0.5),
        Err(Error::Unsupported(_))
    ));
    let spd = DenseOperator::identity(2);
    assert!(matches!(fractional_power(&spd, 1.5), Err(Error::Domain(_))));
}

#[test]
fn shift_examples() {
    let z = DenseOperator::zeros(2, 2);
    let e = expm(&shift(&z, 1.0).unwrap(), 1.0).unwrap();
    assert!((e.matrix() - DMatrix::identity(2, 2) * (-1f64).exp()).amax() < 1e-15);
    let d = DenseOperator::diagonal(&[1.0, 2.0]).unwrap();
    assert_eq!(
        shift(&d, 0.5).unwrap().to_row_major(),
        vec![1.5, 0.0, 0.0, 2.5]
    );
    assert!(matches!(shift(&d, 0.0), Err(Error::Domain(_))));
    let g = op(random_matrix(3, 4, 4));
    for t in [0.1, 1.0, 2.5] {
        let lhs = expm(&shift(&g, 0.7).unwrap(), t).unwrap();
        let rhs = expm(&g, t).unwrap().scale((-0.7 * t).exp());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}

#[test]
fn block_norm_bounds_bracket_random_full_block() {
    let b = BlockOperator::new(
        op(random_matrix(1, 4, 4)),
        op(random_matrix(2, 4, 3)),
        op(random_matrix(3, 3, 4)),
        op(random_matrix(4, 3, 3)),
    )
    .unwrap();
    let (lo, hi) = block_norm_bounds(&b);
    let exact = spectral_norm(&b.flatten());
    assert!(
        lo <= exact * (1.0 + 1e-12) && exact <= hi * (1.0 + 1e-12),
        "{lo} {exact} {hi}"
    );
}

#[test]
fn block_norm_examples() {
    let b = BlockOperator::off_diagonal(
        DenseOperator::identity(3).scale(2.0),
        DenseOperator::identity(3).scale(3.0),
    )
    .unwrap();
    assert!((b.norm() - 3.0).abs() < 1e-12);
    let d = BlockOperator::diagonal(
        DenseOperator::identity(2),
        DenseOperator::identity(2).scale(5.0),
    );
    let (lo, hi) = block_norm_bounds(&d);
    assert!((d.norm() - 5.0).abs() < 1e-12);
    assert!(lo <= 5.0 + 1e-12 && 5.0 <= hi && (hi - 5.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn lemma_2_1_on_gallery_generators() {
    let grid = log_grid(1e-4, 10.0, 15);
    for recipe in gallery_list() {
        let p = recipe.build().unwrap();
        for a in [p.a1(), p.a2()] {
            for &t in &grid {
                let f = phi1_integral(a, t).unwrap();
                assert!(operator_norm(&f) <= t * (1.0 + 1e-9), "{} t={t}", p.id());
                let af = a.mul(&f).unwrap();
                assert!(operator_norm(&af) <= 2.0 + 1e-9);
                let identity = DenseOperator::identity(a.rows())
                    .sub(&expm(a, t).unwrap())
                    .unwrap();
                let scale = 1.0 + operator_norm(a) * operator_norm(&f);
                assert!(
                    af.max_abs_diff(&identity) <= 1e-9 * scale,
                    "{} t={t}",
                    p.id()
                );
            }
        }
    }
}

#[test]
fn holomorphy_bound_for_spd_generators() {
    for recipe in gallery_list() {
        let p = recipe.build().unwrap();
        if !p.is_spd() {
            continue;
        }
        for a in [p.a1(), p.a2()] {
            for t in certification_grid() {
                let tae = a.mul(&expm(a, t).unwrap()).unwrap().scale(t);
                assert!(operator_norm(&tae) <= (-1f64).exp() + 1e-9);
            }
        }
    }
}

#[test]
fn contraction_certificates_hold_on_grid() {
    for recipe in gallery_list() {
        let p = recipe.build().unwrap();
        assert!(p.is_certified(), "{}", p.id());
        for a in [p.a1(), p.a2()] {
            for t in log_grid(1e-6, 1e3, 40) {
                assert!(operator_norm(&expm(a, t).unwrap()) <= 1.0 + CONTRACTION_TOL);
            }
        }
    }
}
