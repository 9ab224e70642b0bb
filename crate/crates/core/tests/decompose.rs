mod common;

use bsar_core::matrix::{dot_conj, norm};
use bsar_core::*;
use common::{oracle_singular_values, random_matrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn max_orthonormality_error(vs: &[ComplexVector]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..vs.len() {
        for j in 0..vs.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot_conj(&vs[i], &vs[j]) - target).norm());
        }
    }
    worst
}

fn mat_vec(x: &ComplexMatrix, v: &[Complex64]) -> ComplexVector {
    x.rows_iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

#[test]
fn oracle_agrees_with_diagonal() {
    let mut x = ComplexMatrix::zeros(3, 2).unwrap();
    x.set(0, 0, Complex64::new(3.0, 0.0));
    x.set(1, 1, Complex64::new(0.0, 4.0));
    let sv = oracle_singular_values(&x);
    assert!((sv[0] - 4.0).abs() < 1e-12 && (sv[1] - 3.0).abs() < 1e-12);
}

#[test]
fn random_12_by_8_matches_gram_oracle() {
    let x = random_matrix(12, 8, 7);
    let svd = leading_triplets(&x, 8, 1e-12, 3000).unwrap();
    let oracle = oracle_singular_values(&x);
    for (a, b) in svd.singular_values.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
    }
}

#[test]
fn image_of_right_vectors_has_singular_norms() {
    let x = random_matrix(40, 24, 3);
    let svd = leading_triplets(&x, 6, 1e-12, 3000).unwrap();
    for i in 0..6 {
        let xv = mat_vec(&x, svd.v(i));
        let s = svd.singular_values[i];
        assert!((norm(&xv) - s).abs() <= 1e-8 * s);
        let diff: Vec<Complex64> = xv.iter().zip(svd.u(i)).map(|(a, b)| a - b * s).collect();
        assert!(norm(&diff) <= 1e-8 * svd.singular_values[0]);
    }
}

#[test]
fn residual_energy_and_reconstruction_error() {
    let x = random_matrix(20, 30, 11);
    let total = x.frobenius_norm_sqr();
    let mut last = f64::INFINITY;
    for k in 1..=8 {
        let svd = leading_triplets(&x, k, 1e-12, 3000).unwrap();
        let captured: f64 = svd.singular_values.iter().map(|s| s * s).sum();
        assert!((svd.residual_energy - (total - captured)).abs() <= 1e-8 * total);
        let mut err = 0.0;
        for r in 0..20 {
            for c in 0..30 {
                let approx: Complex64 = (0..k).map(|i| svd.u(i)[r] * svd.singular_values[i] * svd.v(i)[c].conj()).sum();
                err += (x.get(r, c) - approx).norm_sqr();
            }
        }
        assert!(err <= last * (1.0 + 1e-12));
        last = err;
    }
}

#[test]
fn rotation_norms_match_two_column_decomposition() {
    let x = random_matrix(64, 2, 21);
    let (a, b) = (x.column(0), x.column(1));
    let rot = gibbs_rotation_check(&a, &b).unwrap();
    let [e1, e2] = &rot.rotated;
    assert!(dot_conj(e1, e2).norm() <= 1e-10 * norm(e1) * norm(e2));
    let svd = leading_triplets(&x, 2, 1e-12, 3000).unwrap();
    let mut norms = rot.norms();
    norms.sort_by(|p, q| q.total_cmp(p));
    for (n, s) in norms.iter().zip(&svd.singular_values) {
        assert!((n - s).abs() <= 1e-9 * s);
    }
    assert!((rot.c * rot.c + rot.s.norm_sqr() - 1.0).abs() <= 1e-12);
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
    .unwrap()
}

#[test]
fn noise_only_dominance_ratio_stays_near_one() {
    for seed in 0..20 {
        let svd = leading_triplets(&gaussian(256, 256, seed), 5, 1e-10, 3000).unwrap();
        let ratio = singular_spectrum(&svd).unwrap().dominance_ratio;
        assert!((1.0..=1.5).contains(&ratio), "seed {seed}: ratio {ratio}");
    }
}

#[test]
fn scatterer_raises_dominance_ratio_over_noise() {
    let doc = common::load("default.json", 4);
    let (raw, _) = simulate_raw(&doc.acquisition, &doc.scene).unwrap();
    let (noise, _) = simulate_raw(&doc.acquisition, &[]).unwrap();
    let with = singular_spectrum(&leading_triplets(&raw, 5, 1e-10, 3000).unwrap()).unwrap();
    let without = singular_spectrum(&leading_triplets(&noise, 5, 1e-10, 3000).unwrap()).unwrap();
    assert!(with.dominance_ratio > without.dominance_ratio);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_matrices_match_oracle(rows in 1usize..=16, cols in 1usize..=16, seed in any::<u64>()) {
        let x = random_matrix(rows, cols, seed);
        let k = rows.min(cols);
        let svd = leading_triplets(&x, k, 1e-13, 3000).unwrap();
        let oracle = oracle_singular_values(&x);
        for i in 0..k {
            prop_assert!((svd.singular_values[i] - oracle[i]).abs() <= 1e-9 * oracle[i].max(1e-300));
        }
        prop_assert!(max_orthonormality_error(&svd.left_vectors) < 1e-10);
        prop_assert!(max_orthonormality_error(&svd.right_vectors) < 1e-10);
    }

    #[test]
    fn global_phase_and_scale_change_only_scale(seed in any::<u64>(), theta in 0.0f64..std::f64::consts::TAU, scale in 0.01f64..100.0) {
        let x = random_matrix(12, 9, seed);
        let mut y = x.clone();
        let g = Complex64::from_polar(scale, theta);
        y.as_mut_slice().iter_mut().for_each(|v| *v *= g);
        let a = leading_triplets(&x, 4, 1e-12, 3000).unwrap();
        let b = leading_triplets(&y, 4, 1e-12, 3000).unwrap();
        for i in 0..4 {
            prop_assert!((b.singular_values[i] - scale * a.singular_values[i]).abs() <= 1e-9 * b.singular_values[0]);
            // same one-dimensional subspaces
            prop_assert!((dot_conj(a.v(i), b.v(i)).norm() - 1.0).abs() < 1e-8);
            prop_assert!((dot_conj(a.u(i), b.u(i)).norm() - 1.0).abs() < 1e-8);
        }
    }
}
