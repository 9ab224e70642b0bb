#![allow(dead_code)]

use std::path::PathBuf;

use bsar_core::{io, Complex64, ComplexMatrix, SimulationDocument};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load(name: &str, seed: u64) -> SimulationDocument {
    let mut doc: SimulationDocument = io::read_json(config_path(name)).expect("shipped config");
    doc.acquisition.rng_seed = seed;
    doc
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .unwrap()
}

/// Singular values from the eigenvalues of `XᴴX`, computed through the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]` with a plain cyclic Jacobi
/// sweep. Each eigenvalue of the Hermitian Gram appears twice in the
/// embedding, so every second value is kept.
pub fn oracle_singular_values(x: &ComplexMatrix) -> Vec<f64> {
    let (m, n) = x.shape();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..m).map(|r| x.get(r, i).conj() * x.get(r, j)).sum();
        }
    }
    let d = 2 * n;
    let mut a = vec![vec![0.0f64; d]; d];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = g[i][j].re;
            a[i + n][j + n] = g[i][j].re;
            a[i][j + n] = -g[i][j].im;
            a[i + n][j] = g[i][j].im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.iter().step_by(2).map(|l| l.max(0.0).sqrt()).collect()
}

pub fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}
