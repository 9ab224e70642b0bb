//! Small dense Hermitian linear algebra: Jacobi eigensolver, 2×2 rotations
//! and block orthonormalization.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::{dot_conj, norm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Rotation `(c, s)` that diagonalizes the Hermitian 2×2 block `[[a, g], [g*, b]]`.
///
/// With `W = [[c, -s], [s*, c]]`, `Wᴴ [[a, g], [g*, b]] W` is diagonal and its
/// first diagonal entry is the larger eigenvalue. `c` is real and
/// `c² + |s|² = 1`.
pub fn hermitian_rotation(a: f64, b: f64, g: Complex64) -> (f64, Complex64) {
    let mag = g.norm();
    if mag == 0.0 {
        return (1.0, ZERO);
    }
    let phase = g / mag;
    let theta = 0.5 * (2.0 * mag).atan2(a - b);
    let (s, c) = theta.sin_cos();
    (c, phase * s)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in non-increasing order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector belonging to `values[i]`.
    pub vectors: Vec<Vec<Complex64>>,
}

/// Cyclic complex Jacobi on the `n×n` row-major Hermitian matrix `a`.
///
/// Only the upper triangle needs to be meaningful; the lower one is taken as
/// its conjugate.
pub fn hermitian_eigen(a: &[Complex64], n: usize) -> HermitianEigen {
    assert_eq!(a.len(), n * n);
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        m[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
        for j in i + 1..n {
            m[i * n + j] = a[i * n + j];
            m[j * n + i] = a[i * n + j].conj();
        }
    }
    let mut vecs: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut e = vec![ZERO; n];
            e[i] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    let scale = m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let floor = 1e-18 * scale;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let g = m[p * n + q];
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                if g.norm() <= floor || g.norm() <= f64::EPSILON * (app * aqq).abs().sqrt() * 0.5 {
                    continue;
                }
                rotated = true;
                let (c, s) = hermitian_rotation(app, aqq, g);
                let sc = s.conj();
                for k in 0..n {
                    let xp = m[k * n + p];
                    let xq = m[k * n + q];
                    m[k * n + p] = xp * c + xq * sc;
                    m[k * n + q] = xq * c - xp * s;
                }
                for k in 0..n {
                    let xp = m[p * n + k];
                    let xq = m[q * n + k];
                    m[p * n + k] = xp * c + xq * s;
                    m[q * n + k] = xq * c - xp * sc;
                }
                m[p * n + q] = ZERO;
                m[q * n + p] = ZERO;
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
                let (vp, vq) = pair_mut(&mut vecs, p, q);
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = xp * c + xq * sc;
                    *y = xq * c - xp * s;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].re.total_cmp(&m[i * n + i].re));
    HermitianEigen {
        values: order.iter().map(|&i| m[i * n + i].re).collect(),
        vectors: order.iter().map(|&i| vecs[i].clone()).collect(),
    }
}

fn pair_mut<T>(v: &mut [T], p: usize, q: usize) -> (&mut T, &mut T) {
    debug_assert!(p < q);
    let (lo, hi) = v.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

/// Subtracts from `x` its projection onto each (unit) column of `basis`.
pub fn project_out(x: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let h = dot_conj(b, x);
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi -= h * bi;
        }
    }
}

/// Orthonormalizes `cols[from..]` against `cols[..from]` and each other
/// (modified Gram-Schmidt, two passes). Columns that collapse numerically are
/// replaced by fresh random directions drawn from `rng`. Returns how many were replaced.
pub fn orthonormalize<R: Rng>(cols: &mut [Vec<Complex64>], from: usize, rng: &mut R) -> usize {
    let mut replaced = 0;
    for i in from..cols.len() {
        let (done, rest) = cols.split_at_mut(i);
        let x = &mut rest[0];
        let mut attempts = 0;
        loop {
            let before = norm(x);
            project_out(x, done);
            project_out(x, done);
            let after = norm(x);
            if after > 1e-10 * before && after > f64::MIN_POSITIVE {
                let inv = 1.0 / after;
                for v in x.iter_mut() {
                    *v *= inv;
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "cannot complete an orthonormal basis");
            replaced += 1;
            for v in x.iter_mut() {
                *v = random_complex(rng);
            }
        }
    }
    replaced
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotation_diagonalizes_2x2() {
        let (a, b, g) = (2.0, 0.5, c(0.3, -0.7));
        let (cc, s) = hermitian_rotation(a, b, g);
        assert!((cc * cc + s.norm_sqr() - 1.0).abs() < 1e-15);
        // Off-diagonal of Wᴴ A W: p'ᴴ A q'.
        let p = [c(cc, 0.0), s.conj()];
        let q = [-s, c(cc, 0.0)];
        let aq = [q[0] * a + q[1] * g, q[0] * g.conj() + q[1] * b];
        let off = p[0].conj() * aq[0] + p[1].conj() * aq[1];
        assert!(off.norm() < 1e-15);
    }

    #[test]
    fn eigen_of_diagonal_sorts_descending() {
        let a = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)];
        let e = hermitian_eigen(&a, 2);
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors[0][1].norm(), 1.0);
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        let n = 9;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = c(random_complex(&mut rng).re, 0.0);
            for j in i + 1..n {
                let v = random_complex(&mut rng);
                a[i * n + j] = v;
                a[j * n + i] = v.conj();
            }
        }
        let e = hermitian_eigen(&a, n);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                let av: Complex64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                assert!((av - v[i] * lam).norm() < 1e-12);
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = dot_conj(&e.vectors[i], &e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn orthonormalize_replaces_dependent_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut cols = vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(2.0, 0.0)]];
        assert_eq!(orthonormalize(&mut cols, 0, &mut rng), 1);
        assert!(dot_conj(&cols[0], &cols[1]).norm() < 1e-14);
        assert!((norm(&cols[1]) - 1.0).abs() < 1e-14);
    }
}
