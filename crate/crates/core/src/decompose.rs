//! Truncated singular value decomposition of the raw data matrix.
//!
//! Subspace (block power) iteration runs on the smaller Gram operator, with
//! Rayleigh-Ritz extraction and locking of converged leading pairs. A final
//! two-sided Rayleigh-Ritz step produces triplets for which `X v_i = σ_i u_i`
//! holds to rounding error.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_rotation, orthonormalize, random_complex};
use crate::matrix::{dot_conj, norm, ComplexMatrix, ComplexVector};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 3000;
pub const DEFAULT_SEED: u64 = 0x5eed_5a12;

/// Ratio below which two neighbouring singular values count as a cluster.
pub const DEGENERACY_RATIO: f64 = 1.0 + 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSvd {
    pub k: usize,
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    /// Columns of U, each of length M.
    pub left_vectors: Vec<ComplexVector>,
    /// Columns of V, each of length N.
    pub right_vectors: Vec<ComplexVector>,
    /// `‖X‖_F² - Σ σ_i²`.
    pub residual_energy: f64,
    /// `degenerate[i]`: σ_i and σ_{i+1} are numerically tied.
    pub degenerate: Vec<bool>,
    /// Some trailing σ are zero and their vectors are an arbitrary completion.
    pub rank_deficient: bool,
    pub iterations: usize,
}

impl TruncatedSvd {
    pub fn u(&self, i: usize) -> &[Complex64] {
        &self.left_vectors[i]
    }

    pub fn v(&self, i: usize) -> &[Complex64] {
        &self.right_vectors[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: DEFAULT_SEED,
        }
    }
}

/// The `k` dominant singular triplets of `x`.
pub fn leading_triplets(x: &ComplexMatrix, k: usize, tol: f64, max_iter: usize) -> Result<TruncatedSvd> {
    leading_triplets_with(
        x,
        &SvdOptions {
            k,
            tol,
            max_iter,
            seed: DEFAULT_SEED,
        },
    )
}

pub fn leading_triplets_with(x: &ComplexMatrix, opts: &SvdOptions) -> Result<TruncatedSvd> {
    let (m, n) = x.shape();
    let d = m.min(n);
    let k = opts.k;
    if k == 0 || k > d {
        return Err(Error::param(format!("k = {k} outside [1, {d}]")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol must be positive"));
    }
    if opts.max_iter == 0 {
        return Err(Error::param("max_iter must be positive"));
    }

    // Work with A such that the Gram operator A Aᴴ is d×d.
    let right_side = n <= m;
    let a = if right_side { x.adjoint() } else { x.clone() };
    let gram = gram_rows(&a);

    let b = d.min(k + k.max(8));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<Complex64>> = (0..b)
        .map(|_| (0..d).map(|_| random_complex(&mut rng)).collect())
        .collect();
    orthonormalize(&mut basis, 0, &mut rng);

    let mut prev: Option<Vec<f64>> = None;
    let mut locked = 0usize;
    let mut iterations = 0usize;
    let mut last_change = f64::INFINITY;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        for col in basis.iter_mut().skip(locked) {
            *col = gram_apply(&gram, d, col);
        }
        orthonormalize(&mut basis, locked, &mut rng);
        let values = rayleigh_ritz(&gram, d, &mut basis, locked);

        if let Some(p) = &prev {
            let floor = 64.0 * f64::EPSILON * d as f64 * values[0].max(0.0);
            let mut all = true;
            let mut worst = 0.0_f64;
            let mut newly_locked = locked;
            for i in 0..k {
                let diff = (values[i] - p[i]).abs();
                let ok = diff <= 2.0 * opts.tol * values[i].abs() + floor;
                if values[i].abs() > 0.0 {
                    worst = worst.max(diff / values[i].abs());
                }
                if ok && newly_locked == i {
                    newly_locked = i + 1;
                }
                all &= ok;
            }
            last_change = worst / 2.0;
            // Lock a converged prefix; keep at least one column free.
            locked = newly_locked.min(k).min(b - 1);
            if all && iterations >= 2 {
                converged = true;
                break;
            }
        }
        prev = Some(values);
    }

    let svd = finalize(x, &basis, right_side, k, iterations, &mut rng);
    if !converged {
        return Err(Error::Convergence {
            iterations,
            last_change,
            last: Box::new(svd),
        });
    }
    Ok(svd)
}

/// Row Gram matrix `G[i][j] = a_i · conj(a_j)`, i.e. `A Aᴴ`, full storage.
fn gram_rows(a: &ComplexMatrix) -> Vec<Complex64> {
    let d = a.rows();
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in i..d {
            let v = dot_conj(a.row(j), a.row(i));
            g[i * d + j] = v;
            g[j * d + i] = v.conj();
        }
        g[i * d + i].im = 0.0;
    }
    g
}

fn gram_apply(g: &[Complex64], d: usize, x: &[Complex64]) -> Vec<Complex64> {
    (0..d)
        .map(|i| {
            let row = &g[i * d..(i + 1) * d];
            let mut acc = [Complex64::new(0.0, 0.0); 4];
            let chunks = d / 4;
            for c in 0..chunks {
                for j in 0..4 {
                    acc[j] += row[4 * c + j] * x[4 * c + j];
                }
            }
            let mut tail = Complex64::new(0.0, 0.0);
            for j in 4 * chunks..d {
                tail += row[j] * x[j];
            }
            (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
        })
        .collect()
}

/// Rotates the unlocked columns to Ritz vectors of `G`; returns all Ritz values.
fn rayleigh_ritz(g: &[Complex64], d: usize, basis: &mut [Vec<Complex64>], locked: usize) -> Vec<f64> {
    let free = &basis[locked..];
    let nf = free.len();
    let gs: Vec<Vec<Complex64>> = free.iter().map(|c| gram_apply(g, d, c)).collect();
    let mut h = vec![Complex64::new(0.0, 0.0); nf * nf];
    for i in 0..nf {
        for j in i..nf {
            h[i * nf + j] = dot_conj(&free[i], &gs[j]);
        }
    }
    let eig = hermitian_eigen(&h, nf);
    let rotated: Vec<Vec<Complex64>> = eig
        .vectors
        .iter()
        .map(|w| combine(free, w))
        .collect();
    for (dst, src) in basis[locked..].iter_mut().zip(rotated) {
        *dst = src;
    }
    let mut values: Vec<f64> = basis[..locked]
        .iter()
        .map(|c| dot_conj(c, &gram_apply(g, d, c)).re)
        .collect();
    values.extend(eig.values);
    values
}

/// `Σ_j w[j] · cols[j]`.
fn combine(cols: &[Vec<Complex64>], w: &[Complex64]) -> Vec<Complex64> {
    let len = cols[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (c, wj) in cols.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v * wj;
        }
    }
    out
}

fn mat_vec(x: &ComplexMatrix, v: &[Complex64]) -> Vec<Complex64> {
    x.rows_iter()
        .map(|row| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            acc
        })
        .collect()
}

/// `Xᴴ u` for a length-M vector `u`.
fn adjoint_vec(x: &ComplexMatrix, u: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.cols()];
    for (row, ur) in x.rows_iter().zip(u) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a.conj() * ur;
        }
    }
    out
}

/// Two-sided Rayleigh-Ritz on the converged subspace.
fn finalize(
    x: &ComplexMatrix,
    basis: &[Vec<Complex64>],
    right_side: bool,
    k: usize,
    iterations: usize,
    rng: &mut ChaCha8Rng,
) -> TruncatedSvd {
    let mut right: Vec<Vec<Complex64>> = if right_side {
        basis.to_vec()
    } else {
        basis.iter().map(|u| adjoint_vec(x, u)).collect()
    };
    orthonormalize(&mut right, 0, rng);
    let bl: Vec<Vec<Complex64>> = right.iter().map(|v| mat_vec(x, v)).collect();
    let nb = bl.len();
    let mut h = vec![Complex64::new(0.0, 0.0); nb * nb];
    for i in 0..nb {
        for j in i..nb {
            h[i * nb + j] = dot_conj(&bl[i], &bl[j]);
        }
    }
    let eig = hermitian_eigen(&h, nb);

    let sigma_floor_rel = 64.0 * f64::EPSILON * x.rows().max(x.cols()) as f64;
    let mut values = Vec::with_capacity(nb);
    let mut lefts: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut rights: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut sigma1 = 0.0;
    let mut rank_deficient = false;
    for (i, w) in eig.vectors.iter().enumerate() {
        let mut v = combine(&right, w);
        let mut u = combine(&bl, w);
        let s = norm(&u);
        if i == 0 {
            sigma1 = s;
        }
        values.push(s);
        if i >= k {
            continue;
        }
        if s <= sigma_floor_rel * sigma1 || s == 0.0 {
            rank_deficient = true;
            values[i] = 0.0;
            u.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        } else {
            let inv = 1.0 / s;
            u.iter_mut().for_each(|z| *z *= inv);
        }
        fix_gauge(&mut u, &mut v);
        lefts.push(u);
        rights.push(v);
    }
    if rank_deficient {
        // Arbitrary orthonormal completion for the null directions.
        let mut filled: Vec<Vec<Complex64>> = Vec::with_capacity(k);
        for (i, u) in lefts.into_iter().enumerate() {
            if values[i] == 0.0 {
                let mut e = vec![Complex64::new(0.0, 0.0); x.rows()];
                e[i % x.rows()] = Complex64::new(1.0, 0.0);
                filled.push(e);
            } else {
                filled.push(u);
            }
        }
        let first_zero = values.iter().position(|&s| s == 0.0).unwrap_or(k).min(k);
        orthonormalize(&mut filled, first_zero, rng);
        lefts = filled;
    }

    values.truncate(nb);
    let degenerate = (0..k)
        .map(|i| match values.get(i + 1) {
            Some(&next) if next > 0.0 => values[i] / next < DEGENERACY_RATIO,
            Some(_) => values[i] == 0.0,
            None => false,
        })
        .collect();
    values.truncate(k);
    let captured: f64 = values.iter().map(|s| s * s).sum();
    TruncatedSvd {
        k,
        singular_values: values,
        left_vectors: lefts,
        right_vectors: rights,
        residual_energy: x.frobenius_norm_sqr() - captured,
        degenerate,
        rank_deficient,
        iterations,
    }
}

/// Fixes the joint phase so the largest entry of `v` is real and positive.
fn fix_gauge(u: &mut [Complex64], v: &mut [Complex64]) {
    let Some(big) = v.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())) else {
        return;
    };
    if big.norm() == 0.0 {
        return;
    }
    let ph = big.conj() / big.norm();
    u.iter_mut().for_each(|z| *z *= ph);
    v.iter_mut().for_each(|z| *z *= ph);
}

/// Singular values with the dominance ratio σ1/σ2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub singular_values: Vec<f64>,
    pub dominance_ratio: f64,
}

pub fn singular_spectrum(svd: &TruncatedSvd) -> Result<Spectrum> {
    if svd.singular_values.len() < 2 {
        return Err(Error::param("dominance ratio needs at least two singular values"));
    }
    let (s1, s2) = (svd.singular_values[0], svd.singular_values[1]);
    let ratio = if s2 > 0.0 { s1 / s2 } else { f64::INFINITY };
    Ok(Spectrum {
        singular_values: svd.singular_values.clone(),
        dominance_ratio: ratio,
    })
}

/// Result of rotating two columns into orthogonal position.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsRotation {
    pub c: f64,
    pub s: Complex64,
    /// Inner product of the two rotated columns.
    pub orthogonality_residual: Complex64,
    pub rotated: [ComplexVector; 2],
}

impl GibbsRotation {
    /// Norms of the rotated columns, which are the singular values of `[x1, x2]`.
    pub fn norms(&self) -> [f64; 2] {
        [norm(&self.rotated[0]), norm(&self.rotated[1])]
    }
}

/// Plane rotation `e1 = c x1 + s* x2`, `e2 = -s x1 + c x2` making the columns orthogonal.
pub fn gibbs_rotation_check(x1: &[Complex64], x2: &[Complex64]) -> Result<GibbsRotation> {
    if x1.len() != x2.len() || x1.is_empty() {
        return Err(Error::param("columns must have equal nonzero length"));
    }
    let a = dot_conj(x1, x1).re;
    let b = dot_conj(x2, x2).re;
    if a == 0.0 || b == 0.0 {
        return Err(Error::DegenerateInput("zero-norm column".into()));
    }
    let g = dot_conj(x1, x2);
    let (c, s) = if g.norm() <= f64::EPSILON * (a * b).sqrt() {
        (1.0, Complex64::new(0.0, 0.0))
    } else {
        hermitian_rotation(a, b, g)
    };
    let sc = s.conj();
    let e1: ComplexVector = x1.iter().zip(x2).map(|(p, q)| p * c + q * sc).collect();
    let e2: ComplexVector = x1.iter().zip(x2).map(|(p, q)| q * c - p * s).collect();
    Ok(GibbsRotation {
        c,
        s,
        orthogonality_residual: dot_conj(&e1, &e2),
        rotated: [e1, e2],
    })
}
