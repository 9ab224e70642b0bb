//! Weighted least-squares quadratic fits.

/// Coefficients of `y ≈ c0 + c1 (x - origin) + c2 (x - origin)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub origin: f64,
    pub c: [f64; 3],
}

impl Quadratic {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.origin;
        self.c[0] + t * (self.c[1] + t * self.c[2])
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.c[1] + 2.0 * self.c[2] * (x - self.origin)
    }
}

/// Weighted quadratic fit about `origin`. Returns `None` when the normal
/// equations are numerically rank deficient (fewer than three effective points).
pub fn fit_quadratic(x: &[f64], y: &[f64], w: &[f64], origin: f64) -> Option<Quadratic> {
    debug_assert!(x.len() == y.len() && y.len() == w.len());
    let h = x.iter().map(|v| (v - origin).abs()).fold(0.0, f64::max);
    if h == 0.0 || !h.is_finite() {
        return None;
    }
    let mut a = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let t = (xi - origin) / h;
        let b = [1.0, t, t * t];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += wi * b[i] * b[j];
            }
            r[i] += wi * b[i] * yi;
        }
    }
    let s = cholesky_solve(a, r)?;
    Some(Quadratic {
        origin,
        c: [s[0], s[1] / h, s[2] / (h * h)],
    })
}

fn cholesky_solve(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut l = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 1e-12 * a[i][i]) || a[i][i] <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut z = [0.0f64; 3];
    for i in 0..3 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    let mut out = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut s = z[i];
        for k in i + 1..3 {
            s -= l[k][i] * out[k];
        }
        out[i] = s / l[i][i];
    }
    Some(out)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_quadratic() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.5 - 0.25 * (t - 7.0) + 0.125 * (t - 7.0).powi(2)).collect();
        let q = fit_quadratic(&x, &y, &vec![1.0; 20], 7.0).unwrap();
        assert!((q.c[0] - 1.5).abs() < 1e-12);
        assert!((q.c[1] + 0.25).abs() < 1e-12);
        assert!((q.c[2] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn two_points_are_rank_deficient() {
        let x = [0.0, 1.0, 1.0, 0.0];
        assert!(fit_quadratic(&x, &[1.0, 2.0, 2.0, 1.0], &[1.0; 4], 0.5).is_none());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
