//! Phase unwrapping and instantaneous frequency.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Removes 2π jumps so successive differences lie in `(-π, π]`.
///
/// The correction applied to each sample is an integer multiple of 2π, so the
/// output agrees with the input modulo 2π and already-unwrapped input comes
/// back unchanged.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let Some(&first) = wrapped.first() else {
        return out;
    };
    out.push(first);
    let mut turns = 0.0_f64;
    for w in wrapped.windows(2) {
        let d = w[1] - w[0];
        // Principal value of the step in (-π, π].
        let mut k = (d / (2.0 * PI)).round();
        if d - 2.0 * PI * k <= -PI {
            k -= 1.0;
        } else if d - 2.0 * PI * k > PI {
            k += 1.0;
        }
        turns -= k;
        out.push(w[1] + 2.0 * PI * turns);
    }
    out
}

/// Instantaneous frequency in cycles/sample from an unwrapped phase in radians.
///
/// Central differences inside, one-sided differences at the two ends.
pub fn instantaneous_frequency(phase: &[f64]) -> Result<Vec<f64>> {
    let n = phase.len();
    if n < 3 {
        return Err(Error::param(format!(
            "instantaneous frequency needs at least 3 samples, got {n}"
        )));
    }
    let mut f = Vec::with_capacity(n);
    f.push((phase[1] - phase[0]) / (2.0 * PI));
    for i in 1..n - 1 {
        f.push((phase[i + 1] - phase[i - 1]) / (4.0 * PI));
    }
    f.push((phase[n - 1] - phase[n - 2]) / (2.0 * PI));
    Ok(f)
}

/// Wraps a frequency in cycles/sample into `(-0.5, 0.5]`.
pub fn wrap_cycles(f: f64) -> f64 {
    let w = f - f.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wrap(x: f64) -> f64 {
        let w = x.rem_euclid(2.0 * PI);
        if w > PI {
            w - 2.0 * PI
        } else {
            w
        }
    }

    #[test]
    fn small_steps_pass_through() {
        assert_eq!(unwrap_phase(&[0.0, 1.0, 2.0]), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn restores_2pi_jump() {
        let out = unwrap_phase(&[0.0, 3.0, 6.0 - 2.0 * PI]);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 3.0);
        assert!((out[2] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single() {
        assert!(unwrap_phase(&[]).is_empty());
        assert_eq!(unwrap_phase(&[2.5]), vec![2.5]);
    }

    #[test]
    fn quadratic_round_trip() {
        let phi: Vec<f64> = (0..400)
            .map(|n| 2.0 * PI * (5e-4 * (n as f64 - 150.0).powi(2) + 0.03 * n as f64))
            .collect();
        let wrapped: Vec<f64> = phi.iter().map(|&p| wrap(p)).collect();
        let un = unwrap_phase(&wrapped);
        let offset = un[0] - phi[0];
        let turns = offset / (2.0 * PI);
        assert!((turns - turns.round()).abs() < 1e-9);
        for (a, b) in un.iter().zip(&phi) {
            assert!((a - b - offset).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_phase_has_constant_frequency() {
        let phi: Vec<f64> = (0..20).map(|n| 2.0 * PI * 0.1 * n as f64).collect();
        for f in instantaneous_frequency(&phi).unwrap() {
            assert!((f - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_phase_frequency_is_linear() {
        let k = 1e-3;
        let phi: Vec<f64> = (0..50).map(|n| 2.0 * PI * k * (n * n) as f64).collect();
        let f = instantaneous_frequency(&phi).unwrap();
        for (n, v) in f.iter().enumerate().take(49).skip(1) {
            assert!((v - 2.0 * k * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn short_input_is_rejected() {
        assert!(instantaneous_frequency(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn wrap_cycles_range() {
        assert_eq!(wrap_cycles(0.5), 0.5);
        assert_eq!(wrap_cycles(-0.5), 0.5);
        assert!((wrap_cycles(1.15) - 0.15).abs() < 1e-12);
        assert!((wrap_cycles(-0.65) - 0.35).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn unwrap_invariants(v in prop::collection::vec(-50.0f64..50.0, 1..64)) {
            let out = unwrap_phase(&v);
            prop_assert_eq!(out[0], v[0]);
            for w in out.windows(2) {
                let d = w[1] - w[0];
                prop_assert!(d > -PI - 1e-9 && d <= PI + 1e-9);
            }
            for (a, b) in out.iter().zip(&v) {
                let t = (a - b) / (2.0 * PI);
                prop_assert!((t - t.round()).abs() < 1e-9);
            }
            // idempotent
            prop_assert_eq!(unwrap_phase(&out), out);
        }
    }
}
