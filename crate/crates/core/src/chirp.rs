//! Quadratic-phase (linear FM) chirp models and their synthesis.
//!
//! A [`ChirpModel`] stores its phase in cycles:
//!
//! ```text
//! phase(n) = K (n - n0)^2 + b (n - n0) + c0        [cycles]
//! ```
//!
//! so the instantaneous frequency is `2K (n - n0) + b` cycles/sample. Signal
//! level code works in radians; the conversion happens in [`ChirpModel::phase_radians`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexVector;

/// Half-open index interval `[start, stop)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub stop: usize,
}

impl Interval {
    pub fn new(start: usize, stop: usize) -> Result<Self> {
        if start >= stop {
            return Err(Error::param(format!("empty interval [{start}, {stop})")));
        }
        Ok(Self { start, stop })
    }

    pub fn len(&self) -> usize {
        self.stop - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.stop <= self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= self.start && i < self.stop
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.stop
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpModel {
    /// Phase curvature K, cycles/sample².
    pub rate: f64,
    /// Reference index n0 of the phase polynomial (fractional samples).
    pub center: f64,
    pub support: Interval,
    /// Raised-cosine ramp length at each end, as a fraction of the support.
    pub taper_fraction: f64,
    /// Linear term b, cycles/sample.
    pub linear: f64,
    /// Constant term c0, cycles.
    pub constant: f64,
}

impl ChirpModel {
    /// Untapered chirp with its vertex at `center`.
    pub fn new(rate: f64, center: f64, support: Interval) -> Self {
        Self {
            rate,
            center,
            support,
            taper_fraction: 0.0,
            linear: 0.0,
            constant: 0.0,
        }
    }

    pub fn with_taper(mut self, taper_fraction: f64) -> Self {
        self.taper_fraction = taper_fraction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.start >= self.support.stop {
            return Err(Error::param(format!(
                "chirp support [{}, {}) is empty",
                self.support.start, self.support.stop
            )));
        }
        for (name, v) in [
            ("rate", self.rate),
            ("center", self.center),
            ("linear", self.linear),
            ("constant", self.constant),
        ] {
            if !v.is_finite() {
                return Err(Error::param(format!("chirp {name} is not finite")));
            }
        }
        if !(0.0..=0.5).contains(&self.taper_fraction) {
            return Err(Error::param(format!(
                "taper fraction {} outside [0, 0.5]",
                self.taper_fraction
            )));
        }
        Ok(())
    }

    /// Phase in cycles at (fractional) index `n`.
    pub fn phase_cycles(&self, n: f64) -> f64 {
        let t = n - self.center;
        self.rate * t * t + self.linear * t + self.constant
    }

    pub fn phase_radians(&self, n: f64) -> f64 {
        2.0 * PI * self.phase_cycles(n)
    }

    /// Instantaneous frequency in cycles/sample at index `n`.
    pub fn frequency(&self, n: f64) -> f64 {
        2.0 * self.rate * (n - self.center) + self.linear
    }

    /// Index where the instantaneous frequency is zero (may lie outside the support).
    pub fn vertex(&self) -> f64 {
        self.center - self.linear / (2.0 * self.rate)
    }

    /// Polynomial coefficients `(K, slope, constant)` re-expanded about `origin`.
    pub fn coefficients_at(&self, origin: f64) -> (f64, f64, f64) {
        (self.rate, self.frequency(origin), self.phase_cycles(origin))
    }

    /// The same phase law expressed on an axis shifted by `offset`
    /// (index `n` here becomes `n - offset`).
    pub fn shifted(&self, offset: usize) -> Result<ChirpModel> {
        if offset > self.support.start {
            return Err(Error::param("shift moves support below zero"));
        }
        Ok(ChirpModel {
            center: self.center - offset as f64,
            support: Interval {
                start: self.support.start - offset,
                stop: self.support.stop - offset,
            },
            ..*self
        })
    }

    /// Conjugate phase law (all polynomial terms negated).
    pub fn conjugate(&self) -> ChirpModel {
        ChirpModel {
            rate: -self.rate,
            linear: -self.linear,
            constant: -self.constant,
            ..*self
        }
    }
}

/// Raised-cosine taper weight for position `i` within a support of `len` samples.
pub fn taper_weight(i: usize, len: usize, taper_fraction: f64) -> f64 {
    let ramp = (taper_fraction * len as f64).round() as usize;
    if ramp == 0 {
        return 1.0;
    }
    let from_edge = i.min(len - 1 - i);
    if from_edge >= ramp {
        1.0
    } else {
        0.5 * (1.0 - (PI * (from_edge as f64 + 0.5) / ramp as f64).cos())
    }
}

/// Samples the chirp on `0..length`; zero outside the model's support.
pub fn synth_chirp(model: &ChirpModel, length: usize) -> Result<ComplexVector> {
    model.validate()?;
    if length < model.support.stop {
        return Err(Error::param(format!(
            "length {length} shorter than support end {}",
            model.support.stop
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); length];
    let len = model.support.len();
    for (i, n) in model.support.range().enumerate() {
        let w = taper_weight(i, len, model.taper_fraction);
        out[n] = Complex64::from_polar(w, model.phase_radians(n as f64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{instantaneous_frequency, unwrap_phase};

    #[test]
    fn zero_rate_is_constant() {
        let m = ChirpModel::new(0.0, 0.0, Interval::new(0, 8).unwrap());
        let s = synth_chirp(&m, 8).unwrap();
        assert!(s.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn half_cycle_rate_flips_sign_at_one() {
        let m = ChirpModel::new(0.5, 0.0, Interval::new(0, 4).unwrap());
        let s = synth_chirp(&m, 4).unwrap();
        assert!((s[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn outside_support_is_zero() {
        let m = ChirpModel::new(1e-3, 20.0, Interval::new(10, 30).unwrap()).with_taper(0.2);
        let s = synth_chirp(&m, 40).unwrap();
        assert!(s[..10].iter().chain(&s[30..]).all(|v| *v == Complex64::new(0.0, 0.0)));
        assert!(s[10].norm() > 0.0 && s[10].norm() < 1.0);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut m = ChirpModel::new(1e-3, 0.0, Interval { start: 5, stop: 5 });
        assert!(synth_chirp(&m, 10).is_err());
        m.support = Interval { start: 0, stop: 5 };
        m.rate = f64::NAN;
        assert!(synth_chirp(&m, 10).is_err());
        m.rate = 1e-3;
        assert!(synth_chirp(&m, 4).is_err());
        m.taper_fraction = 0.7;
        assert!(synth_chirp(&m, 10).is_err());
    }

    #[test]
    fn untapered_magnitude_is_binary() {
        let m = ChirpModel::new(3e-3, 50.0, Interval::new(5, 90).unwrap());
        for v in synth_chirp(&m, 100).unwrap() {
            let a = v.norm();
            assert!(a == 0.0 || (a - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_about_vertex() {
        let m = ChirpModel::new(2.3e-3, 40.0, Interval::new(0, 81).unwrap());
        let s = synth_chirp(&m, 81).unwrap();
        for k in 1..=40 {
            assert!((s[40 + k] - s[40 - k]).norm() < 1e-12);
        }
    }

    #[test]
    fn frequency_slope_recovers_twice_rate() {
        let k = 1.7e-3;
        let m = ChirpModel::new(k, 64.3, Interval::new(0, 128).unwrap());
        let s = synth_chirp(&m, 128).unwrap();
        let ph = unwrap_phase(&s.iter().map(|v| v.arg()).collect::<Vec<_>>());
        let f = instantaneous_frequency(&ph).unwrap();
        for w in f[1..127].windows(2) {
            assert!((w[1] - w[0] - 2.0 * k).abs() < 1e-9);
        }
        // zero crossing near the vertex
        let cross = f.windows(2).position(|w| w[0] < 0.0 && w[1] >= 0.0).unwrap() as f64;
        assert!((cross + 0.5 - 64.3).abs() <= 1.0);
    }

    #[test]
    fn taper_ramp_is_monotone_and_symmetric() {
        let len = 100;
        let w: Vec<f64> = (0..len).map(|i| taper_weight(i, len, 0.1)).collect();
        for i in 0..10 {
            assert!(w[i] < w[i + 1] || w[i + 1] == 1.0);
            assert_eq!(w[i], w[len - 1 - i]);
        }
        assert_eq!(w[50], 1.0);
    }

    #[test]
    fn coefficients_reexpand() {
        let m = ChirpModel {
            rate: 0.002,
            center: 0.0,
            support: Interval::new(0, 100).unwrap(),
            taper_fraction: 0.0,
            linear: 0.01,
            constant: 0.3,
        };
        let (k, b, c) = m.coefficients_at(10.0);
        let shifted = ChirpModel { center: 10.0, linear: b, constant: c, ..m };
        assert_eq!(k, 0.002);
        for n in 0..100 {
            assert!((shifted.phase_cycles(n as f64) - m.phase_cycles(n as f64)).abs() < 1e-12);
        }
        assert!((m.vertex() + 2.5).abs() < 1e-12);
    }
}
