//! Exact-length discrete Fourier transforms.
//!
//! Forward transforms use the `e^{-j2πkn/N}` kernel and are unscaled; inverse
//! transforms carry the `1/N` factor, so `inverse(forward(x)) == x`.
//! Arbitrary lengths are supported (rustfft falls back to Bluestein/Rader for
//! awkward sizes); callers that pad for speed use [`fast_len`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward and inverse transforms of one length.
#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan").field("len", &self.len).finish()
    }
}

impl DftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            len,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }

    pub fn forward_inplace(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process_with_scratch(buf, scratch);
    }

    pub fn inverse_inplace(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inverse.process_with_scratch(buf, scratch);
        let s = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

/// Forward (or, with `inverse`, normalized inverse) DFT of `x` at its exact length.
pub fn dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let plan = DftPlan::new(x.len());
    let mut buf = x.to_vec();
    let mut scratch = plan.scratch();
    if inverse {
        plan.inverse_inplace(&mut buf, &mut scratch);
    } else {
        plan.forward_inplace(&mut buf, &mut scratch);
    }
    buf
}

/// Smallest 5-smooth integer `>= n`.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Signed frequency index of bin `k` in a length-`n` transform, in `[-n/2, n/2)`.
pub fn signed_bin(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Multiplies a spectrum by the phase ramp that delays its time signal by
/// `delay` samples (circularly): `y[n] = x(n - delay)`.
pub fn apply_delay_ramp(spectrum: &mut [Complex64], delay: f64) {
    if delay == 0.0 {
        return;
    }
    let n = spectrum.len();
    for (k, v) in spectrum.iter_mut().enumerate() {
        let phase = -2.0 * PI * signed_bin(k, n) * delay / n as f64;
        *v *= Complex64::from_polar(1.0, phase);
    }
}
