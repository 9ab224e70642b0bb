//! Blind reference extraction from the first singular triplet.
//!
//! `u1` carries the azimuth chirp modulated by the beam pattern and `v1` the
//! conjugate of the transmitted range chirp. Both are reduced to
//! [`ChirpModel`]s by support detection, phase unwrapping and a weighted
//! quadratic fit; references are then synthesized from the models.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chirp::{synth_chirp, ChirpModel, Interval};
use crate::decompose::{leading_triplets_with, singular_spectrum, SvdOptions};
use crate::error::{Error, Result};
use crate::focus::{range_compress, Reference};
use crate::matrix::RawDataMatrix;
use crate::phase::{unwrap_phase, wrap_cycles};
use crate::polyfit::fit_quadratic;

pub const DEFAULT_GATE: f64 = 3.0;
pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_TAPER: f64 = 0.1;

/// Zero-padded moving average of odd width (even widths are rounded up).
pub fn smooth_boxcar(x: &[f64], width: usize) -> Vec<f64> {
    let w = width.max(1) | 1;
    let h = w / 2;
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(n);
            (prefix[hi] - prefix[lo]) / w as f64
        })
        .collect()
}

/// Contiguous interval around the global peak where `envelope ≥ fraction · peak`.
pub fn detect_support(envelope: &[f64], threshold_fraction: f64) -> Result<Interval> {
    if envelope.is_empty() {
        return Err(Error::param("empty envelope"));
    }
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::param(format!("threshold fraction {threshold_fraction} outside (0, 1)")));
    }
    let (peak_idx, peak) = argmax(envelope);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::NoSignal("envelope has no positive peak".into()));
    }
    let th = threshold_fraction * peak;
    let mut start = peak_idx;
    while start > 0 && envelope[start - 1] >= th {
        start -= 1;
    }
    let mut stop = peak_idx + 1;
    while stop < envelope.len() && envelope[stop] >= th {
        stop += 1;
    }
    Ok(Interval { start, stop })
}

fn argmax(x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in x.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// A fitted phase law and its weighted RMS residual in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFit {
    pub model: ChirpModel,
    pub residual_rms: f64,
}

/// Weighted least-squares fit of a quadratic phase law over `support`.
///
/// Weights are `|s|²`. The model's reference index `n0` is the vertex of the
/// fitted parabola clamped into the support; the linear term is the phase
/// slope there (zero unless clamped).
pub fn fit_quadratic_phase(signal: &[Complex64], support: Interval) -> Result<PhaseFit> {
    if support.start >= support.stop || support.stop > signal.len() {
        return Err(Error::param(format!(
            "support [{}, {}) invalid for length {}",
            support.start,
            support.stop,
            signal.len()
        )));
    }
    if support.len() < 8 {
        return Err(Error::param(format!("support of {} samples is shorter than 8", support.len())));
    }
    let seg = &signal[support.range()];
    let wrapped: Vec<f64> = seg.iter().map(|v| v.arg()).collect();
    let cycles: Vec<f64> = unwrap_phase(&wrapped).iter().map(|p| p / (2.0 * PI)).collect();
    let n: Vec<f64> = support.range().map(|i| i as f64).collect();
    let w: Vec<f64> = seg.iter().map(|v| v.norm_sqr()).collect();
    let wsum: f64 = w.iter().sum();
    if !(wsum > 0.0) {
        return Err(Error::NoSignal("zero signal inside support".into()));
    }
    let centroid = n.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / wsum;

    let q = fit_quadratic(&n, &cycles, &w, centroid).ok_or_else(|| Error::DegenerateFit {
        reason: "rank-deficient normal equations".into(),
        model: None,
    })?;
    let rms = (n
        .iter()
        .zip(&cycles)
        .zip(&w)
        .map(|((x, y), wi)| wi * (y - q.eval(*x)).powi(2))
        .sum::<f64>()
        / wsum)
        .sqrt();

    let k = q.c[2];
    let (lo, hi) = (support.start as f64, (support.stop - 1) as f64);
    if k.abs() <= 1e-12 {
        let model = ChirpModel {
            rate: 0.0,
            center: centroid,
            support,
            taper_fraction: 0.0,
            linear: q.c[1],
            constant: q.c[0],
        };
        return Err(Error::DegenerateFit {
            reason: "phase has no measurable curvature".into(),
            model: Some(Box::new(model)),
        });
    }
    let vertex = centroid - q.c[1] / (2.0 * k);
    let n0 = vertex.clamp(lo, hi);
    let linear = if n0 == vertex { 0.0 } else { q.slope(n0) };
    Ok(PhaseFit {
        model: ChirpModel {
            rate: k,
            center: n0,
            support,
            taper_fraction: 0.0,
            linear,
            constant: q.eval(n0),
        },
        residual_rms: rms,
    })
}

/// Smoothing width used for envelopes: `max(5, hint / 50)`, made odd.
pub fn smoothing_width(support_hint: usize) -> usize {
    (support_hint / 50).max(5) | 1
}

/// Smoothed magnitude envelope of a singular vector and its support.
fn envelope_and_support(x: &[Complex64], threshold: f64) -> Result<(Vec<f64>, Interval)> {
    let mag: Vec<f64> = x.iter().map(|v| v.norm()).collect();
    let prelim = detect_support(&smooth_boxcar(&mag, 5), threshold)?;
    let env = smooth_boxcar(&mag, smoothing_width(prelim.len()));
    let support = detect_support(&env, threshold)?;
    Ok((env, support))
}

/// Shrinks `support` until its end samples of the unsmoothed magnitude reach
/// `threshold` times the largest magnitude inside it. This removes the
/// widening a boxcar causes at the sharp edges of a rectangular pulse.
pub fn trim_edges(mag: &[f64], support: Interval, threshold: f64) -> Interval {
    let peak = mag[support.range()].iter().copied().fold(0.0, f64::max);
    let th = threshold * peak;
    let (mut start, mut stop) = (support.start, support.stop);
    while stop - start > 1 && mag[start] < th {
        start += 1;
    }
    while stop - start > 1 && mag[stop - 1] < th {
        stop -= 1;
    }
    Interval { start, stop }
}

/// Sub-sample position of the envelope maximum: least-squares parabola over
/// the contiguous region at or above half the peak.
pub fn beam_peak(envelope: &[f64]) -> Result<f64> {
    let half = detect_support(envelope, 0.5)?;
    let (i, _) = argmax(envelope);
    if half.len() >= 3 {
        let x: Vec<f64> = half.range().map(|j| j as f64).collect();
        let y = &envelope[half.range()];
        if let Some(q) = fit_quadratic(&x, y, &vec![1.0; x.len()], i as f64) {
            if q.c[2] < 0.0 {
                let v = i as f64 - q.c[1] / (2.0 * q.c[2]);
                return Ok(v.clamp(half.start as f64, (half.stop - 1) as f64));
            }
        }
    }
    // Three-point parabola fallback.
    if i == 0 || i + 1 >= envelope.len() {
        return Ok(i as f64);
    }
    let (a, b, c) = (envelope[i - 1], envelope[i], envelope[i + 1]);
    let den = a - 2.0 * b + c;
    Ok(if den < 0.0 { i as f64 + 0.5 * (a - c) / den } else { i as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AzimuthEstimate {
    pub chirp: ChirpModel,
    pub doppler_centroid: f64,
    pub beam_envelope: Vec<f64>,
    pub beam_peak_index: f64,
    pub fit_rms: f64,
}

pub fn estimate_azimuth(u1: &[Complex64]) -> Result<AzimuthEstimate> {
    estimate_azimuth_with(u1, DEFAULT_THRESHOLD)
}

pub fn estimate_azimuth_with(u1: &[Complex64], threshold: f64) -> Result<AzimuthEstimate> {
    let (env, support) = envelope_and_support(u1, threshold)?;
    let peak = beam_peak(&env)?;
    let fit = fit_quadratic_phase(u1, support)?;
    let dc = wrap_cycles(fit.model.frequency(peak));
    Ok(AzimuthEstimate {
        chirp: fit.model,
        doppler_centroid: dc,
        beam_envelope: env,
        beam_peak_index: peak,
        fit_rms: fit.residual_rms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeEstimate {
    /// Phase law of `v1` itself; see [`resolve_range_sign`].
    pub chirp: ChirpModel,
    pub fit_rms: f64,
}

pub fn estimate_range(v1: &[Complex64]) -> Result<RangeEstimate> {
    estimate_range_with(v1, DEFAULT_THRESHOLD)
}

pub fn estimate_range_with(v1: &[Complex64], threshold: f64) -> Result<RangeEstimate> {
    let (_, smoothed) = envelope_and_support(v1, threshold)?;
    let mag: Vec<f64> = v1.iter().map(|v| v.norm()).collect();
    let support = trim_edges(&mag, smoothed, threshold);
    let fit = fit_quadratic_phase(v1, support)?;
    Ok(RangeEstimate {
        chirp: fit.model,
        fit_rms: fit.residual_rms,
    })
}

/// Picks the model or its conjugate, whichever range-compresses `raw` to the
/// larger global peak. Returns the choice and whether it was conjugated.
pub fn resolve_range_sign(raw: &RawDataMatrix, model: &ChirpModel) -> Result<(ChirpModel, bool)> {
    let conj = model.conjugate();
    let peak = |m: &ChirpModel| -> Result<f64> {
        let r = Reference::from_model(m, 0.0)?;
        Ok(range_compress(raw, &r)?.max_abs())
    };
    let (p0, p1) = (peak(model)?, peak(&conj)?);
    Ok(if p1 > p0 { (conj, true) } else { (*model, false) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub k: usize,
    /// Minimum σ1/σ2.
    pub gate: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub threshold_fraction: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        let svd = SvdOptions::default();
        Self {
            k: svd.k,
            gate: DEFAULT_GATE,
            tol: svd.tol,
            max_iter: svd.max_iter,
            seed: svd.seed,
            threshold_fraction: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResiduals {
    /// RMS cycles.
    pub range: f64,
    pub azimuth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindEstimate {
    /// Transmitted range chirp law (sign resolved), in `v1` column coordinates.
    pub range_chirp: ChirpModel,
    /// Azimuth law of `u1`, including the Doppler-centroid linear phase.
    pub azimuth_chirp: ChirpModel,
    /// cycles/pulse in (-0.5, 0.5].
    pub doppler_centroid: f64,
    pub beam_envelope: Vec<f64>,
    pub beam_peak_index: f64,
    pub dominance_ratio: f64,
    pub fit_residuals: FitResiduals,
    pub singular_values: Vec<f64>,
    /// Whether the fitted law of `v1` had to be conjugated.
    pub range_conjugated: bool,
}

/// Full blind estimate from raw data.
pub fn blind_estimate(raw: &RawDataMatrix, opts: &EstimateOptions) -> Result<BlindEstimate> {
    if !(opts.gate >= 1.0) {
        return Err(Error::param(format!("gate {} must be at least 1", opts.gate)));
    }
    let k = opts.k.max(2);
    let svd = leading_triplets_with(
        raw,
        &SvdOptions {
            k,
            tol: opts.tol,
            max_iter: opts.max_iter,
            seed: opts.seed,
        },
    )?;
    let spectrum = singular_spectrum(&svd)?;
    if svd.singular_values[0] == 0.0 {
        return Err(Error::NoSignal("raw matrix is zero".into()));
    }
    if spectrum.dominance_ratio < opts.gate {
        return Err(Error::UnsuitableScene(format!(
            "dominance ratio {:.3} below gate {:.3}",
            spectrum.dominance_ratio, opts.gate
        )));
    }
    if svd.degenerate[0] {
        return Err(Error::UnsuitableScene("leading singular value is degenerate".into()));
    }

    let az = estimate_azimuth_with(svd.u(0), opts.threshold_fraction)?;
    let rg = estimate_range_with(svd.v(0), opts.threshold_fraction)?;
    let (range_chirp, range_conjugated) = resolve_range_sign(raw, &rg.chirp)?;
    Ok(BlindEstimate {
        range_chirp,
        azimuth_chirp: az.chirp,
        doppler_centroid: az.doppler_centroid,
        beam_envelope: az.beam_envelope,
        beam_peak_index: az.beam_peak_index,
        dominance_ratio: spectrum.dominance_ratio,
        fit_residuals: FitResiduals {
            range: rg.fit_rms,
            azimuth: az.fit_rms,
        },
        singular_values: spectrum.singular_values,
        range_conjugated,
    })
}

/// Clean range and azimuth references synthesized from the fitted models.
pub fn build_references(estimate: &BlindEstimate, taper_fraction: f64) -> Result<(Reference, Reference)> {
    Ok((
        Reference::from_model(&estimate.range_chirp, taper_fraction)?,
        Reference::from_model(&estimate.azimuth_chirp, taper_fraction)?,
    ))
}

/// Samples of the model on its own support, for comparisons.
pub fn model_samples(model: &ChirpModel) -> Result<Vec<Complex64>> {
    let full = synth_chirp(model, model.support.stop)?;
    Ok(full[model.support.range()].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_example() {
        let env = [0.0, 0.05, 0.5, 1.0, 0.5, 0.05, 0.0];
        assert_eq!(detect_support(&env, 0.1).unwrap(), Interval { start: 2, stop: 5 });
    }

    #[test]
    fn support_constant_and_zero() {
        assert_eq!(detect_support(&[2.0; 9], 0.1).unwrap(), Interval { start: 0, stop: 9 });
        assert!(matches!(detect_support(&[0.0; 4], 0.1), Err(Error::NoSignal(_))));
        assert!(detect_support(&[1.0], 1.5).is_err());
    }

    #[test]
    fn exact_polynomial_phase_is_recovered() {
        let s: Vec<Complex64> = (0..100)
            .map(|n| {
                let n = n as f64;
                Complex64::from_polar(1.0, 2.0 * PI * (0.002 * n * n + 0.01 * n + 0.3))
            })
            .collect();
        let fit = fit_quadratic_phase(&s, Interval { start: 0, stop: 100 }).unwrap();
        let m = fit.model;
        assert!((m.rate - 0.002).abs() < 1e-9);
        assert_eq!(m.center, 0.0);
        assert!((m.linear - 0.01).abs() < 1e-9);
        assert!((m.constant - 0.3).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-8);
    }

    #[test]
    fn interior_vertex_has_zero_linear_term() {
        let s: Vec<Complex64> = (0..80)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * -1.5e-3 * (n as f64 - 37.25).powi(2)))
            .collect();
        let m = fit_quadratic_phase(&s, Interval { start: 0, stop: 80 }).unwrap().model;
        assert!((m.center - 37.25).abs() < 1e-7);
        assert_eq!(m.linear, 0.0);
        assert!((m.rate + 1.5e-3).abs() < 1e-12);
    }

    #[test]
    fn constant_phase_is_degenerate() {
        let s = vec![Complex64::new(0.0, 1.0); 20];
        match fit_quadratic_phase(&s, Interval { start: 0, stop: 20 }) {
            Err(Error::DegenerateFit { model: Some(m), .. }) => assert_eq!(m.rate, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_support_is_rejected() {
        let s = vec![Complex64::new(1.0, 0.0); 20];
        assert!(matches!(
            fit_quadratic_phase(&s, Interval { start: 3, stop: 10 }),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn smoothing_preserves_constant_interior() {
        let s = smooth_boxcar(&[1.0; 20], 5);
        assert!(s[2..18].iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!((s[0] - 0.6).abs() < 1e-15);
        assert_eq!(smoothing_width(100), 5);
        assert_eq!(smoothing_width(340), 7);
        assert_eq!(smoothing_width(400), 9);
    }

    #[test]
    fn trimming_undoes_boxcar_widening() {
        let mut mag = vec![0.0; 40];
        mag[10..30].iter_mut().for_each(|v| *v = 1.0);
        let wide = detect_support(&smooth_boxcar(&mag, 5), 0.1).unwrap();
        assert_eq!(wide, Interval { start: 8, stop: 32 });
        assert_eq!(trim_edges(&mag, wide, 0.1), Interval { start: 10, stop: 30 });
    }

    #[test]
    fn beam_peak_of_symmetric_bump() {
        let env: Vec<f64> = (0..64).map(|i| (-((i as f64 - 30.3) / 8.0).powi(2)).exp()).collect();
        assert!((beam_peak(&env).unwrap() - 30.3).abs() < 0.05);
    }
}
