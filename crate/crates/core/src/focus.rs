//! Range-Doppler focusing: range compression, range cell migration
//! correction in the range-Doppler domain, azimuth compression.
//!
//! Matched filtering is correlation with a [`Reference`]: for a reference
//! `r` with alignment `a` the output is `y[n] = Σ_k x[n + k - a] · conj(r[k])`.
//! An echo equal to the reference placed with its first sample at column `p`
//! therefore peaks at `p + a`. References built from chirp models use the
//! chirp vertex as alignment, so a compressed target lands on its echo's
//! zero-frequency sample.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chirp::{synth_chirp, ChirpModel, Interval};
use crate::dft::{apply_delay_ramp, fast_len, DftPlan};
use crate::error::{Error, Result, Stage};
use crate::estimate::{beam_peak, build_references, detect_support, BlindEstimate, DEFAULT_THRESHOLD};
use crate::matrix::{ComplexMatrix, RawDataMatrix};
use crate::polyfit::{fit_quadratic, median};
use crate::simulate::GroundTruth;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Matched-filter reference samples with their alignment (output-peak) index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub samples: Vec<Complex64>,
    /// Local sample index mapped onto the output peak; may be fractional.
    pub alignment: f64,
}

impl Reference {
    pub fn new(samples: Vec<Complex64>, alignment: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("empty reference"));
        }
        if !alignment.is_finite() {
            return Err(Error::param("reference alignment must be finite"));
        }
        Ok(Self { samples, alignment })
    }

    /// Synthesizes the model over its support with the given taper.
    pub fn from_model(model: &ChirpModel, taper_fraction: f64) -> Result<Self> {
        if model.rate == 0.0 {
            return Err(Error::param("reference chirp rate must be nonzero"));
        }
        let local = model.shifted(model.support.start)?.with_taper(taper_fraction);
        let samples = synth_chirp(&local, local.support.stop)?;
        Self::new(samples, local.vertex())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Frequency response `conj(R(f)) · exp(-j2πfa/P)` of a reference at length `p`.
fn matched_response(reference: &Reference, plan: &DftPlan) -> Vec<Complex64> {
    let p = plan.len();
    let mut h = vec![ZERO; p];
    h[..reference.len()].copy_from_slice(&reference.samples);
    let mut scratch = plan.scratch();
    plan.forward_inplace(&mut h, &mut scratch);
    h.iter_mut().for_each(|v| *v = v.conj());
    apply_delay_ramp(&mut h, reference.alignment);
    h
}

/// Correlates every row with the reference (linear, zero-padded).
pub fn range_compress(raw: &RawDataMatrix, reference: &Reference) -> Result<ComplexMatrix> {
    let (m, n) = raw.shape();
    if reference.len() > n {
        return Err(Error::param(format!(
            "range reference of {} samples longer than {n} columns",
            reference.len()
        )));
    }
    let pad = fast_len(n + reference.len() + reference.alignment.abs().ceil() as usize + 1);
    let plan = DftPlan::new(pad);
    let h = matched_response(reference, &plan);
    let mut scratch = plan.scratch();
    let mut buf = vec![ZERO; pad];
    let mut out = ComplexMatrix::zeros(m, n)?;
    for r in 0..m {
        buf[..n].copy_from_slice(raw.row(r));
        buf[n..].iter_mut().for_each(|v| *v = ZERO);
        plan.forward_inplace(&mut buf, &mut scratch);
        buf.iter_mut().zip(&h).for_each(|(v, w)| *v *= w);
        plan.inverse_inplace(&mut buf, &mut scratch);
        out.row_mut(r).copy_from_slice(&buf[..n]);
    }
    Ok(out)
}

/// Column-wise DFT over the azimuth (row) axis.
pub fn azimuth_dft(x: &ComplexMatrix, inverse: bool) -> ComplexMatrix {
    let (m, n) = x.shape();
    let plan = DftPlan::new(m);
    let mut scratch = plan.scratch();
    let mut col = vec![ZERO; m];
    let mut out = x.clone();
    for c in 0..n {
        for r in 0..m {
            col[r] = x.get(r, c);
        }
        if inverse {
            plan.inverse_inplace(&mut col, &mut scratch);
        } else {
            plan.forward_inplace(&mut col, &mut scratch);
        }
        out.set_column(c, &col);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RcmSource {
    PeakTracking,
    AnalyticOracle,
}

/// Range migration `r(δ) = r0 + linear·δ + quadratic·δ²` of the dominant
/// target, with `δ` the pulse offset from `reference_pulse`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcmModel {
    /// Fractional range bin at `δ = 0`.
    pub reference_range_bin: f64,
    /// Pulse index of `δ = 0` (beam center).
    pub reference_pulse: f64,
    /// Samples per pulse.
    pub linear: f64,
    /// Samples per pulse².
    pub quadratic: f64,
    /// Samples.
    pub fit_rms: f64,
    pub source: RcmSource,
}

impl RcmModel {
    pub fn zero(source: RcmSource) -> Self {
        Self {
            reference_range_bin: 0.0,
            reference_pulse: 0.0,
            linear: 0.0,
            quadratic: 0.0,
            fit_rms: 0.0,
            source,
        }
    }

    /// Migration relative to `δ = 0`.
    pub fn migration(&self, delta: f64) -> f64 {
        self.linear * delta + self.quadratic * delta * delta
    }

    /// Absolute range bin at pulse `m`.
    pub fn range_bin(&self, m: f64) -> f64 {
        self.reference_range_bin + self.migration(m - self.reference_pulse)
    }
}

/// Sub-sample magnitude peak of each row in `rows`; `None` for empty rows.
pub fn row_peaks(x: &ComplexMatrix, rows: Interval) -> Vec<Option<f64>> {
    rows.range()
        .map(|r| {
            let row = x.row(r);
            let mut best = (0, 0.0f64);
            for (i, v) in row.iter().enumerate() {
                let a = v.norm_sqr();
                if a > best.1 {
                    best = (i, a);
                }
            }
            if best.1 == 0.0 {
                return None;
            }
            let i = best.0;
            if i == 0 || i + 1 == row.len() {
                return Some(i as f64);
            }
            let (a, b, c) = (row[i - 1].norm(), row[i].norm(), row[i + 1].norm());
            let den = a - 2.0 * b + c;
            Some(if den < 0.0 { i as f64 + 0.5 * (a - c) / den } else { i as f64 })
        })
        .collect()
}

pub const MIN_TRACK_POINTS: usize = 16;

/// Tracks the dominant target's range migration over the beam support.
pub fn track_rcm(rc: &ComplexMatrix, beam_envelope: &[f64]) -> Result<RcmModel> {
    if beam_envelope.len() != rc.rows() {
        return Err(Error::param("beam envelope length differs from the number of pulses"));
    }
    let support = detect_support(beam_envelope, DEFAULT_THRESHOLD)?;
    let peak = beam_peak(beam_envelope)?;
    track_rcm_over(rc, support, peak)
}

/// Peak tracking over `support`, with offsets measured from pulse `reference_pulse`.
pub fn track_rcm_over(rc: &ComplexMatrix, support: Interval, reference_pulse: f64) -> Result<RcmModel> {
    if support.stop > rc.rows() {
        return Err(Error::param("tracking support exceeds the pulse count"));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (m, p) in support.range().zip(row_peaks(rc, support)) {
        if let Some(p) = p.filter(|v| v.is_finite()) {
            x.push(m as f64);
            y.push(p);
        }
    }
    let fit = |x: &[f64], y: &[f64]| {
        if x.len() < MIN_TRACK_POINTS {
            return Err(Error::Tracking(format!(
                "{} valid peaks, need {MIN_TRACK_POINTS}",
                x.len()
            )));
        }
        fit_quadratic(x, y, &vec![1.0; x.len()], reference_pulse)
            .ok_or_else(|| Error::Tracking("degenerate peak geometry".into()))
    };
    let q = fit(&x, &y)?;
    let resid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - q.eval(*a)).collect();
    let med = median(&resid);
    let mad = median(&resid.iter().map(|r| (r - med).abs()).collect::<Vec<_>>());
    let cut = (3.0 * mad).max(1e-9);
    let keep: Vec<bool> = resid.iter().map(|r| (r - med).abs() <= cut).collect();
    let (xk, yk): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(&y)
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|((a, b), _)| (*a, *b))
        .unzip();
    let q = fit(&xk, &yk)?;
    let rms = (xk.iter().zip(&yk).map(|(a, b)| (b - q.eval(*a)).powi(2)).sum::<f64>() / xk.len() as f64).sqrt();
    Ok(RcmModel {
        reference_range_bin: q.c[0],
        reference_pulse,
        linear: q.c[1],
        quadratic: q.c[2],
        fit_rms: rms,
        source: RcmSource::PeakTracking,
    })
}

/// Analytic migration model of the primary target, fitted to the true
/// trajectory over its beam support.
pub fn analytic_rcm(truth: &GroundTruth) -> Result<RcmModel> {
    let t = truth
        .primary_truth()
        .ok_or_else(|| Error::param("ground truth has no scatterer"))?;
    let support = truth.azimuth_support;
    let x: Vec<f64> = support.range().map(|m| m as f64).collect();
    let y: Vec<f64> = support.range().map(|m| t.closest_approach_col + truth.rcm_curve[m]).collect();
    let q = fit_quadratic(&x, &y, &vec![1.0; x.len()], t.beam_center_row)
        .ok_or_else(|| Error::param("beam support too short for a migration fit"))?;
    let rms = (x.iter().zip(&y).map(|(a, b)| (b - q.eval(*a)).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    Ok(RcmModel {
        reference_range_bin: q.c[0],
        reference_pulse: t.beam_center_row,
        linear: q.c[1],
        quadratic: q.c[2],
        fit_rms: rms,
        source: RcmSource::AnalyticOracle,
    })
}

/// Azimuth frequency of bin `k` of `m`, unwrapped into `[dc - 0.5, dc + 0.5)`.
pub fn unwrapped_bin_frequency(k: usize, m: usize, dc: f64) -> f64 {
    let lo = dc - 0.5;
    lo + (k as f64 / m as f64 - lo).rem_euclid(1.0)
}

/// Range cell migration correction. Returns the corrected data in the
/// range-Doppler domain (azimuth frequency along rows).
pub fn rcmc(rc: &ComplexMatrix, rcm: &RcmModel, azimuth_rate: f64, doppler_centroid: f64) -> Result<ComplexMatrix> {
    if !(azimuth_rate != 0.0 && azimuth_rate.is_finite()) {
        return Err(Error::param("azimuth rate must be finite and nonzero"));
    }
    let (m, n) = rc.shape();
    let mut rd = azimuth_dft(rc, false);
    let limit = n as f64 / 4.0;
    let shifts: Vec<f64> = (0..m)
        .map(|k| {
            let f = unwrapped_bin_frequency(k, m, doppler_centroid);
            rcm.migration((f - doppler_centroid) / (2.0 * azimuth_rate))
        })
        .collect();
    if let Some(&bad) = shifts.iter().find(|d| !(d.abs() <= limit)) {
        return Err(Error::ImplausibleMigration { shift: bad, limit });
    }
    let plan = DftPlan::new(n);
    let mut scratch = plan.scratch();
    for (k, &delta) in shifts.iter().enumerate() {
        if delta == 0.0 {
            continue;
        }
        let row = rd.row_mut(k);
        plan.forward_inplace(row, &mut scratch);
        apply_delay_ramp(row, -delta);
        plan.inverse_inplace(row, &mut scratch);
    }
    Ok(rd)
}

/// Azimuth matched filter applied in the range-Doppler domain, followed by
/// the inverse azimuth DFT. Circular over the pulse axis.
pub fn azimuth_compress(rd: &ComplexMatrix, reference: &Reference) -> Result<ComplexMatrix> {
    let (m, n) = rd.shape();
    if reference.len() > m {
        return Err(Error::param(format!(
            "azimuth reference of {} samples longer than {m} pulses",
            reference.len()
        )));
    }
    let plan = DftPlan::new(m);
    let h = matched_response(reference, &plan);
    let mut scratch = plan.scratch();
    let mut col = vec![ZERO; m];
    let mut out = rd.clone();
    for c in 0..n {
        for r in 0..m {
            col[r] = rd.get(r, c) * h[r];
        }
        plan.inverse_inplace(&mut col, &mut scratch);
        out.set_column(c, &col);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Blind,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusedImage {
    pub image: ComplexMatrix,
    pub provenance: Provenance,
    /// Hash of the estimate or configuration the references came from.
    pub estimate_hash: String,
}

/// How the migration curve is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum RcmPlan {
    /// Peak tracking on the range-compressed data over `support`.
    Track { support: Interval, reference_pulse: f64 },
    Fixed(RcmModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusParameters {
    pub range_reference: Reference,
    pub azimuth_reference: Reference,
    /// cycles/pulse².
    pub azimuth_rate: f64,
    /// cycles/pulse.
    pub doppler_centroid: f64,
    pub rcm: RcmPlan,
}

impl FocusParameters {
    pub fn from_estimate(estimate: &BlindEstimate, taper_fraction: f64) -> Result<Self> {
        let (range_reference, azimuth_reference) = build_references(estimate, taper_fraction)?;
        Ok(Self {
            range_reference,
            azimuth_reference,
            azimuth_rate: estimate.azimuth_chirp.rate,
            doppler_centroid: estimate.doppler_centroid,
            rcm: RcmPlan::Track {
                support: estimate.azimuth_chirp.support,
                reference_pulse: estimate.beam_peak_index,
            },
        })
    }

    /// References and migration from the simulator's analytic truth.
    pub fn oracle(truth: &GroundTruth, taper_fraction: f64) -> Result<Self> {
        let t = truth
            .primary_truth()
            .ok_or_else(|| Error::param("ground truth has no scatterer"))?;
        let nc = truth.chirp_length;
        let range = ChirpModel::new(truth.range_rate, nc as f64 / 2.0, Interval::new(0, nc)?);
        let azimuth = ChirpModel {
            rate: truth.azimuth_rate,
            center: t.beam_center_row,
            support: truth.azimuth_support,
            taper_fraction: 0.0,
            linear: truth.doppler_centroid,
            constant: 0.0,
        };
        Ok(Self {
            range_reference: Reference::from_model(&range, taper_fraction)?,
            azimuth_reference: Reference::from_model(&azimuth, taper_fraction)?,
            azimuth_rate: truth.azimuth_rate,
            doppler_centroid: truth.doppler_centroid,
            rcm: RcmPlan::Fixed(analytic_rcm(truth)?),
        })
    }
}

/// Intermediate products of one focusing run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDumps {
    pub range_compressed: ComplexMatrix,
    /// After migration correction, range-Doppler domain.
    pub range_doppler: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusRun {
    pub image: ComplexMatrix,
    pub rcm: RcmModel,
    pub stages: Option<StageDumps>,
}

/// Range compression, migration correction and azimuth compression in order.
pub fn focus_with(raw: &RawDataMatrix, params: &FocusParameters, keep_stages: bool) -> Result<FocusRun> {
    let rc = range_compress(raw, &params.range_reference).map_err(Error::at(Stage::RangeCompression))?;
    let rcm = match &params.rcm {
        RcmPlan::Track { support, reference_pulse } => {
            track_rcm_over(&rc, *support, *reference_pulse).map_err(Error::at(Stage::RcmTracking))?
        }
        RcmPlan::Fixed(model) => *model,
    };
    let rd = rcmc(&rc, &rcm, params.azimuth_rate, params.doppler_centroid).map_err(Error::at(Stage::Rcmc))?;
    let image = azimuth_compress(&rd, &params.azimuth_reference).map_err(Error::at(Stage::AzimuthCompression))?;
    Ok(FocusRun {
        image,
        rcm,
        stages: keep_stages.then_some(StageDumps {
            range_compressed: rc,
            range_doppler: rd,
        }),
    })
}

/// Blind focusing with references synthesized from `estimate`.
pub fn focus_pipeline(raw: &RawDataMatrix, estimate: &BlindEstimate, taper_fraction: f64) -> Result<FocusRun> {
    focus_with(raw, &FocusParameters::from_estimate(estimate, taper_fraction)?, false)
}

/// Focusing with the simulator's true parameters.
pub fn focus_oracle(raw: &RawDataMatrix, truth: &GroundTruth, taper_fraction: f64) -> Result<FocusRun> {
    focus_with(raw, &FocusParameters::oracle(truth, taper_fraction)?, false)
}
