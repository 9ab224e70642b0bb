//! Point-target impulse-response metrics and image comparison.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::DftPlan;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::polyfit::median;

pub const DEFAULT_OVERSAMPLE: usize = 16;
pub const DEFAULT_WINDOW: usize = 128;
/// Required peak excess over the window median, in dB.
pub const DETECTION_MARGIN_DB: f64 = 20.0;
/// ISLR integrates out to this many IRWs on each side of the peak.
pub const ISLR_EXTENT_IRW: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutMetrics {
    /// −3 dB width, samples.
    pub irw: f64,
    /// dB.
    pub pslr: f64,
    /// dB.
    pub islr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTargetReport {
    /// (row, col), fractional samples in image coordinates.
    pub peak_position: (f64, f64),
    pub peak_magnitude: f64,
    pub irw_range: f64,
    pub irw_azimuth: f64,
    pub pslr_range: f64,
    pub pslr_azimuth: f64,
    pub islr_range: f64,
    pub islr_azimuth: f64,
    pub oversample_factor: usize,
}

pub fn analyze_point_target(img: &ComplexMatrix, approx: (usize, usize), window: usize) -> Result<PointTargetReport> {
    analyze_point_target_with(img, approx, window, DEFAULT_OVERSAMPLE)
}

pub fn analyze_point_target_with(
    img: &ComplexMatrix,
    approx: (usize, usize),
    window: usize,
    oversample: usize,
) -> Result<PointTargetReport> {
    if window < 32 {
        return Err(Error::param(format!("window {window} smaller than 32")));
    }
    if oversample < 8 {
        return Err(Error::param(format!("oversample factor {oversample} smaller than 8")));
    }
    let (r0, c0) = (approx.0 as i64 - (window / 2) as i64, approx.1 as i64 - (window / 2) as i64);
    if r0 < 0 || c0 < 0 || r0 as usize + window > img.rows() || c0 as usize + window > img.cols() {
        return Err(Error::param(format!(
            "{window}x{window} window around ({}, {}) leaves the {}x{} image",
            approx.0,
            approx.1,
            img.rows(),
            img.cols()
        )));
    }
    let (r0, c0) = (r0 as usize, c0 as usize);
    let block = img.block(r0, c0, window, window)?;

    let power: Vec<f64> = block.as_slice().iter().map(|v| v.norm_sqr()).collect();
    let peak_power = power.iter().copied().fold(0.0, f64::max);
    let floor = median(&power);
    if !(peak_power > 0.0) || peak_power <= floor * 10f64.powf(DETECTION_MARGIN_DB / 10.0) {
        return Err(Error::NoTarget(format!(
            "peak is not {DETECTION_MARGIN_DB} dB above the window median"
        )));
    }

    let up = oversample_2d(&block, oversample)?;
    let (pr, pc) = up.argmax_abs();
    let mag = |r: usize, c: usize| up.get(r, c).norm();
    let row_cut: Vec<f64> = (0..up.cols()).map(|c| mag(pr, c)).collect();
    let col_cut: Vec<f64> = (0..up.rows()).map(|r| mag(r, pc)).collect();
    let fr = refine(&col_cut, pr);
    let fc = refine(&row_cut, pc);
    let f = oversample as f64;
    let range = cut_metrics(&row_cut, pc, f);
    let azimuth = cut_metrics(&col_cut, pr, f);
    Ok(PointTargetReport {
        peak_position: (r0 as f64 + fr / f, c0 as f64 + fc / f),
        peak_magnitude: up.get(pr, pc).norm(),
        irw_range: range.irw,
        irw_azimuth: azimuth.irw,
        pslr_range: range.pslr,
        pslr_azimuth: azimuth.pslr,
        islr_range: range.islr,
        islr_azimuth: azimuth.islr,
        oversample_factor: oversample,
    })
}

fn refine(profile: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= profile.len() {
        return i as f64;
    }
    let (a, b, c) = (profile[i - 1], profile[i], profile[i + 1]);
    let den = a - 2.0 * b + c;
    if den < 0.0 {
        i as f64 + 0.5 * (a - c) / den
    } else {
        i as f64
    }
}

/// Band-limited interpolation by zero-padding each axis' spectrum.
///
/// The spectral band kept on each axis is the contiguous run of bins that
/// ends just before the least-energetic bin, so spectra centered away from
/// zero frequency are not split.
pub fn oversample_2d(x: &ComplexMatrix, factor: usize) -> Result<ComplexMatrix> {
    let (m, n) = x.shape();
    let spec = transform_2d(x, false);
    let power: Vec<f64> = spec.as_slice().iter().map(|v| v.norm_sqr()).collect();
    let row_energy: Vec<f64> = (0..m).map(|r| power[r * n..(r + 1) * n].iter().sum()).collect();
    let col_energy: Vec<f64> = (0..n).map(|c| (0..m).map(|r| power[r * n + c]).sum()).collect();
    let map_r = band_map(&row_energy, factor);
    let map_c = band_map(&col_energy, factor);
    let (bm, bn) = (m * factor, n * factor);
    let mut big = ComplexMatrix::zeros(bm, bn)?;
    for r in 0..m {
        for c in 0..n {
            big.set(map_r[r], map_c[c], spec.get(r, c));
        }
    }
    let mut out = transform_2d(&big, true);
    out.scale((factor * factor) as f64);
    Ok(out)
}

/// Destination index of each of `len` bins in a spectrum `factor` times longer.
fn band_map(energy: &[f64], factor: usize) -> Vec<usize> {
    let len = energy.len();
    let kmin = energy
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let big = len * factor;
    // Band of frequencies kmin - len + 1 ..= kmin.
    (0..len)
        .map(|k| {
            let f = if k <= kmin { k as i64 } else { k as i64 - len as i64 };
            f.rem_euclid(big as i64) as usize
        })
        .collect()
}

fn transform_2d(x: &ComplexMatrix, inverse: bool) -> ComplexMatrix {
    let (m, n) = x.shape();
    let mut out = x.clone();
    let rp = DftPlan::new(n);
    let mut scratch = rp.scratch();
    for r in 0..m {
        if inverse {
            rp.inverse_inplace(out.row_mut(r), &mut scratch);
        } else {
            rp.forward_inplace(out.row_mut(r), &mut scratch);
        }
    }
    let cp = DftPlan::new(m);
    let mut scratch = cp.scratch();
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for c in 0..n {
        for r in 0..m {
            col[r] = out.get(r, c);
        }
        if inverse {
            cp.inverse_inplace(&mut col, &mut scratch);
        } else {
            cp.forward_inplace(&mut col, &mut scratch);
        }
        out.set_column(c, &col);
    }
    out
}

/// IRW, PSLR and ISLR of an oversampled magnitude cut peaking at `peak`.
pub fn cut_metrics(profile: &[f64], peak: usize, oversample: f64) -> CutMetrics {
    let p = profile[peak];
    let half = p / std::f64::consts::SQRT_2;
    let left = {
        let mut i = peak;
        while i > 0 && profile[i - 1] >= half {
            i -= 1;
        }
        if i == 0 {
            0.0
        } else {
            let (a, b) = (profile[i - 1], profile[i]);
            (i - 1) as f64 + (half - a) / (b - a)
        }
    };
    let right = {
        let mut i = peak;
        while i + 1 < profile.len() && profile[i + 1] >= half {
            i += 1;
        }
        if i + 1 >= profile.len() {
            i as f64
        } else {
            let (a, b) = (profile[i], profile[i + 1]);
            i as f64 + (a - half) / (a - b)
        }
    };
    let irw_os = right - left;

    // Main lobe bounded by the first minima on each side.
    let mut lo = peak;
    while lo > 0 && profile[lo - 1] < profile[lo] {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < profile.len() && profile[hi + 1] < profile[hi] {
        hi += 1;
    }
    let side_peak = profile[..lo]
        .iter()
        .chain(&profile[hi + 1..])
        .copied()
        .fold(0.0, f64::max);
    let pslr = 20.0 * (side_peak / p).log10();

    let extent = (ISLR_EXTENT_IRW * irw_os).ceil() as usize;
    let a = peak.saturating_sub(extent);
    let b = (peak + extent + 1).min(profile.len());
    let (mut main, mut side) = (0.0, 0.0);
    for (i, v) in profile.iter().enumerate().take(b).skip(a) {
        if (lo..=hi).contains(&i) {
            main += v * v;
        } else {
            side += v * v;
        }
    }
    CutMetrics {
        irw: irw_os / oversample,
        pslr,
        islr: 10.0 * (side / main).log10(),
    }
}

/// Rectangular region of an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Region {
    /// `size × size` region centered on `(row, col)`, clipped to the image.
    pub fn centered(row: usize, col: usize, size: usize, shape: (usize, usize)) -> Region {
        let size_r = size.min(shape.0);
        let size_c = size.min(shape.1);
        let r = row.saturating_sub(size_r / 2).min(shape.0 - size_r);
        let c = col.saturating_sub(size_c / 2).min(shape.1 - size_c);
        Region {
            row: r,
            col: c,
            rows: size_r,
            cols: size_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `Σ|a||b| / sqrt(Σ|a|² Σ|b|²)`.
    pub correlation: f64,
    /// Peak of `b` minus peak of `a`, (rows, cols).
    pub peak_offset: (i64, i64),
    /// RMS of the per-pixel difference of peak-normalized dB magnitudes.
    pub db_rms_difference: f64,
    pub region: Region,
}

/// Magnitudes below this level (dB relative to each image's peak) are clipped
/// before the dB difference is taken.
pub const COMPARE_DB_FLOOR: f64 = -60.0;

pub fn compare_images(a: &ComplexMatrix, b: &ComplexMatrix, region: Option<Region>) -> Result<Comparison> {
    if a.shape() != b.shape() {
        return Err(Error::param(format!(
            "image shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let region = region.unwrap_or(Region {
        row: 0,
        col: 0,
        rows: a.rows(),
        cols: a.cols(),
    });
    if region.rows == 0 || region.cols == 0 || region.row + region.rows > a.rows() || region.col + region.cols > a.cols() {
        return Err(Error::param("comparison region outside the image"));
    }
    let ma = a.block(region.row, region.col, region.rows, region.cols)?;
    let mb = b.block(region.row, region.col, region.rows, region.cols)?;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ma.as_slice().iter().zip(mb.as_slice()) {
        let (p, q) = (x.norm(), y.norm());
        sab += p * q;
        saa += p * p;
        sbb += q * q;
    }
    let correlation = if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else if saa == sbb {
        1.0
    } else {
        0.0
    };
    let (ra, ca) = ma.argmax_abs();
    let (rb, cb) = mb.argmax_abs();
    let (pa, pb) = (ma.max_abs(), mb.max_abs());
    let db = |v: f64, peak: f64| {
        if peak == 0.0 {
            COMPARE_DB_FLOOR
        } else {
            (20.0 * (v / peak).log10()).max(COMPARE_DB_FLOOR)
        }
    };
    let sq: f64 = ma
        .as_slice()
        .iter()
        .zip(mb.as_slice())
        .map(|(x, y)| (db(x.norm(), pa) - db(y.norm(), pb)).powi(2))
        .sum();
    Ok(Comparison {
        correlation,
        peak_offset: (rb as i64 - ra as i64, cb as i64 - ca as i64),
        db_rms_difference: (sq / (region.rows * region.cols) as f64).sqrt(),
        region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sinc(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            (PI * x).sin() / (PI * x)
        }
    }

    fn sinc_image(size: usize, r: f64, c: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(size, size, |i, j| Complex64::new(sinc(i as f64 - r) * sinc(j as f64 - c), 0.0)).unwrap()
    }

    #[test]
    fn ideal_sinc_metrics() {
        let img = sinc_image(128, 64.0, 64.0);
        let rep = analyze_point_target(&img, (64, 64), 64).unwrap();
        assert!((rep.pslr_range + 13.26).abs() < 0.1, "{}", rep.pslr_range);
        assert!((rep.pslr_azimuth + 13.26).abs() < 0.1);
        assert!((rep.irw_range - 0.886).abs() < 0.01, "{}", rep.irw_range);
        assert!((rep.irw_azimuth - 0.886).abs() < 0.01);
        assert!(rep.islr_range < -9.0);
        assert!((rep.peak_position.0 - 64.0).abs() < 1e-6);
    }

    #[test]
    fn fractional_position_is_recovered() {
        let img = sinc_image(128, 60.3, 70.71);
        let rep = analyze_point_target(&img, (60, 71), 64).unwrap();
        assert!((rep.peak_position.0 - 60.3).abs() < 0.05);
        assert!((rep.peak_position.1 - 70.71).abs() < 0.05);
    }

    #[test]
    fn impulse_window() {
        let mut img = ComplexMatrix::zeros(64, 64).unwrap();
        img.set(32, 32, Complex64::new(1.0, 0.0));
        let rep = analyze_point_target(&img, (32, 32), 32).unwrap();
        assert_eq!(rep.peak_position, (32.0, 32.0));
        assert!((rep.irw_range - 0.886).abs() < 0.02, "{}", rep.irw_range);
        assert!((rep.peak_magnitude - 1.0).abs() < 1e-9);
    }

    #[test]
    fn metrics_ignore_global_scaling() {
        let img = sinc_image(96, 48.2, 47.6);
        let mut scaled = img.clone();
        for v in scaled.as_mut_slice() {
            *v *= Complex64::from_polar(3.7, 1.1);
        }
        let a = analyze_point_target(&img, (48, 48), 64).unwrap();
        let b = analyze_point_target(&scaled, (48, 48), 64).unwrap();
        assert!((a.pslr_range - b.pslr_range).abs() < 1e-9);
        assert!((a.islr_azimuth - b.islr_azimuth).abs() < 1e-9);
    }

    #[test]
    fn noise_window_has_no_target() {
        let img = ComplexMatrix::from_fn(64, 64, |i, j| Complex64::new(((i * 7 + j * 13) % 5) as f64 + 1.0, 0.0)).unwrap();
        assert!(matches!(analyze_point_target(&img, (32, 32), 32), Err(Error::NoTarget(_))));
    }

    #[test]
    fn small_window_or_edge_is_rejected() {
        let img = sinc_image(64, 32.0, 32.0);
        assert!(analyze_point_target(&img, (32, 32), 16).is_err());
        assert!(analyze_point_target(&img, (5, 32), 32).is_err());
    }

    #[test]
    fn identical_and_shifted_images() {
        let a = sinc_image(32, 15.0, 12.0);
        let same = compare_images(&a, &a, None).unwrap();
        assert!((same.correlation - 1.0).abs() < 1e-12);
        assert_eq!(same.peak_offset, (0, 0));
        assert_eq!(same.db_rms_difference, 0.0);
        let b = sinc_image(32, 15.0, 13.0);
        let s = compare_images(&a, &b, None).unwrap();
        assert_eq!(s.peak_offset, (0, 1));
        assert!(s.correlation < 1.0);
        assert!(compare_images(&a, &sinc_image(16, 1.0, 1.0), None).is_err());
    }
}
