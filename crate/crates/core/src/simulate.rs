//! Stripmap raw-data simulator with analytic ground truth.
//!
//! Geometry is rectilinear and uniform (stop-and-go). Each pulse row holds the
//! transmitted chirp delayed by the two-way slant range, weighted by a
//! `sinc²` two-way beam pattern and carrying the `exp(-j4πR/λ)` carrier phase.
//! Column `N/2` corresponds to the vertex of an echo at the closest range `R0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::chirp::Interval;
use crate::dft::{apply_delay_ramp, DftPlan};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, RawDataMatrix};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    /// Metres.
    pub wavelength: f64,
    /// m/s.
    pub platform_speed: f64,
    /// Metres.
    pub closest_range: f64,
    /// Hz.
    pub prf: f64,
    /// Range sampling frequency, Hz.
    pub range_sampling: f64,
    /// Hz/s.
    pub chirp_rate: f64,
    /// Seconds.
    pub chirp_duration: f64,
    /// Null-to-null main-lobe dwell of the two-way beam, seconds.
    pub beam_azimuth_extent: f64,
    /// Beam-center time minus zero-Doppler time, seconds.
    #[serde(default)]
    pub squint_offset: f64,
    pub num_pulses: usize,
    pub samples_per_pulse: usize,
    /// Standard deviation of each of I and Q.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Zero-Doppler time, seconds.
    pub azimuth_time: f64,
    /// Metres added to the closest range.
    #[serde(default)]
    pub range_offset: f64,
    pub reflectivity: Complex64,
}

/// Configuration file layout: acquisition parameters plus the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub scene: Vec<Scatterer>,
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("platform_speed", self.platform_speed),
            ("closest_range", self.closest_range),
            ("prf", self.prf),
            ("range_sampling", self.range_sampling),
            ("chirp_rate", self.chirp_rate),
            ("chirp_duration", self.chirp_duration),
            ("beam_azimuth_extent", self.beam_azimuth_extent),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Configuration(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.squint_offset.is_finite() {
            return Err(Error::Configuration("squint_offset must be finite".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Configuration("noise_sigma must be non-negative".into()));
        }
        if self.num_pulses == 0 || self.samples_per_pulse == 0 {
            return Err(Error::Configuration("grid dimensions must be positive".into()));
        }
        if self.chirp_rate * self.chirp_duration > self.range_sampling {
            return Err(Error::Configuration(format!(
                "chirp bandwidth {:.4e} Hz exceeds range sampling {:.4e} Hz",
                self.chirp_rate * self.chirp_duration,
                self.range_sampling
            )));
        }
        if self.beam_azimuth_extent * self.prf > self.num_pulses as f64 {
            return Err(Error::Configuration(format!(
                "beam dwell of {:.1} pulses exceeds {} pulses",
                self.beam_azimuth_extent * self.prf,
                self.num_pulses
            )));
        }
        let nc = self.chirp_samples();
        if nc < 2 || nc > self.samples_per_pulse {
            return Err(Error::Configuration(format!(
                "chirp of {nc} samples does not fit {} samples per pulse",
                self.samples_per_pulse
            )));
        }
        Ok(())
    }

    /// Transmitted pulse length in samples.
    pub fn chirp_samples(&self) -> usize {
        (self.chirp_duration * self.range_sampling).round() as usize
    }

    /// Range chirp rate in cycles/sample².
    pub fn range_rate(&self) -> f64 {
        self.chirp_rate / (2.0 * self.range_sampling * self.range_sampling)
    }

    /// Chirp bandwidth as a fraction of the sampling frequency.
    pub fn bandwidth_fraction(&self) -> f64 {
        self.chirp_rate * self.chirp_duration / self.range_sampling
    }

    pub fn slant_range(&self, eta: f64, s: &Scatterer) -> f64 {
        let r0 = self.closest_range + s.range_offset;
        let x = self.platform_speed * (eta - s.azimuth_time);
        (r0 * r0 + x * x).sqrt()
    }

    /// Fractional column of the echo vertex (chirp midpoint) at slow time `eta`.
    pub fn echo_column(&self, eta: f64, s: &Scatterer) -> f64 {
        self.samples_per_pulse as f64 / 2.0
            + 2.0 * (self.slant_range(eta, s) - self.closest_range) / SPEED_OF_LIGHT * self.range_sampling
    }

    pub fn beam_center_time(&self, s: &Scatterer) -> f64 {
        s.azimuth_time + self.squint_offset
    }

    /// Two-way beam amplitude; zero beyond the first nulls.
    pub fn beam_weight(&self, eta: f64, s: &Scatterer) -> f64 {
        let u = 2.0 * (eta - self.beam_center_time(s)) / self.beam_azimuth_extent;
        if u.abs() >= 1.0 {
            0.0
        } else {
            let x = sinc(u);
            x * x
        }
    }

    pub fn pulse_time(&self, m: usize) -> f64 {
        m as f64 / self.prf
    }

    /// Azimuth phase curvature at the beam center, cycles/pulse².
    pub fn azimuth_rate(&self, s: &Scatterer) -> f64 {
        let eta = self.beam_center_time(s);
        let r = self.slant_range(eta, s);
        let r0 = self.closest_range + s.range_offset;
        let v2 = self.platform_speed * self.platform_speed;
        -v2 * r0 * r0 / (self.wavelength * r.powi(3) * self.prf * self.prf)
    }

    /// Azimuth frequency at the beam center, cycles/pulse, before wrapping.
    pub fn doppler_centroid_unwrapped(&self, s: &Scatterer) -> f64 {
        let eta = self.beam_center_time(s);
        let r = self.slant_range(eta, s);
        let v2 = self.platform_speed * self.platform_speed;
        -2.0 * v2 * (eta - s.azimuth_time) / (self.wavelength * r * self.prf)
    }
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

/// The transmitted pulse `exp(j2πK(n - Nc/2)²)`, `n = 0..Nc`.
pub fn transmitted_pulse(config: &AcquisitionConfig) -> Vec<Complex64> {
    let nc = config.chirp_samples();
    let k = config.range_rate();
    let mid = nc as f64 / 2.0;
    (0..nc)
        .map(|n| {
            let t = n as f64 - mid;
            Complex64::from_polar(1.0, 2.0 * PI * k * t * t)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererTruth {
    /// Pulse index of zero Doppler; where azimuth compression places the target.
    pub row: f64,
    /// Echo vertex column at the beam-center pulse, the column RCMC aligns to.
    pub col: f64,
    pub closest_approach_col: f64,
    pub beam_center_row: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scatterers: Vec<ScattererTruth>,
    /// Index of the strongest scatterer, which the primary fields describe.
    pub primary: Option<usize>,
    /// cycles/sample².
    pub range_rate: f64,
    pub chirp_length: usize,
    pub bandwidth_fraction: f64,
    /// cycles/pulse².
    pub azimuth_rate: f64,
    /// cycles/pulse, in (-0.5, 0.5].
    pub doppler_centroid: f64,
    /// Pulses where the primary target's beam amplitude is at least 10% of peak.
    pub azimuth_support: Interval,
    /// Per-pulse echo vertex column minus the closest-approach column.
    pub rcm_curve: Vec<f64>,
}

impl GroundTruth {
    pub fn primary_truth(&self) -> Option<&ScattererTruth> {
        self.primary.map(|i| &self.scatterers[i])
    }
}

/// Ground truth derived analytically from the configuration and scene.
///
/// With an empty scene the primary fields describe a hypothetical target at
/// the grid center and zero range offset.
pub fn ground_truth(config: &AcquisitionConfig, scene: &[Scatterer]) -> Result<GroundTruth> {
    config.validate()?;
    let m = config.num_pulses;
    let primary = scene
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, s)| {
            let a = s.reflectivity.norm();
            match best {
                Some((_, b)) if b >= a => best,
                _ => Some((i, a)),
            }
        })
        .map(|(i, _)| i);
    let reference = primary.map(|i| scene[i]).unwrap_or(Scatterer {
        azimuth_time: config.pulse_time(m / 2),
        range_offset: 0.0,
        reflectivity: Complex64::new(1.0, 0.0),
    });

    let scatterers = scene
        .iter()
        .map(|s| ScattererTruth {
            row: s.azimuth_time * config.prf,
            col: config.echo_column(config.beam_center_time(s), s),
            closest_approach_col: config.echo_column(s.azimuth_time, s),
            beam_center_row: config.beam_center_time(s) * config.prf,
        })
        .collect();

    let peak = config.beam_center_time(&reference) * config.prf;
    let center = (peak.round().max(0.0) as usize).min(m - 1);
    let above = |i: usize| config.beam_weight(config.pulse_time(i), &reference) >= 0.1;
    if !above(center) {
        return Err(Error::Configuration("beam center lies outside the pulse grid".into()));
    }
    let mut start = center;
    while start > 0 && above(start - 1) {
        start -= 1;
    }
    let mut stop = center + 1;
    while stop < m && above(stop) {
        stop += 1;
    }

    let closest = config.echo_column(reference.azimuth_time, &reference);
    let rcm_curve = (0..m)
        .map(|i| config.echo_column(config.pulse_time(i), &reference) - closest)
        .collect();

    Ok(GroundTruth {
        scatterers,
        primary,
        range_rate: config.range_rate(),
        chirp_length: config.chirp_samples(),
        bandwidth_fraction: config.bandwidth_fraction(),
        azimuth_rate: config.azimuth_rate(&reference),
        doppler_centroid: crate::phase::wrap_cycles(config.doppler_centroid_unwrapped(&reference)),
        azimuth_support: Interval { start, stop },
        rcm_curve,
    })
}

/// Simulates the raw echo matrix and its ground truth.
pub fn simulate_raw(config: &AcquisitionConfig, scene: &[Scatterer]) -> Result<(RawDataMatrix, GroundTruth)> {
    let truth = ground_truth(config, scene)?;
    let (m, n) = (config.num_pulses, config.samples_per_pulse);
    let nc = config.chirp_samples();
    let mut raw = ComplexMatrix::zeros(m, n)?;

    let plan = DftPlan::new(n);
    let mut scratch = plan.scratch();
    let mut pulse_spectrum = vec![Complex64::new(0.0, 0.0); n];
    pulse_spectrum[..nc].copy_from_slice(&transmitted_pulse(config));
    plan.forward_inplace(&mut pulse_spectrum, &mut scratch);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];

    for (idx, s) in scene.iter().enumerate() {
        check_scatterer(config, idx, s)?;
        for row in 0..m {
            let eta = config.pulse_time(row);
            let w = config.beam_weight(eta, s);
            if w == 0.0 {
                continue;
            }
            let lead = config.echo_column(eta, s) - nc as f64 / 2.0;
            let r = config.slant_range(eta, s);
            let gain = s.reflectivity * w * Complex64::from_polar(1.0, -4.0 * PI * r / config.wavelength);
            buf.copy_from_slice(&pulse_spectrum);
            apply_delay_ramp(&mut buf, lead);
            plan.inverse_inplace(&mut buf, &mut scratch);
            for (o, v) in raw.row_mut(row).iter_mut().zip(&buf) {
                *o += gain * v;
            }
        }
    }

    if config.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, config.noise_sigma)
            .map_err(|e| Error::Configuration(format!("noise_sigma: {e}")))?;
        for row in 0..m {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(row as u64);
            for v in raw.row_mut(row) {
                let re: f64 = rng.sample(normal);
                let im: f64 = rng.sample(normal);
                *v += Complex64::new(re, im);
            }
        }
    }
    Ok((raw, truth))
}

fn check_scatterer(config: &AcquisitionConfig, idx: usize, s: &Scatterer) -> Result<()> {
    if !(s.azimuth_time.is_finite() && s.range_offset.is_finite() && s.reflectivity.norm().is_finite()) {
        return Err(Error::Configuration(format!("scatterer {idx}: non-finite parameters")));
    }
    if config.closest_range + s.range_offset <= 0.0 {
        return Err(Error::Configuration(format!("scatterer {idx}: non-positive closest range")));
    }
    let half = config.beam_azimuth_extent / 2.0;
    let center = config.beam_center_time(s);
    let last = config.pulse_time(config.num_pulses - 1);
    if center - half < 0.0 || center + half > last {
        return Err(Error::Configuration(format!(
            "scatterer {idx}: beam main lobe [{:.4}, {:.4}] s leaves the pulse grid [0, {last:.4}] s",
            center - half,
            center + half
        )));
    }
    let nc = config.chirp_samples() as f64;
    let n = config.samples_per_pulse as f64;
    for row in 0..config.num_pulses {
        let eta = config.pulse_time(row);
        if config.beam_weight(eta, s) == 0.0 {
            continue;
        }
        let lead = config.echo_column(eta, s) - nc / 2.0;
        if lead < 0.0 || lead + nc > n {
            return Err(Error::Configuration(format!(
                "scatterer {idx}: echo at pulse {row} spans columns [{lead:.2}, {:.2}) outside [0, {n})",
                lead + nc
            )));
        }
    }
    Ok(())
}

/// Random scene of `count` unit-amplitude, random-phase scatterers whose echoes
/// all fall inside the grid.
pub fn random_scene(config: &AcquisitionConfig, count: usize, amplitude: f64, seed: u64) -> Result<Vec<Scatterer>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = config.beam_azimuth_extent / 2.0;
    let last = config.pulse_time(config.num_pulses - 1);
    let (t_lo, t_hi) = (half - config.squint_offset, last - half - config.squint_offset);
    if t_lo >= t_hi {
        return Err(Error::Configuration("beam dwell leaves no room for scatterers".into()));
    }
    // Slant-range offsets keep the migrating echo away from the grid edges.
    let nc = config.chirp_samples() as f64;
    let n = config.samples_per_pulse as f64;
    let metres_per_sample = SPEED_OF_LIGHT / (2.0 * config.range_sampling);
    let max_rcm = {
        let x = config.platform_speed * (half + config.squint_offset.abs());
        let r0 = config.closest_range;
        ((r0 * r0 + x * x).sqrt() - r0) / metres_per_sample
    };
    let lo = -(n / 2.0 - nc / 2.0 - 1.0) * metres_per_sample;
    let hi = (n / 2.0 - nc / 2.0 - 2.0 - max_rcm) * metres_per_sample;
    if lo >= hi {
        return Err(Error::Configuration("range extent leaves no room for scatterers".into()));
    }
    Ok((0..count)
        .map(|_| Scatterer {
            azimuth_time: rng.random_range(t_lo..t_hi),
            range_offset: rng.random_range(lo..hi),
            reflectivity: Complex64::from_polar(amplitude, rng.random_range(0.0..2.0 * PI)),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub const HISTOGRAM_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Bins span `[-limit, limit]` uniformly.
    pub limit: f64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawStatistics {
    pub real: Moments,
    pub imag: Moments,
    /// Histogram of the real part.
    pub histogram: Histogram,
}

fn moments(values: impl Iterator<Item = f64> + Clone, count: usize) -> Moments {
    let n = count as f64;
    let mean = values.clone().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 == 0.0 {
        return Moments {
            mean,
            variance: 0.0,
            skewness: 0.0,
            excess_kurtosis: 0.0,
        };
    }
    Moments {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

pub fn raw_statistics(raw: &RawDataMatrix) -> RawStatistics {
    let data = raw.as_slice();
    let real = moments(data.iter().map(|v| v.re), data.len());
    let imag = moments(data.iter().map(|v| v.im), data.len());
    let peak = data.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let limit = if peak > 0.0 { peak } else { 1.0 };
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for v in data {
        let pos = (v.re + limit) / (2.0 * limit) * HISTOGRAM_BINS as f64;
        let bin = (pos.floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
    }
    RawStatistics {
        real,
        imag,
        histogram: Histogram { limit, counts },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_config() -> AcquisitionConfig {
        AcquisitionConfig {
            wavelength: 0.03,
            platform_speed: 50.0,
            closest_range: 900.0,
            prf: 250.0,
            range_sampling: 1.2e9,
            chirp_rate: 0.15 * 1.2e9 / (32.0 / 1.2e9),
            chirp_duration: 32.0 / 1.2e9,
            beam_azimuth_extent: 0.4,
            squint_offset: 0.0,
            num_pulses: 128,
            samples_per_pulse: 128,
            noise_sigma: 0.0,
            rng_seed: 3,
        }
    }

    fn point(row: f64, config: &AcquisitionConfig) -> Scatterer {
        Scatterer {
            azimuth_time: row / config.prf,
            range_offset: 0.0,
            reflectivity: Complex64::new(1.0, 0.0),
        }
    }

    #[test]
    fn empty_scene_without_noise_is_zero() {
        let (raw, truth) = simulate_raw(&small_config(), &[]).unwrap();
        assert!(raw.as_slice().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert_eq!(truth.primary, None);
    }

    #[test]
    fn strongest_row_is_nearest_zero_doppler() {
        let cfg = small_config();
        let (raw, _) = simulate_raw(&cfg, &[point(63.3, &cfg)]).unwrap();
        let energy: Vec<f64> = raw.rows_iter().map(|r| r.iter().map(|v| v.norm_sqr()).sum()).collect();
        let best = energy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(best, 63);
        // Non-increasing away from boresight within the main lobe.
        for m in 63..100 {
            assert!(energy[m + 1] <= energy[m] * (1.0 + 1e-9));
        }
        for m in 30..63 {
            assert!(energy[m] <= energy[m + 1] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn superposition_is_exact() {
        let cfg = small_config();
        let a = point(50.0, &cfg);
        let b = Scatterer {
            range_offset: 1.3,
            reflectivity: Complex64::new(0.2, -0.7),
            ..point(70.5, &cfg)
        };
        let (ra, _) = simulate_raw(&cfg, &[a]).unwrap();
        let (rb, _) = simulate_raw(&cfg, &[b]).unwrap();
        let (rab, _) = simulate_raw(&cfg, &[a, b]).unwrap();
        let mut sum = ra.clone();
        sum.add_assign(&rb).unwrap();
        assert_eq!(sum, rab);
    }

    #[test]
    fn deterministic_with_noise() {
        let mut cfg = small_config();
        cfg.noise_sigma = 0.1;
        let s = [point(64.0, &cfg)];
        assert_eq!(simulate_raw(&cfg, &s).unwrap().0, simulate_raw(&cfg, &s).unwrap().0);
        let mut other = cfg.clone();
        other.rng_seed += 1;
        assert_ne!(simulate_raw(&cfg, &s).unwrap().0, simulate_raw(&other, &s).unwrap().0);
    }

    #[test]
    fn scatterer_off_grid_is_named() {
        let cfg = small_config();
        let err = simulate_raw(&cfg, &[point(64.0, &cfg), point(5.0, &cfg)]).unwrap_err();
        match err {
            Error::Configuration(msg) => assert!(msg.contains("scatterer 1"), "{msg}"),
            e => panic!("{e:?}"),
        }
        let far = Scatterer {
            range_offset: 20.0,
            ..point(64.0, &cfg)
        };
        assert!(matches!(simulate_raw(&cfg, &[far]), Err(Error::Configuration(_))));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_config();
        cfg.chirp_rate *= 10.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.beam_azimuth_extent = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.prf = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn noise_variance_matches_sigma() {
        let mut cfg = small_config();
        cfg.noise_sigma = 1.0;
        cfg.num_pulses = 512;
        cfg.samples_per_pulse = 512;
        let (raw, _) = simulate_raw(&cfg, &[]).unwrap();
        let st = raw_statistics(&raw);
        assert!((st.real.variance - 1.0).abs() < 0.05);
        assert!((st.imag.variance - 1.0).abs() < 0.05);
        assert!(st.real.excess_kurtosis.abs() < 0.05);
        assert_eq!(st.histogram.counts.iter().sum::<u64>(), 512 * 512);
    }

    #[test]
    fn zero_matrix_statistics() {
        let st = raw_statistics(&ComplexMatrix::zeros(4, 4).unwrap());
        assert_eq!(st.real.variance, 0.0);
        assert_eq!(st.real.excess_kurtosis, 0.0);
        assert_eq!(st.imag.mean, 0.0);
    }

    #[test]
    fn truth_rates_and_support() {
        let cfg = small_config();
        let s = point(64.0, &cfg);
        let t = ground_truth(&cfg, &[s]).unwrap();
        assert_eq!(t.chirp_length, 32);
        assert!((t.range_rate - 0.15 / 64.0).abs() < 1e-15);
        let want = -50.0f64.powi(2) / (0.03 * 900.0 * 250.0 * 250.0);
        assert!((t.azimuth_rate / want - 1.0).abs() < 1e-12);
        assert_eq!(t.doppler_centroid, 0.0);
        assert!(t.azimuth_support.contains(64));
        assert_eq!(t.rcm_curve[64], 0.0);
        assert!(t.rcm_curve[20] > 0.0);
    }

    #[test]
    fn random_scene_fits_grid() {
        let mut cfg = small_config();
        cfg.samples_per_pulse = 512;
        let scene = random_scene(&cfg, 40, 1.0, 9).unwrap();
        assert!(simulate_raw(&cfg, &scene).is_ok());
    }
}
