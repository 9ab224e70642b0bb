//! Blind focusing of stripmap SAR raw data.
//!
//! The dominant singular triplet of the raw matrix carries the azimuth chirp
//! (left vector) and the conjugate range chirp (right vector). Fitting
//! quadratic phase laws to both yields reference functions for a standard
//! range-Doppler processor without any acquisition metadata. A raw-data
//! simulator supplies ground truth for validation.
//!
//! Matrices are pulses (azimuth) × samples (range) throughout.

pub mod chirp;
pub mod decompose;
pub mod dft;
pub mod error;
pub mod estimate;
pub mod focus;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod phase;
mod polyfit;
pub mod quality;
pub mod simulate;

pub use chirp::{synth_chirp, ChirpModel, Interval};
pub use decompose::{gibbs_rotation_check, leading_triplets, singular_spectrum, Spectrum, SvdOptions, TruncatedSvd};
pub use dft::dft;
pub use error::{Error, Result, Stage};
pub use estimate::{blind_estimate, build_references, BlindEstimate, EstimateOptions};
pub use focus::{focus_oracle, focus_pipeline, focus_with, FocusParameters, FocusedImage, Provenance, RcmModel, Reference};
pub use io::{read_matrix, write_matrix, EstimateDocument};
pub use matrix::{ComplexMatrix, ComplexVector, RawDataMatrix};
pub use num_complex::Complex64;
pub use phase::{instantaneous_frequency, unwrap_phase};
pub use quality::{analyze_point_target, compare_images, Comparison, PointTargetReport};
pub use simulate::{raw_statistics, simulate_raw, AcquisitionConfig, GroundTruth, Scatterer, SimulationDocument};
