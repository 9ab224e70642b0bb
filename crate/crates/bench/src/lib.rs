//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use bsar_core::{blind_estimate, io, simulate_raw, BlindEstimate, EstimateOptions, GroundTruth, RawDataMatrix, SimulationDocument};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load_config(name: &str) -> SimulationDocument {
    io::read_json(config_path(name)).expect("shipped config")
}

/// Default scene, its raw data, truth and blind estimate.
pub struct Fixture {
    pub doc: SimulationDocument,
    pub raw: RawDataMatrix,
    pub truth: GroundTruth,
    pub estimate: BlindEstimate,
}

impl Fixture {
    pub fn default_scene() -> Self {
        let doc = load_config("default.json");
        let (raw, truth) = simulate_raw(&doc.acquisition, &doc.scene).expect("simulate");
        let estimate = blind_estimate(&raw, &EstimateOptions::default()).expect("estimate");
        Self {
            doc,
            raw,
            truth,
            estimate,
        }
    }
}
