use std::fmt;

use crate::decompose::TruncatedSvd;
use crate::chirp::ChirpModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Processing stage, used to tag errors propagated out of the focusing chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    RangeCompression,
    RcmTracking,
    Rcmc,
    AzimuthCompression,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::RangeCompression => "range-compression",
            Stage::RcmTracking => "rcm-tracking",
            Stage::Rcmc => "rcmc",
            Stage::AzimuthCompression => "azimuth-compression",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("unsuitable scene: {0}")]
    UnsuitableScene(String),

    #[error("no convergence after {iterations} iterations (last relative change {last_change:.3e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        last: Box<TruncatedSvd>,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate phase fit: {reason}")]
    DegenerateFit {
        reason: String,
        /// Best-effort model; its rate is zero when the phase carries no curvature.
        model: Option<Box<ChirpModel>>,
    },

    #[error("no signal: {0}")]
    NoSignal(String),

    #[error("rcm tracking failed: {0}")]
    Tracking(String),

    #[error("implausible migration of {shift:.2} samples (limit {limit:.2})")]
    ImplausibleMigration { shift: f64, limit: f64 },

    #[error("no point target: {0}")]
    NoTarget(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// Short machine-readable category of the innermost error.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::Parameter(_) => "parameter-error",
            Error::Configuration(_) => "configuration-error",
            Error::Format { .. } => "format-error",
            Error::UnsuitableScene(_) => "unsuitable-scene",
            Error::Convergence { .. } => "convergence-error",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::DegenerateFit { .. } => "degenerate-fit",
            Error::NoSignal(_) => "no-signal",
            Error::Tracking(_) => "tracking-error",
            Error::ImplausibleMigration { .. } => "implausible-migration",
            Error::NoTarget(_) => "no-target",
            Error::Io(_) => "io-error",
            Error::Json(_) => "json-error",
            Error::Stage { .. } => unreachable!("root is never a stage tag"),
        }
    }

    /// The innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
