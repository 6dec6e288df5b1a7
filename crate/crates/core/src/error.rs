//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of samplers, metrics, estimators and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("model outside supported range: {0}")]
    ModelOutsideRange(String),
    #[error("divergent moment: {0}")]
    DivergentMoment(String),
    #[error("infinite intensity: {0}")]
    InfiniteIntensity(String),
    #[error("invalid block scheme: {0}")]
    Scheme(String),
    #[error("unknown experiment kind `{0}`")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("output not writable: {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
