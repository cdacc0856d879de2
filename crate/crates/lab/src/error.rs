use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] wkam_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("(L4) fails on {model} (face max of dL/du = {face_max:e}); the limit is not selected, see the `counterexample` experiment")]
    L4Required { model: String, face_max: f64 },
    #[error("report field {0} is not finite")]
    NonFinite(String),
    #[error("{0}")]
    Unsupported(String),
}
