//! Data ingestion and the command line front end.

pub mod cli;
pub mod curve;
pub mod lmfdb;
pub mod schema;

use std::path::Path;

use thiserror::Error;

use crate::characters::CharacterError;
use crate::field_arith::FieldError;
use crate::formal_series::SeriesError;
use crate::sato_tate::StatsError;
use crate::sign_pipeline::PipelineError;

pub use curve::{ap_oracle, series_from_curve, series_from_curve_over, ApTable, CurveSpec};
pub use lmfdb::{Cache, HttpTransport, LmfdbClient, Normalization, Transport};
pub use schema::{load_fixture, save_fixture, EigenFile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("curve {label} has bad reduction at {p}")]
    BadReduction { label: String, p: u64 },
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse { source_name: String, line: usize, column: usize, message: String },
    #[error("network: {0}")]
    Network(String),
    #[error("invalid data: {0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| IoError::Io(e.error))?;
    Ok(())
}
