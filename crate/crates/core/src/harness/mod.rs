//! Operational surface: instance configs, versioned JSON files, the protocol
//! driver and the `securesum` command line.
//!
//! Exit codes: 0 ok/secure, 1 usage, 2 infeasible or insecure, 3 resource limit,
//! 4 no certified precoding found, 5 invalid input file.

pub mod cli;
mod config;
mod files;
mod transcript;

pub use config::{InstanceConfig, SchemeSpec};
pub use files::{AuditFile, FixtureFile, FixtureGroup, InputsFile, SchemeFile};
pub use transcript::{run_protocol, KeysRecord, RunSummary, Transcript};

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::AuditError;
use crate::schemes::SchemeError;

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "SECURE_SUM_SEED";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Insecure(String),
    #[error("{0}")]
    ResourceLimit(String),
    #[error(transparent)]
    CertificateNotFound(SchemeError),
    #[error("{path}: {message}")]
    InvalidFile { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Infeasible(_) | HarnessError::Insecure(_) => 2,
            HarnessError::ResourceLimit(_) => 3,
            HarnessError::CertificateNotFound(_) => 4,
            HarnessError::InvalidFile { .. } | HarnessError::Io { .. } => 5,
        }
    }

    fn invalid(path: &Path, message: impl ToString) -> Self {
        HarnessError::InvalidFile { path: path.to_path_buf(), message: message.to_string() }
    }
}

impl From<SchemeError> for HarnessError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::Infeasible { .. } => HarnessError::Infeasible(e.to_string()),
            SchemeError::CertificateNotFound { .. } => HarnessError::CertificateNotFound(e),
            SchemeError::Audit(AuditError::StateSpaceTooLarge { .. }) => HarnessError::ResourceLimit(e.to_string()),
            other => HarnessError::Usage(other.to_string()),
        }
    }
}

/// `"schema": 1` marker carried by every file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Schema;

impl TryFrom<u32> for Schema {
    type Error = String;

    fn try_from(v: u32) -> Result<Self, String> {
        if v == SCHEMA_VERSION {
            Ok(Schema)
        } else {
            Err(format!("unsupported schema version {v}, expected {SCHEMA_VERSION}"))
        }
    }
}

impl From<Schema> for u32 {
    fn from(_: Schema) -> u32 {
        SCHEMA_VERSION
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::invalid(path, e))
}

/// Pretty JSON with a trailing newline; identical values give identical bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    fs::write(path, to_json(value)).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// `--seed` wins over `SECURE_SUM_SEED`, which wins over a seed from a file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: Option<u64>) -> Result<Option<u64>, HarnessError> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Some(v) = env {
        let seed = v.trim().parse().map_err(|_| HarnessError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        return Ok(Some(seed));
    }
    Ok(file)
}

pub fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), Some(3)).unwrap(), Some(1));
        assert_eq!(resolve_seed(None, Some(" 2 "), Some(3)).unwrap(), Some(2));
        assert_eq!(resolve_seed(None, None, Some(3)).unwrap(), Some(3));
        assert_eq!(resolve_seed(None, None, None).unwrap(), None);
        assert!(resolve_seed(None, Some("x"), None).is_err());
    }

    #[test]
    fn schema_marker() {
        assert_eq!(serde_json::to_string(&Schema).unwrap(), "1");
        assert!(serde_json::from_str::<Schema>("1").is_ok());
        assert!(serde_json::from_str::<Schema>("2").is_err());
    }
}
