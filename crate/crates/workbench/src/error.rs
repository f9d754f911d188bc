use std::path::PathBuf;

use serde_json::json;
use srm_core::Error as CoreError;
use thiserror::Error;

use crate::config::ConfigError;
use crate::sample_io::SampleFileError;

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    Table { path: PathBuf, message: String },
    #[error(transparent)]
    Domain(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Samples(#[from] SampleFileError),
}

impl WorkbenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        WorkbenchError::Io { path: path.into(), source }
    }

    /// 2 for configuration and input errors, 3 for infeasible targets, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            WorkbenchError::Config(_) | WorkbenchError::Table { .. } => 2,
            WorkbenchError::Domain(e) => match e {
                CoreError::InfeasibleBispectrum { .. }
                | CoreError::SingularPureSpectrum { .. }
                | CoreError::NotPsd { .. }
                | CoreError::NonHermitian { .. }
                | CoreError::SingularFactor { .. } => 3,
                _ => 2,
            },
            WorkbenchError::Io { .. } | WorkbenchError::Samples(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WorkbenchError::Config(_) => "config",
            WorkbenchError::Table { .. } => "input-table",
            WorkbenchError::Domain(e) => match e {
                CoreError::InfeasibleBispectrum { .. } => "infeasible-bispectrum",
                CoreError::SingularPureSpectrum { .. } => "singular-pure-spectrum",
                CoreError::NotPsd { .. } => "not-psd",
                CoreError::NonHermitian { .. } => "non-hermitian",
                CoreError::SingularFactor { .. } => "singular-factor",
                CoreError::CoefficientOverflow { .. } => "coefficient-overflow",
                CoreError::InvalidEnsemble(_) => "invalid-ensemble",
                CoreError::Unsupported(_) => "unsupported",
                CoreError::Dimension(_) => "dimension",
                CoreError::InvalidParameter(_) => "invalid-parameter",
            },
            WorkbenchError::Io { .. } => "io",
            WorkbenchError::Samples(_) => "sample-file",
        }
    }

    /// Machine-readable form written next to the run's outputs and to stderr.
    pub fn record(&self) -> serde_json::Value {
        let mut value = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let at = match self {
            WorkbenchError::Domain(
                CoreError::InfeasibleBispectrum { at, .. }
                | CoreError::SingularPureSpectrum { at }
                | CoreError::NotPsd { at, .. }
                | CoreError::NonHermitian { at, .. }
                | CoreError::SingularFactor { at, .. },
            ) => Some(at),
            _ => None,
        };
        if let Some(at) = at {
            value["channel"] = json!(at.channel);
            value["bin"] = json!(at.bin);
        }
        if let WorkbenchError::Domain(CoreError::InfeasibleBispectrum { deficit, .. }) = self {
            value["deficit"] = json!(deficit);
        }
        if let WorkbenchError::Config(ConfigError::Invalid(fields)) = self {
            value["fields"] = json!(fields.iter().map(|f| json!({"field": f.field, "message": f.message})).collect::<Vec<_>>());
        }
        value
    }
}

pub type Result<T, E = WorkbenchError> = std::result::Result<T, E>;
