use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] sciclf::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    /// 0 success, 1 usage or configuration, 2 bad input data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Core(e) if e.is_data_error() => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Internal(_) => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { context: path.display().to_string(), source }
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

via_core!(
    sciclf::taxonomy::TaxonomyError,
    sciclf::ingest::IngestError,
    sciclf::ingest::store::StoreError,
    sciclf::weaklabel::WeakLabelError,
    sciclf::clf::ClfError,
    sciclf::metrics::MetricsError,
    sciclf::analytics::AnalyticsError
);
