use crate::analytics::AnalyticsError;
use crate::clf::ClfError;
use crate::ingest::store::StoreError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;
use crate::taxonomy::TaxonomyError;
use crate::weaklabel::WeakLabelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    WeakLabel(#[from] WeakLabelError),
    #[error(transparent)]
    Clf(#[from] ClfError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error stems from malformed or inconsistent input data,
    /// as opposed to an environment or internal failure.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Taxonomy(_) | Error::Ingest(_) | Error::WeakLabel(_) | Error::Metrics(_) | Error::Analytics(_) => {
                true
            }
            Error::Store(e) => matches!(e, StoreError::MissingKey { .. } | StoreError::Corrupt(_)),
            Error::Clf(e) => e.is_data_error(),
            Error::Io(_) => false,
        }
    }
}
