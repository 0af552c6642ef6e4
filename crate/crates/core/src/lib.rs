//! Hierarchical science classification and citation-based interfieldness analytics.
//!
//! The crate is organised along the pipeline:
//!
//! * [`taxonomy`] holds the discipline / field / subfield tree and label encodings.
//! * [`ingest`] decodes inverted-index abstracts, builds the vocabulary and stages
//!   token sequences in per-discipline key-value stores ([`ingest::store`]).
//! * [`weaklabel`] annotates papers by matching field-of-study tags against
//!   subfield descriptors and splits the corpus.
//! * [`clf`] is the modular three-level classifier tree.
//! * [`metrics`] implements categorical / binary accuracy and precision / recall.
//! * [`analytics`] builds citation matrices and the interfieldness scores.

pub mod analytics;
pub mod clf;
pub mod ingest;
pub mod metrics;
pub mod taxonomy;
pub mod weaklabel;

mod error;

pub use error::Error;
pub use taxonomy::{Level, Mode, NodeId, Taxonomy};

pub type Result<T, E = Error> = std::result::Result<T, E>;
