//! Pipeline orchestration over a shared run directory.
//!
//! `label` annotates papers and splits the corpus, `ingest` stages token
//! sequences, `train` fits node classifiers, `infer` routes every staged paper
//! through the tree and `analyze` builds citation matrices and scores.

pub mod config;
pub mod run;
pub mod stages;
pub mod synth;

mod error;

pub use config::{Overrides, RunConfig};
pub use error::CliError;
pub use stages::{cmd_analyze, cmd_infer, cmd_ingest, cmd_label, cmd_train, Selection};
