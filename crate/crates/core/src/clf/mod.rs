//! The modular classifier tree.
//!
//! Every taxonomy node with more than one child owns an independent
//! classifier over its children. The built-in model is [`LinearNode`], a
//! bag-of-words linear layer with a softmax (single-label) or sigmoid
//! (multi-label) head, trained with RMSProp. Any type implementing
//! [`Classifier`] can be plugged into a slot of the [`ClassifierTree`].

mod linear;
mod model_file;
mod tree;

pub use linear::{train_node, Gradient, LinearNode, RunEvent, RunRecord, PROB_CLAMP};
pub use model_file::{read_model, write_model, MODEL_MAGIC};
pub use tree::{
    node_dataset, plug_classifier, route_hierarchical, ClassifierTree, LabeledDoc, RoutedTriplet, Scope, TreeNode,
};

use serde::{Deserialize, Serialize};

use crate::ingest::OOV_ID;
use crate::metrics::argmax;
use crate::taxonomy::{Mode, TaxonomyError};

#[derive(Debug, thiserror::Error)]
pub enum ClfError {
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class count mismatch: expected {expected}, got {got}")]
    ClassCountMismatch { expected: usize, got: usize },
    #[error("label vector does not fit a {mode}-label model: {reason}")]
    ModeMismatch { mode: Mode, reason: String },
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize, loss: f64 },
    #[error("no trained classifier for scope {0}")]
    MissingNode(Scope),
    #[error("scope {0} has no children to route to")]
    NoChildren(Scope),
    #[error("invalid training configuration: {0}")]
    BadConfig(String),
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("model was trained with vocabulary {found:016x}, current vocabulary is {expected:016x}")]
    VocabHashMismatch { expected: u64, found: u64 },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ClfError {
    pub fn is_data_error(&self) -> bool {
        !matches!(self, ClfError::Io(_) | ClfError::NonFinite { .. })
    }
}

/// Sparse feature vector of fixed dimension, indices strictly increasing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVec {
    pub dim: usize,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn from_dense(x: &[f64]) -> Self {
        let mut v = SparseVec { dim: x.len(), ..Default::default() };
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                v.indices.push(i as u32);
                v.values.push(xi);
            }
        }
        v
    }

    /// Term-frequency counts over vocabulary ids `1..=dim`; id 0 is dropped.
    pub fn bag_of_words(ids: &[u32], dim: usize) -> Self {
        let mut sorted: Vec<u32> = ids.iter().copied().filter(|&id| id != OOV_ID && (id as usize) <= dim).collect();
        sorted.sort_unstable();
        let mut v = SparseVec { dim, ..Default::default() };
        for id in sorted {
            let idx = id - 1;
            if v.indices.last() == Some(&idx) {
                *v.values.last_mut().expect("values track indices") += 1.0;
            } else {
                v.indices.push(idx);
                v.values.push(1.0);
            }
        }
        v
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i as usize] = v;
        }
        out
    }

    pub fn dot(&self, row: &[f64]) -> f64 {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| row[i as usize] * v).sum()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

/// One training example: features and a multi-hot target over the node's classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: SparseVec,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// RMSProp moving-average decay.
    pub decay: f64,
    pub epsilon: f64,
    /// Share of matched papers held out for validation.
    pub validation_fraction: f64,
    /// Multi-label relevance cutoff.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 1024,
            epochs: 1,
            learning_rate: 0.001,
            decay: 0.9,
            epsilon: 1e-7,
            validation_fraction: 0.4,
            threshold: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClfError> {
        let bad = |msg: &str| Err(ClfError::BadConfig(msg.to_string()));
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold must lie strictly between 0 and 1");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be a finite non-negative number");
        }
        if !(0.0..1.0).contains(&self.decay) {
            return bad("decay must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        Ok(())
    }

    /// The configured batch size, or the largest power of two below the
    /// dataset size when the dataset is smaller than a batch.
    pub fn effective_batch_size(&self, n: usize) -> usize {
        if n >= self.batch_size || n <= 1 {
            return self.batch_size.min(n.max(1));
        }
        1usize << (usize::BITS - 1 - (n - 1).leading_zeros())
    }
}

/// The contract every node classifier fulfils.
pub trait Classifier: Send + Sync {
    fn mode(&self) -> Mode;
    fn num_classes(&self) -> usize;
    fn feature_dim(&self) -> usize;
    /// Class scores: a probability vector (single) or per-class relevances (multi).
    fn forward(&self, x: &SparseVec) -> Result<Vec<f64>, ClfError>;
    fn fit(&mut self, data: &[Example], config: &TrainConfig) -> Result<RunRecord, ClfError>;

    fn predict(&self, x: &SparseVec, threshold: f64) -> Result<Vec<usize>, ClfError> {
        Ok(predict_from_scores(&self.forward(x)?, self.mode(), threshold))
    }

    /// Access to the built-in model for serialization.
    fn as_linear(&self) -> Option<&LinearNode> {
        None
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Argmax (lowest index on ties) in single mode; every class at or above the
/// threshold in multi mode, possibly none.
pub fn predict_from_scores(scores: &[f64], mode: Mode, threshold: f64) -> Vec<usize> {
    match mode {
        Mode::Single => argmax(scores).into_iter().collect(),
        Mode::Multi => scores.iter().enumerate().filter(|(_, &s)| s >= threshold).map(|(i, _)| i).collect(),
    }
}
