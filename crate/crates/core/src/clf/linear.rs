//! Bag-of-words linear node classifier and its RMSProp training loop.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sigmoid, softmax, Classifier, ClfError, Example, Scope, SparseVec, TrainConfig};
use crate::metrics::argmax;
use crate::taxonomy::Mode;

/// Lower bound applied to probabilities before taking logs.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearNode {
    pub scope: Scope,
    pub mode: Mode,
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Row-major `num_classes x feature_dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Mean-loss gradient over a batch, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearNode {
    pub fn new(scope: Scope, mode: Mode, num_classes: usize, feature_dim: usize) -> Self {
        LinearNode {
            scope,
            mode,
            num_classes,
            feature_dim,
            weights: vec![0.0; num_classes * feature_dim],
            bias: vec![0.0; num_classes],
        }
    }

    fn check_x(&self, x: &SparseVec) -> Result<(), ClfError> {
        if x.dim != self.feature_dim {
            return Err(ClfError::DimensionMismatch { expected: self.feature_dim, got: x.dim });
        }
        Ok(())
    }

    fn check_y(&self, y: &[f64]) -> Result<(), ClfError> {
        if y.len() != self.num_classes {
            return Err(ClfError::ClassCountMismatch { expected: self.num_classes, got: y.len() });
        }
        let mismatch = |reason: &str| ClfError::ModeMismatch { mode: self.mode, reason: reason.to_string() };
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(mismatch("targets must be 0 or 1"));
        }
        if self.mode == Mode::Single && y.iter().filter(|&&v| v == 1.0).count() != 1 {
            return Err(mismatch("single-label targets must be one-hot"));
        }
        Ok(())
    }

    pub fn logits(&self, x: &SparseVec) -> Result<Vec<f64>, ClfError> {
        self.check_x(x)?;
        Ok((0..self.num_classes)
            .map(|c| self.bias[c] + x.dot(&self.weights[c * self.feature_dim..(c + 1) * self.feature_dim]))
            .collect())
    }

    fn activate(&self, z: &[f64]) -> Vec<f64> {
        match self.mode {
            Mode::Single => softmax(z),
            Mode::Multi => z.iter().map(|&v| sigmoid(v)).collect(),
        }
    }

    fn loss_of(&self, p: &[f64], y: &[f64]) -> f64 {
        match self.mode {
            Mode::Single => -p.iter().zip(y).map(|(&p, &y)| y * p.max(PROB_CLAMP).ln()).sum::<f64>(),
            Mode::Multi => -p
                .iter()
                .zip(y)
                .map(|(&p, &y)| y * p.max(PROB_CLAMP).ln() + (1.0 - y) * (1.0 - p).max(PROB_CLAMP).ln())
                .sum::<f64>(),
        }
    }

    /// Per-example loss: categorical cross-entropy (single) or binary
    /// cross-entropy summed over classes (multi).
    pub fn loss(&self, x: &SparseVec, y: &[f64]) -> Result<f64, ClfError> {
        self.check_y(y)?;
        let p = self.forward(x)?;
        Ok(self.loss_of(&p, y))
    }

    /// Mean loss over a batch.
    pub fn batch_loss(&self, batch: &[Example]) -> Result<f64, ClfError> {
        if batch.is_empty() {
            return Err(ClfError::EmptyDataset);
        }
        let losses: Vec<f64> = batch.par_iter().map(|e| self.loss(&e.x, &e.y)).collect::<Result<_, _>>()?;
        Ok(losses.iter().sum::<f64>() / batch.len() as f64)
    }

    /// Analytic gradient of [`LinearNode::batch_loss`], along with that loss.
    pub fn gradient(&self, batch: &[Example]) -> Result<(f64, Gradient), ClfError> {
        self.gradient_of(&batch.iter().collect::<Vec<_>>())
    }

    fn gradient_of(&self, batch: &[&Example]) -> Result<(f64, Gradient), ClfError> {
        if batch.is_empty() {
            return Err(ClfError::EmptyDataset);
        }
        // per-example work is parallel; the reduction below runs in input order
        let per: Vec<(f64, Vec<f64>)> = batch
            .par_iter()
            .map(|e| {
                self.check_y(&e.y)?;
                let p = self.forward(&e.x)?;
                let loss = self.loss_of(&p, &e.y);
                Ok((loss, p.iter().zip(&e.y).map(|(p, y)| p - y).collect()))
            })
            .collect::<Result<_, ClfError>>()?;
        let scale = 1.0 / batch.len() as f64;
        let mut grad = Gradient { weights: vec![0.0; self.weights.len()], bias: vec![0.0; self.num_classes] };
        let mut loss = 0.0;
        for (e, (l, dz)) in batch.iter().zip(&per) {
            loss += l;
            for (c, &d) in dz.iter().enumerate() {
                let d = d * scale;
                grad.bias[c] += d;
                let row = &mut grad.weights[c * self.feature_dim..(c + 1) * self.feature_dim];
                for (&i, &v) in e.x.indices.iter().zip(&e.x.values) {
                    row[i as usize] += d * v;
                }
            }
        }
        Ok((loss * scale, grad))
    }
}

impl Classifier for LinearNode {
    fn mode(&self) -> Mode {
        self.mode
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    fn forward(&self, x: &SparseVec) -> Result<Vec<f64>, ClfError> {
        Ok(self.activate(&self.logits(x)?))
    }

    fn fit(&mut self, data: &[Example], config: &TrainConfig) -> Result<RunRecord, ClfError> {
        let (trained, record) = train_node(self.clone(), data, config)?;
        *self = trained;
        Ok(record)
    }

    fn as_linear(&self) -> Option<&LinearNode> {
        Some(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RunEvent {
    Config {
        scope: String,
        mode: Mode,
        num_classes: usize,
        feature_dim: usize,
        n_examples: usize,
        batch_size: usize,
        epochs: usize,
        learning_rate: f64,
        decay: f64,
        epsilon: f64,
        seed: u64,
    },
    Batch {
        epoch: usize,
        batch: usize,
        size: usize,
        loss: f64,
    },
    Epoch {
        epoch: usize,
        mean_loss: f64,
    },
    Final {
        train_loss: f64,
        train_accuracy: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub events: Vec<RunEvent>,
}

impl RunRecord {
    pub fn write_ndjson<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut *out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits utf-8")
    }

    pub fn final_event(&self) -> Option<(f64, f64)> {
        self.events.iter().rev().find_map(|e| match e {
            RunEvent::Final { train_loss, train_accuracy } => Some((*train_loss, *train_accuracy)),
            _ => None,
        })
    }
}

fn rmsprop_step(params: &mut [f64], cache: &mut [f64], grad: &[f64], config: &TrainConfig) {
    for ((p, c), &g) in params.iter_mut().zip(cache.iter_mut()).zip(grad) {
        *c = config.decay * *c + (1.0 - config.decay) * g * g;
        *p -= config.learning_rate * g / (c.sqrt() + config.epsilon);
    }
}

/// Train a node with RMSProp on seeded shuffles of `data`.
pub fn train_node(
    mut node: LinearNode,
    data: &[Example],
    config: &TrainConfig,
) -> Result<(LinearNode, RunRecord), ClfError> {
    config.validate()?;
    if data.is_empty() {
        return Err(ClfError::EmptyDataset);
    }
    for e in data {
        node.check_x(&e.x)?;
        node.check_y(&e.y)?;
    }
    let batch_size = config.effective_batch_size(data.len());
    let mut record = RunRecord::default();
    record.events.push(RunEvent::Config {
        scope: node.scope.to_string(),
        mode: node.mode,
        num_classes: node.num_classes,
        feature_dim: node.feature_dim,
        n_examples: data.len(),
        batch_size,
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        decay: config.decay,
        epsilon: config.epsilon,
        seed: config.seed,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache_w = vec![0.0; node.weights.len()];
    let mut cache_b = vec![0.0; node.bias.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, idx) in order.chunks(batch_size).enumerate() {
            let batch: Vec<&Example> = idx.iter().map(|&i| &data[i]).collect();
            let (loss, grad) = node.gradient_of(&batch)?;
            if !loss.is_finite() {
                return Err(ClfError::NonFinite { epoch, batch: b, loss });
            }
            rmsprop_step(&mut node.weights, &mut cache_w, &grad.weights, config);
            rmsprop_step(&mut node.bias, &mut cache_b, &grad.bias, config);
            total += loss * batch.len() as f64;
            record.events.push(RunEvent::Batch { epoch, batch: b, size: batch.len(), loss });
        }
        record.events.push(RunEvent::Epoch { epoch, mean_loss: total / data.len() as f64 });
    }

    let train_loss = node.batch_loss(data)?;
    if !train_loss.is_finite() {
        return Err(ClfError::NonFinite { epoch: config.epochs, batch: 0, loss: train_loss });
    }
    let preds: Vec<Vec<f64>> = data.par_iter().map(|e| node.forward(&e.x)).collect::<Result<_, _>>()?;
    let hits = preds.iter().zip(data).filter(|(p, e)| argmax(p).is_some_and(|i| e.y[i] == 1.0)).count();
    record.events.push(RunEvent::Final { train_loss, train_accuracy: hits as f64 / data.len() as f64 });
    Ok((node, record))
}
