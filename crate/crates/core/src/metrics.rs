//! Evaluation metrics.
//!
//! Predictions are per-class score vectors; truths are multi-hot rows.
//! Precision and recall are micro-averaged over (example, class) cells.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::taxonomy::Mode;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("{preds} predictions but {truths} truths")]
    LengthMismatch { preds: usize, truths: usize },
    #[error("row {row}: prediction has {got} classes, truth has {expected}")]
    WidthMismatch { row: usize, expected: usize, got: usize },
    #[error("no examples to evaluate")]
    Empty,
}

fn check<P: AsRef<[f64]>, T: AsRef<[u8]>>(preds: &[P], truths: &[T]) -> Result<(), MetricsError> {
    if preds.len() != truths.len() {
        return Err(MetricsError::LengthMismatch { preds: preds.len(), truths: truths.len() });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    for (row, (p, t)) in preds.iter().zip(truths).enumerate() {
        let (p, t) = (p.as_ref(), t.as_ref());
        if p.len() != t.len() {
            return Err(MetricsError::WidthMismatch { row, expected: t.len(), got: p.len() });
        }
    }
    Ok(())
}

/// Index of the largest score; ties resolve to the lowest index.
pub fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Fraction of examples whose top-scoring class is a relevant class.
pub fn categorical_accuracy<P: AsRef<[f64]>, T: AsRef<[u8]>>(preds: &[P], truths: &[T]) -> Result<f64, MetricsError> {
    check(preds, truths)?;
    let hits = preds.iter().zip(truths).filter(|(p, t)| argmax(p.as_ref()).is_some_and(|i| t.as_ref()[i] != 0)).count();
    Ok(hits as f64 / preds.len() as f64)
}

fn threshold_row(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

/// Predicted 0/1 rows: argmax one-hot in single mode, thresholded in multi mode.
pub fn predicted_sets<P: AsRef<[f64]>>(preds: &[P], mode: Mode, threshold: f64) -> Vec<Vec<u8>> {
    preds
        .iter()
        .map(|p| {
            let p = p.as_ref();
            match mode {
                Mode::Multi => threshold_row(p, threshold),
                Mode::Single => {
                    let mut row = vec![0u8; p.len()];
                    if let Some(i) = argmax(p) {
                        row[i] = 1;
                    }
                    row
                }
            }
        })
        .collect()
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CellCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl CellCounts {
    pub fn from_sets<T: AsRef<[u8]>>(predicted: &[Vec<u8>], truths: &[T]) -> Self {
        let mut c = CellCounts::default();
        for (p, t) in predicted.iter().zip(truths) {
            for (&p, &t) in p.iter().zip(t.as_ref()) {
                match (p != 0, t != 0) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                    (false, false) => c.tn += 1,
                }
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Mean agreement of thresholded predictions with truth over all cells.
pub fn binary_accuracy<P: AsRef<[f64]>, T: AsRef<[u8]>>(
    preds: &[P],
    truths: &[T],
    threshold: f64,
) -> Result<f64, MetricsError> {
    check(preds, truths)?;
    let c = CellCounts::from_sets(&predicted_sets(preds, Mode::Multi, threshold), truths);
    Ok(cell_accuracy(&c))
}

fn cell_accuracy(c: &CellCounts) -> f64 {
    if c.total() == 0 {
        0.0
    } else {
        (c.tp + c.tn) as f64 / c.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    /// No positive predictions: precision was 0/0 and reported as 0.
    pub precision_undefined: bool,
    /// No positive truths: recall was 0/0 and reported as 0.
    pub recall_undefined: bool,
}

impl PrecisionRecall {
    pub fn from_counts(c: &CellCounts) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) };
        let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
        let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
        PrecisionRecall { precision, recall, precision_undefined, recall_undefined }
    }
}

pub fn precision_recall<P: AsRef<[f64]>, T: AsRef<[u8]>>(
    preds: &[P],
    truths: &[T],
    threshold: f64,
) -> Result<PrecisionRecall, MetricsError> {
    check(preds, truths)?;
    let c = CellCounts::from_sets(&predicted_sets(preds, Mode::Multi, threshold), truths);
    Ok(PrecisionRecall::from_counts(&c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub categorical_accuracy: f64,
    pub binary_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub n_examples: usize,
    pub threshold: f64,
    pub averaging: String,
}

/// All metrics for one model. Single mode scores the argmax class as the
/// only prediction; multi mode thresholds each class.
pub fn evaluate<P: AsRef<[f64]>, T: AsRef<[u8]>>(
    preds: &[P],
    truths: &[T],
    mode: Mode,
    threshold: f64,
) -> Result<EvalReport, MetricsError> {
    let categorical_accuracy = categorical_accuracy(preds, truths)?;
    let sets = predicted_sets(preds, mode, threshold);
    let cells = CellCounts::from_sets(&sets, truths);
    let pr = PrecisionRecall::from_counts(&cells);
    Ok(EvalReport {
        categorical_accuracy,
        binary_accuracy: cell_accuracy(&cells),
        precision: pr.precision,
        recall: pr.recall,
        precision_undefined: pr.precision_undefined,
        recall_undefined: pr.recall_undefined,
        n_examples: preds.len(),
        threshold,
        averaging: "micro".to_string(),
    })
}

/// One line of the per-model results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model_id: String,
    pub level: u8,
    pub architecture: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

pub fn write_results_csv<W: Write>(out: &mut W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "# precision and recall are micro-averaged over (example, class) cells")?;
    writeln!(out, "model_id,level,architecture,accuracy,precision,recall")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.model_id, r.level, r.architecture, r.accuracy, r.precision, r.recall)?;
    }
    Ok(())
}
