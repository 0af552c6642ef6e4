//! Citation matrices between taxonomy nodes and the interfieldness scores
//! computed from them.
//!
//! A citation edge between two labeled papers expands into the Cartesian
//! product of their label sets at the chosen level. Counting those tuples
//! gives the input matrix `I0` (rows cite columns); its transpose is the
//! output matrix `O0`.

mod io;
mod matrix;
mod scores;

pub use io::{
    read_citations, write_coordinates, write_dense_csv, write_discipline_summary_csv, write_field_scores_csv,
    write_highlights_csv, write_interfield_csv, write_scatter_csv, write_scores_csv, DEFAULT_HIGHLIGHT,
};
pub use matrix::{
    net_output, row_normalize, strip_blocks, transpose_to_output, truncate, Block, Matrix, Normalized, Stripped,
};
pub use scores::{
    intrafield_stats, score_table, sigma_across, sigma_within, summarize, AcrossScores, Averaging, DisciplineScores,
    DisciplineSummary, FieldInterfield, FieldScores, IntrafieldStats, ScatterPoint, ScoreTable, Summary, WithinScores,
};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::taxonomy::{Level, NodeId, Taxonomy};
use crate::weaklabel::{AnnotatedPaper, Triplet};

/// Default clipping value for normalized heatmap grids.
pub const DEFAULT_TRUNCATE: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("citation matrices are built at discipline or field level, not {0:?}")]
    BadLevel(Level),
    #[error("label {0} is not a node of the matrix level")]
    UnknownLabel(NodeId),
    #[error("shape mismatch: expected order {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("block index missing or does not tile the matrix")]
    MissingBlocks,
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One expanded citation between two labeled papers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CitationTuple {
    pub citing_paper: u64,
    pub cited_paper: u64,
    pub citing_label: NodeId,
    pub cited_label: NodeId,
}

/// Cartesian product of the two label sets; empty when either set is empty.
pub fn expand_pairs(citing: &BTreeSet<NodeId>, cited: &BTreeSet<NodeId>) -> BTreeSet<(NodeId, NodeId)> {
    citing.iter().flat_map(|&a| cited.iter().map(move |&b| (a, b))).collect()
}

/// Counters collected while turning edges into tuples.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct TupleStats {
    pub input_edges: u64,
    pub duplicate_edges: u64,
    pub self_citations: u64,
    pub unlabeled_edges: u64,
    /// Tuples the input would produce without edge deduplication.
    pub raw_tuples: u64,
    pub tuples: u64,
}

/// Each paper's label set at `level`, from annotations or predictions.
pub fn labels_at_level(
    papers: &[AnnotatedPaper],
    level: Level,
) -> Result<BTreeMap<u64, BTreeSet<NodeId>>, AnalyticsError> {
    let pick: fn(&Triplet) -> NodeId = match level {
        Level::Discipline => |t: &Triplet| t.discipline,
        Level::Field => |t: &Triplet| t.field,
        Level::Subfield => return Err(AnalyticsError::BadLevel(level)),
    };
    let mut out: BTreeMap<u64, BTreeSet<NodeId>> = BTreeMap::new();
    for p in papers {
        out.entry(p.paper_id).or_default().extend(p.triplets.iter().map(pick));
    }
    Ok(out)
}

/// Expand citation edges into label tuples. Duplicate edges are counted once,
/// self-citations are dropped, and edges touching an unlabeled paper are
/// skipped.
pub fn build_tuples(
    edges: &[(u64, u64)],
    labels: &BTreeMap<u64, BTreeSet<NodeId>>,
) -> (Vec<CitationTuple>, TupleStats) {
    let mut stats = TupleStats { input_edges: edges.len() as u64, ..Default::default() };
    let product = |a: u64, b: u64| -> Option<u64> {
        let (la, lb) = (labels.get(&a)?, labels.get(&b)?);
        let n = (la.len() * lb.len()) as u64;
        (n > 0).then_some(n)
    };
    let mut unique = BTreeSet::new();
    for &(a, b) in edges {
        if a == b {
            stats.self_citations += 1;
            continue;
        }
        match product(a, b) {
            Some(n) => stats.raw_tuples += n,
            None => {
                stats.unlabeled_edges += 1;
                continue;
            }
        }
        if !unique.insert((a, b)) {
            stats.duplicate_edges += 1;
        }
    }
    let unique: Vec<(u64, u64)> = unique.into_iter().collect();
    let tuples: Vec<CitationTuple> = unique
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            expand_pairs(&labels[&a], &labels[&b]).into_iter().map(move |(la, lb)| CitationTuple {
                citing_paper: a,
                cited_paper: b,
                citing_label: la,
                cited_label: lb,
            })
        })
        .collect();
    stats.tuples = tuples.len() as u64;
    (tuples, stats)
}

/// Citation counts between nodes of one level, rows ordered by discipline
/// coding then field coding.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationMatrix {
    pub level: Level,
    pub labels: Vec<NodeId>,
    /// Each discipline's span of rows; one row per discipline at discipline level.
    pub blocks: Vec<Block>,
    pub counts: Matrix<u64>,
    index: BTreeMap<NodeId, usize>,
}

impl CitationMatrix {
    pub fn empty(tax: &Taxonomy, level: Level) -> Result<Self, AnalyticsError> {
        let labels = match level {
            Level::Discipline => tax.disciplines_by_coding(),
            Level::Field => tax.fields_by_coding(),
            Level::Subfield => return Err(AnalyticsError::BadLevel(level)),
        };
        let mut blocks: Vec<Block> = Vec::new();
        for (i, &id) in labels.iter().enumerate() {
            let d = tax.discipline_of(id).unwrap_or(id);
            match blocks.last_mut() {
                Some(b) if b.discipline == d => b.end = i + 1,
                _ => blocks.push(Block { discipline: d, start: i, end: i + 1 }),
            }
        }
        let index = labels.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Ok(CitationMatrix { level, counts: Matrix::zeros(labels.len()), labels, blocks, index })
    }

    pub fn index_of(&self, label: NodeId) -> Option<usize> {
        self.index.get(&label).copied()
    }

    pub fn block_of(&self, discipline: NodeId) -> Option<Block> {
        self.blocks.iter().copied().find(|b| b.discipline == discipline)
    }

    /// The diagonal block of one discipline.
    pub fn block_counts(&self, block: Block) -> Matrix<u64> {
        self.counts.submatrix(block.start, block.end)
    }

    pub fn output(&self) -> Matrix<u64> {
        transpose_to_output(&self.counts)
    }
}

/// Count tuples into `I0`. Rows are filled independently in parallel, so the
/// result does not depend on scheduling.
pub fn aggregate(tax: &Taxonomy, level: Level, tuples: &[CitationTuple]) -> Result<CitationMatrix, AnalyticsError> {
    let mut m = CitationMatrix::empty(tax, level)?;
    let n = m.labels.len();
    let mut by_row: Vec<Vec<u32>> = vec![Vec::new(); n];
    for t in tuples {
        let r = m.index_of(t.citing_label).ok_or(AnalyticsError::UnknownLabel(t.citing_label))?;
        let c = m.index_of(t.cited_label).ok_or(AnalyticsError::UnknownLabel(t.cited_label))?;
        by_row[r].push(c as u32);
    }
    if n > 0 {
        m.counts.as_mut_slice().par_chunks_mut(n).zip(by_row.par_iter()).for_each(|(row, cols)| {
            for &c in cols {
                row[c as usize] += 1;
            }
        });
    }
    Ok(m)
}
