//! Interfieldness and interdisciplinarity scores, per field and per discipline.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::matrix::{row_normalize, strip_blocks, Block, Matrix};
use super::{AnalyticsError, CitationMatrix};
use crate::taxonomy::{Level, NodeId, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntrafieldStats {
    pub k_in: Vec<u64>,
    pub k_out: Vec<u64>,
    pub kappa_total: u64,
    pub kappa_intra: u64,
    pub kappa_inter: u64,
}

/// Degree and citation totals of one discipline's field block.
pub fn intrafield_stats(block: &Matrix<u64>) -> IntrafieldStats {
    let k_in = block.row_sums();
    let k_out = block.transpose().row_sums();
    let kappa_total = block.total();
    let kappa_intra = block.trace();
    IntrafieldStats { k_in, k_out, kappa_total, kappa_intra, kappa_inter: kappa_total - kappa_intra }
}

/// Per-field scores inside one discipline. `None` marks a field with no
/// citations at all, where the scores are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct WithinScores {
    pub intra: Vec<Option<f64>>,
    pub unbal: Vec<Option<f64>>,
    pub k_total: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcrossScores {
    pub inter: Vec<Option<f64>>,
    pub unbal_not_d: Vec<Option<f64>>,
    pub k_total: Vec<u64>,
}

/// Overlap and imbalance of each field's in- and out-citations within a block.
pub fn sigma_within(block: &Matrix<u64>) -> WithinScores {
    let o = block.transpose();
    let n = block.n();
    let mut out =
        WithinScores { intra: Vec::with_capacity(n), unbal: Vec::with_capacity(n), k_total: Vec::with_capacity(n) };
    for f in 0..n {
        let (i_row, o_row) = (block.row(f), o.row(f));
        let k_total = i_row.iter().zip(o_row).map(|(a, b)| a + b).sum::<u64>() - i_row[f];
        let net: i64 = i_row.iter().zip(o_row).map(|(&a, &b)| a as i64 - b as i64).sum();
        let abs: u64 = i_row.iter().zip(o_row).map(|(&a, &b)| a.abs_diff(b)).sum();
        out.k_total.push(k_total);
        if k_total == 0 {
            out.intra.push(None);
            out.unbal.push(None);
        } else {
            let k = k_total as f64;
            out.intra.push(Some(1.0 - abs as f64 / k));
            out.unbal.push(Some(net as f64 / k));
        }
    }
    out
}

/// The same scores restricted to citations that cross discipline blocks,
/// normalized by each field's total citations over the whole matrix.
pub fn sigma_across(i0: &Matrix<u64>, o0: &Matrix<u64>, blocks: &[Block]) -> Result<AcrossScores, AnalyticsError> {
    i0.check_same_shape(o0)?;
    let stripped = strip_blocks(i0, blocks)?;
    let (i_star, o_star) = (&stripped.i_star, &stripped.o_star);
    let n = i0.n();
    let mut out = AcrossScores {
        inter: Vec::with_capacity(n),
        unbal_not_d: Vec::with_capacity(n),
        k_total: Vec::with_capacity(n),
    };
    for f in 0..n {
        let k_total = i0.row(f).iter().zip(o0.row(f)).map(|(a, b)| a + b).sum::<u64>() - o0[(f, f)];
        let (i_row, o_row) = (i_star.row(f), o_star.row(f));
        let net: i64 = i_row.iter().zip(o_row).map(|(&a, &b)| a as i64 - b as i64).sum();
        let abs: u64 = i_row.iter().zip(o_row).map(|(&a, &b)| a.abs_diff(b)).sum();
        out.k_total.push(k_total);
        if k_total == 0 {
            out.inter.push(None);
            out.unbal_not_d.push(None);
        } else {
            let k = k_total as f64;
            out.inter.push(Some(1.0 - abs as f64 / k));
            out.unbal_not_d.push(Some(net as f64 / k));
        }
    }
    Ok(out)
}

/// How field scores are pooled into a discipline score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Simple,
    /// Weighted by each field's total citations.
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldScores {
    pub field: NodeId,
    pub discipline: NodeId,
    pub intra: Option<f64>,
    pub unbal: Option<f64>,
    pub inter: Option<f64>,
    pub unbal_not_d: Option<f64>,
    pub k_within: u64,
    pub k_across: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisciplineScores {
    pub discipline: NodeId,
    pub intra: Option<f64>,
    pub unbal: Option<f64>,
    pub inter: Option<f64>,
    pub unbal_not_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub averaging: Averaging,
    pub disciplines: Vec<DisciplineScores>,
    pub fields: Vec<FieldScores>,
    /// Field scores left undefined by a zero citation total.
    pub missing: usize,
    /// Imbalance scores sitting exactly at -1 or 1.
    pub boundary_hits: usize,
}

fn average(values: impl Iterator<Item = (Option<f64>, u64)>, averaging: Averaging) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (v, w) in values {
        let Some(v) = v else { continue };
        let w = match averaging {
            Averaging::Simple => 1.0,
            Averaging::Weighted => w as f64,
        };
        num += w * v;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// All four scores for every field of a field-level matrix, pooled per discipline.
pub fn score_table(m: &CitationMatrix, averaging: Averaging) -> Result<ScoreTable, AnalyticsError> {
    if m.level != Level::Field {
        return Err(AnalyticsError::BadLevel(m.level));
    }
    let across = sigma_across(&m.counts, &m.output(), &m.blocks)?;
    let mut table = ScoreTable { averaging, disciplines: Vec::new(), fields: Vec::new(), missing: 0, boundary_hits: 0 };
    for block in &m.blocks {
        let within = sigma_within(&m.block_counts(*block));
        let first = table.fields.len();
        for (j, r) in (block.start..block.end).enumerate() {
            table.fields.push(FieldScores {
                field: m.labels[r],
                discipline: block.discipline,
                intra: within.intra[j],
                unbal: within.unbal[j],
                inter: across.inter[r],
                unbal_not_d: across.unbal_not_d[r],
                k_within: within.k_total[j],
                k_across: across.k_total[r],
            });
        }
        let fields = &table.fields[first..];
        table.disciplines.push(DisciplineScores {
            discipline: block.discipline,
            intra: average(fields.iter().map(|f| (f.intra, f.k_within)), averaging),
            unbal: average(fields.iter().map(|f| (f.unbal, f.k_within)), averaging),
            inter: average(fields.iter().map(|f| (f.inter, f.k_across)), averaging),
            unbal_not_d: average(fields.iter().map(|f| (f.unbal_not_d, f.k_across)), averaging),
        });
    }
    for f in &table.fields {
        table.missing += [f.intra, f.unbal, f.inter, f.unbal_not_d].iter().filter(|v| v.is_none()).count();
        table.boundary_hits += [f.unbal, f.unbal_not_d].iter().filter(|v| v.is_some_and(|v| v.abs() == 1.0)).count();
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisciplineSummary {
    pub discipline: NodeId,
    pub papers: u64,
    pub fields: usize,
    pub papers_per_field: Option<f64>,
}

/// Off-diagonal row sums of the normalized within-discipline input and
/// output matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldInterfield {
    pub field: NodeId,
    pub discipline: NodeId,
    pub demand: f64,
    pub supply: f64,
}

/// Row sums of the normalized cross-discipline input (`x`) and output (`y`)
/// matrices. A flag marks rows that had no citations before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub label: NodeId,
    pub x: f64,
    pub y: f64,
    pub x_zero_row: bool,
    pub y_zero_row: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub disciplines: Vec<DisciplineSummary>,
    pub interfield: Vec<FieldInterfield>,
    pub field_scatter: Vec<ScatterPoint>,
    pub discipline_scatter: Vec<ScatterPoint>,
}

fn off_diagonal_row_sums(m: &Matrix<f64>) -> Vec<f64> {
    m.rows().enumerate().map(|(r, row)| row.iter().sum::<f64>() - row[r]).collect()
}

/// Normalize the full matrix, then drop the diagonal blocks and take row sums.
fn scatter(m: &CitationMatrix) -> Result<Vec<ScatterPoint>, AnalyticsError> {
    let i = row_normalize(&m.counts.to_f64());
    let o = row_normalize(&m.output().to_f64());
    let xs = strip_blocks(&i.matrix, &m.blocks)?.i_star.row_sums();
    let ys = strip_blocks(&o.matrix, &m.blocks)?.i_star.row_sums();
    Ok(m.labels
        .iter()
        .enumerate()
        .map(|(r, &label)| ScatterPoint {
            label,
            x: xs[r],
            y: ys[r],
            x_zero_row: i.zero_rows.contains(&r),
            y_zero_row: o.zero_rows.contains(&r),
        })
        .collect())
}

/// Corpus distributions and the coordinates behind the demand/supply and
/// interdisciplinarity plots.
///
/// `paper_disciplines` maps each paper to its discipline labels.
pub fn summarize(
    tax: &Taxonomy,
    paper_disciplines: &BTreeMap<u64, BTreeSet<NodeId>>,
    field_matrix: &CitationMatrix,
    discipline_matrix: &CitationMatrix,
) -> Result<Summary, AnalyticsError> {
    if field_matrix.level != Level::Field {
        return Err(AnalyticsError::BadLevel(field_matrix.level));
    }
    if discipline_matrix.level != Level::Discipline {
        return Err(AnalyticsError::BadLevel(discipline_matrix.level));
    }
    let mut papers: BTreeMap<NodeId, u64> = BTreeMap::new();
    for labels in paper_disciplines.values() {
        for &d in labels {
            *papers.entry(d).or_default() += 1;
        }
    }
    let disciplines = tax
        .disciplines_by_coding()
        .into_iter()
        .map(|d| {
            let fields = tax.children(d).len();
            let n = papers.get(&d).copied().unwrap_or(0);
            DisciplineSummary {
                discipline: d,
                papers: n,
                fields,
                papers_per_field: (fields > 0).then(|| n as f64 / fields as f64),
            }
        })
        .collect();

    let mut interfield = Vec::new();
    for block in &field_matrix.blocks {
        let counts = field_matrix.block_counts(*block);
        let demand = off_diagonal_row_sums(&row_normalize(&counts.to_f64()).matrix);
        let supply = off_diagonal_row_sums(&row_normalize(&counts.transpose().to_f64()).matrix);
        for (j, r) in (block.start..block.end).enumerate() {
            interfield.push(FieldInterfield {
                field: field_matrix.labels[r],
                discipline: block.discipline,
                demand: demand[j],
                supply: supply[j],
            });
        }
    }

    Ok(Summary {
        disciplines,
        interfield,
        field_scatter: scatter(field_matrix)?,
        discipline_scatter: scatter(discipline_matrix)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[u64]]) -> Matrix<u64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn intrafield_stats_example() {
        let s = intrafield_stats(&mat(&[&[10, 2], &[4, 8]]));
        assert_eq!(s.k_in, vec![12, 12]);
        assert_eq!(s.k_out, vec![14, 10]);
        assert_eq!((s.kappa_total, s.kappa_intra, s.kappa_inter), (24, 18, 6));
        assert_eq!(intrafield_stats(&mat(&[&[3, 0], &[0, 5]])).kappa_inter, 0);
        let z = intrafield_stats(&Matrix::zeros(3));
        assert_eq!((z.kappa_total, z.kappa_intra, z.kappa_inter), (0, 0, 0));
    }

    #[test]
    fn within_example() {
        let s = sigma_within(&mat(&[&[10, 2], &[4, 8]]));
        assert_eq!(s.k_total, vec![16, 14]);
        assert!((s.intra[0].unwrap() - 0.875).abs() < 1e-12);
        assert!((s.intra[1].unwrap() - 6.0 / 7.0).abs() < 1e-12);
        assert!((s.unbal[0].unwrap() + 0.125).abs() < 1e-12);
        assert!((s.unbal[1].unwrap() - 1.0 / 7.0).abs() < 1e-12);

        let sym = sigma_within(&mat(&[&[1, 4], &[4, 0]]));
        assert_eq!(sym.intra, vec![Some(1.0), Some(1.0)]);
        assert_eq!(sym.unbal, vec![Some(0.0), Some(0.0)]);
        let z = sigma_within(&mat(&[&[0, 0], &[0, 1]]));
        assert_eq!(z.intra[0], None);
    }

    #[test]
    fn across_example() {
        let i0 = mat(&[&[5, 2], &[3, 7]]);
        let blocks = [Block { discipline: 0, start: 0, end: 1 }, Block { discipline: 1, start: 1, end: 2 }];
        let s = sigma_across(&i0, &i0.transpose(), &blocks).unwrap();
        assert_eq!(s.k_total, vec![10, 12]);
        assert!((s.inter[0].unwrap() - 0.9).abs() < 1e-12);
        assert!((s.inter[1].unwrap() - 11.0 / 12.0).abs() < 1e-12);
        assert!((s.unbal_not_d[0].unwrap() + 0.1).abs() < 1e-12);
        assert!((s.unbal_not_d[1].unwrap() - 1.0 / 12.0).abs() < 1e-12);

        let diag = mat(&[&[5, 0], &[0, 7]]);
        let s = sigma_across(&diag, &diag.transpose(), &blocks).unwrap();
        assert_eq!(s.inter, vec![Some(1.0), Some(1.0)]);
        assert_eq!(s.unbal_not_d, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn averaging_rules() {
        let v = [(Some(1.0), 1), (None, 5), (Some(0.0), 3)];
        assert_eq!(average(v.into_iter(), Averaging::Simple), Some(0.5));
        assert_eq!(average(v.into_iter(), Averaging::Weighted), Some(0.25));
        assert_eq!(average([(None, 1)].into_iter(), Averaging::Simple), None);
    }
}
