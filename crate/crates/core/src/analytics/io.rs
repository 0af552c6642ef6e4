//! Citation input and the text outputs of the analysis stage.

use std::fmt::Display;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::matrix::Matrix;
use super::scores::{FieldInterfield, ScatterPoint, ScoreTable, Summary};
use super::AnalyticsError;
use crate::taxonomy::{NodeId, Taxonomy};

/// Default cutoff for highlighted cells in the demand/supply grid.
pub const DEFAULT_HIGHLIGHT: f64 = 0.06;

/// Read `citing \t cited` paper id pairs; blank lines and `#` comments are skipped.
pub fn read_citations(path: &Path) -> Result<Vec<(u64, u64)>, AnalyticsError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| AnalyticsError::Parse { path: path.display().to_string(), line: i + 1, msg };
        let mut cols = line.split('\t');
        let mut id = |name: &str| -> Result<u64, AnalyticsError> {
            let raw = cols.next().ok_or_else(|| err(format!("missing {name} paper id")))?;
            raw.trim().parse().map_err(|_| err(format!("bad {name} paper id {raw:?}")))
        };
        let citing = id("citing")?;
        let cited = id("cited")?;
        out.push((citing, cited));
    }
    Ok(out)
}

fn code(tax: &Taxonomy, id: NodeId) -> String {
    tax.code(id).map(str::to_string).unwrap_or_else(|| id.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Nonzero entries as `row_label \t col_label \t value` lines.
pub fn write_coordinates<W: Write, T: Copy + Default + PartialEq + Display>(
    out: &mut W,
    tax: &Taxonomy,
    labels: &[NodeId],
    m: &Matrix<T>,
) -> std::io::Result<()> {
    for (r, row) in m.rows().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v != T::default() {
                writeln!(out, "{}\t{}\t{v}", code(tax, labels[r]), code(tax, labels[c]))?;
            }
        }
    }
    Ok(())
}

/// Full matrix with a header row and a label column.
pub fn write_dense_csv<W: Write, T: Copy + Default + Display>(
    out: &mut W,
    tax: &Taxonomy,
    labels: &[NodeId],
    m: &Matrix<T>,
) -> std::io::Result<()> {
    let header: Vec<String> = labels.iter().map(|&l| code(tax, l)).collect();
    writeln!(out, "label,{}", header.join(","))?;
    for (r, row) in m.rows().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{}", header[r], cells.join(","))?;
    }
    Ok(())
}

fn quoted(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per discipline; undefined scores are left empty.
pub fn write_scores_csv<W: Write>(out: &mut W, tax: &Taxonomy, table: &ScoreTable) -> std::io::Result<()> {
    writeln!(out, "label,discipline,sigma_intra,sigma_unbal,sigma_inter,sigma_unbal_not_d")?;
    for d in &table.disciplines {
        let name = tax.node(d.discipline).map(|n| n.display_name().to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            code(tax, d.discipline),
            quoted(&name),
            opt(d.intra),
            opt(d.unbal),
            opt(d.inter),
            opt(d.unbal_not_d)
        )?;
    }
    Ok(())
}

pub fn write_field_scores_csv<W: Write>(out: &mut W, tax: &Taxonomy, table: &ScoreTable) -> std::io::Result<()> {
    writeln!(out, "label,discipline,sigma_intra,sigma_unbal,sigma_inter,sigma_unbal_not_d,k_total_within,k_total_all")?;
    for f in &table.fields {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            code(tax, f.field),
            code(tax, f.discipline),
            opt(f.intra),
            opt(f.unbal),
            opt(f.inter),
            opt(f.unbal_not_d),
            f.k_within,
            f.k_across
        )?;
    }
    Ok(())
}

pub fn write_scatter_csv<W: Write>(out: &mut W, tax: &Taxonomy, points: &[ScatterPoint]) -> std::io::Result<()> {
    writeln!(out, "label,in_rowsum,out_rowsum,in_zero_row,out_zero_row")?;
    for p in points {
        writeln!(out, "{},{},{},{},{}", code(tax, p.label), p.x, p.y, u8::from(p.x_zero_row), u8::from(p.y_zero_row))?;
    }
    Ok(())
}

pub fn write_interfield_csv<W: Write>(out: &mut W, tax: &Taxonomy, rows: &[FieldInterfield]) -> std::io::Result<()> {
    writeln!(out, "label,discipline,demand,supply")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", code(tax, r.field), code(tax, r.discipline), r.demand, r.supply)?;
    }
    Ok(())
}

pub fn write_discipline_summary_csv<W: Write>(out: &mut W, tax: &Taxonomy, summary: &Summary) -> std::io::Result<()> {
    writeln!(out, "label,discipline,papers,fields,papers_per_field")?;
    for d in &summary.disciplines {
        let name = tax.node(d.discipline).map(|n| n.display_name().to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            code(tax, d.discipline),
            quoted(&name),
            d.papers,
            d.fields,
            opt(d.papers_per_field)
        )?;
    }
    Ok(())
}

/// Cells strictly above `threshold`, as `row,col,value` lines.
pub fn write_highlights_csv<W: Write>(
    out: &mut W,
    tax: &Taxonomy,
    labels: &[NodeId],
    m: &Matrix<f64>,
    threshold: f64,
) -> std::io::Result<()> {
    writeln!(out, "row,col,value")?;
    for (r, row) in m.rows().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > threshold {
                writeln!(out, "{},{},{v}", code(tax, labels[r]), code(tax, labels[c]))?;
            }
        }
    }
    Ok(())
}
