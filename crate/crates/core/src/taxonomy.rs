//! The discipline / field / subfield label tree.
//!
//! A taxonomy is loaded from a tab-separated file, one node per line:
//!
//! ```text
//! # id  level  parent  code  classifiable  name  [title]  [group]
//! 0     0      -       0     1             infk  Computer science  105
//! 100   1      0       0-0   1             hardware
//! 1000  2      100     0-0-0 1             printed circuit boards
//! ```
//!
//! * `level` is 0 (discipline), 1 (field) or 2 (subfield).
//! * `parent` is the node id of the parent (`-` for disciplines).
//! * `code` is the integer discipline code, or the composite `d-f` / `d-f-s`
//!   code below it. Non-classifiable grouping nodes use `-`.
//! * `classifiable` is `1` for classifiable nodes and `0` for level-0 grouping
//!   nodes such as "The arts", which are dropped by [`prune_to_leaf_disciplines`].
//! * `title` is an optional display name; `group` optionally names the grouping
//!   node a discipline sits under. Both accept `-`.
//!
//! Class order inside a scope is file order, frozen at load time.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Discipline = 0,
    Field = 1,
    Subfield = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Discipline, Level::Field, Level::Subfield];

    pub fn from_index(index: u8) -> Option<Level> {
        match index {
            0 => Some(Level::Discipline),
            1 => Some(Level::Field),
            2 => Some(Level::Subfield),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Single-label (exactly one class) versus multi-label (binary relevance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Multi,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Mode::Single),
            "multi" => Ok(Mode::Multi),
            other => Err(format!("unknown mode `{other}` (expected `single` or `multi`)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Single => "single",
            Mode::Multi => "multi",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("taxonomy line {line}: malformed record `{node}`: {reason}")]
    Malformed { line: usize, node: String, reason: String },
    #[error("taxonomy line {line}: duplicate node id {node}")]
    DuplicateId { line: usize, node: String },
    #[error("taxonomy line {line}: node {node} reuses code `{code}`")]
    DuplicateCode { line: usize, node: String, code: String },
    #[error("taxonomy line {line}: node {node} references missing parent `{parent}`")]
    DanglingParent { line: usize, node: String, parent: String },
    #[error("taxonomy line {line}: node {node}: {reason}")]
    LevelViolation { line: usize, node: String, reason: String },
    #[error("discipline codes must cover 0..{expected} exactly once; missing code {missing}")]
    CodeGap { expected: usize, missing: u32 },
    #[error("unknown label node {0}")]
    UnknownLabel(NodeId),
    #[error("label {label} is not a level-{level} class in scope {scope:?}")]
    OutsideScope { label: NodeId, level: Level, scope: Option<NodeId> },
    #[error("scope {scope:?} is not valid for level {level}")]
    BadScope { level: Level, scope: Option<NodeId> },
    #[error("label set must have at least one element")]
    EmptyLabelSet,
    #[error("single-label vector needs exactly one label, got {0}")]
    NotSingleLabel(usize),
    #[error("label vector length {got} does not match scope size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("i/o error reading taxonomy: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxNode {
    pub id: NodeId,
    pub name: String,
    pub title: Option<String>,
    pub level: Level,
    pub parent: Option<NodeId>,
    /// Level-0 only: false for grouping nodes that are not classified.
    pub classifiable: bool,
    /// Textual coding (`"43"`, `"43-30"`, `"43-30-2"`); `None` for grouping nodes.
    pub code: Option<String>,
    /// Numeric components of `code`.
    pub coding: Vec<u32>,
    /// Level-0 only: grouping node this discipline sits under.
    pub group: Option<NodeId>,
}

impl TaxNode {
    pub fn display_name(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.name)
    }

    pub fn code_str(&self) -> &str {
        self.code.as_deref().unwrap_or("-")
    }
}

/// Multi-hot vector over the classes of one scope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub level: Level,
    pub scope: Option<NodeId>,
    pub bits: Vec<u8>,
}

impl LabelVector {
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Taxonomy {
    nodes: Vec<TaxNode>,
    position: HashMap<NodeId, usize>,
    level_index: [Vec<NodeId>; 3],
    children: HashMap<NodeId, Vec<NodeId>>,
    pruned: Vec<NodeId>,
    discipline_coding: BTreeMap<String, u32>,
    by_code: HashMap<String, NodeId>,
}

struct RawRecord {
    line: usize,
    id: NodeId,
    level: Level,
    parent: Option<String>,
    classifiable: bool,
    code: Option<String>,
    name: String,
    title: Option<String>,
    group: Option<String>,
}

fn dash_opt(s: Option<&str>) -> Option<String> {
    match s.map(str::trim) {
        None | Some("") | Some("-") => None,
        Some(v) => Some(v.to_string()),
    }
}

fn parse_line(line_no: usize, line: &str) -> Result<RawRecord, TaxonomyError> {
    let cols: Vec<&str> = line.split('\t').collect();
    let node = cols.first().map(|s| s.trim().to_string()).unwrap_or_default();
    let malformed =
        |reason: &str| TaxonomyError::Malformed { line: line_no, node: node.clone(), reason: reason.to_string() };
    if cols.len() < 6 {
        return Err(malformed("expected at least 6 tab-separated columns"));
    }
    let id: NodeId = cols[0].trim().parse().map_err(|_| malformed("node id is not an integer"))?;
    let level =
        cols[1].trim().parse::<u8>().ok().and_then(Level::from_index).ok_or_else(|| TaxonomyError::LevelViolation {
            line: line_no,
            node: node.clone(),
            reason: format!("level `{}` is not 0, 1 or 2", cols[1].trim()),
        })?;
    let classifiable = match cols[4].trim() {
        "1" | "true" | "yes" | "y" => true,
        "0" | "false" | "no" | "n" => false,
        _ => return Err(malformed("classifiable flag must be 0 or 1")),
    };
    let name = cols[5].trim().to_string();
    if name.is_empty() {
        return Err(malformed("empty name"));
    }
    Ok(RawRecord {
        line: line_no,
        id,
        level,
        parent: dash_opt(Some(cols[2])),
        classifiable,
        code: dash_opt(Some(cols[3])),
        name,
        title: dash_opt(cols.get(6).copied()),
        group: dash_opt(cols.get(7).copied()),
    })
}

fn parse_coding(code: &str) -> Option<Vec<u32>> {
    code.split('-').map(|p| p.parse::<u32>().ok()).collect()
}

impl Taxonomy {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut raw = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            raw.push(parse_line(i + 1, line)?);
        }
        Self::from_records(raw)
    }

    fn from_records(raw: Vec<RawRecord>) -> Result<Self, TaxonomyError> {
        let mut position = HashMap::new();
        for (pos, r) in raw.iter().enumerate() {
            if position.insert(r.id, pos).is_some() {
                return Err(TaxonomyError::DuplicateId { line: r.line, node: r.id.to_string() });
            }
        }

        let mut nodes: Vec<TaxNode> = Vec::with_capacity(raw.len());
        let mut by_code: HashMap<String, NodeId> = HashMap::new();
        let mut discipline_coding = BTreeMap::new();

        for r in &raw {
            let node = r.id.to_string();
            let violation = |reason: String| TaxonomyError::LevelViolation { line: r.line, node: node.clone(), reason };

            let parent = match (&r.parent, r.level) {
                (None, Level::Discipline) => None,
                (Some(_), Level::Discipline) => return Err(violation("disciplines cannot have a parent".into())),
                (None, _) => return Err(violation(format!("level-{} node needs a parent", r.level))),
                (Some(p), level) => {
                    let pid: Option<NodeId> = p.parse().ok();
                    let parent_rec = pid.and_then(|pid| position.get(&pid)).map(|&pos| &raw[pos]);
                    let parent_rec = parent_rec.ok_or_else(|| TaxonomyError::DanglingParent {
                        line: r.line,
                        node: node.clone(),
                        parent: p.clone(),
                    })?;
                    if parent_rec.level.index() + 1 != level.index() {
                        return Err(violation(format!(
                            "parent {} is at level {}, expected level {}",
                            parent_rec.id,
                            parent_rec.level,
                            level.index() - 1
                        )));
                    }
                    if !parent_rec.classifiable {
                        return Err(violation(format!(
                            "parent {} is a grouping node and cannot have children",
                            parent_rec.id
                        )));
                    }
                    Some(parent_rec)
                }
            };

            if r.level != Level::Discipline && !r.classifiable {
                return Err(violation("only level-0 nodes can be non-classifiable".into()));
            }
            if r.level != Level::Discipline && r.group.is_some() {
                return Err(violation("only level-0 nodes can sit in a group".into()));
            }

            let group = match &r.group {
                None => None,
                Some(g) => {
                    let gid: Option<NodeId> = g.parse().ok();
                    let grec = gid.and_then(|gid| position.get(&gid)).map(|&pos| &raw[pos]);
                    match grec {
                        Some(grec) if grec.level == Level::Discipline && !grec.classifiable => Some(grec.id),
                        Some(grec) => return Err(violation(format!("group {} is not a grouping node", grec.id))),
                        None => {
                            return Err(TaxonomyError::DanglingParent {
                                line: r.line,
                                node: node.clone(),
                                parent: g.clone(),
                            })
                        }
                    }
                }
            };

            let coding = match (&r.code, r.classifiable) {
                (None, false) => Vec::new(),
                (Some(_), false) => return Err(violation("grouping nodes carry no code".into())),
                (None, true) => return Err(violation("classifiable nodes need a code".into())),
                (Some(code), true) => {
                    let parts = parse_coding(code).ok_or_else(|| TaxonomyError::Malformed {
                        line: r.line,
                        node: node.clone(),
                        reason: format!("code `{code}` is not a dash-separated list of integers"),
                    })?;
                    if parts.len() != r.level.index() + 1 {
                        return Err(violation(format!(
                            "code `{code}` has {} components, expected {}",
                            parts.len(),
                            r.level.index() + 1
                        )));
                    }
                    if let Some(parent_rec) = parent {
                        let parent_parts = parent_rec.code.as_deref().and_then(parse_coding);
                        if parent_parts.as_deref() != Some(&parts[..parts.len() - 1]) {
                            let prefix: Vec<String> = parts[..parts.len() - 1].iter().map(u32::to_string).collect();
                            return Err(TaxonomyError::DanglingParent {
                                line: r.line,
                                node: node.clone(),
                                parent: prefix.join("-"),
                            });
                        }
                    }
                    if by_code.insert(code.clone(), r.id).is_some() {
                        return Err(TaxonomyError::DuplicateCode { line: r.line, node, code: code.clone() });
                    }
                    parts
                }
            };

            if r.level == Level::Discipline && r.classifiable {
                if discipline_coding.insert(r.name.clone(), coding[0]).is_some() {
                    return Err(TaxonomyError::DuplicateCode {
                        line: r.line,
                        node: r.id.to_string(),
                        code: r.name.clone(),
                    });
                }
            }

            nodes.push(TaxNode {
                id: r.id,
                name: r.name.clone(),
                title: r.title.clone(),
                level: r.level,
                parent: parent.map(|p| p.id),
                classifiable: r.classifiable,
                code: r.code.clone(),
                coding,
                group,
            });
        }

        let mut codes: Vec<u32> = discipline_coding.values().copied().collect();
        codes.sort_unstable();
        for (expected, &code) in codes.iter().enumerate() {
            if code as usize != expected {
                return Err(TaxonomyError::CodeGap { expected: codes.len(), missing: expected as u32 });
            }
        }

        let mut level_index: [Vec<NodeId>; 3] = Default::default();
        let mut children: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        let mut pruned = Vec::new();
        for n in &nodes {
            level_index[n.level.index()].push(n.id);
            if let Some(p) = n.parent {
                children.entry(p).or_default().push(n.id);
            }
            if n.level == Level::Discipline && n.classifiable {
                pruned.push(n.id);
            }
        }

        Ok(Taxonomy { nodes, position, level_index, children, pruned, discipline_coding, by_code })
    }

    pub fn nodes(&self) -> &[TaxNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&TaxNode> {
        self.position.get(&id).map(|&p| &self.nodes[p])
    }

    /// File-order position of a node.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.position.get(&id).copied()
    }

    /// All nodes at `level` in file order, grouping nodes included at level 0.
    pub fn level_nodes(&self, level: Level) -> &[NodeId] {
        &self.level_index[level.index()]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Classifiable disciplines in file order.
    pub fn disciplines(&self) -> &[NodeId] {
        &self.pruned
    }

    pub fn discipline_coding(&self) -> &BTreeMap<String, u32> {
        &self.discipline_coding
    }

    pub fn by_code(&self, code: &str) -> Option<NodeId> {
        self.by_code.get(code).copied()
    }

    pub fn discipline_by_code(&self, code: u32) -> Option<NodeId> {
        self.by_code(&code.to_string())
    }

    pub fn code(&self, id: NodeId) -> Option<&str> {
        self.node(id).and_then(|n| n.code.as_deref())
    }

    pub fn discipline_code(&self, discipline: NodeId) -> Option<u32> {
        self.node(discipline).filter(|n| n.level == Level::Discipline).and_then(|n| n.coding.first().copied())
    }

    /// Walk up to the level-0 ancestor.
    pub fn discipline_of(&self, id: NodeId) -> Option<NodeId> {
        let mut node = self.node(id)?;
        while let Some(p) = node.parent {
            node = self.node(p)?;
        }
        Some(node.id)
    }

    /// `(discipline, field, subfield)` path of a subfield node.
    pub fn path_of_subfield(&self, subfield: NodeId) -> Option<(NodeId, NodeId, NodeId)> {
        let s = self.node(subfield).filter(|n| n.level == Level::Subfield)?;
        let f = self.node(s.parent?)?;
        let d = f.parent?;
        Some((d, f.id, s.id))
    }

    /// Fields ordered by discipline code, then field code.
    pub fn fields_by_coding(&self) -> Vec<NodeId> {
        let mut fields: Vec<&TaxNode> = self.level_nodes(Level::Field).iter().filter_map(|&id| self.node(id)).collect();
        fields.sort_by(|a, b| a.coding.cmp(&b.coding));
        fields.into_iter().map(|n| n.id).collect()
    }

    /// Disciplines ordered by discipline code.
    pub fn disciplines_by_coding(&self) -> Vec<NodeId> {
        let mut ds: Vec<&TaxNode> = self.pruned.iter().filter_map(|&id| self.node(id)).collect();
        ds.sort_by(|a, b| a.coding.cmp(&b.coding));
        ds.into_iter().map(|n| n.id).collect()
    }

    /// Ordered classes a classifier at `level` chooses between inside `scope`.
    ///
    /// Level 0 takes no scope; level 1 is scoped by a discipline, level 2 by a field.
    pub fn classes(&self, level: Level, scope: Option<NodeId>) -> Result<&[NodeId], TaxonomyError> {
        let bad = || TaxonomyError::BadScope { level, scope };
        match (level, scope) {
            (Level::Discipline, None) => Ok(self.disciplines()),
            (Level::Discipline, Some(_)) | (_, None) => Err(bad()),
            (_, Some(s)) => {
                let node = self.node(s).ok_or(bad())?;
                if node.level.index() + 1 != level.index() || !node.classifiable {
                    return Err(bad());
                }
                Ok(self.children(s))
            }
        }
    }

    pub fn encode_labels(
        &self,
        labels: &BTreeSet<NodeId>,
        level: Level,
        scope: Option<NodeId>,
        mode: Mode,
    ) -> Result<LabelVector, TaxonomyError> {
        let classes = self.classes(level, scope)?;
        match (mode, labels.len()) {
            (_, 0) => return Err(TaxonomyError::EmptyLabelSet),
            (Mode::Single, n) if n != 1 => return Err(TaxonomyError::NotSingleLabel(n)),
            _ => {}
        }
        let mut bits = vec![0u8; classes.len()];
        for &label in labels {
            if self.node(label).is_none() {
                return Err(TaxonomyError::UnknownLabel(label));
            }
            let idx =
                classes.iter().position(|&c| c == label).ok_or(TaxonomyError::OutsideScope { label, level, scope })?;
            bits[idx] = 1;
        }
        Ok(LabelVector { level, scope, bits })
    }

    pub fn decode_labels(&self, vector: &LabelVector) -> Result<BTreeSet<NodeId>, TaxonomyError> {
        let classes = self.classes(vector.level, vector.scope)?;
        if classes.len() != vector.bits.len() {
            return Err(TaxonomyError::LengthMismatch { expected: classes.len(), got: vector.bits.len() });
        }
        Ok(classes.iter().zip(&vector.bits).filter(|(_, &b)| b != 0).map(|(&c, _)| c).collect())
    }
}

/// Classifiable level-0 nodes; grouping nodes are excluded.
pub fn prune_to_leaf_disciplines(tax: &Taxonomy) -> Vec<&TaxNode> {
    tax.disciplines().iter().filter_map(|&id| tax.node(id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
# id\tlevel\tparent\tcode\tclassifiable\tname
0\t0\t-\t0\t1\tinfk\tComputer science
1\t0\t-\t1\t1\tecon\tEconomics
10\t1\t0\t0-0\t1\thardware
11\t1\t0\t0-1\t1\tnetworks
20\t1\t1\t1-0\t1\tmicro
";

    fn set(ids: &[NodeId]) -> BTreeSet<NodeId> {
        ids.iter().copied().collect()
    }

    #[test]
    fn toy_counts_mirror_input() {
        let tax = Taxonomy::parse(TOY).unwrap();
        assert_eq!(tax.level_nodes(Level::Discipline).len(), 2);
        assert_eq!(tax.level_nodes(Level::Field).len(), 3);
        assert_eq!(tax.level_nodes(Level::Subfield).len(), 0);
        assert_eq!(tax.children(0), &[10, 11]);
        assert_eq!(tax.discipline_coding()["econ"], 1);
        assert_eq!(tax.node(11).unwrap().display_name(), "networks");
        assert_eq!(tax.node(0).unwrap().display_name(), "Computer science");
    }

    #[test]
    fn dangling_field_code() {
        let text = "0\t0\t-\t0\t1\ta\n1\t1\t5\t5-2\t1\tf\n";
        match Taxonomy::parse(text) {
            Err(TaxonomyError::DanglingParent { node, .. }) => assert_eq!(node, "1"),
            other => panic!("expected dangling parent, got {other:?}"),
        }
        // parent exists but the code points at another discipline
        let text = "0\t0\t-\t0\t1\ta\n1\t1\t0\t5-2\t1\tf\n";
        assert!(matches!(Taxonomy::parse(text), Err(TaxonomyError::DanglingParent { .. })));
    }

    #[test]
    fn structural_errors() {
        let dup = "0\t0\t-\t0\t1\ta\n0\t0\t-\t1\t1\tb\n";
        assert!(matches!(Taxonomy::parse(dup), Err(TaxonomyError::DuplicateId { line: 2, .. })));
        let dup_code = "0\t0\t-\t0\t1\ta\n1\t0\t-\t0\t1\tb\n";
        assert!(matches!(Taxonomy::parse(dup_code), Err(TaxonomyError::DuplicateCode { .. })));
        let level = "0\t0\t-\t0\t1\ta\n1\t2\t0\t0-0\t1\tb\n";
        assert!(matches!(Taxonomy::parse(level), Err(TaxonomyError::LevelViolation { .. })));
        let gap = "0\t0\t-\t0\t1\ta\n1\t0\t-\t2\t1\tb\n";
        assert!(matches!(Taxonomy::parse(gap), Err(TaxonomyError::CodeGap { missing: 1, .. })));
        let bad_level = "0\t3\t-\t0\t1\ta\n";
        assert!(matches!(Taxonomy::parse(bad_level), Err(TaxonomyError::LevelViolation { .. })));
        let parented_root = "0\t0\t-\t0\t1\ta\n1\t0\t0\t1\t1\tb\n";
        assert!(matches!(Taxonomy::parse(parented_root), Err(TaxonomyError::LevelViolation { .. })));
        let short = "0\t0\t-\t0\n";
        assert!(matches!(Taxonomy::parse(short), Err(TaxonomyError::Malformed { .. })));
    }

    #[test]
    fn grouping_nodes_are_pruned() {
        let text = "\
9\t0\t-\t-\t0\tarts\tThe arts
0\t0\t-\t0\t1\tlit\tLiterature\t9
1\t0\t-\t1\t1\tperf\tPerforming arts\t9
";
        let tax = Taxonomy::parse(text).unwrap();
        let leaves: Vec<NodeId> = prune_to_leaf_disciplines(&tax).iter().map(|n| n.id).collect();
        assert_eq!(leaves, vec![0, 1]);
        assert_eq!(tax.node(0).unwrap().group, Some(9));
        assert_eq!(tax.level_nodes(Level::Discipline).len(), 3);
        // grouping nodes cannot parent fields
        let bad = format!("{text}5\t1\t9\t-\t1\tx\n");
        assert!(Taxonomy::parse(&bad).is_err());
    }

    #[test]
    fn prune_identity_and_single_node() {
        let tax = Taxonomy::parse(TOY).unwrap();
        let ids: Vec<NodeId> = prune_to_leaf_disciplines(&tax).iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![0, 1]);
        assert_eq!(ids, prune_to_leaf_disciplines(&tax).iter().map(|n| n.id).collect::<Vec<_>>());
        let one = Taxonomy::parse("7\t0\t-\t0\t1\tonly\n").unwrap();
        assert_eq!(prune_to_leaf_disciplines(&one).len(), 1);
    }

    #[test]
    fn encode_decode() {
        let tax = Taxonomy::parse(TOY).unwrap();
        let v = tax.encode_labels(&set(&[11]), Level::Field, Some(0), Mode::Single).unwrap();
        assert_eq!(v.bits, vec![0, 1]);
        assert_eq!(tax.decode_labels(&v).unwrap(), set(&[11]));
        let all = tax.encode_labels(&set(&[10, 11]), Level::Field, Some(0), Mode::Multi).unwrap();
        assert_eq!(all.bits, vec![1, 1]);
        assert!(matches!(
            tax.encode_labels(&set(&[]), Level::Field, Some(0), Mode::Multi),
            Err(TaxonomyError::EmptyLabelSet)
        ));
        assert!(matches!(
            tax.encode_labels(&set(&[20]), Level::Field, Some(0), Mode::Multi),
            Err(TaxonomyError::OutsideScope { label: 20, .. })
        ));
        assert!(matches!(
            tax.encode_labels(&set(&[99]), Level::Field, Some(0), Mode::Multi),
            Err(TaxonomyError::UnknownLabel(99))
        ));
        assert!(matches!(
            tax.encode_labels(&set(&[10, 11]), Level::Field, Some(0), Mode::Single),
            Err(TaxonomyError::NotSingleLabel(2))
        ));
        assert!(tax.encode_labels(&set(&[0]), Level::Discipline, Some(0), Mode::Single).is_err());
    }

    #[test]
    fn biology_field_thirty() {
        let mut text = String::from("43\t0\t-\t0\t1\tbio\n");
        for f in 0..31 {
            text.push_str(&format!("{}\t1\t43\t0-{f}\t1\tfield{f}\n", 1000 + f));
        }
        let tax = Taxonomy::parse(&text).unwrap();
        let v = tax.encode_labels(&set(&[1030]), Level::Field, Some(43), Mode::Single).unwrap();
        assert_eq!(v.bits.len(), 31);
        assert_eq!(v.bits.iter().position(|&b| b == 1), Some(30));
        assert_eq!(v.count_ones(), 1);
    }
}
