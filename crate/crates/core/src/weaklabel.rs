//! Weak labels from field-of-study tags.
//!
//! A paper is annotated with every subfield whose descriptor matches one of its
//! tags. Multi-word tags must occur as a contiguous token run in the
//! subfield's wikitext; single-word tags must be one of its topic nouns.
//! Both sides go through [`crate::ingest::normalize_tokens`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::normalize_tokens;
use crate::taxonomy::{Level, NodeId, Taxonomy};

#[derive(Debug, thiserror::Error)]
pub enum WeakLabelError {
    #[error("{file} line {line}: {reason}")]
    Parse { file: String, line: usize, reason: String },
    #[error("no matched papers: the training set would be empty")]
    NoTrainingData,
    #[error("validation fraction {0} must lie in [0, 1)")]
    BadFraction(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FosTag {
    pub text: String,
    pub tokens: Vec<String>,
    /// Depth of the tag in its source hierarchy, when known.
    pub level: Option<u8>,
}

impl FosTag {
    pub fn new(raw: &str) -> Self {
        let tokens = normalize_tokens(raw);
        FosTag { text: tokens.join(" "), tokens, level: None }
    }

    pub fn with_level(raw: &str, level: u8) -> Self {
        FosTag { level: Some(level), ..Self::new(raw) }
    }

    pub fn is_singleton(&self) -> bool {
        self.tokens.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfieldDescriptor {
    pub subfield: NodeId,
    pub wikitext: Vec<String>,
    pub topic_nouns: BTreeSet<String>,
}

impl SubfieldDescriptor {
    pub fn new<'a>(subfield: NodeId, wikitext: &str, topic_nouns: impl IntoIterator<Item = &'a str>) -> Self {
        SubfieldDescriptor {
            subfield,
            wikitext: normalize_tokens(wikitext),
            topic_nouns: topic_nouns.into_iter().flat_map(normalize_tokens).collect(),
        }
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

pub fn match_tag(tag: &FosTag, desc: &SubfieldDescriptor) -> bool {
    match tag.tokens.len() {
        0 => false,
        1 => desc.topic_nouns.contains(&tag.tokens[0]),
        _ => contains_run(&desc.wikitext, &tag.tokens),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub discipline: NodeId,
    pub field: NodeId,
    pub subfield: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedPaper {
    pub paper_id: u64,
    /// Root-to-leaf paths, in taxonomy file order of the subfield.
    pub triplets: Vec<Triplet>,
}

impl AnnotatedPaper {
    /// The label used in single-label mode and for stratification.
    pub fn primary(&self) -> Triplet {
        self.triplets[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Annotation {
    Matched(AnnotatedPaper),
    Unmatched(u64),
}

/// Minimum tag level per discipline code. Tags with a known level below the
/// minimum are ignored for subfields of that discipline; tags without a level
/// always pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelFilter {
    pub min_level: BTreeMap<u32, u8>,
}

impl LevelFilter {
    fn allows(&self, tag: &FosTag, discipline_code: Option<u32>) -> bool {
        match (tag.level, discipline_code.and_then(|d| self.min_level.get(&d))) {
            (Some(level), Some(&min)) => level >= min,
            _ => true,
        }
    }
}

/// Indexed matcher over all subfield descriptors.
pub struct Annotator<'a> {
    tax: &'a Taxonomy,
    descriptors: &'a [SubfieldDescriptor],
    filter: LevelFilter,
    nouns: HashMap<&'a str, Vec<usize>>,
    /// token -> (descriptor, position) occurrences in wikitext
    postings: HashMap<&'a str, Vec<(usize, usize)>>,
    paths: Vec<Option<(Triplet, usize, Option<u32>)>>,
}

impl<'a> Annotator<'a> {
    pub fn new(tax: &'a Taxonomy, descriptors: &'a [SubfieldDescriptor], filter: LevelFilter) -> Self {
        let mut nouns: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut postings: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
        for (d, desc) in descriptors.iter().enumerate() {
            for noun in &desc.topic_nouns {
                nouns.entry(noun).or_default().push(d);
            }
            for (p, tok) in desc.wikitext.iter().enumerate() {
                postings.entry(tok).or_default().push((d, p));
            }
        }
        let paths = descriptors
            .iter()
            .map(|desc| {
                let (discipline, field, subfield) = tax.path_of_subfield(desc.subfield)?;
                let pos = tax.position(subfield)?;
                Some((Triplet { discipline, field, subfield }, pos, tax.discipline_code(discipline)))
            })
            .collect();
        Annotator { tax, descriptors, filter, nouns, postings, paths }
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        self.tax
    }

    fn matches(&self, tag: &FosTag) -> Vec<usize> {
        let mut hits: Vec<usize> = match tag.tokens.len() {
            0 => Vec::new(),
            1 => self.nouns.get(tag.tokens[0].as_str()).cloned().unwrap_or_default(),
            n => self
                .postings
                .get(tag.tokens[0].as_str())
                .into_iter()
                .flatten()
                .filter(|&&(d, p)| {
                    let text = &self.descriptors[d].wikitext;
                    p + n <= text.len() && text[p..p + n] == tag.tokens[..]
                })
                .map(|&(d, _)| d)
                .collect(),
        };
        hits.dedup();
        hits
    }

    pub fn annotate(&self, paper_id: u64, tags: &[FosTag]) -> Annotation {
        let mut found: BTreeMap<usize, Triplet> = BTreeMap::new();
        for tag in tags {
            for d in self.matches(tag) {
                if let Some((triplet, pos, code)) = self.paths[d] {
                    if self.filter.allows(tag, code) {
                        found.insert(pos, triplet);
                    }
                }
            }
        }
        if found.is_empty() {
            Annotation::Unmatched(paper_id)
        } else {
            Annotation::Matched(AnnotatedPaper { paper_id, triplets: found.into_values().collect() })
        }
    }
}

pub fn annotate_paper(
    paper_id: u64,
    tags: &[FosTag],
    descriptors: &[SubfieldDescriptor],
    tax: &Taxonomy,
) -> Annotation {
    Annotator::new(tax, descriptors, LevelFilter::default()).annotate(paper_id, tags)
}

pub fn match_rate(annotated: usize, unmatched: usize) -> f64 {
    let total = annotated + unmatched;
    if total == 0 {
        0.0
    } else {
        annotated as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRole {
    Train,
    Validation,
    Test,
}

impl SplitRole {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitRole::Train => "train",
            SplitRole::Validation => "validation",
            SplitRole::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitConfig {
    pub validation_fraction: f64,
    pub seed: u64,
    /// Taxonomy level of the primary label used as the stratum.
    pub strata_level: Level,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { validation_fraction: 0.4, seed: 0, strata_level: Level::Discipline }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusSplit {
    pub roles: BTreeMap<u64, SplitRole>,
    pub warnings: Vec<String>,
}

impl CorpusSplit {
    pub fn ids(&self, role: SplitRole) -> Vec<u64> {
        self.roles.iter().filter(|(_, &r)| r == role).map(|(&id, _)| id).collect()
    }

    pub fn role(&self, paper_id: u64) -> Option<SplitRole> {
        self.roles.get(&paper_id).copied()
    }
}

/// Unmatched papers form the test pool; matched papers are split into train and
/// validation by stratified sampling on the primary label. Multi-label runs
/// reuse the same assignment.
pub fn split_corpus(
    annotated: &[AnnotatedPaper],
    unmatched: &[u64],
    config: &SplitConfig,
) -> Result<CorpusSplit, WeakLabelError> {
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(WeakLabelError::BadFraction(config.validation_fraction));
    }
    if annotated.is_empty() {
        return Err(WeakLabelError::NoTrainingData);
    }
    let mut strata: BTreeMap<NodeId, Vec<u64>> = BTreeMap::new();
    for paper in annotated {
        let t = paper.primary();
        let key = match config.strata_level {
            Level::Discipline => t.discipline,
            Level::Field => t.field,
            Level::Subfield => t.subfield,
        };
        strata.entry(key).or_default().push(paper.paper_id);
    }

    let mut split = CorpusSplit::default();
    for &id in unmatched {
        split.roles.insert(id, SplitRole::Test);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for (class, mut ids) in strata {
        ids.sort_unstable();
        ids.dedup();
        if ids.len() < 2 {
            log::warn!("class {class} has {} sample(s); keeping it wholly in train", ids.len());
            split.warnings.push(format!("class {class} has fewer than 2 samples"));
            for id in ids {
                split.roles.insert(id, SplitRole::Train);
            }
            continue;
        }
        ids.shuffle(&mut rng);
        let n_val = (ids.len() as f64 * config.validation_fraction).round() as usize;
        for (i, id) in ids.into_iter().enumerate() {
            let role = if i < n_val { SplitRole::Validation } else { SplitRole::Train };
            split.roles.insert(id, role);
        }
    }
    Ok(split)
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> WeakLabelError {
    WeakLabelError::Parse { file: path.display().to_string(), line, reason: reason.into() }
}

/// `paper_id \t tag [\t level]` lines, grouped by paper.
pub fn read_fos(path: &Path) -> Result<BTreeMap<u64, Vec<FosTag>>, WeakLabelError> {
    let mut out: BTreeMap<u64, Vec<FosTag>> = BTreeMap::new();
    let reader = BufReader::new(std::fs::File::open(path)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(parse_err(path, i + 1, "expected `paper_id \\t tag`"));
        }
        let id: u64 = cols[0].trim().parse().map_err(|_| parse_err(path, i + 1, "paper id is not an integer"))?;
        let tag = match cols.get(2).map(|s| s.trim()).filter(|s| !s.is_empty()) {
            None => FosTag::new(cols[1]),
            Some(level) => {
                let level: u8 = level.parse().map_err(|_| parse_err(path, i + 1, "tag level is not an integer"))?;
                FosTag::with_level(cols[1], level)
            }
        };
        out.entry(id).or_default().push(tag);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct DescriptorLine {
    subfield: String,
    wikitext: String,
    #[serde(default)]
    topic_nouns: Vec<String>,
}

/// JSON lines `{"subfield": "<code>", "wikitext": "...", "topic_nouns": [...]}`.
pub fn read_descriptors(path: &Path, tax: &Taxonomy) -> Result<Vec<SubfieldDescriptor>, WeakLabelError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: DescriptorLine =
            serde_json::from_str(&line).map_err(|e| parse_err(path, i + 1, format!("bad descriptor: {e}")))?;
        let id = tax
            .by_code(&d.subfield)
            .filter(|&id| tax.node(id).is_some_and(|n| n.level == Level::Subfield))
            .ok_or_else(|| parse_err(path, i + 1, format!("`{}` is not a subfield code", d.subfield)))?;
        out.push(SubfieldDescriptor::new(id, &d.wikitext, d.topic_nouns.iter().map(String::as_str)));
    }
    Ok(out)
}

pub fn write_descriptor_line<W: Write>(
    out: &mut W,
    code: &str,
    wikitext: &str,
    topic_nouns: &[String],
) -> std::io::Result<()> {
    let value = serde_json::json!({ "subfield": code, "wikitext": wikitext, "topic_nouns": topic_nouns });
    writeln!(out, "{value}")
}

/// `paper_id \t discipline \t field \t subfield` lines using taxonomy codes.
pub fn write_annotations<W: Write>(out: &mut W, papers: &[AnnotatedPaper], tax: &Taxonomy) -> std::io::Result<()> {
    let mut sorted: Vec<&AnnotatedPaper> = papers.iter().collect();
    sorted.sort_by_key(|p| p.paper_id);
    for p in sorted {
        for t in &p.triplets {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                p.paper_id,
                tax.code(t.discipline).unwrap_or("-"),
                tax.code(t.field).unwrap_or("-"),
                tax.code(t.subfield).unwrap_or("-"),
            )?;
        }
    }
    Ok(())
}

/// Reads annotation or prediction manifests; columns past the fourth are ignored.
pub fn read_annotations(path: &Path, tax: &Taxonomy) -> Result<Vec<AnnotatedPaper>, WeakLabelError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut by_paper: BTreeMap<u64, BTreeMap<usize, Triplet>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 4 {
            return Err(parse_err(path, i + 1, "expected `paper_id \\t discipline \\t field \\t subfield`"));
        }
        let id: u64 = cols[0].trim().parse().map_err(|_| parse_err(path, i + 1, "paper id is not an integer"))?;
        let subfield = tax
            .by_code(cols[3].trim())
            .ok_or_else(|| parse_err(path, i + 1, format!("unknown subfield code `{}`", cols[3])))?;
        let (discipline, field, subfield) = tax
            .path_of_subfield(subfield)
            .ok_or_else(|| parse_err(path, i + 1, format!("`{}` is not a subfield", cols[3])))?;
        if tax.code(discipline) != Some(cols[1].trim()) || tax.code(field) != Some(cols[2].trim()) {
            return Err(parse_err(path, i + 1, "discipline/field codes do not match the subfield path"));
        }
        let pos = tax.position(subfield).expect("resolved node has a position");
        by_paper.entry(id).or_default().insert(pos, Triplet { discipline, field, subfield });
    }
    Ok(by_paper
        .into_iter()
        .map(|(paper_id, t)| AnnotatedPaper { paper_id, triplets: t.into_values().collect() })
        .collect())
}

pub fn write_split<W: Write>(out: &mut W, split: &CorpusSplit) -> std::io::Result<()> {
    for (id, role) in &split.roles {
        writeln!(out, "{}\t{}", id, role.as_str())?;
    }
    Ok(())
}

pub fn read_split(path: &Path) -> Result<CorpusSplit, WeakLabelError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut split = CorpusSplit::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, role) = line.split_once('\t').ok_or_else(|| parse_err(path, i + 1, "expected `paper_id \\t role`"))?;
        let id: u64 = id.trim().parse().map_err(|_| parse_err(path, i + 1, "paper id is not an integer"))?;
        let role = match role.trim() {
            "train" => SplitRole::Train,
            "validation" => SplitRole::Validation,
            "test" => SplitRole::Test,
            other => return Err(parse_err(path, i + 1, format!("unknown split role `{other}`"))),
        };
        split.roles.insert(id, role);
    }
    Ok(split)
}
