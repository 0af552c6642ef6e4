//! From inverted-index abstracts to staged token-id sequences.
//!
//! Abstract input lines are `paper_id \t index_length \t inverted_index_json`,
//! where the JSON object maps each token to the positions it occupies.

pub mod store;

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_MAX_LEN: usize = 200;
pub const DEFAULT_VOCAB_K: usize = 3000;

/// Reserved for out-of-vocabulary tokens and padding.
pub const OOV_ID: u32 = 0;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("paper {paper_id}: malformed inverted index: {reason}")]
    MalformedRecord { paper_id: u64, reason: String },
    #[error("{file} line {line}: {reason}")]
    Parse { file: String, line: usize, reason: String },
    #[error("vocabulary size k must be at least 1")]
    InvalidK,
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractRecord {
    pub paper_id: u64,
    /// Number of tokens in the abstract.
    pub index_length: usize,
    pub inverted_index: BTreeMap<String, Vec<usize>>,
}

/// Rebuild the abstract in reading order.
pub fn decode_inverted_index(rec: &AbstractRecord) -> Result<String, IngestError> {
    let malformed = |reason: String| IngestError::MalformedRecord { paper_id: rec.paper_id, reason };
    let mut slots: Vec<Option<&str>> = vec![None; rec.index_length];
    for (token, positions) in &rec.inverted_index {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(malformed(format!("token {token:?} is empty or contains whitespace")));
        }
        for &p in positions {
            let slot = slots.get_mut(p).ok_or_else(|| {
                malformed(format!("position {p} of {token:?} is out of range 0..{}", rec.index_length))
            })?;
            if let Some(prev) = slot.replace(token) {
                return Err(malformed(format!("position {p} claimed by both {prev:?} and {token:?}")));
            }
        }
    }
    let mut out = String::new();
    for (p, slot) in slots.iter().enumerate() {
        let token = slot.ok_or_else(|| malformed(format!("no token at position {p}")))?;
        if p > 0 {
            out.push(' ');
        }
        out.push_str(token);
    }
    Ok(out)
}

pub fn encode_inverted_index(paper_id: u64, text: &str) -> AbstractRecord {
    let mut inverted_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut n = 0;
    for (p, token) in text.split_whitespace().enumerate() {
        inverted_index.entry(token.to_string()).or_default().push(p);
        n = p + 1;
    }
    AbstractRecord { paper_id, index_length: n, inverted_index }
}

pub fn parse_abstract_line(line: &str) -> Result<AbstractRecord, String> {
    let mut cols = line.splitn(3, '\t');
    let paper_id = cols.next().and_then(|s| s.trim().parse::<u64>().ok()).ok_or("paper id is not an integer")?;
    let index_length =
        cols.next().and_then(|s| s.trim().parse::<usize>().ok()).ok_or("index length is not an integer")?;
    let json = cols.next().ok_or("missing inverted index column")?;
    let inverted_index: BTreeMap<String, Vec<usize>> =
        serde_json::from_str(json).map_err(|e| format!("inverted index is not valid JSON: {e}"))?;
    Ok(AbstractRecord { paper_id, index_length, inverted_index })
}

pub fn format_abstract_line(rec: &AbstractRecord) -> String {
    let json = serde_json::to_string(&rec.inverted_index).expect("string keys always serialize");
    format!("{}\t{}\t{}", rec.paper_id, rec.index_length, json)
}

pub fn read_abstracts(path: &Path) -> Result<Vec<AbstractRecord>, IngestError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_abstract_line(&line).map_err(|reason| IngestError::Parse {
            file: path.display().to_string(),
            line: i + 1,
            reason,
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Lowercase, drop ASCII punctuation and split on whitespace.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    let cleaned: String = text.chars().filter(|c| !c.is_ascii_punctuation()).flat_map(char::to_lowercase).collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

pub fn normalize_and_tokenize(text: &str, max_len: usize) -> Vec<String> {
    let mut tokens = normalize_tokens(text);
    tokens.truncate(max_len);
    tokens
}

/// Top-k token index. Ids run from 1; id 0 is reserved for out-of-vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabIndex {
    k: usize,
    tokens: Vec<String>,
    token_to_id: HashMap<String, u32>,
}

type FirstSeen = (usize, usize);

fn count_chunk(offset: usize, docs: &[Vec<String>]) -> HashMap<&str, (u64, FirstSeen)> {
    let mut counts: HashMap<&str, (u64, FirstSeen)> = HashMap::new();
    for (d, doc) in docs.iter().enumerate() {
        for (t, token) in doc.iter().enumerate() {
            let e = counts.entry(token.as_str()).or_insert((0, (offset + d, t)));
            e.0 += 1;
        }
    }
    counts
}

impl VocabIndex {
    /// The `k` most frequent tokens. Ties go to the token seen first in a
    /// document-then-position scan of the corpus.
    pub fn build(corpus: &[Vec<String>], k: usize) -> Result<Self, IngestError> {
        if k < 1 {
            return Err(IngestError::InvalidK);
        }
        if corpus.is_empty() {
            return Err(IngestError::EmptyCorpus);
        }
        const CHUNK: usize = 2048;
        let merged = corpus.par_chunks(CHUNK).enumerate().map(|(i, docs)| count_chunk(i * CHUNK, docs)).reduce(
            HashMap::new,
            |mut a, b| {
                for (tok, (n, first)) in b {
                    let e = a.entry(tok).or_insert((0, first));
                    e.0 += n;
                    e.1 = e.1.min(first);
                }
                a
            },
        );
        let mut ranked: Vec<(&str, u64, FirstSeen)> = merged.into_iter().map(|(t, (n, first))| (t, n, first)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        ranked.truncate(k);
        let tokens: Vec<String> = ranked.into_iter().map(|(t, _, _)| t.to_string()).collect();
        Ok(Self::from_tokens(k, tokens))
    }

    fn from_tokens(k: usize, tokens: Vec<String>) -> Self {
        let token_to_id = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32 + 1)).collect();
        VocabIndex { k, tokens, token_to_id }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        (id as usize).checked_sub(1).and_then(|i| self.tokens.get(i)).map(String::as_str)
    }

    /// `token \t id` lines, ids ascending.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (i, t) in self.tokens.iter().enumerate() {
            writeln!(out, "{}\t{}", t, i + 1).expect("writing to a Vec cannot fail");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Read a vocab file; `k` becomes the number of entries.
    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path)?;
        let file = path.display().to_string();
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| IngestError::Parse { file: file.clone(), line: i + 1, reason: reason.to_string() };
            let (token, id) = line.split_once('\t').ok_or_else(|| err("expected `token \\t id`"))?;
            let id: usize = id.trim().parse().map_err(|_| err("id is not an integer"))?;
            if id != tokens.len() + 1 {
                return Err(err("ids must be consecutive starting at 1"));
            }
            tokens.push(token.to_string());
        }
        Ok(Self::from_tokens(tokens.len().max(1), tokens))
    }

    /// Stable 64-bit fingerprint of the serialized vocabulary.
    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.to_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
    }
}

pub fn build_vocab(corpus: &[Vec<String>], k: usize) -> Result<VocabIndex, IngestError> {
    VocabIndex::build(corpus, k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq {
    pub paper_id: u64,
    pub ids: Vec<u32>,
}

/// Map tokens to ids, then pad with zeros or truncate to exactly `max_len`.
pub fn vectorize(paper_id: u64, tokens: &[String], vocab: &VocabIndex, max_len: usize) -> TokenSeq {
    let mut ids: Vec<u32> = tokens.iter().take(max_len).map(|t| vocab.id(t)).collect();
    ids.resize(max_len, OOV_ID);
    TokenSeq { paper_id, ids }
}
