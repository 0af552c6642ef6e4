//! Synthetic corpora with a known label structure.
//!
//! Every leaf subfield owns a disjoint block of terms. Abstracts mix those
//! terms with shared filler words, tags name the leaf topic either as a single
//! noun or as a multi-word phrase from the descriptor text, and a fraction of
//! extra papers carry tags that match nothing.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciclf::ingest::{encode_inverted_index, format_abstract_line};
use sciclf::weaklabel::write_descriptor_line;
use serde::{Deserialize, Serialize};

use crate::CliError;

const FILLER: [&str; 12] =
    ["the", "of", "and", "a", "we", "method", "result", "analysis", "model", "paper", "show", "new"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub disciplines: usize,
    pub fields: usize,
    pub subfields: usize,
    pub docs_per_leaf: usize,
    /// Share of labeled docs that also carry a second leaf.
    pub multi_fraction: f64,
    /// Extra papers whose tags match no descriptor.
    pub unmatched: usize,
    pub terms_per_leaf: usize,
    pub doc_len: usize,
    /// Share of a document's words drawn from its leaf terms.
    pub signal: f64,
    pub citations_per_doc: usize,
    /// Probability that a citation stays inside the citing paper's discipline.
    pub within_discipline: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            disciplines: 3,
            fields: 3,
            subfields: 3,
            docs_per_leaf: 200,
            multi_fraction: 0.0,
            unmatched: 540,
            terms_per_leaf: 20,
            doc_len: 60,
            signal: 0.5,
            citations_per_doc: 5,
            within_discipline: 0.7,
            seed: 0,
        }
    }
}

/// Paths of a written corpus.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub papers: usize,
    pub citations: usize,
}

struct Leaf {
    discipline: usize,
    code: String,
}

fn leaves(c: &SynthConfig) -> Vec<Leaf> {
    let mut out = Vec::new();
    for d in 0..c.disciplines {
        for f in 0..c.fields {
            for s in 0..c.subfields {
                out.push(Leaf { discipline: d, code: format!("{d}-{f}-{s}") });
            }
        }
    }
    out
}

fn taxonomy_text(c: &SynthConfig) -> String {
    let mut t = String::from("# id\tlevel\tparent\tcode\tclassifiable\tname\n");
    let mut next = 0u32;
    for d in 0..c.disciplines {
        let did = next;
        next += 1;
        t.push_str(&format!("{did}\t0\t-\t{d}\t1\tdisc{d}\n"));
        for f in 0..c.fields {
            let fid = next;
            next += 1;
            t.push_str(&format!("{fid}\t1\t{did}\t{d}-{f}\t1\tfield{d}x{f}\n"));
            for s in 0..c.subfields {
                t.push_str(&format!("{next}\t2\t{fid}\t{d}-{f}-{s}\t1\tsub{d}x{f}x{s}\n"));
                next += 1;
            }
        }
    }
    t
}

fn words(rng: &mut ChaCha8Rng, c: &SynthConfig, leaves_of_doc: &[usize]) -> String {
    (0..c.doc_len)
        .map(|_| {
            if !leaves_of_doc.is_empty() && rng.gen_bool(c.signal) {
                let l = leaves_of_doc[rng.gen_range(0..leaves_of_doc.len())];
                format!("leaf{l}term{}", rng.gen_range(0..c.terms_per_leaf))
            } else {
                FILLER[rng.gen_range(0..FILLER.len())].to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>, CliError> {
    Ok(BufWriter::new(std::fs::File::create(path).map_err(|e| CliError::io(path, e))?))
}

/// Write taxonomy, abstracts, tags, descriptors, citations and a run config
/// into `dir`.
pub fn write_corpus(dir: &Path, c: &SynthConfig) -> Result<SynthCorpus, CliError> {
    if c.disciplines == 0 || c.fields == 0 || c.subfields == 0 || c.terms_per_leaf == 0 || c.doc_len == 0 {
        return Err(CliError::Usage("synthetic taxonomy sizes must be positive".into()));
    }
    for (name, p) in
        [("multi_fraction", c.multi_fraction), ("signal", c.signal), ("within_discipline", c.within_discipline)]
    {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Usage(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let leaves = leaves(c);

    let tax_path = dir.join("taxonomy.tsv");
    std::fs::write(&tax_path, taxonomy_text(c)).map_err(io(&tax_path))?;

    let desc_path = dir.join("descriptors.jsonl");
    let mut out = create(&desc_path)?;
    for (l, leaf) in leaves.iter().enumerate() {
        let text =
            format!("The study of topic{l} is a branch of field {}.", &leaf.code[..leaf.code.rfind('-').unwrap_or(0)]);
        write_descriptor_line(&mut out, &leaf.code, &text, &[format!("topic{l}")]).map_err(io(&desc_path))?;
    }
    out.flush().map_err(io(&desc_path))?;

    // (paper id, leaves) for labeled docs, then unmatched extras
    let mut docs: Vec<Vec<usize>> = Vec::new();
    for l in 0..leaves.len() {
        for _ in 0..c.docs_per_leaf {
            let mut ls = vec![l];
            if leaves.len() > 1 && rng.gen_bool(c.multi_fraction) {
                let mut other = rng.gen_range(0..leaves.len() - 1);
                if other >= l {
                    other += 1;
                }
                ls.push(other);
            }
            docs.push(ls);
        }
    }
    docs.extend((0..c.unmatched).map(|_| Vec::new()));
    docs.shuffle(&mut rng);

    let abs_path = dir.join("abstracts.tsv");
    let fos_path = dir.join("fos.tsv");
    let mut abs = create(&abs_path)?;
    let mut fos = create(&fos_path)?;
    for (i, ls) in docs.iter().enumerate() {
        let id = i as u64 + 1;
        let rec = encode_inverted_index(id, &words(&mut rng, c, ls));
        writeln!(abs, "{}", format_abstract_line(&rec)).map_err(io(&abs_path))?;
        if ls.is_empty() {
            writeln!(fos, "{id}\tmiscellany\t1").map_err(io(&fos_path))?;
        }
        for &l in ls {
            if rng.gen_bool(0.5) {
                writeln!(fos, "{id}\ttopic{l}\t2").map_err(io(&fos_path))?;
            } else {
                writeln!(fos, "{id}\tstudy of topic{l}\t2").map_err(io(&fos_path))?;
            }
        }
    }
    abs.flush().map_err(io(&abs_path))?;
    fos.flush().map_err(io(&fos_path))?;

    let by_discipline: Vec<Vec<u64>> = (0..c.disciplines)
        .map(|d| {
            docs.iter()
                .enumerate()
                .filter(|(_, ls)| ls.first().is_some_and(|&l| leaves[l].discipline == d))
                .map(|(i, _)| i as u64 + 1)
                .collect()
        })
        .collect();
    let cit_path = dir.join("citations.tsv");
    let mut cit = create(&cit_path)?;
    let n = docs.len() as u64;
    let mut n_cit = 0;
    for (i, ls) in docs.iter().enumerate() {
        let id = i as u64 + 1;
        for _ in 0..c.citations_per_doc {
            let own = ls.first().map(|&l| &by_discipline[leaves[l].discipline]);
            let cited = match own {
                Some(pool) if rng.gen_bool(c.within_discipline) => pool[rng.gen_range(0..pool.len())],
                _ => rng.gen_range(1..=n),
            };
            writeln!(cit, "{id}\t{cited}").map_err(io(&cit_path))?;
            n_cit += 1;
        }
    }
    cit.flush().map_err(io(&cit_path))?;

    let config = dir.join("config.toml");
    let toml = format!(
        "seed = {}\n\n[paths]\ntaxonomy = \"taxonomy.tsv\"\nabstracts = \"abstracts.tsv\"\nfos = \"fos.tsv\"\n\
         descriptors = \"descriptors.jsonl\"\ncitations = \"citations.tsv\"\noutput = \"run\"\n",
        c.seed
    );
    std::fs::write(&config, toml).map_err(io(&config))?;
    Ok(SynthCorpus { dir: dir.to_path_buf(), config, papers: docs.len(), citations: n_cit })
}
