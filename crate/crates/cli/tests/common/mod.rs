//! Fixtures and helpers shared by the CLI test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use sciclf::ingest::{encode_inverted_index, format_abstract_line};

pub const PAPER_1: u64 = 2786288045;
pub const PAPER_2: u64 = 2101095530;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn sciclf(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_sciclf")).args(args).output().expect("sciclf runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Run a subcommand against a config and insist on success.
pub fn stage(config: &Path, command: &str, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = sciclf(&args);
    assert_eq!(out.code, 0, "sciclf {args:?} failed: {}", out.stderr);
    out
}

pub const DISCIPLINES: &str = include_str!("../../../core/fixtures/disciplines.tsv");

/// Fields and subfields below disciplines 3, 5 and 43.
pub const TOY_BRANCHES: &str = "\
318\t1\t3\t3-18\t1\tbiological and medical physics
500\t1\t5\t5-0\t1\tanalytical
501\t1\t5\t5-1\t1\torganic
4302\t1\t43\t43-2\t1\tendocrinology
4330\t1\t43\t43-30\t1\tpathology
31800\t2\t318\t3-18-0\t1\tmedical physics
50000\t2\t500\t5-0-0\t1\tspectroscopy
50100\t2\t501\t5-1-0\t1\tsynthesis
430200\t2\t4302\t43-2-0\t1\thormones
433000\t2\t4330\t43-30-0\t1\tgastroenterology
";

pub const TOY_ABSTRACTS: [(u64, &str); 6] = [
    (PAPER_1, "Chapter 1 defines gastroesophageal reflux disease, past and present."),
    (PAPER_2, "Esophageal adenocarcinoma incidence: are we reaching the peak?"),
    (11, "Hormone signalling in the thyroid gland."),
    (12, "A sonnet sequence on the sea."),
    (13, "Notes on the sea and the land."),
    (14, "Land use and the peak of the season."),
];

/// Six abstracts: the two papers of the cited example plus four more, three
/// of which match no descriptor.
pub fn toy(dir: &Path) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("taxonomy.tsv"), format!("{DISCIPLINES}{TOY_BRANCHES}")).unwrap();
    let abstracts: String =
        TOY_ABSTRACTS.iter().map(|(id, text)| format_abstract_line(&encode_inverted_index(*id, text)) + "\n").collect();
    std::fs::write(dir.join("abstracts.tsv"), abstracts).unwrap();
    std::fs::write(
        dir.join("fos.tsv"),
        format!(
            "{PAPER_1}\tpathology\t2\n{PAPER_2}\tbiophysics\t2\n{PAPER_2}\tpathology\t2\n\
             {PAPER_2}\tendocrinology\t2\n11\tendocrinology\t2\n12\tpoetry\t1\n13\tgeography\t1\n"
        ),
    )
    .unwrap();
    std::fs::write(
        dir.join("descriptors.jsonl"),
        "{\"subfield\":\"3-18-0\",\"wikitext\":\"Physics applied to medicine.\",\"topic_nouns\":[\"biophysics\"]}\n\
         {\"subfield\":\"43-2-0\",\"wikitext\":\"The study of hormones.\",\"topic_nouns\":[\"endocrinology\"]}\n\
         {\"subfield\":\"43-30-0\",\"wikitext\":\"Disease of the digestive tract.\",\"topic_nouns\":[\"pathology\"]}\n",
    )
    .unwrap();
    std::fs::write(dir.join("citations.tsv"), format!("{PAPER_1}\t{PAPER_2}\n")).unwrap();
    let config = dir.join("config.toml");
    std::fs::write(
        &config,
        "seed = 1\n[paths]\ntaxonomy = \"taxonomy.tsv\"\nabstracts = \"abstracts.tsv\"\nfos = \"fos.tsv\"\n\
         descriptors = \"descriptors.jsonl\"\ncitations = \"citations.tsv\"\noutput = \"run\"\n",
    )
    .unwrap();
    config
}

/// Every file below `root`, relative and sorted.
pub fn tree_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

/// LMDB's reader lock table holds process ids and is not pipeline output.
pub fn is_output(rel: &Path) -> bool {
    rel.file_name().is_some_and(|n| n != "lock.mdb")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
