//! The pipeline subcommands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sciclf::analytics::{
    aggregate, build_tuples, labels_at_level, net_output, read_citations, row_normalize, score_table, summarize,
    truncate, write_coordinates, write_dense_csv, write_discipline_summary_csv, write_field_scores_csv,
    write_highlights_csv, write_interfield_csv, write_scatter_csv, write_scores_csv, CitationMatrix, Matrix,
};
use sciclf::clf::{
    node_dataset, plug_classifier, read_model, route_hierarchical, train_node, write_model, ClassifierTree, LabeledDoc,
    LinearNode, RunRecord, Scope, SparseVec,
};
use sciclf::ingest::store::{encode_batch, Partition, StoreRoot};
use sciclf::ingest::{decode_inverted_index, normalize_and_tokenize, read_abstracts, vectorize, VocabIndex};
use sciclf::metrics::{evaluate, write_results_csv, ResultRow};
use sciclf::weaklabel::{
    read_annotations, read_descriptors, read_fos, read_split, split_corpus, write_annotations, write_split,
    AnnotatedPaper, Annotation, Annotator, CorpusSplit, LevelFilter, SplitConfig, SplitRole,
};
use sciclf::{Level, Mode, NodeId, Taxonomy};
use serde::Serialize;
use serde_json::json;

use crate::config::{LabelSource, RunConfig};
use crate::run::{hash_file, hex_digest, Manifest, RunDir, Stage};
use crate::CliError;

/// Which node classifiers `train` fits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    All,
    /// Every scope whose classes sit at this level.
    Level(u8),
    /// A single scope, `root` or a taxonomy code.
    Scope(String),
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn settings_hash(value: &impl Serialize) -> String {
    hex_digest(serde_json::to_string(value).expect("settings serialize").as_bytes())
}

fn files<const N: usize>(entries: [(&str, &Path); N]) -> Result<BTreeMap<String, String>, CliError> {
    entries.into_iter().map(|(k, p)| Ok((k.to_string(), hash_file(p)?))).collect()
}

fn load_taxonomy(cfg: &RunConfig) -> Result<Taxonomy, CliError> {
    Ok(Taxonomy::load(cfg.input("taxonomy", &cfg.paths.taxonomy)?)?)
}

fn level_filter(cfg: &RunConfig) -> Result<LevelFilter, CliError> {
    let min_level = cfg
        .label
        .min_level
        .iter()
        .map(|(code, &l)| {
            code.parse::<u32>()
                .map(|c| (c, l))
                .map_err(|_| CliError::Usage(format!("label.min_level: `{code}` is not a discipline code")))
        })
        .collect::<Result<_, _>>()?;
    Ok(LevelFilter { min_level })
}

fn scope_name(tax: &Taxonomy, scope: Scope) -> String {
    match scope {
        Scope::Root => "root".into(),
        Scope::Node(id) => tax.code(id).map(str::to_string).unwrap_or_else(|| id.to_string()),
    }
}

fn parse_scope(tax: &Taxonomy, name: &str) -> Result<Scope, CliError> {
    if name == "root" {
        return Ok(Scope::Root);
    }
    tax.by_code(name)
        .map(Scope::Node)
        .ok_or_else(|| CliError::Usage(format!("--scope `{name}` is neither `root` nor a taxonomy code")))
}

struct LabelFiles {
    annotations: PathBuf,
    split: PathBuf,
}

fn label_files(run: &RunDir) -> LabelFiles {
    let dir = run.root().join("label");
    LabelFiles { annotations: dir.join("annotations.tsv"), split: dir.join("split.tsv") }
}

pub fn cmd_label(cfg: &RunConfig) -> Result<(), CliError> {
    let abstracts = cfg.input("abstracts", &cfg.paths.abstracts)?;
    let fos_path = cfg.input("fos", &cfg.paths.fos)?;
    let desc_path = cfg.input("descriptors", &cfg.paths.descriptors)?;
    let tax = load_taxonomy(cfg)?;
    let filter = level_filter(cfg)?;
    let run = RunDir::open(&cfg.paths.output)?;

    let descriptors = read_descriptors(&desc_path, &tax)?;
    let fos = read_fos(&fos_path)?;
    let ids: BTreeSet<u64> = read_abstracts(&abstracts)?.into_iter().map(|r| r.paper_id).collect();
    let annotator = Annotator::new(&tax, &descriptors, filter);
    let ids: Vec<u64> = ids.into_iter().collect();
    let results: Vec<Annotation> =
        ids.par_iter().map(|&id| annotator.annotate(id, fos.get(&id).map(Vec::as_slice).unwrap_or(&[]))).collect();
    let mut annotated = Vec::new();
    let mut unmatched = Vec::new();
    for r in results {
        match r {
            Annotation::Matched(p) => annotated.push(p),
            Annotation::Unmatched(id) => unmatched.push(id),
        }
    }
    let strata_level = Level::from_index(cfg.label.strata_level).expect("validated level");
    let split = if annotated.is_empty() {
        log::warn!("no paper matched a subfield descriptor; every paper goes to the test pool");
        CorpusSplit { roles: unmatched.iter().map(|&id| (id, SplitRole::Test)).collect(), warnings: Vec::new() }
    } else {
        split_corpus(
            &annotated,
            &unmatched,
            &SplitConfig { validation_fraction: cfg.train.validation_fraction, seed: cfg.seed, strata_level },
        )?
    };

    run.dir("label")?;
    let out = label_files(&run);
    write_file(&out.annotations, |w| write_annotations(w, &annotated, &tax))?;
    write_file(&out.split, |w| write_split(w, &split))?;
    let rate = sciclf::weaklabel::match_rate(annotated.len(), unmatched.len());
    let multi = annotated.iter().filter(|p| p.triplets.len() > 1).count();
    write_json(
        &run.root().join("label/report.json"),
        &json!({
            "papers": ids.len(),
            "matched": annotated.len(),
            "unmatched": unmatched.len(),
            "match_rate": rate,
            "multi_label_papers": multi,
            "train": split.ids(SplitRole::Train).len(),
            "validation": split.ids(SplitRole::Validation).len(),
            "test": split.ids(SplitRole::Test).len(),
            "warnings": split.warnings,
        }),
    )?;
    let mut inputs = files([
        ("taxonomy", &*tax_path(cfg)),
        ("abstracts", &abstracts),
        ("fos", &fos_path),
        ("descriptors", &desc_path),
    ])?;
    inputs.insert("settings".into(), settings_hash(&(&cfg.label, cfg.seed, cfg.train.validation_fraction)));
    let outputs = files([("annotations", &out.annotations), ("split", &out.split)])?;
    run.commit(Stage::Label, &Manifest { stage: Stage::Label.name(), inputs, outputs })?;
    println!("label: {} of {} papers matched, match rate {rate:.4}", annotated.len(), ids.len());
    Ok(())
}

fn tax_path(cfg: &RunConfig) -> PathBuf {
    cfg.paths.taxonomy.clone().unwrap_or_default()
}

fn store_root(cfg: &RunConfig) -> StoreRoot {
    StoreRoot::new(cfg.store_dir()).with_map_size(cfg.ingest.map_size)
}

fn partitions(tax: &Taxonomy) -> Vec<Partition> {
    let mut out: Vec<Partition> =
        tax.disciplines().iter().filter_map(|&d| tax.discipline_code(d)).map(Partition::Discipline).collect();
    out.sort();
    out.push(Partition::Unlabeled);
    out
}

/// Every staged sequence, one per paper.
fn load_staged(cfg: &RunConfig, tax: &Taxonomy) -> Result<BTreeMap<u64, Vec<u32>>, CliError> {
    let root = store_root(cfg);
    let mut out = BTreeMap::new();
    for p in partitions(tax) {
        if let Some(store) = root.open_existing(p)? {
            for seq in store.read_all()? {
                out.insert(seq.paper_id, seq.ids);
            }
        }
    }
    Ok(out)
}

fn vocab_path(run: &RunDir) -> PathBuf {
    run.root().join("ingest/vocab.tsv")
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<(), CliError> {
    let abstracts = cfg.input("abstracts", &cfg.paths.abstracts)?;
    let tax = load_taxonomy(cfg)?;
    let run = RunDir::open(&cfg.paths.output)?;

    let records = read_abstracts(&abstracts)?;
    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert(r.paper_id) {
            return Err(CliError::Data(format!("{}: duplicate paper id {}", abstracts.display(), r.paper_id)));
        }
    }
    let decoded: Vec<Result<Vec<String>, _>> = records
        .par_iter()
        .map(|r| decode_inverted_index(r).map(|text| normalize_and_tokenize(&text, cfg.ingest.max_len)))
        .collect();
    let tokens: Vec<Vec<String>> = decoded.into_iter().collect::<Result<_, _>>()?;

    let labels = match run.manifest(Stage::Label)? {
        Some(_) => {
            let f = label_files(&run);
            Some((read_annotations(&f.annotations, &tax)?, read_split(&f.split)?))
        }
        None => {
            log::warn!("label has not run; every paper is staged as unlabeled");
            None
        }
    };
    let train_ids: BTreeSet<u64> =
        labels.as_ref().map(|(_, s)| s.ids(SplitRole::Train).into_iter().collect()).unwrap_or_default();
    let vocab_corpus: Vec<Vec<String>> = if train_ids.is_empty() {
        tokens.clone()
    } else {
        records.iter().zip(&tokens).filter(|(r, _)| train_ids.contains(&r.paper_id)).map(|(_, t)| t.clone()).collect()
    };
    let vocab = VocabIndex::build(&vocab_corpus, cfg.ingest.vocab_k)?;
    let seqs: Vec<_> =
        records.par_iter().zip(&tokens).map(|(r, t)| vectorize(r.paper_id, t, &vocab, cfg.ingest.max_len)).collect();

    let mut disciplines: BTreeMap<u64, BTreeSet<u32>> = BTreeMap::new();
    if let Some((papers, _)) = &labels {
        for p in papers {
            let codes = p.triplets.iter().filter_map(|t| tax.discipline_code(t.discipline));
            disciplines.entry(p.paper_id).or_default().extend(codes);
        }
    }
    let mut by_partition: BTreeMap<Partition, Vec<_>> = BTreeMap::new();
    for seq in &seqs {
        match disciplines.get(&seq.paper_id) {
            Some(codes) if !codes.is_empty() => {
                for &c in codes {
                    by_partition.entry(Partition::Discipline(c)).or_default().push(seq.clone());
                }
            }
            _ => by_partition.entry(Partition::Unlabeled).or_default().push(seq.clone()),
        }
    }

    let store_dir = cfg.store_dir();
    if store_dir.exists() {
        std::fs::remove_dir_all(&store_dir).map_err(|e| CliError::io(&store_dir, e))?;
    }
    let root = store_root(cfg);
    let mut report_parts = BTreeMap::new();
    let mut store_bytes = Vec::new();
    for (&p, seqs) in &by_partition {
        let batches = root.stage_batches(seqs, p, cfg.ingest.store_batch_size)?;
        let back = root.open(p)?.read_all()?;
        if &back != seqs {
            return Err(CliError::Internal(format!("store {p} did not read back what was staged")));
        }
        store_bytes.extend(p.to_string().as_bytes());
        store_bytes.extend(encode_batch(&back));
        report_parts.insert(p.to_string(), json!({ "papers": seqs.len(), "batches": batches }));
    }

    run.dir("ingest")?;
    let vpath = vocab_path(&run);
    vocab.write(&vpath)?;
    let total_tokens: usize = tokens.iter().map(Vec::len).sum();
    write_json(
        &run.root().join("ingest/report.json"),
        &json!({
            "records": records.len(),
            "tokens": total_tokens,
            "vocab_size": vocab.len(),
            "vocab_hash": format!("{:016x}", vocab.hash()),
            "partitions": report_parts,
        }),
    )?;
    let mut inputs = files([("abstracts", &abstracts)])?;
    if let Some(m) = run.manifest(Stage::Label)? {
        inputs.extend(m.outputs.into_iter().map(|(k, v)| (format!("label.{k}"), v)));
    }
    inputs.insert(
        "settings".into(),
        settings_hash(&(cfg.ingest.vocab_k, cfg.ingest.max_len, cfg.ingest.store_batch_size)),
    );
    let mut outputs = files([("vocab", &vpath)])?;
    outputs.insert("store".into(), hex_digest(&store_bytes));
    run.commit(Stage::Ingest, &Manifest { stage: Stage::Ingest.name(), inputs, outputs })?;
    println!("ingest: {} abstracts staged in {} stores, vocabulary of {}", seqs.len(), by_partition.len(), vocab.len());
    Ok(())
}

fn model_dir(run: &RunDir, mode: Mode) -> PathBuf {
    run.root().join(format!("train/{mode}/models"))
}

/// Every model file present for `mode`, checked against the vocabulary.
fn load_tree(run: &RunDir, tax: &Taxonomy, mode: Mode, vocab: &VocabIndex) -> Result<ClassifierTree, CliError> {
    let dir = model_dir(run, mode);
    let mut tree = ClassifierTree::new(mode, vocab.len());
    for scope in Scope::trainable(tax) {
        let path = dir.join(format!("{}.bin", scope_name(tax, scope)));
        if !path.exists() {
            continue;
        }
        let mut f = File::open(&path).map_err(|e| CliError::io(&path, e))?;
        let node = read_model(&mut f, vocab.hash()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if node.scope != scope {
            return Err(CliError::Data(format!("{}: file holds the model for scope {}", path.display(), node.scope)));
        }
        plug_classifier(&mut tree, tax, scope, Box::new(node))?;
    }
    Ok(tree)
}

fn labeled_docs(
    papers: &[AnnotatedPaper],
    split: &CorpusSplit,
    role: SplitRole,
    staged: &BTreeMap<u64, Vec<u32>>,
    dim: usize,
) -> Result<Vec<LabeledDoc>, CliError> {
    papers
        .iter()
        .filter(|p| split.role(p.paper_id) == Some(role))
        .map(|p| {
            let ids = staged.get(&p.paper_id).ok_or_else(|| {
                CliError::Data(format!("paper {} is labeled but not staged; rerun `sciclf ingest`", p.paper_id))
            })?;
            Ok(LabeledDoc { paper_id: p.paper_id, x: SparseVec::bag_of_words(ids, dim), triplets: p.triplets.clone() })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct LevelAccuracy {
    level: u8,
    examples: usize,
    categorical_accuracy: Option<f64>,
}

pub fn cmd_train(cfg: &RunConfig, selection: &Selection) -> Result<(), CliError> {
    let tax = load_taxonomy(cfg)?;
    let run = RunDir::open(&cfg.paths.output)?;
    let label_m = run.require(Stage::Label, "label")?;
    let ingest_m = run.require(Stage::Ingest, "ingest")?;
    let mode = cfg.mode;

    let scopes: Vec<Scope> = match selection {
        Selection::All => Scope::trainable(&tax),
        Selection::Level(l) => {
            let level =
                Level::from_index(*l).ok_or_else(|| CliError::Usage(format!("--level must be 0, 1 or 2, got {l}")))?;
            Scope::trainable(&tax).into_iter().filter(|s| s.child_level(&tax).ok() == Some(level)).collect()
        }
        Selection::Scope(name) => {
            let scope = parse_scope(&tax, name)?;
            if !Scope::trainable(&tax).contains(&scope) {
                return Err(CliError::Usage(format!("scope `{name}` has fewer than two children and needs no model")));
            }
            vec![scope]
        }
    };

    let vocab = VocabIndex::read(&vocab_path(&run))?;
    let dim = vocab.len();
    let f = label_files(&run);
    let papers = read_annotations(&f.annotations, &tax)?;
    let split = read_split(&f.split)?;
    let staged = load_staged(cfg, &tax)?;
    let train_docs = labeled_docs(&papers, &split, SplitRole::Train, &staged, dim)?;
    let val_docs = labeled_docs(&papers, &split, SplitRole::Validation, &staged, dim)?;

    let trained: Vec<(Scope, Option<(LinearNode, RunRecord)>)> = scopes
        .par_iter()
        .map(|&scope| {
            let n = scope.classes(&tax)?.len();
            let data = node_dataset(&tax, mode, scope, &train_docs)?;
            if data.is_empty() {
                log::warn!("scope {}: no training papers, skipping", scope_name(&tax, scope));
                return Ok((scope, None));
            }
            Ok((scope, Some(train_node(LinearNode::new(scope, mode, n, dim), &data, &cfg.train)?)))
        })
        .collect::<Result<_, sciclf::clf::ClfError>>()?;

    let models = run.dir(format!("train/{mode}/models"))?;
    let runs = run.dir(format!("train/{mode}/runs"))?;
    let mut skipped = Vec::new();
    for (scope, result) in &trained {
        let name = scope_name(&tax, *scope);
        let (mpath, rpath) = (models.join(format!("{name}.bin")), runs.join(format!("{name}.ndjson")));
        match result {
            Some((node, record)) => {
                let mut bytes = Vec::new();
                write_model(&mut bytes, node, vocab.hash())?;
                std::fs::write(&mpath, bytes).map_err(|e| CliError::io(&mpath, e))?;
                write_file(&rpath, |w| record.write_ndjson(w))?;
            }
            None => {
                skipped.push(name);
                for p in [&mpath, &rpath] {
                    if p.exists() {
                        std::fs::remove_file(p).map_err(|e| CliError::io(p, e))?;
                    }
                }
            }
        }
    }

    let tree = load_tree(&run, &tax, mode, &vocab)?;
    let architecture = match mode {
        Mode::Single => "linear-softmax",
        Mode::Multi => "linear-sigmoid",
    };
    let mut rows = Vec::new();
    let mut pooled = [(0usize, 0.0f64); 3];
    for node in tree.nodes() {
        let data = node_dataset(&tax, mode, node.scope, &val_docs)?;
        if data.is_empty() {
            continue;
        }
        let preds = data.iter().map(|e| node.model.forward(&e.x)).collect::<Result<Vec<_>, _>>()?;
        let truths: Vec<Vec<u8>> = data.iter().map(|e| e.y.iter().map(|&v| u8::from(v > 0.5)).collect()).collect();
        let report = evaluate(&preds, &truths, mode, cfg.train.threshold)?;
        let level = node.scope.child_level(&tax)?.index();
        pooled[level].0 += data.len();
        pooled[level].1 += report.categorical_accuracy * data.len() as f64;
        rows.push(ResultRow {
            model_id: scope_name(&tax, node.scope),
            level: level as u8,
            architecture: architecture.into(),
            accuracy: report.categorical_accuracy,
            precision: report.precision,
            recall: report.recall,
        });
    }
    let levels: Vec<LevelAccuracy> = pooled
        .iter()
        .enumerate()
        .map(|(l, &(n, hits))| LevelAccuracy {
            level: l as u8,
            examples: n,
            categorical_accuracy: (n > 0).then(|| hits / n as f64),
        })
        .collect();
    let hierarchical = match mode {
        Mode::Single => routed_accuracy(&tree, &tax, &val_docs, cfg.train.threshold),
        Mode::Multi => None,
    };

    let out = run.dir(format!("train/{mode}"))?;
    write_file(&out.join("results.csv"), |w| write_results_csv(w, &rows))?;
    let selected: Vec<String> = scopes.iter().map(|&s| scope_name(&tax, s)).collect();
    write_json(
        &out.join("report.json"),
        &json!({
            "mode": mode,
            "selected": selected,
            "skipped": skipped,
            "models": tree.len(),
            "train_papers": train_docs.len(),
            "validation_papers": val_docs.len(),
            "levels": levels,
            "hierarchical_accuracy": hierarchical,
        }),
    )?;

    let mut inputs: BTreeMap<String, String> = BTreeMap::new();
    inputs.extend(label_m.outputs.into_iter().map(|(k, v)| (format!("label.{k}"), v)));
    inputs.extend(ingest_m.outputs.into_iter().map(|(k, v)| (format!("ingest.{k}"), v)));
    inputs.insert("settings".into(), settings_hash(&cfg.train));
    let mut outputs = BTreeMap::new();
    for scope in Scope::trainable(&tax) {
        let name = scope_name(&tax, scope);
        let p = models.join(format!("{name}.bin"));
        if p.exists() {
            outputs.insert(format!("model.{name}"), hash_file(&p)?);
        }
    }
    let stage = Stage::Train(mode);
    run.commit(stage, &Manifest { stage: stage.name(), inputs, outputs })?;
    let summary: Vec<String> =
        levels.iter().filter_map(|l| l.categorical_accuracy.map(|a| format!("level {} {a:.4}", l.level))).collect();
    println!(
        "train {mode}: {} of {} selected scopes trained; validation accuracy {}",
        trained.len() - skipped.len(),
        trained.len(),
        summary.join(", ")
    );
    Ok(())
}

/// Share of validation papers whose routed path agrees with the primary
/// label down to each level.
fn routed_accuracy(tree: &ClassifierTree, tax: &Taxonomy, docs: &[LabeledDoc], threshold: f64) -> Option<[f64; 3]> {
    if docs.is_empty() {
        return None;
    }
    let mut hits = [0usize; 3];
    for doc in docs {
        let routed = match route_hierarchical(tree, tax, &doc.x, threshold) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("hierarchical accuracy unavailable: {e}");
                return None;
            }
        };
        let (Some(r), Some(truth)) = (routed.first(), doc.triplets.first()) else { continue };
        let ok = [
            r.triplet.discipline == truth.discipline,
            r.triplet.field == truth.field,
            r.triplet.subfield == truth.subfield,
        ];
        for l in 0..3 {
            if ok[..=l].iter().all(|&b| b) {
                hits[l] += 1;
            }
        }
    }
    Some(hits.map(|h| h as f64 / docs.len() as f64))
}

fn predictions_path(run: &RunDir, mode: Mode) -> PathBuf {
    run.root().join(format!("infer/{mode}/predictions.tsv"))
}

pub fn cmd_infer(cfg: &RunConfig) -> Result<(), CliError> {
    let tax = load_taxonomy(cfg)?;
    let run = RunDir::open(&cfg.paths.output)?;
    let mode = cfg.mode;
    run.require(Stage::Ingest, "ingest")?;
    let train_m = run.require(Stage::Train(mode), &format!("train --mode {mode}"))?;
    let vocab = VocabIndex::read(&vocab_path(&run))?;
    let tree = load_tree(&run, &tax, mode, &vocab)?;
    let staged: Vec<(u64, Vec<u32>)> = load_staged(cfg, &tax)?.into_iter().collect();
    let threshold = cfg.train.threshold;
    let routed: Vec<_> = staged
        .par_iter()
        .map(|(_, ids)| route_hierarchical(&tree, &tax, &SparseVec::bag_of_words(ids, vocab.len()), threshold))
        .collect();
    let routed: Vec<_> = routed.into_iter().collect::<Result<_, _>>()?;

    run.dir(format!("infer/{mode}"))?;
    let path = predictions_path(&run, mode);
    let code = |id: NodeId| tax.code(id).unwrap_or("-");
    write_file(&path, |w| {
        for ((id, _), triplets) in staged.iter().zip(&routed) {
            for t in triplets {
                let p = &t.triplet;
                writeln!(w, "{id}\t{}\t{}\t{}\t{}", code(p.discipline), code(p.field), code(p.subfield), t.joint)?;
            }
        }
        Ok(())
    })?;
    let n_triplets: usize = routed.iter().map(Vec::len).sum();
    let empty = routed.iter().filter(|r| r.is_empty()).count();
    write_json(
        &run.root().join(format!("infer/{mode}/report.json")),
        &json!({
            "mode": mode,
            "threshold": threshold,
            "papers": staged.len(),
            "triplets": n_triplets,
            "papers_without_prediction": empty,
        }),
    )?;
    let mut inputs: BTreeMap<String, String> =
        train_m.outputs.into_iter().map(|(k, v)| (format!("train.{k}"), v)).collect();
    inputs.insert("threshold".into(), threshold.to_string());
    let stage = Stage::Infer(mode);
    run.commit(stage, &Manifest { stage: stage.name(), inputs, outputs: files([("predictions", &path)])? })?;
    println!("infer {mode}: {n_triplets} triplets for {} papers ({empty} without a prediction)", staged.len());
    Ok(())
}

fn normalized_grid(m: &Matrix<f64>, clip: Option<f64>) -> Matrix<f64> {
    let n = row_normalize(m).matrix;
    match clip {
        Some(t) => truncate(&n, t),
        None => n,
    }
}

fn zero_row_codes(tax: &Taxonomy, m: &CitationMatrix) -> Vec<String> {
    let i = row_normalize(&m.counts.to_f64());
    i.zero_rows.iter().map(|&r| tax.code(m.labels[r]).unwrap_or("-").to_string()).collect()
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<(), CliError> {
    let citations = cfg.input("citations", &cfg.paths.citations)?;
    let tax = load_taxonomy(cfg)?;
    let run = RunDir::open(&cfg.paths.output)?;
    let (labels_path, labels_stage) = match cfg.analyze.labels {
        LabelSource::Annotations => {
            run.require(Stage::Label, "label")?;
            (label_files(&run).annotations, "annotations")
        }
        LabelSource::Predictions => {
            run.require(Stage::Infer(cfg.mode), &format!("infer --mode {}", cfg.mode))?;
            (predictions_path(&run, cfg.mode), "predictions")
        }
    };
    let papers = read_annotations(&labels_path, &tax)?;
    let edges = read_citations(&citations)?;
    let field_labels = labels_at_level(&papers, Level::Field)?;
    let disc_labels = labels_at_level(&papers, Level::Discipline)?;
    let (ft, fstats) = build_tuples(&edges, &field_labels);
    let (dt, dstats) = build_tuples(&edges, &disc_labels);
    let fm = aggregate(&tax, Level::Field, &ft)?;
    let dm = aggregate(&tax, Level::Discipline, &dt)?;

    let dir = run.dir("analyze")?;
    let mut written: Vec<(String, PathBuf)> = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<(), CliError> {
        let path = dir.join(name);
        write_file(&path, |w| f(w))?;
        written.push((name.to_string(), path));
        Ok(())
    };
    let clip = cfg.analyze.truncate;
    for (prefix, m) in [("field", &fm), ("discipline", &dm)] {
        let i0 = m.counts.to_f64();
        let o0 = m.output().to_f64();
        let (_, net) = net_output(&m.counts, &m.output())?;
        emit(&format!("{prefix}_counts.tsv"), &|w| write_coordinates(w, &tax, &m.labels, &m.counts))?;
        emit(&format!("{prefix}_counts.csv"), &|w| write_dense_csv(w, &tax, &m.labels, &m.counts))?;
        emit(&format!("{prefix}_input.csv"), &|w| write_dense_csv(w, &tax, &m.labels, &normalized_grid(&i0, clip)))?;
        emit(&format!("{prefix}_output.csv"), &|w| write_dense_csv(w, &tax, &m.labels, &normalized_grid(&o0, clip)))?;
        let net = match clip {
            Some(t) => truncate(&net.matrix, t),
            None => net.matrix,
        };
        emit(&format!("{prefix}_net_output.csv"), &|w| write_dense_csv(w, &tax, &m.labels, &net))?;
    }
    let table = score_table(&fm, cfg.analyze.averaging)?;
    emit("scores.csv", &|w| write_scores_csv(w, &tax, &table))?;
    emit("field_scores.csv", &|w| write_field_scores_csv(w, &tax, &table))?;
    let summary = summarize(&tax, &disc_labels, &fm, &dm)?;
    emit("discipline_summary.csv", &|w| write_discipline_summary_csv(w, &tax, &summary))?;
    emit("interfield.csv", &|w| write_interfield_csv(w, &tax, &summary.interfield))?;
    emit("field_scatter.csv", &|w| write_scatter_csv(w, &tax, &summary.field_scatter))?;
    emit("discipline_scatter.csv", &|w| write_scatter_csv(w, &tax, &summary.discipline_scatter))?;
    let out_norm = row_normalize(&dm.output().to_f64()).matrix;
    emit("highlights.csv", &|w| write_highlights_csv(w, &tax, &dm.labels, &out_norm, cfg.analyze.highlight))?;

    write_json(
        &dir.join("report.json"),
        &json!({
            "labels": labels_stage,
            "papers": papers.len(),
            "field_tuples": fstats,
            "discipline_tuples": dstats,
            "missing_field_scores": table.missing,
            "boundary_hits": table.boundary_hits,
            "averaging": cfg.analyze.averaging,
            "truncate": clip,
            "highlight": cfg.analyze.highlight,
            "field_zero_rows": zero_row_codes(&tax, &fm),
            "discipline_zero_rows": zero_row_codes(&tax, &dm),
        }),
    )?;
    let mut inputs = files([("citations", &citations), ("labels", &labels_path)])?;
    inputs.insert("settings".into(), settings_hash(&cfg.analyze));
    let outputs = written.iter().map(|(k, p)| Ok((k.clone(), hash_file(p)?))).collect::<Result<_, CliError>>()?;
    run.commit(Stage::Analyze, &Manifest { stage: Stage::Analyze.name(), inputs, outputs })?;
    println!(
        "analyze: {} field tuples, {} discipline tuples from {} edges ({} self-citations, {} duplicates dropped)",
        fstats.tuples, dstats.tuples, fstats.input_edges, fstats.self_citations, fstats.duplicate_edges
    );
    Ok(())
}
