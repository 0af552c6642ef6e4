use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sciclf::Mode;
use sciclf_cli::synth::{write_corpus, SynthConfig};
use sciclf_cli::{cmd_analyze, cmd_infer, cmd_ingest, cmd_label, cmd_train, CliError, Overrides, RunConfig, Selection};

#[derive(Parser)]
#[command(name = "sciclf", version, about = "Hierarchical paper classification and citation interfieldness analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Train every scope whose classes sit at this level.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=2))]
    level: Option<u8>,
    /// Train a single scope: `root` or a taxonomy code.
    #[arg(long, global = true, conflicts_with = "level")]
    scope: Option<String>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Clip normalized grids at this value.
    #[arg(long, global = true)]
    truncate: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Decode, tokenize and stage abstracts.
    Ingest,
    /// Weak-label papers and split the corpus.
    Label,
    /// Train node classifiers.
    Train,
    /// Route staged papers through the trained tree.
    Infer,
    /// Build citation matrices and interfieldness scores.
    Analyze,
    /// Write a synthetic corpus and a matching config.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    disciplines: usize,
    #[arg(long, default_value_t = 3)]
    fields: usize,
    #[arg(long, default_value_t = 3)]
    subfields: usize,
    #[arg(long, default_value_t = 200)]
    docs_per_leaf: usize,
    #[arg(long, default_value_t = 0.0)]
    multi_fraction: f64,
    #[arg(long, default_value_t = 540)]
    unmatched: usize,
    #[arg(long, default_value_t = 5)]
    citations_per_doc: usize,
}

fn load_config(g: &Global) -> Result<RunConfig, CliError> {
    let path = g.config.as_ref().ok_or_else(|| CliError::Usage("--config <file> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(&Overrides { mode: g.mode, threshold: g.threshold, truncate: g.truncate, seed: g.seed })?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth(a) => {
            let c = SynthConfig {
                disciplines: a.disciplines,
                fields: a.fields,
                subfields: a.subfields,
                docs_per_leaf: a.docs_per_leaf,
                multi_fraction: a.multi_fraction,
                unmatched: a.unmatched,
                citations_per_doc: a.citations_per_doc,
                seed: g.seed.unwrap_or(0),
                ..SynthConfig::default()
            };
            let corpus = write_corpus(&a.out, &c)?;
            println!(
                "synth: {} papers, {} citations, config {}",
                corpus.papers,
                corpus.citations,
                corpus.config.display()
            );
            Ok(())
        }
        Command::Ingest => cmd_ingest(&load_config(g)?),
        Command::Label => cmd_label(&load_config(g)?),
        Command::Train => {
            let selection = match (&g.level, &g.scope) {
                (Some(l), _) => Selection::Level(*l),
                (_, Some(s)) => Selection::Scope(s.clone()),
                _ => Selection::All,
            };
            cmd_train(&load_config(g)?, &selection)
        }
        Command::Infer => cmd_infer(&load_config(g)?),
        Command::Analyze => cmd_analyze(&load_config(g)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
