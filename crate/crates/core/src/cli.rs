//! Command-line front end. Every stage reads and writes files only, prints a
//! one-line JSON summary on stdout and leaves a `*.snapshot.json` beside its
//! main output with the parameters and SHA-256 digests of inputs and outputs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 invariant violation.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classifier::{self, LinearModel, TrainConfig};
use crate::corpus::{self, CsvSchema, Document, SplitSpec};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics;
use crate::pipeline::{self, PipelineConfig};
use crate::tfidf::{self, FilterSpec, IdfTable, PreprocessConfig, ScoreOptions, TermCounts};
use crate::wordpiece::{self, AuditParams, AugmentationReport};

#[derive(Debug, Parser)]
#[command(name = "lexfilt", version, about = "TF-IDF training-set filtering and WordPiece vocabulary augmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a labeled CSV, collapse labels to binary, write corpus.csv and stats.json
    Ingest(IngestArgs),
    /// Stratified train/test split of an ingested corpus
    Split(SplitArgs),
    /// Fit the IDF table on the training pool
    FitIdf(FitIdfArgs),
    /// Aggregate TF-IDF score per training document
    Score(ScoreArgs),
    /// Keep the top-scoring fraction of documents
    Filter(FilterArgs),
    /// List frequent words the vocabulary splits into many pieces
    Audit(AuditArgs),
    /// Append whole-word tokens to a vocabulary
    Augment(AugmentArgs),
    /// Train the logistic-regression baseline
    TrainBaseline(TrainArgs),
    /// Evaluate a trained baseline on a document set
    Evaluate(EvaluateArgs),
    /// Run split, scoring, filtering, training and evaluation for the whole ladder
    Ladder(LadderArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, env = "LEXFILT_INPUT")]
    pub input: PathBuf,
    #[arg(long, env = "LEXFILT_OUT_DIR")]
    pub out_dir: PathBuf,
    #[arg(long, env = "LEXFILT_CLASS_COLUMN", default_value = "class")]
    pub class_column: String,
    #[arg(long, env = "LEXFILT_TEXT_COLUMN", default_value = "tweet")]
    pub text_column: String,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long, env = "LEXFILT_OUT_DIR")]
    pub out_dir: PathBuf,
    #[arg(long, env = "LEXFILT_TEST_FRACTION", default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, env = "LEXFILT_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "LEXFILT_NO_STRATIFY")]
    pub no_stratify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[arg(long, env = "LEXFILT_NO_LOWERCASE")]
    pub no_lowercase: bool,
    #[arg(long, env = "LEXFILT_KEEP_URLS")]
    pub keep_urls: bool,
    #[arg(long, env = "LEXFILT_KEEP_MENTIONS")]
    pub keep_mentions: bool,
    /// One stopword per line
    #[arg(long, env = "LEXFILT_STOPWORDS")]
    pub stopwords: Option<PathBuf>,
}

impl PreprocessArgs {
    fn config(&self) -> Result<PreprocessConfig> {
        let stopwords: BTreeSet<String> = match &self.stopwords {
            Some(p) => io::read_to_string(p)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| if self.no_lowercase { l.to_string() } else { l.to_lowercase() })
                .collect(),
            None => BTreeSet::new(),
        };
        Ok(PreprocessConfig {
            lowercase: !self.no_lowercase,
            strip_urls: !self.keep_urls,
            strip_mentions: !self.keep_mentions,
            stopwords,
            ..PreprocessConfig::default()
        })
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.stopwords.iter().cloned().collect()
    }
}

#[derive(Debug, Args)]
pub struct FitIdfArgs {
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: PathBuf,
    /// Manifest of the training pool (any CSV with a doc_id column)
    #[arg(long, env = "LEXFILT_TRAIN")]
    pub train: PathBuf,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
    /// Fit on every document in the corpus, test set included
    #[arg(long, env = "LEXFILT_FIT_ON_FULL")]
    pub fit_on_full: bool,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long, env = "LEXFILT_TRAIN")]
    pub train: PathBuf,
    #[arg(long, env = "LEXFILT_IDF")]
    pub idf: PathBuf,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "LEXFILT_NORMALIZE_BY_LENGTH")]
    pub normalize_by_length: bool,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long, env = "LEXFILT_SCORES")]
    pub scores: PathBuf,
    #[arg(long, env = "LEXFILT_RETAIN")]
    pub retain: f64,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
    /// Corpus to pull texts from when exporting
    #[arg(long, env = "LEXFILT_CORPUS", requires = "export")]
    pub corpus: Option<PathBuf>,
    /// Write the retained documents as doc_id,label,text
    #[arg(long, env = "LEXFILT_EXPORT", requires = "corpus")]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: PathBuf,
    /// Restrict the audit to the documents in this manifest
    #[arg(long, env = "LEXFILT_DOCS")]
    pub docs: Option<PathBuf>,
    #[arg(long, env = "LEXFILT_VOCAB")]
    pub vocab: PathBuf,
    #[arg(long, env = "LEXFILT_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "LEXFILT_MIN_FREQUENCY", default_value_t = 10)]
    pub min_frequency: u64,
    #[arg(long, env = "LEXFILT_MIN_FRAGMENTS", default_value_t = 3)]
    pub min_fragments: usize,
    /// Split punctuation inside words before counting
    #[arg(long, env = "LEXFILT_SPLIT_PUNCTUATION")]
    pub split_punctuation: bool,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long, env = "LEXFILT_VOCAB")]
    pub vocab: PathBuf,
    /// Audit report whose candidates are added in order
    #[arg(long, env = "LEXFILT_CANDIDATES", conflicts_with = "terms", required_unless_present = "terms")]
    pub candidates: Option<PathBuf>,
    /// Plain term list, one per line
    #[arg(long, env = "LEXFILT_TERMS")]
    pub terms: Option<PathBuf>,
    /// Only the first N terms
    #[arg(long, env = "LEXFILT_MAX_TERMS")]
    pub max_terms: Option<usize>,
    /// Number of original tokens when the input vocabulary is already augmented
    #[arg(long, env = "LEXFILT_BASE_SIZE")]
    pub base_size: Option<usize>,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "LEXFILT_REPORT")]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainParams {
    #[arg(long, env = "LEXFILT_EPOCHS", default_value_t = 3)]
    pub epochs: usize,
    #[arg(long, env = "LEXFILT_BATCH_SIZE", default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, env = "LEXFILT_LEARNING_RATE", default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, env = "LEXFILT_L2", default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long = "train-seed", env = "LEXFILT_TRAIN_SEED", default_value_t = 0)]
    pub train_seed: u64,
}

impl TrainParams {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            l2_penalty: self.l2,
            seed: self.train_seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: PathBuf,
    /// Training documents (split manifest, filter manifest or export)
    #[arg(long, env = "LEXFILT_TRAIN")]
    pub train: PathBuf,
    #[arg(long, env = "LEXFILT_IDF")]
    pub idf: PathBuf,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "LEXFILT_LOG")]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub params: TrainParams,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long, env = "LEXFILT_TEST")]
    pub test: PathBuf,
    #[arg(long, env = "LEXFILT_IDF")]
    pub idf: PathBuf,
    #[arg(long, env = "LEXFILT_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "LEXFILT_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    /// Raw labeled CSV
    #[arg(long, env = "LEXFILT_INPUT", conflicts_with = "corpus", required_unless_present = "corpus")]
    pub input: Option<PathBuf>,
    /// Already ingested corpus.csv
    #[arg(long, env = "LEXFILT_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long, env = "LEXFILT_OUT_DIR")]
    pub out_dir: PathBuf,
    #[arg(long, env = "LEXFILT_CLASS_COLUMN", default_value = "class")]
    pub class_column: String,
    #[arg(long, env = "LEXFILT_TEXT_COLUMN", default_value = "tweet")]
    pub text_column: String,
    #[arg(long, env = "LEXFILT_LADDER", value_delimiter = ',', default_values_t = pipeline::DEFAULT_LADDER)]
    pub ladder: Vec<f64>,
    #[arg(long, env = "LEXFILT_TEST_FRACTION", default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, env = "LEXFILT_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "LEXFILT_FIT_ON_FULL")]
    pub fit_on_full: bool,
    #[arg(long, env = "LEXFILT_NORMALIZE_BY_LENGTH")]
    pub normalize_by_length: bool,
    #[arg(long, env = "LEXFILT_REPETITIONS", default_value_t = 1)]
    pub repetitions: usize,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    #[command(flatten)]
    pub params: TrainParams,
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

fn digests(paths: &[&Path]) -> Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.display().to_string(),
                sha256: io::sha256_file(p)?,
            })
        })
        .collect()
}

fn snapshot_path(primary: &Path) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    primary.with_file_name(format!("{stem}.snapshot.json"))
}

/// Parameters plus input/output digests, written next to `primary`.
fn write_snapshot(subcommand: &str, params: Value, inputs: &[&Path], outputs: &[&Path], primary: &Path) -> Result<()> {
    let snapshot = json!({
        "tool": "lexfilt",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "params": params,
        "inputs": digests(inputs)?,
        "outputs": digests(outputs)?,
    });
    io::write_json(snapshot_path(primary), &snapshot)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_subset(corpus: &Path, manifest: &Path) -> Result<Vec<Document>> {
    let docs = corpus::read_corpus(corpus)?;
    let ids = corpus::read_doc_ids(manifest)?;
    corpus::select(&docs, &ids).map_err(|e| e.with_path(manifest))
}

fn ingest(args: &IngestArgs) -> Result<Value> {
    let schema = CsvSchema {
        class_column: args.class_column.clone(),
        text_column: args.text_column.clone(),
    };
    let loaded = corpus::load_csv(&args.input, &schema)?;
    let docs = corpus::to_binary(&loaded.records);
    let stats = corpus::corpus_stats(&loaded.records)?;
    ensure_dir(&args.out_dir)?;
    let corpus_path = args.out_dir.join("corpus.csv");
    let stats_path = args.out_dir.join("stats.json");
    corpus::write_corpus(&corpus_path, &docs)?;
    io::write_json(&stats_path, &corpus::StatsReport::new(&stats, loaded.skipped))?;
    write_snapshot(
        "ingest",
        json!({ "schema": schema }),
        &[&args.input],
        &[&corpus_path, &stats_path],
        &corpus_path,
    )?;
    if loaded.skipped.total() > 0 {
        eprintln!("warning: skipped {} row(s): {:?}", loaded.skipped.total(), loaded.skipped);
    }
    Ok(json!({
        "subcommand": "ingest",
        "records": docs.len(),
        "skipped": loaded.skipped.total(),
        "corpus": corpus_path,
        "stats": stats_path,
    }))
}

fn split(args: &SplitArgs) -> Result<Value> {
    let spec = SplitSpec {
        test_fraction: args.test_fraction,
        seed: args.seed,
        stratified: !args.no_stratify,
    };
    let docs = corpus::read_corpus(&args.corpus)?;
    let split = corpus::stratified_split(&docs, &spec)?;
    ensure_dir(&args.out_dir)?;
    let train = args.out_dir.join("train.csv");
    let test = args.out_dir.join("test.csv");
    corpus::write_split_manifest(&train, &split.train)?;
    corpus::write_split_manifest(&test, &split.test)?;
    write_snapshot("split", json!({ "split": spec }), &[&args.corpus], &[&train, &test], &train)?;
    Ok(json!({
        "subcommand": "split",
        "train": split.train.len(),
        "test": split.test.len(),
        "train_manifest": train,
        "test_manifest": test,
    }))
}

fn fit_idf(args: &FitIdfArgs) -> Result<Value> {
    let config = args.preprocess.config()?;
    let docs = if args.fit_on_full {
        corpus::read_corpus(&args.corpus)?
    } else {
        load_subset(&args.corpus, &args.train)?
    };
    let table = IdfTable::fit_documents(&docs, config.clone())?;
    table.save(&args.out)?;
    let mut inputs: Vec<PathBuf> = vec![args.corpus.clone(), args.train.clone()];
    inputs.extend(args.preprocess.inputs());
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    write_snapshot(
        "fit-idf",
        json!({ "fit_on_full": args.fit_on_full, "preprocess": config }),
        &inputs,
        &[&args.out],
        &args.out,
    )?;
    Ok(json!({
        "subcommand": "fit-idf",
        "n_docs": table.n_docs(),
        "terms": table.len(),
        "fit_on_full": args.fit_on_full,
        "out": args.out,
    }))
}

fn score(args: &ScoreArgs) -> Result<Value> {
    let table = IdfTable::load(&args.idf)?;
    let docs = load_subset(&args.corpus, &args.train)?;
    let options = ScoreOptions {
        normalize_by_length: args.normalize_by_length,
    };
    let bags: Vec<TermCounts> = docs.iter().map(|d| TermCounts::from_document(d, table.config())).collect();
    let scores = tfidf::score_all(&bags, &table, options);
    tfidf::write_scores(&args.out, &scores)?;
    write_snapshot(
        "score",
        json!({ "options": options, "preprocess": table.config() }),
        &[&args.corpus, &args.train, &args.idf],
        &[&args.out],
        &args.out,
    )?;
    let min = scores.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
    let max = scores.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({
        "subcommand": "score",
        "documents": scores.len(),
        "min_score": if scores.is_empty() { Value::Null } else { json!(min) },
        "max_score": if scores.is_empty() { Value::Null } else { json!(max) },
        "out": args.out,
    }))
}

fn filter(args: &FilterArgs) -> Result<Value> {
    let spec = FilterSpec::new(args.retain)?;
    let scores = tfidf::read_scores(&args.scores)?;
    let ranked = tfidf::rank_and_filter(&scores, spec)?;
    tfidf::write_filter_manifest(&args.out, &ranked)?;
    let mut inputs: Vec<&Path> = vec![&args.scores];
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let (Some(corpus_path), Some(export)) = (&args.corpus, &args.export) {
        let docs = corpus::read_corpus(corpus_path)?;
        let ids: Vec<u64> = ranked.iter().map(|r| r.doc_id).collect();
        let kept = corpus::select(&docs, &ids).map_err(|e| e.with_path(&args.scores))?;
        corpus::write_export(export, &kept)?;
        inputs.push(corpus_path);
        outputs.push(export);
    }
    write_snapshot("filter", json!({ "filter": spec }), &inputs, &outputs, &args.out)?;
    Ok(json!({
        "subcommand": "filter",
        "input": scores.len(),
        "retained": ranked.len(),
        "retain": args.retain,
        "out": args.out,
    }))
}

fn audit(args: &AuditArgs) -> Result<Value> {
    let docs = match &args.docs {
        Some(m) => load_subset(&args.corpus, m)?,
        None => corpus::read_corpus(&args.corpus)?,
    };
    let vocab = wordpiece::load_vocab(&args.vocab)?;
    let lexicon = args.lexicon.as_ref().map(wordpiece::load_lexicon).transpose()?;
    let params = AuditParams {
        min_frequency: args.min_frequency,
        min_fragments: args.min_fragments,
        raw_words: !args.split_punctuation,
    };
    let report = wordpiece::fragmentation_audit(&docs, &vocab, lexicon.as_deref(), &params)?;
    io::write_json(&args.out, &report)?;
    let mut inputs: Vec<&Path> = vec![&args.corpus, &args.vocab];
    inputs.extend(args.docs.as_deref());
    inputs.extend(args.lexicon.as_deref());
    write_snapshot("audit", json!({ "audit": params }), &inputs, &[&args.out], &args.out)?;
    Ok(json!({
        "subcommand": "audit",
        "documents": docs.len(),
        "candidates": report.candidates.len(),
        "out": args.out,
    }))
}

fn augment(args: &AugmentArgs) -> Result<Value> {
    let mut vocab = wordpiece::load_vocab(&args.vocab)?;
    if let Some(base) = args.base_size {
        vocab = vocab.with_added_from(base)?;
    }
    let (mut terms, audit_report): (Vec<String>, Option<AugmentationReport>) = match (&args.candidates, &args.terms) {
        (Some(p), _) => {
            let r: AugmentationReport = io::read_json(p)?;
            (r.candidates.iter().map(|c| c.term.clone()).collect(), Some(r))
        }
        (None, Some(p)) => (wordpiece::load_lexicon(p)?, None),
        (None, None) => return Err(Error::Usage("one of --candidates or --terms is required".into())),
    };
    if let Some(n) = args.max_terms {
        terms.truncate(n);
    }
    let (augmented, mut report) = wordpiece::augment(&vocab, &terms)?;
    if let Some(audit) = audit_report {
        report.candidates = audit.candidates;
        let mut skipped = audit.skipped;
        skipped.append(&mut report.skipped);
        report.skipped = skipped;
        report.params = wordpiece::ReportParams {
            vocab_size: report.params.vocab_size,
            augmented_vocab_size: report.params.augmented_vocab_size,
            ..audit.params
        };
    }
    wordpiece::save_vocab(&augmented, &args.out)?;
    io::write_json(&args.report, &report)?;
    let source = args.candidates.as_deref().or(args.terms.as_deref()).expect("validated above");
    write_snapshot(
        "augment",
        json!({ "max_terms": args.max_terms, "base_size": vocab.base_len() }),
        &[&args.vocab, source],
        &[&args.out, &args.report],
        &args.out,
    )?;
    Ok(json!({
        "subcommand": "augment",
        "added": report.added.len(),
        "skipped": report.skipped.len(),
        "vocab_size": augmented.len(),
        "out": args.out,
    }))
}

fn train_baseline(args: &TrainArgs) -> Result<Value> {
    let config = args.params.config();
    let table = IdfTable::load(&args.idf)?;
    let mut docs = load_subset(&args.corpus, &args.train)?;
    docs.sort_by_key(|d| d.doc_id);
    let bags = pipeline::bags(&docs, table.config());
    let outcome = classifier::train(&bags, &table, &config)?;
    outcome.model.save(&args.out)?;
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(log) = &args.log {
        classifier::write_training_log(log, &outcome.log)?;
    }
    // the log carries wall-clock times, so it is left out of the digests
    outputs.truncate(1);
    write_snapshot(
        "train-baseline",
        json!({ "train": config }),
        &[&args.corpus, &args.train, &args.idf],
        &outputs,
        &args.out,
    )?;
    Ok(json!({
        "subcommand": "train-baseline",
        "documents": docs.len(),
        "dimension": outcome.model.dimension(),
        "seconds": outcome.seconds,
        "final_loss": outcome.log.last().map(|e| e.mean_loss),
        "out": args.out,
    }))
}

fn evaluate(args: &EvaluateArgs) -> Result<Value> {
    let table = IdfTable::load(&args.idf)?;
    let model = LinearModel::load(&args.model)?;
    if model.dimension() != table.len() {
        return Err(Error::Invariant(format!(
            "model dimension {} does not match IDF table with {} terms",
            model.dimension(),
            table.len()
        )));
    }
    let docs = load_subset(&args.corpus, &args.test)?;
    let bags = pipeline::bags(&docs, table.config());
    let report = classifier::evaluate(&model, &bags, &table)?;
    io::write_json(&args.out, &report)?;
    write_snapshot(
        "evaluate",
        json!({}),
        &[&args.corpus, &args.test, &args.idf, &args.model],
        &[&args.out],
        &args.out,
    )?;
    eprintln!("{report}");
    Ok(json!({
        "subcommand": "evaluate",
        "documents": docs.len(),
        "accuracy": report.accuracy,
        "macro_f1": report.macro_f1,
        "weighted_f1": report.weighted_f1,
        "out": args.out,
    }))
}

fn ladder(args: &LadderArgs) -> Result<Value> {
    let config = PipelineConfig {
        split: SplitSpec {
            test_fraction: args.test_fraction,
            seed: args.seed,
            stratified: true,
        },
        preprocess: args.preprocess.config()?,
        ladder: args.ladder.clone(),
        train: args.params.config(),
        score: ScoreOptions {
            normalize_by_length: args.normalize_by_length,
        },
        fit_on_full: args.fit_on_full,
        repetitions: args.repetitions,
    };
    config.validate()?;
    let (docs, source) = match (&args.input, &args.corpus) {
        (Some(input), _) => {
            let schema = CsvSchema {
                class_column: args.class_column.clone(),
                text_column: args.text_column.clone(),
            };
            (corpus::to_binary(&corpus::load_csv(input, &schema)?.records), input)
        }
        (None, Some(c)) => (corpus::read_corpus(c)?, c),
        (None, None) => return Err(Error::Usage("one of --input or --corpus is required".into())),
    };
    ensure_dir(&args.out_dir)?;
    let result = pipeline::run_ladder(&docs, &config, Some(&args.out_dir))?;
    let ladder_csv = args.out_dir.join("ladder.csv");
    write_snapshot("ladder", json!({ "pipeline": config }), &[source], &[], &ladder_csv)?;
    eprint!("{}", result.to_table());
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|r| json!({ "configuration": r.configuration, "docs": r.train_docs, "seconds": r.seconds, "accuracy": r.accuracy }))
        .collect();
    Ok(json!({
        "subcommand": "ladder",
        "train_pool": result.train_pool,
        "test": result.test_size,
        "rows": rows,
        "out_dir": args.out_dir,
    }))
}

pub fn execute(command: &Command) -> Result<Value> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Split(a) => split(a),
        Command::FitIdf(a) => fit_idf(a),
        Command::Score(a) => score(a),
        Command::Filter(a) => filter(a),
        Command::Audit(a) => audit(a),
        Command::Augment(a) => augment(a),
        Command::TrainBaseline(a) => train_baseline(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Ladder(a) => ladder(a),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Convenience for tests: metrics JSON from two label lists.
pub fn metrics_json(predictions: &[corpus::Label], labels: &[corpus::Label]) -> Result<Value> {
    Ok(serde_json::to_value(metrics::report(&metrics::confusion(predictions, labels)?)?)?)
}
