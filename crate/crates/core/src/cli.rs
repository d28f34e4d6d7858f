//! The `stc` command-line tool.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
//! failure, 3 experiment finished with failed cells.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baseline;
use crate::corpus::{self, CategorySet, Document, Loaded, RawDocument, Split, Vocabulary};
use crate::config::{Overrides, RunConfig};
use crate::error::{Error, Result};
use crate::eval::{self, ExperimentReport, Method, Scores};
use crate::learn::{self, IterationRecord};
use crate::mdp::{self, Action, EpisodeLog, MdpState, TaskMode};
use crate::model::{Model, Weights};
use crate::policy::LinearQ;
use crate::synthetic::{self, KeywordPosition, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::DuplicateId(_)
        | Error::UnknownLabel { .. }
        | Error::InvalidDocument { .. }
        | Error::ChecksumMismatch { .. }
        | Error::Config { .. }
        | Error::Json(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(name = "stc", version, about = "Sequential text classification")]
pub struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a distributed dataset to a canonical corpus file.
    Convert {
        #[arg(long, value_enum)]
        layout: Layout,
        /// Output corpus file (one JSON document per line).
        #[arg(long)]
        out: PathBuf,
        /// `cardoso`: the train and test files. `dirs-by-class`: the root directory.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Write a synthetic keyword corpus.
    Generate(GenerateArgs),
    /// Train one method and save its model.
    Train {
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score a saved model on a corpus.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Split manifest; only its test documents are scored.
        #[arg(long)]
        split: Option<PathBuf>,
        /// Directory for metrics, predictions and episode logs.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = eval::DEFAULT_HISTOGRAM_BINS)]
        bins: usize,
    },
    /// Sweep training fractions and runs for both methods.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the greedy episode of a reading-agent model on one document.
    Trace {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        doc: String,
        /// Print the episode log as JSON instead.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// `label<TAB>text` lines, one train file and one test file.
    Cardoso,
    /// One sub-directory per category holding one file per document.
    DirsByClass,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<TaskMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub n_runs: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        RunConfig::load(
            self.config.as_deref(),
            Overrides {
                corpus: self.corpus.clone(),
                mode: self.mode,
                seed: self.seed,
                output_dir: self.output_dir.clone(),
                workers: self.workers,
                n_runs: self.n_runs,
                train_fraction: self.train_fraction,
            },
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 200)]
    pub docs_per_class: usize,
    #[arg(long, default_value_t = 6)]
    pub sentences: usize,
    /// `fixed:P`, `first:K` or `all`.
    #[arg(long, default_value = "first:3")]
    pub keyword: KeywordArg,
    #[arg(long, default_value_t = 50)]
    pub noise_vocab: usize,
    #[arg(long, default_value_t = 5)]
    pub words_per_sentence: usize,
    #[arg(long, default_value_t = 1)]
    pub max_labels: usize,
    #[arg(long, default_value_t = 0.5)]
    pub extra_label_prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeywordArg(pub KeywordPosition);

impl FromStr for KeywordArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |v: &str| v.parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
        match s.split_once(':') {
            Some(("fixed", p)) => Ok(KeywordArg(KeywordPosition::Fixed(num(p)?))),
            Some(("first", k)) => Ok(KeywordArg(KeywordPosition::UniformFirst(num(k)?))),
            None if s == "all" => Ok(KeywordArg(KeywordPosition::UniformAll)),
            _ => Err(format!("`{s}`: expected fixed:P, first:K or all")),
        }
    }
}

impl GenerateArgs {
    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_classes: self.classes,
            docs_per_class: self.docs_per_class,
            sentences_per_doc: self.sentences,
            keyword_position: self.keyword.0,
            noise_vocab_size: self.noise_vocab,
            words_per_sentence: self.words_per_sentence,
            max_labels: self.max_labels,
            extra_label_prob: self.extra_label_prob,
            seed: self.seed,
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stc" => Ok(Method::Stc),
            "baseline" => Ok(Method::Baseline),
            _ => Err(Error::config("method", format!("unknown method `{s}`"))),
        }
    }
}

impl ValueEnum for Method {
    fn value_variants<'a>() -> &'a [Self] {
        &[Method::Stc, Method::Baseline]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Method::Stc => "stc",
            Method::Baseline => "baseline",
        }))
    }
}

fn load_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    let Loaded { docs, dropped } = corpus::load_jsonl(path)?;
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} documents without sentences", path.display());
    }
    Ok(docs)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invalid(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvertSummary {
    pub kept: usize,
    pub dropped: usize,
    pub categories: usize,
}

pub fn cmd_convert(layout: Layout, inputs: &[PathBuf], out: &Path) -> Result<ConvertSummary> {
    let loaded = match (layout, inputs) {
        (Layout::Cardoso, [train, test]) => corpus::convert_cardoso(train, test)?,
        (Layout::Cardoso, _) => return Err(Error::config("inputs", "cardoso takes a train file and a test file")),
        (Layout::DirsByClass, [root]) => corpus::convert_dirs_by_class(root)?,
        (Layout::DirsByClass, _) => return Err(Error::config("inputs", "dirs-by-class takes one directory")),
    };
    corpus::write_jsonl(out, &loaded.docs)?;
    Ok(ConvertSummary {
        kept: loaded.docs.len(),
        dropped: loaded.dropped,
        categories: corpus::corpus_stats(&loaded.docs).n_categories,
    })
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<usize> {
    let docs = synthetic::generate(&args.spec())?;
    corpus::write_jsonl(&args.out, &docs)?;
    Ok(docs.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub model: PathBuf,
    pub telemetry: Option<PathBuf>,
    pub split: Option<PathBuf>,
}

pub fn model_path(dir: &Path, method: Method) -> PathBuf {
    dir.join(format!("model-{method}.json"))
}

pub fn telemetry_path(dir: &Path) -> PathBuf {
    dir.join("telemetry-stc.jsonl")
}

/// Trains `method` with the first λ of its grid on the whole corpus, or on
/// the train side of a split when `train_fraction` is set.
pub fn cmd_train(cfg: &RunConfig, method: Method) -> Result<TrainOutput> {
    let raw = load_corpus(&cfg.corpus)?;
    let toks = corpus::tokenize_corpus(&raw);
    let categories = CategorySet::from_docs(&toks)?;
    create_dir(&cfg.output_dir)?;
    let (train, split) = match cfg.train_fraction {
        Some(f) => {
            let split = corpus::make_split(&toks, f, 0, cfg.seed)?;
            for w in &split.warnings {
                log::warn!("{w}");
            }
            let path = cfg.output_dir.join("split.json");
            split.write(&path)?;
            let train: Vec<_> = split.partition(&toks).0.into_iter().cloned().collect();
            (train, Some(path))
        }
        None => (toks, None),
    };
    let vocab = Vocabulary::build(&train)?;
    let docs = corpus::vectorize_corpus(&train, &vocab, &categories, cfg.mode)?;
    let path = model_path(&cfg.output_dir, method);
    let (model, telemetry) = with_workers(cfg.workers, || -> Result<_> {
        Ok(match method {
            Method::Stc => {
                let learned = learn::policy_iteration(&docs, cfg.mode, &cfg.stc)?;
                let model = Model::stc(cfg.mode, categories, vocab, learned.q)?;
                (model, Some(learned.telemetry))
            }
            Method::Baseline => {
                let b = baseline::train_baseline(&docs, cfg.mode, &cfg.baseline)?;
                (Model::baseline(categories, vocab, b)?, None)
            }
        })
    })??;
    model.save(&path)?;
    let telemetry = match telemetry {
        Some(records) => {
            let tpath = telemetry_path(&cfg.output_dir);
            write_telemetry(&tpath, &records)?;
            Some(tpath)
        }
        None => None,
    };
    Ok(TrainOutput {
        model: path,
        telemetry,
        split,
    })
}

pub fn write_telemetry(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Vectorizes raw documents with a model's vocabulary and categories.
pub fn vectorize_for(model: &Model, raw: &[RawDocument]) -> Result<Vec<Document>> {
    let toks = corpus::tokenize_corpus(raw);
    corpus::vectorize_corpus(&toks, &model.vocabulary, &model.categories, model.mode)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub method: Method,
    pub mode: TaskMode,
    pub n_documents: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

pub fn cmd_evaluate(
    model_file: &Path,
    corpus_file: &Path,
    split: Option<&Path>,
    out: Option<&Path>,
    bins: usize,
) -> Result<EvalSummary> {
    let model = Model::load(model_file)?;
    let mut raw = load_corpus(corpus_file)?;
    if let Some(p) = split {
        let split = Split::read(p)?;
        let test: std::collections::HashSet<&str> = split.test.iter().map(String::as_str).collect();
        raw.retain(|d| test.contains(d.id.as_str()));
    }
    if raw.is_empty() {
        return Err(Error::Invalid("no documents to evaluate".into()));
    }
    let docs = vectorize_for(&model, &raw)?;
    let (method, set) = match &model.weights {
        Weights::Stc(q) => (Method::Stc, eval::predict_stc(q, &docs, model.mode)?),
        Weights::Baseline(b) => (Method::Baseline, eval::predict_baseline(b, &docs)?),
    };
    let summary = EvalSummary {
        method,
        mode: model.mode,
        n_documents: docs.len(),
        scores: eval::score(&set, model.categories.len()),
    };
    if let Some(dir) = out {
        create_dir(dir)?;
        eval::write_json(&dir.join("metrics.json"), &summary)?;
        let mut preds = String::new();
        for p in &set.predictions {
            preds.push_str(&serde_json::to_string(p)?);
            preds.push('\n');
        }
        write_text(&dir.join("predictions.jsonl"), &preds)?;
        if let Some(logs) = &set.logs {
            eval::write_logs_jsonl(&dir.join("episodes.jsonl"), logs)?;
            eval::write_histogram_csv(&dir.join("histogram.csv"), &eval::reading_histogram(logs, bins)?)?;
        }
    }
    Ok(summary)
}

pub const REPORT_CSV: &str = "report.csv";
pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const REPORT_JSON: &str = "report.json";
pub const HISTOGRAM_CSV: &str = "histogram.csv";

/// Runs the experiment and writes `report.csv`, `aggregate.csv`,
/// `report.json` and `histogram.csv` to the output directory.
pub fn cmd_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    let raw = load_corpus(&cfg.corpus)?;
    let exp = cfg.experiment();
    let report = with_workers(cfg.workers, || eval::run_experiment(&raw, &exp))??;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    eval::write_cells_csv(&dir.join(REPORT_CSV), &report)?;
    eval::write_aggregate_csv(&dir.join(AGGREGATE_CSV), &report)?;
    eval::write_json(&dir.join(REPORT_JSON), &report)?;
    if let Some(h) = &report.histogram {
        eval::write_histogram_csv(&dir.join(HISTOGRAM_CSV), &h.bins)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub p: usize,
    #[serde(with = "mdp::bits")]
    pub assigned: Vec<bool>,
    pub q_values: Vec<(Action, f64)>,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub episode: EpisodeLog,
}

/// The greedy episode of `q` on `doc`, with the q-values seen at each step.
pub fn trace_episode(q: &LinearQ, doc: &Document, mode: TaskMode) -> Result<Trace> {
    let mut steps = Vec::new();
    let mut state = MdpState::initial(doc);
    while !state.is_terminal(mode) {
        let q_values = q.q_values(&state, mode)?;
        let action = q.greedy(&state, mode)?;
        steps.push(TraceStep {
            p: state.p(),
            assigned: state.assigned().to_vec(),
            q_values,
            action,
        });
        state = state.transition(action, mode)?;
    }
    let episode = mdp::run_episode(doc, &mut |s: &MdpState<'_>| q.greedy(s, mode).expect("checked above"), mode)?;
    Ok(Trace { steps, episode })
}

pub fn cmd_trace(model_file: &Path, corpus_file: &Path, doc_id: &str) -> Result<(Model, Trace)> {
    let model = Model::load(model_file)?;
    let Weights::Stc(q) = &model.weights else {
        return Err(Error::config("model", "tracing needs a reading-agent model, not a baseline"));
    };
    let raw = load_corpus(corpus_file)?;
    let doc = raw
        .iter()
        .find(|d| d.id == doc_id)
        .ok_or_else(|| Error::config("doc", format!("unknown document id `{doc_id}`")))?;
    let docs = vectorize_for(&model, std::slice::from_ref(doc))?;
    let trace = trace_episode(q, &docs[0], model.mode)?;
    Ok((model, trace))
}

pub fn render_trace(model: &Model, trace: &Trace) -> String {
    let label = |a: Action| match a {
        Action::Classify(k) => format!("classify:{}", model.categories.name(k)),
        other => other.to_string(),
    };
    let mut s = String::new();
    let ep = &trace.episode;
    let _ = writeln!(s, "document {} ({} sentences)", ep.doc_id, ep.n);
    for (i, step) in trace.steps.iter().enumerate() {
        let yhat: String = step.assigned.iter().map(|&b| if b { '1' } else { '0' }).collect();
        let qs: Vec<String> = step
            .q_values
            .iter()
            .map(|&(a, q)| format!("{}={q:.4}", label(a)))
            .collect();
        let _ = writeln!(
            s,
            "{:>3}  p={} yhat={}  -> {:<20} [{}]",
            i + 1,
            step.p,
            yhat,
            label(step.action),
            qs.join(" ")
        );
    }
    let assigned: Vec<&str> = ep
        .yhat
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(k, _)| model.categories.name(k))
        .collect();
    let _ = writeln!(
        s,
        "read {}/{} sentences, assigned [{}], reward {}",
        ep.read,
        ep.n,
        assigned.join(", "),
        ep.reward
    );
    s
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Convert { layout, out, inputs } => {
            let s = cmd_convert(layout, &inputs, &out)?;
            println!(
                "wrote {}: {} documents kept, {} dropped, {} categories",
                out.display(),
                s.kept,
                s.dropped,
                s.categories
            );
        }
        Command::Generate(args) => {
            let n = cmd_generate(&args)?;
            println!("wrote {}: {n} documents", args.out.display());
        }
        Command::Train { method, run } => {
            let cfg = run.resolve()?;
            let out = cmd_train(&cfg, method)?;
            println!("model: {}", out.model.display());
            if let Some(t) = out.telemetry {
                println!("telemetry: {}", t.display());
            }
            if let Some(s) = out.split {
                println!("split: {}", s.display());
            }
        }
        Command::Evaluate {
            model,
            corpus,
            split,
            out,
            bins,
        } => {
            let summary = cmd_evaluate(&model, &corpus, split.as_deref(), out.as_deref(), bins)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Experiment { run } => {
            let cfg = run.resolve()?;
            let report = cmd_experiment(&cfg)?;
            print!("{}", render_aggregate(&report));
            println!("reports written to {}", cfg.output_dir.display());
            if !report.is_complete() {
                eprintln!("some cells failed; see report.json");
                return Ok(EXIT_PARTIAL);
            }
        }
        Command::Trace { model, corpus, doc, json } => {
            let (model, trace) = cmd_trace(&model, &corpus, &doc)?;
            if json {
                println!("{}", serde_json::to_string(&trace.episode)?);
            } else {
                print!("{}", render_trace(&model, &trace));
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn render_aggregate(report: &ExperimentReport) -> String {
    let mut s = String::from("method    fraction  lambda    runs  micro_f1         macro_f1         reading_size\n");
    let fmt = |st: Option<eval::Stat>| match st {
        Some(st) => format!("{:.4} ± {:.4}", st.mean, st.std),
        None => "-".into(),
    };
    for a in &report.aggregate {
        let _ = writeln!(
            s,
            "{:<9} {:<9} {:<9} {}/{}   {:<16} {:<16} {}",
            a.method.to_string(),
            a.fraction,
            a.lambda,
            a.n_complete,
            a.n_runs,
            fmt(a.micro_f1),
            fmt(a.macro_f1),
            fmt(a.reading_size)
        );
    }
    s
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
