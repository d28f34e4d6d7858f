//! Metrics and the training-fraction experiment.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{self, BaselineModel};
use crate::corpus::{self, CategorySet, Document, RawDocument, TokenizedDocument, Vocabulary};
use crate::error::{Error, Result};
use crate::learn::{self, RolloutConfig};
use crate::linear::ClassifierConfig;
use crate::mdp::{self, EpisodeLog, TaskMode};
use crate::policy::{LinearQ, PolicyRunner};
use crate::seed;

pub const DEFAULT_FRACTIONS: [f64; 6] = [0.01, 0.05, 0.1, 0.3, 0.5, 0.9];
pub const DEFAULT_RUNS: usize = 5;
pub const DEFAULT_BASELINE_LAMBDAS: [f64; 4] = [1e-5, 1e-4, 1e-3, 1e-2];
pub const DEFAULT_HISTOGRAM_FRACTION: f64 = 0.3;
pub const DEFAULT_HISTOGRAM_BINS: usize = 10;

const STREAM_STC: u64 = 0x57C;
const STREAM_BASELINE: u64 = 0xBA5E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    #[serde(with = "mdp::bits")]
    pub y: Vec<bool>,
    #[serde(with = "mdp::bits")]
    pub yhat: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    pub predictions: Vec<Prediction>,
    /// One episode per prediction, for the reading agent.
    pub logs: Option<Vec<EpisodeLog>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    fn add(&mut self, y: bool, yhat: bool) {
        match (y, yhat) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    pub fn f1(&self) -> f64 {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        mdp::f1_from(ratio(self.tp, self.tp + self.fp), ratio(self.tp, self.tp + self.fn_))
    }
}

/// F1 of the confusion counts pooled over every (document, category) pair.
pub fn micro_f1(preds: &[Prediction]) -> f64 {
    let mut c = Counts::default();
    for p in preds {
        for (&y, &yhat) in p.y.iter().zip(&p.yhat) {
            c.add(y, yhat);
        }
    }
    c.f1()
}

/// Per-category counts.
pub fn class_counts(preds: &[Prediction], n_categories: usize) -> Vec<Counts> {
    let mut counts = vec![Counts::default(); n_categories];
    for p in preds {
        for (k, (&y, &yhat)) in p.y.iter().zip(&p.yhat).enumerate().take(n_categories) {
            counts[k].add(y, yhat);
        }
    }
    counts
}

/// Unweighted mean of per-category F1 over all `n_categories` categories.
pub fn macro_f1(preds: &[Prediction], n_categories: usize) -> f64 {
    if n_categories == 0 {
        return 0.0;
    }
    class_counts(preds, n_categories).iter().map(Counts::f1).sum::<f64>() / n_categories as f64
}

/// Mean over episodes of sentences read / sentences in the document.
pub fn reading_size(logs: &[EpisodeLog]) -> f64 {
    if logs.is_empty() {
        return 0.0;
    }
    logs.iter().map(EpisodeLog::reading_ratio).sum::<f64>() / logs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
}

/// Counts of `ratios` in `n_bins` equal bins over [0, 1]. Bins are closed on
/// the right; the first also holds 0.
pub fn histogram(ratios: &[f64], n_bins: usize) -> Result<Vec<HistogramBin>> {
    if n_bins == 0 {
        return Err(Error::config("histogram_bins", "must be at least 1"));
    }
    let edge = |k: usize| k as f64 / n_bins as f64;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|k| HistogramBin {
            bin_lo: edge(k),
            bin_hi: edge(k + 1),
            count: 0,
        })
        .collect();
    for &r in ratios {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Invalid(format!("ratio {r} outside [0, 1]")));
        }
        let mut k = ((r * n_bins as f64).ceil() as usize).clamp(1, n_bins) - 1;
        while k > 0 && r <= bins[k].bin_lo {
            k -= 1;
        }
        while k + 1 < n_bins && r > bins[k].bin_hi {
            k += 1;
        }
        bins[k].count += 1;
    }
    Ok(bins)
}

pub fn reading_histogram(logs: &[EpisodeLog], n_bins: usize) -> Result<Vec<HistogramBin>> {
    let ratios: Vec<f64> = logs.iter().map(EpisodeLog::reading_ratio).collect();
    histogram(&ratios, n_bins)
}

/// Greedy episodes of `q` on every document.
pub fn predict_stc(q: &LinearQ, docs: &[Document], mode: TaskMode) -> Result<PredictionSet> {
    let logs: Vec<EpisodeLog> = docs
        .par_iter()
        .map(|d| mdp::run_episode(d, &mut PolicyRunner::Greedy(q), mode))
        .collect::<Result<_>>()?;
    let predictions = docs
        .iter()
        .zip(&logs)
        .map(|(d, l)| Prediction {
            doc_id: d.id.clone(),
            y: d.y.clone(),
            yhat: l.yhat.clone(),
        })
        .collect();
    Ok(PredictionSet {
        predictions,
        logs: Some(logs),
    })
}

pub fn predict_baseline(model: &BaselineModel, docs: &[Document]) -> Result<PredictionSet> {
    let predictions = docs
        .par_iter()
        .map(|d| {
            Ok(Prediction {
                doc_id: d.id.clone(),
                y: d.y.clone(),
                yhat: baseline::predict_baseline(model, d)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PredictionSet {
        predictions,
        logs: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub micro_f1: f64,
    pub macro_f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading_size: Option<f64>,
}

pub fn score(set: &PredictionSet, n_categories: usize) -> Scores {
    Scores {
        micro_f1: micro_f1(&set.predictions),
        macro_f1: macro_f1(&set.predictions, n_categories),
        reading_size: set.logs.as_deref().map(reading_size),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Stc,
    Baseline,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Stc => "stc",
            Method::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: TaskMode,
    pub fractions: Vec<f64>,
    pub n_runs: usize,
    pub seed: u64,
    pub stc: RolloutConfig,
    pub stc_lambdas: Vec<f64>,
    pub baseline: ClassifierConfig,
    pub baseline_lambdas: Vec<f64>,
    /// Fraction whose reading ratios are histogrammed; defaults to 0.3 when
    /// swept, else the first fraction.
    pub histogram_fraction: Option<f64>,
    pub histogram_bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let stc = RolloutConfig::default();
        ExperimentConfig {
            mode: TaskMode::MonoLabel,
            fractions: DEFAULT_FRACTIONS.to_vec(),
            n_runs: DEFAULT_RUNS,
            seed: 0,
            stc_lambdas: vec![stc.classifier.lambda],
            stc,
            baseline: ClassifierConfig::default(),
            baseline_lambdas: DEFAULT_BASELINE_LAMBDAS.to_vec(),
            histogram_fraction: None,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::config("fractions", "must not be empty"));
        }
        if let Some(f) = self.fractions.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
            return Err(Error::config("fractions", format!("{f} is not in (0, 1)")));
        }
        if self.n_runs == 0 {
            return Err(Error::config("n_runs", "must be at least 1"));
        }
        for (field, grid) in [("stc.lambdas", &self.stc_lambdas), ("baseline.lambdas", &self.baseline_lambdas)] {
            if grid.is_empty() {
                return Err(Error::config(field, "must not be empty"));
            }
            if let Some(l) = grid.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
                return Err(Error::config(field, format!("{l} is not a positive number")));
            }
        }
        if let Some(f) = self.histogram_fraction {
            if !self.fractions.contains(&f) {
                return Err(Error::config("histogram_fraction", format!("{f} is not one of the fractions")));
            }
        }
        if self.histogram_bins == 0 {
            return Err(Error::config("histogram_bins", "must be at least 1"));
        }
        self.stc.validate()?;
        self.baseline.validate()
    }

    pub fn histogram_fraction(&self) -> f64 {
        self.histogram_fraction.unwrap_or_else(|| {
            if self.fractions.contains(&DEFAULT_HISTOGRAM_FRACTION) {
                DEFAULT_HISTOGRAM_FRACTION
            } else {
                self.fractions[0]
            }
        })
    }

    fn grid(&self, method: Method) -> &[f64] {
        match method {
            Method::Stc => &self.stc_lambdas,
            Method::Baseline => &self.baseline_lambdas,
        }
    }
}

/// One (method, fraction, run) result. Metrics are absent when the cell
/// failed, and `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub method: Method,
    pub fraction: f64,
    pub run: usize,
    pub lambda: f64,
    pub micro_f1: Option<f64>,
    pub macro_f1: Option<f64>,
    pub reading_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Cell {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn stat(values: &[f64]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(Stat { mean, std })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub fraction: f64,
    pub lambda: f64,
    pub n_runs: usize,
    pub n_complete: usize,
    pub micro_f1: Option<Stat>,
    pub macro_f1: Option<Stat>,
    pub reading_size: Option<Stat>,
}

impl Aggregate {
    /// Recomputes the aggregate of `cells`, which share method and fraction.
    pub fn of(method: Method, fraction: f64, lambda: f64, n_runs: usize, cells: &[&Cell]) -> Self {
        let collect = |f: fn(&Cell) -> Option<f64>| -> Vec<f64> { cells.iter().filter_map(|c| f(c)).collect() };
        Aggregate {
            method,
            fraction,
            lambda,
            n_runs,
            n_complete: cells.iter().filter(|c| c.is_complete()).count(),
            micro_f1: stat(&collect(|c| c.micro_f1)),
            macro_f1: stat(&collect(|c| c.macro_f1)),
            reading_size: stat(&collect(|c| c.reading_size)),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.n_complete == self.n_runs
    }
}

/// Mean micro-F1 of one grid point, used to pick the reported λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub method: Method,
    pub fraction: f64,
    pub lambda: f64,
    pub n_complete: usize,
    pub micro_f1_mean: Option<f64>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub fraction: f64,
    pub lambda: f64,
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: TaskMode,
    pub seed: u64,
    pub n_documents: usize,
    pub n_categories: usize,
    pub fractions: Vec<f64>,
    pub n_runs: usize,
    pub stc_lambdas: Vec<f64>,
    pub baseline_lambdas: Vec<f64>,
    pub grid: Vec<GridPoint>,
    /// Cells of the selected λ of every (method, fraction).
    pub cells: Vec<Cell>,
    pub aggregate: Vec<Aggregate>,
    pub histogram: Option<Histogram>,
}

impl ExperimentReport {
    pub fn is_complete(&self) -> bool {
        self.aggregate.iter().all(Aggregate::is_complete)
    }

    pub fn aggregate_for(&self, method: Method, fraction: f64) -> Option<&Aggregate> {
        self.aggregate.iter().find(|a| a.method == method && a.fraction == fraction)
    }
}

/// Train and test sides of one split, vectorized with the train-side
/// vocabulary.
struct Prepared {
    train: Vec<Document>,
    test: Vec<Document>,
}

fn prepare(
    docs: &[TokenizedDocument],
    categories: &CategorySet,
    mode: TaskMode,
    fraction: f64,
    run: usize,
    master_seed: u64,
) -> Result<Prepared> {
    let split = corpus::make_split(docs, fraction, run, master_seed)?;
    for w in &split.warnings {
        log::warn!("fraction {fraction} run {run}: {w}");
    }
    let (train, test) = split.partition(docs);
    if test.is_empty() {
        return Err(Error::Invalid("split has no test documents".into()));
    }
    let train: Vec<TokenizedDocument> = train.into_iter().cloned().collect();
    let test: Vec<TokenizedDocument> = test.into_iter().cloned().collect();
    let vocab = Vocabulary::build(&train)?;
    Ok(Prepared {
        train: corpus::vectorize_corpus(&train, &vocab, categories, mode)?,
        test: corpus::vectorize_corpus(&test, &vocab, categories, mode)?,
    })
}

fn run_stc(p: &Prepared, cfg: &ExperimentConfig, fraction: f64, run: usize, lambda: f64) -> Result<PredictionSet> {
    let mut stc = cfg.stc.clone();
    stc.seed = seed::derive(cfg.seed, &[STREAM_STC, fraction.to_bits(), run as u64]);
    stc.classifier.lambda = lambda;
    let learned = learn::policy_iteration(&p.train, cfg.mode, &stc)?;
    predict_stc(&learned.q, &p.test, cfg.mode)
}

fn run_baseline(p: &Prepared, cfg: &ExperimentConfig, fraction: f64, run: usize, lambda: f64) -> Result<PredictionSet> {
    let classifier = ClassifierConfig {
        lambda,
        seed: seed::derive(cfg.seed, &[STREAM_BASELINE, fraction.to_bits(), run as u64]),
        ..cfg.baseline.clone()
    };
    let model = baseline::train_baseline(&p.train, cfg.mode, &classifier)?;
    predict_baseline(&model, &p.test)
}

struct CellOutcome {
    cell: Cell,
    logs: Option<Vec<EpisodeLog>>,
}

fn run_job(
    docs: &[TokenizedDocument],
    categories: &CategorySet,
    cfg: &ExperimentConfig,
    fraction: f64,
    run: usize,
) -> Vec<CellOutcome> {
    let prepared = prepare(docs, categories, cfg.mode, fraction, run, cfg.seed);
    let mut out = Vec::new();
    for method in [Method::Stc, Method::Baseline] {
        for &lambda in cfg.grid(method) {
            let result = prepared.as_ref().map_err(|e| e.to_string()).and_then(|p| {
                let set = match method {
                    Method::Stc => run_stc(p, cfg, fraction, run, lambda),
                    Method::Baseline => run_baseline(p, cfg, fraction, run, lambda),
                };
                set.map_err(|e| e.to_string())
            });
            let (scores, logs, error) = match result {
                Ok(set) => (Some(score(&set, categories.len())), set.logs, None),
                Err(e) => {
                    log::error!("{method} fraction {fraction} run {run} lambda {lambda}: {e}");
                    (None, None, Some(e))
                }
            };
            log::info!("{method} fraction {fraction} run {run} lambda {lambda}: {scores:?}");
            out.push(CellOutcome {
                cell: Cell {
                    method,
                    fraction,
                    run,
                    lambda,
                    micro_f1: scores.map(|s| s.micro_f1),
                    macro_f1: scores.map(|s| s.macro_f1),
                    reading_size: scores.and_then(|s| s.reading_size),
                    error,
                },
                logs,
            });
        }
    }
    out
}

/// Trains and evaluates both methods on `n_runs` random splits at every
/// training fraction and every λ of each method's grid, then reports, per
/// (method, fraction), the λ with the best mean micro-F1 (first in the grid
/// on ties). Failed cells are kept in the report with their error.
pub fn run_experiment(docs: &[RawDocument], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let toks = corpus::tokenize_corpus(docs);
    let categories = CategorySet::from_docs(&toks)?;
    let jobs: Vec<(f64, usize)> = cfg
        .fractions
        .iter()
        .flat_map(|&f| (0..cfg.n_runs).map(move |r| (f, r)))
        .collect();
    let outcomes: Vec<CellOutcome> = jobs
        .par_iter()
        .map(|&(f, r)| run_job(&toks, &categories, cfg, f, r))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut grid = Vec::new();
    let mut cells = Vec::new();
    let mut aggregate = Vec::new();
    let mut histogram = None;
    let hist_fraction = cfg.histogram_fraction();
    for method in [Method::Stc, Method::Baseline] {
        for &fraction in &cfg.fractions {
            let mut points: Vec<GridPoint> = cfg
                .grid(method)
                .iter()
                .map(|&lambda| {
                    let scores: Vec<f64> = outcomes
                        .iter()
                        .filter(|o| o.cell.method == method && o.cell.fraction == fraction && o.cell.lambda == lambda)
                        .filter_map(|o| o.cell.micro_f1)
                        .collect();
                    GridPoint {
                        method,
                        fraction,
                        lambda,
                        n_complete: scores.len(),
                        micro_f1_mean: stat(&scores).map(|s| s.mean),
                        selected: false,
                    }
                })
                .collect();
            let mut best = 0;
            for (i, p) in points.iter().enumerate() {
                if p.micro_f1_mean.unwrap_or(f64::NEG_INFINITY)
                    > points[best].micro_f1_mean.unwrap_or(f64::NEG_INFINITY)
                {
                    best = i;
                }
            }
            points[best].selected = true;
            let lambda = points[best].lambda;
            grid.extend(points);

            let chosen: Vec<&CellOutcome> = outcomes
                .iter()
                .filter(|o| o.cell.method == method && o.cell.fraction == fraction && o.cell.lambda == lambda)
                .collect();
            let chosen_cells: Vec<&Cell> = chosen.iter().map(|o| &o.cell).collect();
            aggregate.push(Aggregate::of(method, fraction, lambda, cfg.n_runs, &chosen_cells));
            cells.extend(chosen_cells.into_iter().cloned());
            if method == Method::Stc && fraction == hist_fraction {
                let logs: Vec<EpisodeLog> = chosen.iter().filter_map(|o| o.logs.clone()).flatten().collect();
                histogram = Some(Histogram {
                    fraction,
                    lambda,
                    bins: reading_histogram(&logs, cfg.histogram_bins)?,
                });
            }
        }
    }
    Ok(ExperimentReport {
        mode: cfg.mode,
        seed: cfg.seed,
        n_documents: docs.len(),
        n_categories: categories.len(),
        fractions: cfg.fractions.clone(),
        n_runs: cfg.n_runs,
        stc_lambdas: cfg.stc_lambdas.clone(),
        baseline_lambdas: cfg.baseline_lambdas.clone(),
        grid,
        cells,
        aggregate,
        histogram,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const CELLS_HEADER: [&str; 6] = ["method", "fraction", "run", "micro_f1", "macro_f1", "reading_size"];

pub const AGGREGATE_HEADER: [&str; 11] = [
    "method",
    "fraction",
    "lambda",
    "n_runs",
    "n_complete",
    "micro_f1_mean",
    "micro_f1_std",
    "macro_f1_mean",
    "macro_f1_std",
    "reading_size_mean",
    "reading_size_std",
];

/// One row per cell; metrics of failed cells are left empty.
pub fn write_cells_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    write_csv(
        path,
        &CELLS_HEADER,
        report.cells.iter().map(|c| {
            vec![
                c.method.to_string(),
                c.fraction.to_string(),
                c.run.to_string(),
                opt(c.micro_f1),
                opt(c.macro_f1),
                opt(c.reading_size),
            ]
        }),
    )
}

pub fn write_aggregate_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    write_csv(
        path,
        &AGGREGATE_HEADER,
        report.aggregate.iter().map(|a| {
            vec![
                a.method.to_string(),
                a.fraction.to_string(),
                a.lambda.to_string(),
                a.n_runs.to_string(),
                a.n_complete.to_string(),
                opt(a.micro_f1.map(|s| s.mean)),
                opt(a.micro_f1.map(|s| s.std)),
                opt(a.macro_f1.map(|s| s.mean)),
                opt(a.macro_f1.map(|s| s.std)),
                opt(a.reading_size.map(|s| s.mean)),
                opt(a.reading_size.map(|s| s.std)),
            ]
        }),
    )
}

pub fn write_histogram_csv(path: &Path, bins: &[HistogramBin]) -> Result<()> {
    write_csv(
        path,
        &["bin_lo", "bin_hi", "count"],
        bins.iter()
            .map(|b| vec![b.bin_lo.to_string(), b.bin_hi.to_string(), b.count.to_string()]),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_logs_jsonl(path: &Path, logs: &[EpisodeLog]) -> Result<()> {
    let mut text = String::new();
    for l in logs {
        text.push_str(&serde_json::to_string(l)?);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Action;
    use crate::synthetic::{self, SyntheticSpec};
    use proptest::prelude::*;

    fn pred(y: &[u8], yhat: &[u8]) -> Prediction {
        Prediction {
            doc_id: String::new(),
            y: y.iter().map(|&b| b == 1).collect(),
            yhat: yhat.iter().map(|&b| b == 1).collect(),
        }
    }

    fn log(read: usize, n: usize) -> EpisodeLog {
        EpisodeLog {
            doc_id: String::new(),
            actions: vec![Action::Stop],
            read,
            n,
            yhat: vec![],
            reward: 0.0,
        }
    }

    #[test]
    fn metric_examples() {
        let p = vec![pred(&[1, 0], &[1, 0]), pred(&[0, 1], &[1, 0])];
        assert_eq!(micro_f1(&p), 0.5);
        assert!((macro_f1(&p, 2) - 1.0 / 3.0).abs() < 1e-15);
        let exact = vec![pred(&[1, 0], &[1, 0]), pred(&[0, 1], &[0, 1])];
        assert_eq!(micro_f1(&exact), 1.0);
        assert_eq!(macro_f1(&exact, 2), 1.0);
        assert_eq!(micro_f1(&[pred(&[1, 0], &[0, 0])]), 0.0);
        assert!(macro_f1(&[pred(&[1, 0], &[1, 0])], 2) <= 0.5);
    }

    #[test]
    fn reading_examples() {
        assert_eq!(reading_size(&[log(2, 4), log(4, 4)]), 0.75);
        assert_eq!(reading_size(&[log(3, 3), log(5, 5)]), 1.0);
        assert!((reading_size(&[log(1, 2), log(1, 4)]) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.05, 0.06, 0.95], 10).unwrap();
        let counts: Vec<usize> = h.iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![2, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let h = histogram(&[0.0, 0.1, 0.3, 0.7, 1.0], 10).unwrap();
        let counts: Vec<usize> = h.iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![2, 0, 1, 0, 0, 0, 1, 0, 0, 1]);
        assert!(histogram(&[0.5], 0).is_err());
        let full = reading_histogram(&[log(3, 3), log(7, 7)], 4).unwrap();
        assert_eq!(full[3].count, 2);
    }

    proptest! {
        #[test]
        fn histogram_counts_sum(reads in prop::collection::vec((1usize..20, 0usize..20), 1..50), bins in 1usize..25) {
            let logs: Vec<EpisodeLog> = reads.iter().map(|&(n, extra)| log(1 + extra % n, n)).collect();
            let h = reading_histogram(&logs, bins).unwrap();
            prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), logs.len());
            for l in &logs {
                let r = l.reading_ratio();
                let k = h.iter().position(|b| r > b.bin_lo && r <= b.bin_hi).unwrap_or(0);
                // exact rational check: (k/bins, (k+1)/bins]
                prop_assert!(l.read * bins <= (k + 1) * l.n);
                prop_assert!(k == 0 || l.read * bins > k * l.n);
            }
        }

        #[test]
        fn metrics_bounded_and_mono_micro_is_accuracy(
            pairs in prop::collection::vec((0usize..4, 0usize..4), 1..40)
        ) {
            let preds: Vec<Prediction> = pairs.iter().map(|&(y, yh)| {
                let mut a = [0u8; 4];
                let mut b = [0u8; 4];
                a[y] = 1;
                b[yh] = 1;
                pred(&a, &b)
            }).collect();
            let micro = micro_f1(&preds);
            let macro_ = macro_f1(&preds, 4);
            prop_assert!((0.0..=1.0).contains(&micro) && (0.0..=1.0).contains(&macro_));
            let acc = pairs.iter().filter(|(y, yh)| y == yh).count() as f64 / pairs.len() as f64;
            prop_assert!((micro - acc).abs() < 1e-12);
            let exact = pairs.iter().all(|(y, yh)| y == yh);
            prop_assert_eq!(micro == 1.0, exact);
        }

        #[test]
        fn stat_matches_definition(values in prop::collection::vec(-1.0f64..1.0, 2..10)) {
            let s = stat(&values).unwrap();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            prop_assert!((s.mean - mean).abs() < 1e-15);
            prop_assert!((s.std - var.sqrt()).abs() < 1e-12);
        }
    }

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig {
            fractions: vec![0.3, 0.5],
            n_runs: 2,
            seed: 7,
            baseline_lambdas: vec![1e-4, 1e-3],
            ..Default::default()
        };
        cfg.stc.n_states = 300;
        cfg.stc.iterations = 2;
        cfg
    }

    #[test]
    fn experiment_grid_and_aggregation() {
        let docs = synthetic::generate(&SyntheticSpec {
            docs_per_class: 10,
            ..Default::default()
        })
        .unwrap();
        let cfg = small_config();
        let report = run_experiment(&docs, &cfg).unwrap();
        assert!(report.is_complete());
        assert_eq!(report.cells.len(), 2 * 2 * 2);
        assert_eq!(report.grid.len(), 2 * (1 + 2));
        assert_eq!(report.aggregate.len(), 4);
        for a in &report.aggregate {
            let cells: Vec<&Cell> = report
                .cells
                .iter()
                .filter(|c| c.method == a.method && c.fraction == a.fraction)
                .collect();
            assert_eq!(cells.len(), cfg.n_runs);
            assert!(cells.iter().all(|c| c.lambda == a.lambda));
            assert_eq!(&Aggregate::of(a.method, a.fraction, a.lambda, cfg.n_runs, &cells), a);
            assert_eq!(a.reading_size.is_some(), a.method == Method::Stc);
            let selected: Vec<&GridPoint> = report
                .grid
                .iter()
                .filter(|g| g.method == a.method && g.fraction == a.fraction && g.selected)
                .collect();
            assert_eq!(selected.len(), 1);
            assert_eq!(selected[0].lambda, a.lambda);
        }
        let h = report.histogram.as_ref().unwrap();
        assert_eq!(h.fraction, 0.3);
        assert_eq!(h.bins.iter().map(|b| b.count).sum::<usize>(), 2 * 28);
        assert_eq!(run_experiment(&docs, &cfg).unwrap(), report);
    }

    #[test]
    fn failed_cells_are_recorded() {
        let mut docs = synthetic::generate(&SyntheticSpec {
            docs_per_class: 5,
            ..Default::default()
        })
        .unwrap();
        docs[0].labels.push("zinc".into());
        let mut cfg = small_config();
        cfg.fractions = vec![0.5];
        cfg.n_runs = 1;
        let report = run_experiment(&docs, &cfg).unwrap();
        assert!(!report.is_complete());
        assert!(report.cells.iter().all(|c| c.error.is_some() && c.micro_f1.is_none()));
    }

    #[test]
    fn config_validation_names_the_field() {
        let bad = ExperimentConfig {
            fractions: vec![1.0],
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "fractions"));
        let bad = ExperimentConfig {
            baseline_lambdas: vec![],
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "baseline.lambdas"));
    }
}
