//! Declarative run configuration.
//!
//! A TOML file holds every setting of a run. Unknown keys are rejected.
//! Command-line flags override scalar settings, and anything left unset
//! falls back to the defaults below. Relative paths in the file are taken
//! relative to the file's directory.
//!
//! ```toml
//! corpus = "r8.jsonl"
//! mode = "mono"
//! seed = 1
//! output_dir = "out"
//! fractions = [0.01, 0.1, 0.5]
//! n_runs = 5
//!
//! [stc]
//! n_states = 10000
//! lambdas = [1e-3]
//!
//! [baseline]
//! lambdas = [1e-5, 1e-4, 1e-3]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval::{self, ExperimentConfig};
use crate::learn::{self, RolloutConfig};
use crate::linear::ClassifierConfig;
use crate::mdp::TaskMode;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StcSection {
    pub n_states: Option<usize>,
    pub rollouts_per_state: Option<usize>,
    pub iterations: Option<usize>,
    pub early_stop: Option<bool>,
    pub patience: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub lambdas: Option<Vec<f64>>,
    pub epochs: Option<usize>,
}

/// The file as written; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub corpus: Option<PathBuf>,
    pub mode: Option<TaskMode>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub fractions: Option<Vec<f64>>,
    pub n_runs: Option<usize>,
    /// Fraction of the corpus `train` learns from; the rest is held out and
    /// the split is saved next to the model. Unset trains on everything.
    pub train_fraction: Option<f64>,
    pub histogram_fraction: Option<f64>,
    pub histogram_bins: Option<usize>,
    pub stc: Option<StcSection>,
    pub baseline: Option<BaselineSection>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    /// Reads `path`, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.corpus, &mut file.output_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }
}

/// Scalar settings given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub mode: Option<TaskMode>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub n_runs: Option<usize>,
    pub train_fraction: Option<f64>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "stc-out";

/// A resolved, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub mode: TaskMode,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses one per core. Results do not depend on it.
    pub workers: Option<usize>,
    pub fractions: Vec<f64>,
    pub n_runs: usize,
    pub train_fraction: Option<f64>,
    pub histogram_fraction: Option<f64>,
    pub histogram_bins: usize,
    pub stc: RolloutConfig,
    pub stc_lambdas: Vec<f64>,
    pub baseline: ClassifierConfig,
    pub baseline_lambdas: Vec<f64>,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, flags: Overrides) -> Result<Self> {
        let corpus = flags
            .corpus
            .or(file.corpus)
            .ok_or_else(|| Error::config("corpus", "required"))?;
        if !corpus.is_file() {
            return Err(Error::config("corpus", format!("{} does not exist", corpus.display())));
        }
        let seed = flags
            .seed
            .or(file.seed)
            .ok_or_else(|| Error::config("seed", "required"))?;
        let stc_file = file.stc.unwrap_or_default();
        let base_file = file.baseline.unwrap_or_default();

        let mut stc = RolloutConfig::default();
        stc.seed = seed;
        stc.n_states = stc_file.n_states.unwrap_or(stc.n_states);
        stc.rollouts_per_state = stc_file.rollouts_per_state.unwrap_or(stc.rollouts_per_state);
        stc.iterations = stc_file.iterations.unwrap_or(stc.iterations);
        stc.early_stop = stc_file.early_stop.unwrap_or(stc.early_stop);
        stc.patience = stc_file.patience.unwrap_or(stc.patience);
        stc.classifier.epochs = stc_file.epochs.unwrap_or(stc.classifier.epochs);
        let stc_lambdas = stc_file.lambdas.unwrap_or_else(|| vec![learn::DEFAULT_LAMBDA]);
        if let Some(&l) = stc_lambdas.first() {
            stc.classifier.lambda = l;
        }

        let mut baseline = ClassifierConfig {
            seed,
            ..ClassifierConfig::default()
        };
        baseline.epochs = base_file.epochs.unwrap_or(baseline.epochs);
        let baseline_lambdas = base_file
            .lambdas
            .unwrap_or_else(|| eval::DEFAULT_BASELINE_LAMBDAS.to_vec());
        if let Some(&l) = baseline_lambdas.first() {
            baseline.lambda = l;
        }

        let cfg = RunConfig {
            corpus,
            mode: flags.mode.or(file.mode).unwrap_or(TaskMode::MonoLabel),
            seed,
            output_dir: flags
                .output_dir
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            workers: flags.workers.or(file.workers),
            fractions: file.fractions.unwrap_or_else(|| eval::DEFAULT_FRACTIONS.to_vec()),
            n_runs: flags.n_runs.or(file.n_runs).unwrap_or(eval::DEFAULT_RUNS),
            train_fraction: flags.train_fraction.or(file.train_fraction),
            histogram_fraction: file.histogram_fraction,
            histogram_bins: file.histogram_bins.unwrap_or(eval::DEFAULT_HISTOGRAM_BINS),
            stc,
            stc_lambdas,
            baseline,
            baseline_lambdas,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, flags: Overrides) -> Result<Self> {
        let file = match path {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Self::resolve(file, flags)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if let Some(f) = self.train_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config("train_fraction", format!("{f} is not in (0, 1)")));
            }
        }
        self.experiment().validate()
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            mode: self.mode,
            fractions: self.fractions.clone(),
            n_runs: self.n_runs,
            seed: self.seed,
            stc: self.stc.clone(),
            stc_lambdas: self.stc_lambdas.clone(),
            baseline: self.baseline.clone(),
            baseline_lambdas: self.baseline_lambdas.clone(),
            histogram_fraction: self.histogram_fraction,
            histogram_bins: self.histogram_bins,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus_file(dir: &Path) -> PathBuf {
        let p = dir.join("c.jsonl");
        std::fs::write(&p, "").unwrap();
        p
    }

    fn field_of(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ConfigFile::parse("seed = 1\nlamda = 3\n", Path::new("x.toml")).unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("lamda"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(ConfigFile::parse("[stc]\nn_state = 3\n", Path::new("x.toml")).is_err());
    }

    #[test]
    fn precedence_flag_file_default() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = corpus_file(dir.path());
        let text = format!(
            "corpus = {:?}\nseed = 3\nn_runs = 2\n[stc]\nn_states = 50\nlambdas = [0.01, 0.1]\n",
            corpus.to_str().unwrap()
        );
        let file = ConfigFile::parse(&text, Path::new("x.toml")).unwrap();
        let cfg = RunConfig::resolve(
            file.clone(),
            Overrides {
                seed: Some(9),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.stc.seed, 9);
        assert_eq!(cfg.n_runs, 2);
        assert_eq!(cfg.stc.n_states, 50);
        assert_eq!(cfg.stc.classifier.lambda, 0.01);
        assert_eq!(cfg.stc.iterations, RolloutConfig::default().iterations);
        assert_eq!(cfg.fractions, eval::DEFAULT_FRACTIONS.to_vec());
        assert_eq!(cfg.mode, TaskMode::MonoLabel);
        let cfg = RunConfig::resolve(file, Overrides::default()).unwrap();
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn validation_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = corpus_file(dir.path());
        let with = |extra: &str| {
            let text = format!("corpus = {:?}\nseed = 1\n{extra}", corpus.to_str().unwrap());
            RunConfig::resolve(ConfigFile::parse(&text, Path::new("x.toml")).unwrap(), Overrides::default())
        };
        assert!(with("").is_ok());
        assert_eq!(field_of(with("fractions = [0.0]\n")), "fractions");
        assert_eq!(field_of(with("n_runs = 0\n")), "n_runs");
        assert_eq!(field_of(with("workers = 0\n")), "workers");
        assert_eq!(field_of(with("[stc]\nn_states = 0\n")), "n_states");
        assert_eq!(field_of(with("[baseline]\nlambdas = [-1.0]\n")), "baseline.lambdas");
        assert_eq!(field_of(with("histogram_fraction = 0.2\n")), "histogram_fraction");

        let missing = ConfigFile {
            corpus: Some(dir.path().join("nope.jsonl")),
            seed: Some(1),
            ..Default::default()
        };
        assert_eq!(field_of(RunConfig::resolve(missing, Overrides::default())), "corpus");
        let no_seed = ConfigFile {
            corpus: Some(corpus),
            ..Default::default()
        };
        assert_eq!(field_of(RunConfig::resolve(no_seed, Overrides::default())), "seed");
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        corpus_file(dir.path());
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "corpus = \"c.jsonl\"\nseed = 1\noutput_dir = \"out\"\n").unwrap();
        let cfg = RunConfig::load(Some(&path), Overrides::default()).unwrap();
        assert_eq!(cfg.corpus, dir.path().join("c.jsonl"));
        assert_eq!(cfg.output_dir, dir.path().join("out"));
    }
}
