//! Versioned model files shared by the reading agent and the baseline.
//!
//! A model file is one JSON object. It carries the categories, the
//! vocabulary (terms and idf weights) with its checksum, the block layout of
//! the weight vector and the non-zero weights as `[index, value]` pairs.
//! The same layout stores both methods; `kind` tells them apart.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baseline::{self, BaselineModel};
use crate::corpus::{self, CategorySet, Document, RawDocument, Vocabulary};
use crate::error::{Error, Result};
use crate::features;
use crate::mdp::{self, Action, TaskMode};
use crate::policy::{LinearQ, PolicyRunner};
use crate::preprocess::{stopwords, Preprocessor};

pub const FORMAT: &str = "stc-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Stc,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyRecord {
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub n_docs: usize,
}

/// On-disk form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub mode: TaskMode,
    pub n_categories: usize,
    pub vocab_len: usize,
    pub categories: Vec<String>,
    pub block_dim: usize,
    /// Name of each block of `theta`, in order: actions for the reading
    /// agent, categories for the baseline.
    pub blocks: Vec<String>,
    pub vocab_checksum: String,
    pub stopwords_sha256: String,
    pub vocabulary: VocabularyRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<usize>,
    pub theta: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub labels: Vec<bool>,
    /// Sentences read.
    pub read: usize,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub enum Weights {
    Stc(LinearQ),
    Baseline(BaselineModel),
}

/// A loaded, validated model with what is needed to vectorize new text.
#[derive(Debug, Clone)]
pub struct Model {
    pub mode: TaskMode,
    pub categories: CategorySet,
    pub vocabulary: Vocabulary,
    pub weights: Weights,
}

fn sparse_pairs(dense: &[f64]) -> Vec<(u32, f64)> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(i, &w)| (i as u32, w))
        .collect()
}

fn dense(pairs: &[(u32, f64)], dim: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; dim];
    let mut last: Option<u32> = None;
    for &(i, w) in pairs {
        if (i as usize) >= dim {
            return Err(Error::Invalid(format!("weight index {i} outside dimension {dim}")));
        }
        if last.is_some_and(|l| i <= l) {
            return Err(Error::Invalid("weight indices must be strictly increasing".into()));
        }
        if !w.is_finite() {
            return Err(Error::Invalid(format!("non-finite weight at index {i}")));
        }
        out[i as usize] = w;
        last = Some(i);
    }
    Ok(out)
}

fn action_blocks(n_categories: usize) -> Vec<String> {
    (0..n_categories)
        .map(Action::Classify)
        .chain([Action::Next, Action::Stop])
        .map(|a| a.to_string())
        .collect()
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self.weights {
            Weights::Stc(_) => ModelKind::Stc,
            Weights::Baseline(_) => ModelKind::Baseline,
        }
    }

    pub fn stc(mode: TaskMode, categories: CategorySet, vocabulary: Vocabulary, q: LinearQ) -> Result<Self> {
        if q.vocab_len != vocabulary.len() || q.n_categories != categories.len() {
            return Err(Error::DimensionMismatch {
                expected: features::state_action_dim(vocabulary.len(), categories.len()),
                actual: q.dim(),
            });
        }
        Ok(Model {
            mode,
            categories,
            vocabulary,
            weights: Weights::Stc(q),
        })
    }

    pub fn baseline(categories: CategorySet, vocabulary: Vocabulary, model: BaselineModel) -> Result<Self> {
        if model.vocab_len != vocabulary.len() || model.n_categories() != categories.len() {
            return Err(Error::DimensionMismatch {
                expected: vocabulary.len() * categories.len(),
                actual: model.vocab_len * model.n_categories(),
            });
        }
        if *model.vocab_checksum != *vocabulary.checksum() {
            return Err(Error::ChecksumMismatch {
                model: model.vocab_checksum.to_string(),
                document: vocabulary.checksum().to_string(),
            });
        }
        Ok(Model {
            mode: model.mode,
            categories,
            vocabulary,
            weights: Weights::Baseline(model),
        })
    }

    pub fn to_file(&self) -> ModelFile {
        let v = self.vocabulary.len();
        let c = self.categories.len();
        let (block_dim, blocks, degenerate, theta) = match &self.weights {
            Weights::Stc(q) => (features::state_dim(v, c), action_blocks(c), Vec::new(), sparse_pairs(&q.theta)),
            Weights::Baseline(b) => {
                let flat: Vec<f64> = b.weights.iter().flatten().copied().collect();
                let degenerate = b
                    .degenerate
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d)
                    .map(|(k, _)| k)
                    .collect();
                (v, self.categories.names().to_vec(), degenerate, sparse_pairs(&flat))
            }
        };
        ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            kind: self.kind(),
            mode: self.mode,
            n_categories: c,
            vocab_len: v,
            categories: self.categories.names().to_vec(),
            block_dim,
            blocks,
            vocab_checksum: self.vocabulary.checksum().to_string(),
            stopwords_sha256: stopwords::global().sha256().to_string(),
            vocabulary: VocabularyRecord {
                terms: self.vocabulary.terms().to_vec(),
                idf: self.vocabulary.idf_weights().to_vec(),
                n_docs: self.vocabulary.n_docs(),
            },
            degenerate,
            theta,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.format != FORMAT {
            return Err(Error::Invalid(format!("not a model file (format `{}`)", file.format)));
        }
        if file.version != VERSION {
            return Err(Error::Invalid(format!("unsupported model version {}", file.version)));
        }
        let categories = CategorySet::new(file.categories.iter().cloned())?;
        if categories.names() != file.categories.as_slice() || categories.len() != file.n_categories {
            return Err(Error::Invalid("category list is not the sorted set of n_categories names".into()));
        }
        let vocabulary = Vocabulary::from_parts(file.vocabulary.terms, file.vocabulary.idf, file.vocabulary.n_docs)?;
        if vocabulary.len() != file.vocab_len {
            return Err(Error::DimensionMismatch {
                expected: file.vocab_len,
                actual: vocabulary.len(),
            });
        }
        if vocabulary.checksum() != file.vocab_checksum {
            return Err(Error::ChecksumMismatch {
                model: file.vocab_checksum,
                document: vocabulary.checksum().to_string(),
            });
        }
        if file.stopwords_sha256 != stopwords::global().sha256() {
            log::warn!("model was built with a different stop-word list");
        }
        let (v, c) = (file.vocab_len, file.n_categories);
        match file.kind {
            ModelKind::Stc => {
                if file.block_dim != features::state_dim(v, c) || file.blocks != action_blocks(c) {
                    return Err(Error::Invalid("block layout does not match the reading agent".into()));
                }
                let theta = dense(&file.theta, features::state_action_dim(v, c))?;
                let q = LinearQ::from_theta(v, c, theta)?;
                Model::stc(file.mode, categories, vocabulary, q)
            }
            ModelKind::Baseline => {
                if file.block_dim != v || file.blocks != file.categories {
                    return Err(Error::Invalid("block layout does not match the baseline".into()));
                }
                let flat = dense(&file.theta, v * c)?;
                let mut degenerate = vec![false; c];
                for &k in &file.degenerate {
                    *degenerate
                        .get_mut(k)
                        .ok_or_else(|| Error::Invalid(format!("degenerate category {k} out of range")))? = true;
                }
                let weights = if v == 0 {
                    vec![Vec::new(); c]
                } else {
                    flat.chunks(v).map(<[f64]>::to_vec).collect()
                };
                let b = BaselineModel {
                    mode: file.mode,
                    vocab_len: v,
                    weights,
                    degenerate,
                    vocab_checksum: Arc::from(vocabulary.checksum()),
                };
                Model::baseline(categories, vocabulary, b)
            }
        }
    }

    /// Reads raw `text` and returns the assigned categories. The reading
    /// agent runs its greedy episode; the baseline reads everything.
    pub fn classify_text(&self, text: &str) -> Result<Classification> {
        let raw = RawDocument::from_text("input", &[], text);
        if raw.sentences.is_empty() {
            return Err(Error::InvalidDocument {
                doc_id: raw.id,
                reason: "no sentences".into(),
            });
        }
        let pre = Preprocessor::default();
        let tokens = corpus::tokenize(&raw, &pre);
        let doc = Document {
            id: raw.id,
            y: vec![false; self.categories.len()],
            sentences: tokens.sentences.iter().map(|s| self.vocabulary.vectorize(s)).collect(),
            global: self.vocabulary.vectorize(tokens.sentences.iter().flatten()),
            vocab_checksum: Arc::from(self.vocabulary.checksum()),
        };
        let n = doc.n_sentences();
        match &self.weights {
            Weights::Stc(q) => {
                let log = mdp::run_episode(&doc, &mut PolicyRunner::Greedy(q), self.mode)?;
                Ok(Classification {
                    labels: log.yhat,
                    read: log.read,
                    n,
                })
            }
            Weights::Baseline(b) => Ok(Classification {
                labels: baseline::predict_baseline(b, &doc)?,
                read: n,
                n,
            }),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Model::from_file(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}
