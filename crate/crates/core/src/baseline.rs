//! One-vs-rest linear classifiers over whole-document tf-idf vectors.

use std::sync::Arc;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::linear::{self, ClassifierConfig};
use crate::mdp::TaskMode;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub mode: TaskMode,
    pub vocab_len: usize,
    /// One weight vector of length `vocab_len` per category.
    pub weights: Vec<Vec<f64>>,
    /// Categories that had no positive (or no negative) training document.
    pub degenerate: Vec<bool>,
    pub vocab_checksum: Arc<str>,
}

impl BaselineModel {
    pub fn n_categories(&self) -> usize {
        self.weights.len()
    }

    /// `<w_k, x>` for every category.
    pub fn scores(&self, doc: &Document) -> Result<Vec<f64>> {
        if *doc.vocab_checksum != *self.vocab_checksum {
            return Err(Error::ChecksumMismatch {
                model: self.vocab_checksum.to_string(),
                document: doc.vocab_checksum.to_string(),
            });
        }
        if doc.global.dim() != self.vocab_len {
            return Err(Error::DimensionMismatch {
                expected: self.vocab_len,
                actual: doc.global.dim(),
            });
        }
        Ok(self.weights.iter().map(|w| doc.global.dot_dense(w, 0)).collect())
    }
}

pub fn train_baseline(docs: &[Document], mode: TaskMode, cfg: &ClassifierConfig) -> Result<BaselineModel> {
    let first = docs.first().ok_or(Error::EmptyTrainingSet(0))?;
    let vocab_len = first.global.dim();
    let xs: Vec<&SparseVector> = docs.iter().map(|d| &d.global).collect();
    let labels: Vec<Vec<bool>> = docs.iter().map(|d| d.y.clone()).collect();
    let classes = linear::train_multiclass_ovr(&xs, &labels, first.n_categories(), vocab_len, cfg)?;
    for (k, c) in classes.iter().enumerate() {
        if c.degenerate {
            log::warn!("baseline: category {k} has a single label value in training, weights left at zero");
        }
    }
    Ok(BaselineModel {
        mode,
        vocab_len,
        degenerate: classes.iter().map(|c| c.degenerate).collect(),
        weights: classes.into_iter().map(|c| c.theta).collect(),
        vocab_checksum: first.vocab_checksum.clone(),
    })
}

/// Index of the largest score, lowest index on ties.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// Mono-label: one-hot argmax. Multi-label: every positive score, or the
/// argmax alone when none is positive.
pub fn decide(scores: &[f64], mode: TaskMode) -> Vec<bool> {
    let mut yhat = vec![false; scores.len()];
    if scores.is_empty() {
        return yhat;
    }
    if mode == TaskMode::MultiLabel {
        for (k, &s) in scores.iter().enumerate() {
            yhat[k] = s > 0.0;
        }
        if yhat.iter().any(|&b| b) {
            return yhat;
        }
    }
    yhat[argmax(scores)] = true;
    yhat
}

pub fn predict_baseline(model: &BaselineModel, doc: &Document) -> Result<Vec<bool>> {
    Ok(decide(&model.scores(doc)?, model.mode))
}
