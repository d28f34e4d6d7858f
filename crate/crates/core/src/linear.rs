//! L2-regularized hinge-loss linear classifier trained by stochastic
//! subgradient descent with step size `1 / (lambda * t)`.
//!
//! Minimizes `lambda/2 |w|^2 + 1/m sum_i max(0, 1 - y_i <w, x_i>)` with no
//! intercept term.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::StateActionFeatures;
use crate::seed;
use crate::sparse::SparseVector;

/// Sparse input the classifier can consume.
pub trait Features {
    fn dim(&self) -> usize;
    fn dot(&self, w: &[f64]) -> f64;
    fn axpy(&self, alpha: f64, w: &mut [f64]);
}

impl Features for SparseVector {
    fn dim(&self) -> usize {
        SparseVector::dim(self)
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.dot_dense(w, 0)
    }

    fn axpy(&self, alpha: f64, w: &mut [f64]) {
        for &(i, x) in self.entries() {
            w[i as usize] += alpha * x;
        }
    }
}

impl Features for StateActionFeatures {
    fn dim(&self) -> usize {
        StateActionFeatures::dim(self)
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.dot_dense(w)
    }

    fn axpy(&self, alpha: f64, w: &mut [f64]) {
        for (i, x) in self.iter() {
            w[i] += alpha * x;
        }
    }
}

impl<T: Features + ?Sized> Features for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn dot(&self, w: &[f64]) -> f64 {
        (**self).dot(w)
    }
    fn axpy(&self, alpha: f64, w: &mut [f64]) {
        (**self).axpy(alpha, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StepSchedule {
    /// `eta_t = 1 / (lambda * t)`
    #[default]
    #[serde(rename = "inverse-lambda-t")]
    InverseLambdaT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    #[serde(default)]
    pub schedule: StepSchedule,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            lambda: 1e-4,
            epochs: 10,
            seed: 0,
            schedule: StepSchedule::InverseLambdaT,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda", "must be a positive finite number"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        Ok(())
    }
}

fn check_inputs<X: Features>(xs: &[X], ys: &[bool], dim: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.dim(),
        });
    }
    Ok(())
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// Trains a binary classifier; `ys[i]` is true for the positive class.
pub fn train_linear<X: Features>(xs: &[X], ys: &[bool], dim: usize, cfg: &ClassifierConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_inputs(xs, ys, dim)?;
    if !ys.iter().any(|&y| y) || ys.iter().all(|&y| y) {
        return Err(Error::SingleClass);
    }
    let lambda = cfg.lambda;
    let mut rng = seed::rng(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    // w = scale * v keeps each step O(nnz(x)).
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = sign(ys[i]);
            let margin = y * scale * xs[i].dot(&v);
            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                xs[i].axpy(eta * y / scale, &mut v);
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    v.iter_mut().for_each(|w| *w *= scale);
    Ok(v)
}

pub fn objective<X: Features>(theta: &[f64], xs: &[X], ys: &[bool], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * theta.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - sign(y) * x.dot(theta)).max(0.0))
        .sum();
    reg + loss / xs.len().max(1) as f64
}

/// A subgradient of [`objective`]; the true gradient away from hinge kinks.
pub fn subgradient<X: Features>(theta: &[f64], xs: &[X], ys: &[bool], lambda: f64) -> Vec<f64> {
    let mut g: Vec<f64> = theta.iter().map(|w| lambda * w).collect();
    let m = xs.len().max(1) as f64;
    for (x, &y) in xs.iter().zip(ys) {
        let y = sign(y);
        if y * x.dot(theta) < 1.0 {
            x.axpy(-y / m, &mut g);
        }
    }
    g
}

pub fn training_error<X: Features>(theta: &[f64], xs: &[X], ys: &[bool]) -> f64 {
    let wrong = xs.iter().zip(ys).filter(|(x, &y)| (x.dot(theta) > 0.0) != y).count();
    wrong as f64 / xs.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvrClass {
    pub theta: Vec<f64>,
    /// Set when the class had no positive (or no negative) training example
    /// and its weights were left at zero.
    pub degenerate: bool,
}

/// One-vs-rest: class `k` against all others, for each `k`. Class `k`'s
/// stream is seeded from `(cfg.seed, k)`.
pub fn train_multiclass_ovr<X: Features + Sync>(
    xs: &[X],
    labels: &[Vec<bool>],
    n_classes: usize,
    dim: usize,
    cfg: &ClassifierConfig,
) -> Result<Vec<OvrClass>> {
    if n_classes < 2 {
        return Err(Error::Invalid("one-vs-rest needs at least two classes".into()));
    }
    if xs.len() != labels.len() {
        return Err(Error::LengthMismatch(xs.len(), labels.len()));
    }
    if let Some(l) = labels.iter().find(|l| l.len() != n_classes) {
        return Err(Error::LengthMismatch(l.len(), n_classes));
    }
    (0..n_classes)
        .into_par_iter()
        .map(|k| {
            let ys: Vec<bool> = labels.iter().map(|l| l[k]).collect();
            let class_cfg = ClassifierConfig {
                seed: seed::derive(cfg.seed, &[k as u64]),
                ..cfg.clone()
            };
            match train_linear(xs, &ys, dim, &class_cfg) {
                Ok(theta) => Ok(OvrClass {
                    theta,
                    degenerate: false,
                }),
                Err(Error::SingleClass) => Ok(OvrClass {
                    theta: vec![0.0; dim],
                    degenerate: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
