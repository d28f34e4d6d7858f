//! Linear Q-function and the policies built on it.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{self, phi_state};
use crate::mdp::{Action, MdpState, Policy, TaskMode};
use crate::seed;

/// `Q(s, a) = <theta, phi(s, a)>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearQ {
    pub vocab_len: usize,
    pub n_categories: usize,
    pub theta: Vec<f64>,
}

impl LinearQ {
    pub fn zeros(vocab_len: usize, n_categories: usize) -> Self {
        LinearQ {
            vocab_len,
            n_categories,
            theta: vec![0.0; features::state_action_dim(vocab_len, n_categories)],
        }
    }

    pub fn from_theta(vocab_len: usize, n_categories: usize, theta: Vec<f64>) -> Result<Self> {
        let expected = features::state_action_dim(vocab_len, n_categories);
        if theta.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: theta.len(),
            });
        }
        if theta.iter().any(|w| !w.is_finite()) {
            return Err(Error::Invalid("non-finite weight".into()));
        }
        Ok(LinearQ {
            vocab_len,
            n_categories,
            theta,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    fn block_dim(&self) -> usize {
        features::state_dim(self.vocab_len, self.n_categories)
    }

    fn check(&self, state: &MdpState<'_>) -> Result<()> {
        let doc = state.doc();
        let v = doc.sentences[0].dim();
        let c = doc.n_categories();
        let actual = features::state_action_dim(v, c);
        if (v, c) != (self.vocab_len, self.n_categories) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual,
            });
        }
        Ok(())
    }

    pub fn q_value(&self, state: &MdpState<'_>, action: Action, mode: TaskMode) -> Result<f64> {
        self.check(state)?;
        let f = features::phi_state_action(state, action, mode)?;
        Ok(f.dot_dense(&self.theta))
    }

    /// Q-values of every available action, in canonical action order.
    pub fn q_values(&self, state: &MdpState<'_>, mode: TaskMode) -> Result<Vec<(Action, f64)>> {
        self.check(state)?;
        let actions = state.available_actions(mode)?;
        let phi = phi_state(state)?;
        let bd = self.block_dim();
        Ok(actions
            .into_iter()
            .map(|a| (a, phi.dot_dense(&self.theta, a.ordinal(self.n_categories) * bd)))
            .collect())
    }

    /// Highest-scoring available action; ties go to the earliest action in
    /// canonical order.
    pub fn greedy(&self, state: &MdpState<'_>, mode: TaskMode) -> Result<Action> {
        let qs = self.q_values(state, mode)?;
        let mut best = qs[0];
        for &(a, q) in &qs[1..] {
            if q > best.1 {
                best = (a, q);
            }
        }
        Ok(best.0)
    }
}

/// Serializable description of a policy.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    Greedy(Arc<LinearQ>),
    UniformRandom { seed: u64 },
}

impl PolicyKind {
    /// Instantiates the policy; random policies draw from the stream derived
    /// from their seed and `stream`.
    pub fn runner(&self, stream: &[u64]) -> PolicyRunner<'_> {
        match self {
            PolicyKind::Greedy(q) => PolicyRunner::Greedy(q),
            PolicyKind::UniformRandom { seed } => PolicyRunner::Random(seed::derived_rng(*seed, stream)),
        }
    }
}

pub enum PolicyRunner<'q> {
    Greedy(&'q LinearQ),
    Random(ChaCha8Rng),
}

impl PolicyRunner<'_> {
    pub fn select_action(&mut self, state: &MdpState<'_>, mode: TaskMode) -> Result<Action> {
        match self {
            PolicyRunner::Greedy(q) => q.greedy(state, mode),
            PolicyRunner::Random(rng) => {
                let actions = state.available_actions(mode)?;
                Ok(actions[rng.gen_range(0..actions.len())])
            }
        }
    }
}

impl Policy for PolicyRunner<'_> {
    fn choose(&mut self, state: &MdpState<'_>, mode: TaskMode) -> Result<Action> {
        self.select_action(state, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::mdp::TaskMode::*;
    use crate::sparse::SparseVector;

    fn doc() -> Document {
        Document {
            id: "d".into(),
            y: vec![false, true],
            sentences: vec![
                SparseVector::from_pairs(2, vec![(0, 1.0)]).unwrap(),
                SparseVector::from_pairs(2, vec![(1, 1.0)]).unwrap(),
            ],
            global: SparseVector::zeros(2),
            vocab_checksum: Arc::from("t"),
        }
    }

    #[test]
    fn zero_theta_scores_zero_and_picks_first_action() {
        let d = doc();
        let q = LinearQ::zeros(2, 2);
        let s = MdpState::initial(&d);
        for a in s.available_actions(MonoLabel).unwrap() {
            assert_eq!(q.q_value(&s, a, MonoLabel).unwrap(), 0.0);
        }
        assert_eq!(q.greedy(&s, MonoLabel).unwrap(), Action::Classify(0));
    }

    #[test]
    fn single_weight_in_stop_block() {
        let d = doc();
        let s = MdpState::initial(&d);
        let mut q = LinearQ::zeros(2, 2);
        // block 3 (stop), offset 0 of phi(s) = mean block entry for term 0
        q.theta[3 * 6] = 1.0;
        assert_eq!(q.q_value(&s, Action::Stop, MultiLabel).unwrap(), 1.0);
        assert_eq!(q.q_value(&s, Action::Next, MultiLabel).unwrap(), 0.0);
        assert_eq!(q.greedy(&s, MultiLabel).unwrap(), Action::Stop);

        let mut scaled = q.clone();
        scaled.theta.iter_mut().for_each(|w| *w *= 2.5);
        assert_eq!(scaled.q_value(&s, Action::Stop, MultiLabel).unwrap(), 2.5);
        assert_eq!(scaled.greedy(&s, MultiLabel).unwrap(), Action::Stop);
    }

    #[test]
    fn argmax_picks_highest() {
        let d = doc();
        let s = MdpState::initial(&d);
        let mut q = LinearQ::zeros(2, 2);
        for (block, value) in [(0, 0.1), (1, 0.9), (2, 0.2), (3, 0.3)] {
            q.theta[block * 6] = value;
        }
        assert_eq!(q.greedy(&s, MultiLabel).unwrap(), Action::Classify(1));
    }

    #[test]
    fn dimension_mismatch() {
        let d = doc();
        let s = MdpState::initial(&d);
        let q = LinearQ::zeros(3, 2);
        assert!(matches!(q.q_value(&s, Action::Stop, MonoLabel), Err(Error::DimensionMismatch { .. })));
        assert!(LinearQ::from_theta(2, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn random_policy_is_legal_and_seeded() {
        let d = doc();
        let kind = PolicyKind::UniformRandom { seed: 9 };
        let run = |stream: u64| {
            let mut r = kind.runner(&[stream]);
            crate::mdp::run_episode(&d, &mut r, MonoLabel).unwrap()
        };
        assert_eq!(run(1), run(1));
        let logs: Vec<_> = (0..50).map(run).collect();
        assert!(logs.iter().any(|l| l.actions != logs[0].actions));
    }
}
