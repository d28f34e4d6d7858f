//! State and state-action feature maps.
//!
//! `phi(s)` concatenates the mean of the sentence vectors read so far, the
//! vector of the current sentence and the 0/1 assignment vector, giving
//! dimension `2V + C`. `phi(s, a)` places `phi(s)` in the block of action `a`
//! inside a `(C + 2)(2V + C)` vector and is zero elsewhere, so one weight
//! vector scores every action independently.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mdp::{Action, MdpState, TaskMode};
use crate::sparse::SparseVector;

/// Dimension of `phi(s)`.
pub fn state_dim(vocab_len: usize, n_categories: usize) -> usize {
    2 * vocab_len + n_categories
}

/// Dimension of `phi(s, a)`.
pub fn state_action_dim(vocab_len: usize, n_categories: usize) -> usize {
    (n_categories + 2) * state_dim(vocab_len, n_categories)
}

pub fn phi_state(state: &MdpState<'_>) -> Result<SparseVector> {
    if state.halted() {
        return Err(Error::Halted);
    }
    let doc = state.doc();
    let p = state.p();
    let v = doc.sentences[0].dim();
    let c = doc.n_categories();
    let read = &doc.sentences[..p];
    let inv_p = 1.0 / p as f64;

    let mut pairs: Vec<(u32, f64)> = Vec::with_capacity(read.iter().map(|s| s.nnz()).sum::<usize>() + c);
    for s in read {
        pairs.extend(s.entries().iter().map(|&(i, x)| (i, x)));
    }
    let mut mean = SparseVector::from_pairs(v, pairs)?.entries().to_vec();
    for e in &mut mean {
        e.1 *= inv_p;
    }
    let mut out = mean;
    out.extend(read[p - 1].entries().iter().map(|&(i, x)| (i + v as u32, x)));
    out.extend(
        state
            .assigned()
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(k, _)| ((2 * v + k) as u32, 1.0)),
    );
    SparseVector::from_pairs(state_dim(v, c), out)
}

/// `phi(s, a)` held lazily as the block index plus a shared `phi(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateActionFeatures {
    pub block: usize,
    pub n_blocks: usize,
    pub phi: Arc<SparseVector>,
}

impl StateActionFeatures {
    pub fn block_dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn dim(&self) -> usize {
        self.n_blocks * self.block_dim()
    }

    pub fn offset(&self) -> usize {
        self.block * self.block_dim()
    }

    pub fn dot_dense(&self, theta: &[f64]) -> f64 {
        self.phi.dot_dense(theta, self.offset())
    }

    pub fn norm(&self) -> f64 {
        self.phi.norm()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let off = self.offset();
        self.phi.entries().iter().map(move |&(i, x)| (off + i as usize, x))
    }

    /// Materializes the full sparse vector.
    pub fn to_sparse(&self) -> SparseVector {
        SparseVector::from_pairs(self.dim(), self.iter().map(|(i, x)| (i as u32, x)).collect())
            .expect("block offsets stay inside the block layout")
    }
}

pub fn phi_state_action(state: &MdpState<'_>, action: Action, mode: TaskMode) -> Result<StateActionFeatures> {
    if !state.is_legal(action, mode) {
        return Err(Error::IllegalAction {
            action: action.to_string(),
            state: state.to_string(),
        });
    }
    Ok(with_phi(Arc::new(phi_state(state)?), action, state.doc().n_categories()))
}

pub fn with_phi(phi: Arc<SparseVector>, action: Action, n_categories: usize) -> StateActionFeatures {
    StateActionFeatures {
        block: action.ordinal(n_categories),
        n_blocks: n_categories + 2,
        phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::mdp::TaskMode::MultiLabel;
    use proptest::prelude::*;

    fn doc(sentences: Vec<Vec<(u32, f64)>>, v: usize, y: Vec<bool>) -> Document {
        Document {
            id: "d".into(),
            y,
            sentences: sentences
                .into_iter()
                .map(|s| SparseVector::from_pairs(v, s).unwrap())
                .collect(),
            global: SparseVector::zeros(v),
            vocab_checksum: Arc::from("t"),
        }
    }

    #[test]
    fn phi_of_two_read_sentences() {
        let d = doc(vec![vec![(0, 1.0)], vec![(1, 1.0)]], 2, vec![true, false]);
        let s = MdpState::new(&d, 2, vec![true, false], false).unwrap();
        let phi = phi_state(&s).unwrap();
        assert_eq!(phi.to_dense(), vec![0.5, 0.5, 0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn phi_at_first_sentence() {
        let d = doc(vec![vec![(0, 0.6), (1, 0.8)], vec![(1, 1.0)]], 2, vec![true, false]);
        let s = MdpState::initial(&d);
        let dense = phi_state(&s).unwrap().to_dense();
        assert_eq!(dense[..2], dense[2..4]);
        assert_eq!(dense[4..], [0.0, 0.0]);
    }

    #[test]
    fn empty_sentences_count_in_the_mean() {
        let d = doc(vec![vec![(0, 1.0)], vec![]], 2, vec![true, false]);
        let s = MdpState::new(&d, 2, vec![false, false], false).unwrap();
        assert_eq!(phi_state(&s).unwrap().to_dense(), vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn block_placement() {
        let d = doc(vec![vec![(0, 1.0)], vec![(1, 1.0)]], 2, vec![true, false]);
        let s = MdpState::initial(&d);
        let f = phi_state_action(&s, Action::Stop, MultiLabel).unwrap();
        assert_eq!(f.block, 3);
        assert_eq!(f.dim(), 24);
        assert!(f.iter().all(|(i, _)| (18..24).contains(&i)));
        let g = phi_state_action(&s, Action::Next, MultiLabel).unwrap();
        assert_eq!(f.to_sparse().dot(&g.to_sparse()), 0.0);
        assert!((f.norm() - phi_state(&s).unwrap().norm()).abs() < 1e-15);

        let done = s.transition(Action::Stop, MultiLabel).unwrap();
        assert!(phi_state(&done).is_err());
        let last = MdpState::new(&d, 2, vec![false, false], false).unwrap();
        assert!(phi_state_action(&last, Action::Next, MultiLabel).is_err());
    }

    proptest! {
        #[test]
        fn block_invariants(
            n in 1usize..5,
            c in 2usize..4,
            seed in any::<u64>(),
        ) {
            let v = 6;
            use rand::Rng;
            let mut rng = crate::seed::rng(seed);
            let sentences = (0..n)
                .map(|_| {
                    let mut raw: Vec<(u32, f64)> = Vec::new();
                    for i in 0..v as u32 {
                        if rng.gen_bool(0.4) {
                            raw.push((i, rng.gen_range(0.1..1.0)));
                        }
                    }
                    SparseVector::from_pairs(v, raw).unwrap().normalized().entries().to_vec()
                })
                .collect();
            let y = (0..c).map(|k| k == 0).collect();
            let d = doc(sentences, v, y);
            let p = rng.gen_range(1..=n);
            let assigned: Vec<bool> = (0..c).map(|_| rng.gen_bool(0.5)).collect();
            let s = MdpState::new(&d, p, assigned, false).unwrap();
            let phi = phi_state(&s).unwrap();
            let dense = phi.to_dense();
            let mean_norm = dense[..v].iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(mean_norm <= 1.0 + 1e-12);
            prop_assert!(dense[2 * v..].iter().all(|&x| x == 0.0 || x == 1.0));
            prop_assert_eq!(&phi, &phi_state(&s).unwrap());

            let acts = s.available_actions(MultiLabel).unwrap();
            let feats: Vec<_> = acts.iter().map(|&a| phi_state_action(&s, a, MultiLabel).unwrap()).collect();
            for (i, f) in feats.iter().enumerate() {
                prop_assert_eq!(f.dim(), state_action_dim(v, c));
                for g in &feats[i + 1..] {
                    prop_assert_eq!(f.to_sparse().dot(&g.to_sparse()), 0.0);
                }
            }
        }
    }
}
