//! Approximate policy iteration with rollouts.
//!
//! Each iteration samples states visited by the current policy, estimates
//! the return of every available action by taking it and then following the
//! current policy to the end of the episode, labels the maximizing actions
//! good and the others bad, and fits the linear classifier that separates
//! them. Its greedy policy becomes the next rollout policy.
//!
//! Randomness is drawn from streams derived from `(seed, iteration, state
//! ordinal, ...)`, and per-state work is merged in ordinal order, so results
//! do not depend on the number of worker threads.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::{self, StateActionFeatures};
use crate::linear::{self, ClassifierConfig};
use crate::mdp::{self, Action, MdpState, Policy, TaskMode};
use crate::policy::{LinearQ, PolicyKind};
use crate::seed;

const STREAM_SAMPLE: u64 = 0;
const STREAM_SAMPLE_POLICY: u64 = 1;
const STREAM_ROLLOUT: u64 = 2;
const STREAM_INITIAL_POLICY: u64 = 0xA110;
const STREAM_EVAL: u64 = 0xE7A1;
const STREAM_CLASSIFIER: u64 = 0xC1A5;

/// Regularization of the action classifier.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Minimum gain in mean training reward for another iteration to run.
pub const MIN_IMPROVEMENT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutConfig {
    pub n_states: usize,
    pub rollouts_per_state: usize,
    pub iterations: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub early_stop: bool,
    /// Consecutive iterations without improving on the best mean training
    /// reward before early stopping. 1 stops at the first non-improving
    /// iteration.
    #[serde(default = "default_patience")]
    pub patience: usize,
    pub classifier: ClassifierConfig,
}

fn default_true() -> bool {
    true
}

fn default_patience() -> usize {
    2
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig {
            n_states: 10_000,
            rollouts_per_state: 1,
            iterations: 5,
            seed: 0,
            early_stop: true,
            patience: default_patience(),
            classifier: ClassifierConfig {
                lambda: DEFAULT_LAMBDA,
                ..ClassifierConfig::default()
            },
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 {
            return Err(Error::config("n_states", "must be at least 1"));
        }
        if self.rollouts_per_state == 0 {
            return Err(Error::config("rollouts_per_state", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience", "must be at least 1"));
        }
        self.classifier.validate()
    }
}

/// Picks a training document uniformly, runs `policy` on it and returns one
/// of the non-terminal states it visited, uniformly.
pub fn sample_state<'d, P: Policy + ?Sized, R: Rng>(
    docs: &'d [Document],
    policy: &mut P,
    mode: TaskMode,
    rng: &mut R,
) -> Result<MdpState<'d>> {
    if docs.is_empty() {
        return Err(Error::Invalid("no training documents".into()));
    }
    let doc = &docs[rng.gen_range(0..docs.len())];
    let mut visited = Vec::new();
    let mut state = MdpState::initial(doc);
    while !state.is_terminal(mode) {
        let a = policy.choose(&state, mode)?;
        let next = state.transition(a, mode)?;
        visited.push(state);
        state = next;
        if visited.len() > mdp::max_episode_len(doc) {
            return Err(Error::Invalid("sampling episode did not terminate".into()));
        }
    }
    let k = rng.gen_range(0..visited.len());
    Ok(visited.swap_remove(k))
}

/// Takes `first_action` in `state`, then follows `policy` until the episode
/// ends; returns the episode's final reward.
pub fn rollout_return<P: Policy + ?Sized>(
    state: &MdpState<'_>,
    first_action: Action,
    policy: &mut P,
    mode: TaskMode,
) -> Result<f64> {
    let immediate = state.reward(first_action, mode)?;
    let next = state.transition(first_action, mode)?;
    let (_, _, rest) = mdp::run_from(next, policy, mode)?;
    Ok(immediate + rest)
}

/// Mean of `n` independent rollouts, rollout `r` drawing from `stream ++ [r]`.
pub fn estimate_return(
    state: &MdpState<'_>,
    action: Action,
    policy: &PolicyKind,
    mode: TaskMode,
    n: usize,
    stream: &[u64],
) -> Result<f64> {
    let mut path = stream.to_vec();
    path.push(0);
    let mut total = 0.0;
    for r in 0..n {
        *path.last_mut().unwrap() = r as u64;
        total += rollout_return(state, action, &mut policy.runner(&path), mode)?;
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStateAction {
    pub features: StateActionFeatures,
    pub good: bool,
    pub state_ordinal: usize,
    pub action: Action,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub examples: Vec<LabeledStateAction>,
    /// Sampled states whose actions all tied.
    pub n_skipped: usize,
}

/// Estimated return of every available action in a sampled state.
#[derive(Debug, Clone)]
struct ScoredState<'d> {
    state: MdpState<'d>,
    returns: Vec<(Action, f64)>,
}

fn score_state<'d>(
    docs: &'d [Document],
    policy: &PolicyKind,
    mode: TaskMode,
    cfg: &RolloutConfig,
    iteration: usize,
    ordinal: usize,
) -> Result<ScoredState<'d>> {
    let base = [iteration as u64, ordinal as u64];
    let mut rng = seed::derived_rng(cfg.seed, &[base[0], base[1], STREAM_SAMPLE]);
    let mut sampler = policy.runner(&[base[0], base[1], STREAM_SAMPLE_POLICY]);
    let state = sample_state(docs, &mut sampler, mode, &mut rng)?;
    let returns = state
        .available_actions(mode)?
        .into_iter()
        .map(|a| {
            let stream = [base[0], base[1], STREAM_ROLLOUT, a.ordinal(state.doc().n_categories()) as u64];
            estimate_return(&state, a, policy, mode, cfg.rollouts_per_state, &stream).map(|r| (a, r))
        })
        .collect::<Result<_>>()?;
    Ok(ScoredState { state, returns })
}

/// Labels the maximizers of the estimated return good and the rest bad;
/// states where every action ties produce nothing.
fn label_state(scored: &ScoredState<'_>, ordinal: usize) -> Result<Option<Vec<LabeledStateAction>>> {
    let best = scored.returns.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    if scored.returns.iter().all(|&(_, r)| r == best) {
        return Ok(None);
    }
    let phi = Arc::new(features::phi_state(&scored.state)?);
    let c = scored.state.doc().n_categories();
    Ok(Some(
        scored
            .returns
            .iter()
            .map(|&(a, r)| LabeledStateAction {
                features: features::with_phi(phi.clone(), a, c),
                good: r == best,
                state_ordinal: ordinal,
                action: a,
            })
            .collect(),
    ))
}

/// Rollout-labeled examples for one policy-iteration step. `iteration`
/// selects the random streams.
pub fn build_training_set(
    docs: &[Document],
    policy: &PolicyKind,
    mode: TaskMode,
    cfg: &RolloutConfig,
    iteration: usize,
) -> Result<TrainingSet> {
    let per_state: Vec<Option<Vec<LabeledStateAction>>> = (0..cfg.n_states)
        .into_par_iter()
        .map(|i| label_state(&score_state(docs, policy, mode, cfg, iteration, i)?, i))
        .collect::<Result<_>>()?;
    let mut set = TrainingSet::default();
    for s in per_state {
        match s {
            Some(ex) => set.examples.extend(ex),
            None => set.n_skipped += 1,
        }
    }
    Ok(set)
}

/// Mean episode reward and mean reading ratio of `policy` over `docs`;
/// document `i` uses stream `[STREAM_EVAL, i]`.
pub fn evaluate_policy(docs: &[Document], policy: &PolicyKind, mode: TaskMode) -> Result<(f64, f64)> {
    let logs: Vec<mdp::EpisodeLog> = docs
        .par_iter()
        .enumerate()
        .map(|(i, d)| mdp::run_episode(d, &mut policy.runner(&[STREAM_EVAL, i as u64]), mode))
        .collect::<Result<_>>()?;
    let n = logs.len().max(1) as f64;
    let reward = logs.iter().map(|l| l.reward).sum::<f64>() / n;
    let reading = logs.iter().map(|l| l.reading_ratio()).sum::<f64>() / n;
    Ok((reward, reading))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_examples: usize,
    pub n_skipped_states: usize,
    pub mean_episode_reward: f64,
}

#[derive(Debug, Clone)]
pub struct Learned {
    pub q: LinearQ,
    pub best_iteration: usize,
    pub telemetry: Vec<IterationRecord>,
}

pub fn policy_iteration(docs: &[Document], mode: TaskMode, cfg: &RolloutConfig) -> Result<Learned> {
    cfg.validate()?;
    let first = docs.first().ok_or_else(|| Error::Invalid("no training documents".into()))?;
    let vocab_len = first.sentences[0].dim();
    let n_categories = first.n_categories();
    let dim = features::state_action_dim(vocab_len, n_categories);

    let mut policy = PolicyKind::UniformRandom {
        seed: seed::derive(cfg.seed, &[STREAM_INITIAL_POLICY]),
    };
    let (initial_score, _) = evaluate_policy(docs, &policy, mode)?;
    log::info!("initial random policy: mean reward {initial_score:.4}");
    let mut best_score = initial_score;
    let mut stale = 0;

    let mut telemetry = Vec::new();
    let mut best: Option<(f64, usize, Arc<LinearQ>)> = None;
    for t in 1..=cfg.iterations {
        let set = build_training_set(docs, &policy, mode, cfg, t)?;
        if set.examples.is_empty() {
            return Err(Error::EmptyTrainingSet(t));
        }
        let xs: Vec<&StateActionFeatures> = set.examples.iter().map(|e| &e.features).collect();
        let ys: Vec<bool> = set.examples.iter().map(|e| e.good).collect();
        let classifier = ClassifierConfig {
            seed: seed::derive(cfg.seed, &[STREAM_CLASSIFIER, t as u64]),
            ..cfg.classifier.clone()
        };
        let theta = linear::train_linear(&xs, &ys, dim, &classifier)?;
        let q = Arc::new(LinearQ::from_theta(vocab_len, n_categories, theta)?);
        let next = PolicyKind::Greedy(q.clone());
        let (score, reading) = evaluate_policy(docs, &next, mode)?;
        log::info!(
            "iteration {t}: {} examples, {} skipped states, mean reward {score:.4}, reading size {reading:.3}",
            set.examples.len(),
            set.n_skipped
        );
        telemetry.push(IterationRecord {
            iteration: t,
            n_examples: set.examples.len(),
            n_skipped_states: set.n_skipped,
            mean_episode_reward: score,
        });
        if best.as_ref().map_or(true, |(s, _, _)| score > *s) {
            best = Some((score, t, q));
        }
        if score > best_score + MIN_IMPROVEMENT {
            best_score = score;
            stale = 0;
        } else {
            stale += 1;
        }
        if cfg.early_stop && stale >= cfg.patience {
            break;
        }
        policy = next;
    }
    let (_, best_iteration, q) = best.expect("at least one iteration ran");
    Ok(Learned {
        q: Arc::try_unwrap(q).unwrap_or_else(|q| (*q).clone()),
        best_iteration,
        telemetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::doc;
    use TaskMode::*;

    fn always(a: Action) -> impl FnMut(&MdpState<'_>) -> Action {
        move |s: &MdpState<'_>| {
            if s.is_legal(a, MonoLabel) {
                a
            } else {
                Action::Stop
            }
        }
    }

    #[test]
    fn always_stop_samples_initial_state() {
        let docs = vec![doc(3, &[true, false]), doc(2, &[false, true])];
        let mut rng = seed::rng(1);
        for _ in 0..50 {
            let s = sample_state(&docs, &mut always(Action::Stop), MonoLabel, &mut rng).unwrap();
            assert_eq!((s.p(), s.n_assigned()), (1, 0));
        }
    }

    #[test]
    fn mono_label_samples_respect_action_restriction() {
        let docs = vec![doc(3, &[true, false])];
        let random = PolicyKind::UniformRandom { seed: 5 };
        let mut rng = seed::rng(2);
        for i in 0..500 {
            let s = sample_state(&docs, &mut random.runner(&[i]), MonoLabel, &mut rng).unwrap();
            assert!(s.n_assigned() <= 1);
            if s.n_assigned() == 1 {
                assert_eq!(s.available_actions(MonoLabel).unwrap(), vec![Action::Stop]);
            }
        }
    }

    #[test]
    fn next_then_stop_policy_samples_cursor_uniformly() {
        let docs = vec![doc(3, &[true, false])];
        let mut rng = seed::rng(3);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            let s = sample_state(&docs, &mut always(Action::Next), MonoLabel, &mut rng).unwrap();
            counts[s.p() - 1] += 1;
        }
        let expected = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 2 degrees of freedom, p = 0.001
        assert!(chi2 < 13.82, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn immediate_stop_needs_no_policy() {
        let d = doc(2, &[true, false]);
        let s = MdpState::new(&d, 2, vec![true, false], false).unwrap();
        let mut never = |_: &MdpState<'_>| -> Action { panic!("policy must not be called") };
        assert_eq!(rollout_return(&s, Action::Stop, &mut never, MultiLabel).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_continuation_repeats() {
        let d = doc(3, &[true, false]);
        let q = Arc::new(LinearQ::zeros(3, 2));
        let kind = PolicyKind::Greedy(q);
        let s = MdpState::initial(&d);
        let a = estimate_return(&s, Action::Next, &kind, MonoLabel, 3, &[1]).unwrap();
        let b = estimate_return(&s, Action::Next, &kind, MonoLabel, 3, &[9]).unwrap();
        assert_eq!(a, b);
        // zero weights: classify 0 (correct here), then stop
        assert_eq!(a, 1.0);
    }

    #[test]
    fn single_optimal_action_is_the_only_positive() {
        // one sentence, class 1; continuation always stops immediately
        let docs = vec![doc(1, &[false, true])];
        let s = MdpState::initial(&docs[0]);
        let stop_policy = |_: &MdpState<'_>| Action::Stop;
        let mut stop_policy = stop_policy;
        let returns: Vec<_> = s
            .available_actions(MultiLabel)
            .unwrap()
            .into_iter()
            .map(|a| (a, rollout_return(&s, a, &mut stop_policy, MultiLabel).unwrap()))
            .collect();
        let scored = ScoredState { state: s, returns };
        let ex = label_state(&scored, 0).unwrap().unwrap();
        let good: Vec<_> = ex.iter().filter(|e| e.good).map(|e| e.action).collect();
        assert_eq!(good, vec![Action::Classify(1)]);

        let tied = ScoredState {
            state: MdpState::initial(&docs[0]),
            returns: vec![(Action::Classify(0), 0.0), (Action::Stop, 0.0)],
        };
        assert!(label_state(&tied, 0).unwrap().is_none());
    }

    #[test]
    fn training_set_bounds_and_prefix_property() {
        let docs: Vec<_> = (0..4).map(|i| doc(3, &[i % 2 == 0, i % 2 == 1])).collect();
        let random = PolicyKind::UniformRandom { seed: 11 };
        let small = RolloutConfig {
            n_states: 40,
            ..Default::default()
        };
        let big = RolloutConfig {
            n_states: 80,
            ..small.clone()
        };
        let a = build_training_set(&docs, &random, MonoLabel, &small, 1).unwrap();
        let b = build_training_set(&docs, &random, MonoLabel, &big, 1).unwrap();
        assert!(a.examples.len() <= 40 * (2 + 2));
        let prefix: Vec<_> = b.examples.iter().filter(|e| e.state_ordinal < 40).cloned().collect();
        assert_eq!(prefix, a.examples);
        for e in &b.examples {
            assert_eq!(e.features.block, e.action.ordinal(2));
        }
    }

    #[test]
    fn one_iteration_and_determinism() {
        let docs: Vec<_> = (0..6).map(|i| doc(2, &[i % 2 == 0, i % 2 == 1])).collect();
        let cfg = RolloutConfig {
            n_states: 60,
            iterations: 1,
            seed: 4,
            ..Default::default()
        };
        let a = policy_iteration(&docs, MonoLabel, &cfg).unwrap();
        assert_eq!(a.telemetry.len(), 1);
        assert_eq!(a.best_iteration, 1);
        let b = policy_iteration(&docs, MonoLabel, &cfg).unwrap();
        assert_eq!(a.q, b.q);
    }
}
