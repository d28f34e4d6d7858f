//! The reading process as a deterministic episodic MDP.
//!
//! A state is a document, a 1-based cursor `p` (sentences `1..=p` have been
//! read) and the set of categories assigned so far. Actions classify into a
//! category, read the next sentence, or stop. The only reward is the F1 of
//! the final assignment, granted on the terminal transition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskMode {
    #[serde(rename = "mono")]
    MonoLabel,
    #[serde(rename = "multi")]
    MultiLabel,
}

impl fmt::Display for TaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskMode::MonoLabel => "mono",
            TaskMode::MultiLabel => "multi",
        })
    }
}

impl FromStr for TaskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mono" | "mono-label" => Ok(TaskMode::MonoLabel),
            "multi" | "multi-label" => Ok(TaskMode::MultiLabel),
            _ => Err(Error::config("mode", format!("unknown mode `{s}` (expected mono or multi)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Classify(usize),
    Next,
    Stop,
}

impl Action {
    /// Position in the fixed action ordering `Classify(0..C), Next, Stop`;
    /// also the index of the action's feature block.
    pub fn ordinal(self, n_categories: usize) -> usize {
        match self {
            Action::Classify(k) => k,
            Action::Next => n_categories,
            Action::Stop => n_categories + 1,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Classify(k) => write!(f, "classify:{k}"),
            Action::Next => f.write_str("next"),
            Action::Stop => f.write_str("stop"),
        }
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "next" => Ok(Action::Next),
            "stop" => Ok(Action::Stop),
            _ => s
                .strip_prefix("classify:")
                .and_then(|k| k.parse().ok())
                .map(Action::Classify)
                .ok_or_else(|| Error::Invalid(format!("unknown action `{s}`"))),
        }
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdpState<'d> {
    doc: &'d Document,
    p: usize,
    assigned: Vec<bool>,
    halted: bool,
}

/// Serializable form of a state; the document is referenced by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub doc_id: String,
    pub p: usize,
    #[serde(with = "bits")]
    pub assigned: Vec<bool>,
    pub halted: bool,
}

impl<'d> MdpState<'d> {
    pub fn initial(doc: &'d Document) -> Self {
        MdpState {
            doc,
            p: 1,
            assigned: vec![false; doc.n_categories()],
            halted: false,
        }
    }

    /// Builds an arbitrary non-initial state, checking the state invariants.
    pub fn new(doc: &'d Document, p: usize, assigned: Vec<bool>, halted: bool) -> Result<Self> {
        if p == 0 || p > doc.n_sentences() {
            return Err(Error::Invalid(format!(
                "cursor {p} out of range 1..={}",
                doc.n_sentences()
            )));
        }
        if assigned.len() != doc.n_categories() {
            return Err(Error::LengthMismatch(assigned.len(), doc.n_categories()));
        }
        Ok(MdpState {
            doc,
            p,
            assigned,
            halted,
        })
    }

    pub fn doc(&self) -> &'d Document {
        self.doc
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn assigned(&self) -> &[bool] {
        &self.assigned
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    pub fn n_assigned(&self) -> usize {
        self.assigned.iter().filter(|&&b| b).count()
    }

    pub fn record(&self) -> StateRecord {
        StateRecord {
            doc_id: self.doc.id.clone(),
            p: self.p,
            assigned: self.assigned.clone(),
            halted: self.halted,
        }
    }

    pub fn from_record(record: &StateRecord, doc: &'d Document) -> Result<Self> {
        if record.doc_id != doc.id {
            return Err(Error::Invalid(format!(
                "state refers to `{}`, got document `{}`",
                record.doc_id, doc.id
            )));
        }
        Self::new(doc, record.p, record.assigned.clone(), record.halted)
    }

    /// Appends the legal actions, in canonical order, to `out`.
    pub fn actions_into(&self, mode: TaskMode, out: &mut Vec<Action>) -> Result<()> {
        if self.halted {
            return Err(Error::Halted);
        }
        out.clear();
        if mode == TaskMode::MonoLabel && self.n_assigned() > 0 {
            out.push(Action::Stop);
            return Ok(());
        }
        out.extend(
            self.assigned
                .iter()
                .enumerate()
                .filter(|(_, &a)| !a)
                .map(|(k, _)| Action::Classify(k)),
        );
        if self.p < self.doc.n_sentences() {
            out.push(Action::Next);
        }
        out.push(Action::Stop);
        Ok(())
    }

    pub fn available_actions(&self, mode: TaskMode) -> Result<Vec<Action>> {
        let mut out = Vec::with_capacity(self.assigned.len() + 2);
        self.actions_into(mode, &mut out)?;
        Ok(out)
    }

    pub fn is_legal(&self, action: Action, mode: TaskMode) -> bool {
        if self.halted {
            return false;
        }
        match action {
            Action::Stop => true,
            Action::Next => {
                self.p < self.doc.n_sentences() && !(mode == TaskMode::MonoLabel && self.n_assigned() > 0)
            }
            Action::Classify(k) => {
                k < self.assigned.len()
                    && !self.assigned[k]
                    && !(mode == TaskMode::MonoLabel && self.n_assigned() > 0)
            }
        }
    }

    pub fn transition(&self, action: Action, mode: TaskMode) -> Result<MdpState<'d>> {
        if self.halted {
            return Err(Error::Halted);
        }
        if !self.is_legal(action, mode) {
            return Err(Error::IllegalAction {
                action: action.to_string(),
                state: self.to_string(),
            });
        }
        let mut next = self.clone();
        match action {
            Action::Classify(k) => next.assigned[k] = true,
            Action::Next => next.p += 1,
            Action::Stop => next.halted = true,
        }
        Ok(next)
    }

    /// Terminal iff halted or no action is available. Stop is available in
    /// every non-halted state, so in practice this is `halted`.
    pub fn is_terminal(&self, _mode: TaskMode) -> bool {
        self.halted
    }

    /// Reward of taking `action` here: F1 of the resulting assignment if the
    /// transition ends the episode, 0 otherwise.
    pub fn reward(&self, action: Action, mode: TaskMode) -> Result<f64> {
        let next = self.transition(action, mode)?;
        Ok(if next.is_terminal(mode) {
            f1(&self.doc.y, &next.assigned)
        } else {
            0.0
        })
    }
}

impl fmt::Display for MdpState<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yhat: String = self.assigned.iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(
            f,
            "(doc={}, p={}/{}, yhat={}, halted={})",
            self.doc.id,
            self.p,
            self.doc.n_sentences(),
            yhat,
            self.halted
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub(crate) fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Per-document precision, recall and F1 with true positives counted over
/// categories present in both `y` and `yhat`; every 0/0 is 0.
pub fn prf1(y: &[bool], yhat: &[bool]) -> Result<Prf1> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch(y.len(), yhat.len()));
    }
    let tp = y.iter().zip(yhat).filter(|(&a, &b)| a && b).count();
    let precision = ratio(tp, yhat.iter().filter(|&&b| b).count());
    let recall = ratio(tp, y.iter().filter(|&&b| b).count());
    Ok(Prf1 {
        precision,
        recall,
        f1: f1_from(precision, recall),
    })
}

pub(crate) fn f1(y: &[bool], yhat: &[bool]) -> f64 {
    prf1(y, yhat).expect("label vectors of one document share C").f1
}

/// Anything that picks an action in a non-terminal state.
pub trait Policy {
    fn choose(&mut self, state: &MdpState<'_>, mode: TaskMode) -> Result<Action>;
}

impl<F> Policy for F
where
    F: FnMut(&MdpState<'_>) -> Action,
{
    fn choose(&mut self, state: &MdpState<'_>, _mode: TaskMode) -> Result<Action> {
        Ok(self(state))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub doc_id: String,
    pub actions: Vec<Action>,
    /// Sentences read, i.e. the largest cursor visited.
    pub read: usize,
    pub n: usize,
    #[serde(with = "bits")]
    pub yhat: Vec<bool>,
    pub reward: f64,
}

impl EpisodeLog {
    pub fn reading_ratio(&self) -> f64 {
        self.read as f64 / self.n as f64
    }
}

pub fn max_episode_len(doc: &Document) -> usize {
    doc.n_sentences() + doc.n_categories() + 1
}

/// Runs `policy` from `state` to termination, returning the final state,
/// the actions taken and the cumulative reward.
pub fn run_from<'d, P: Policy + ?Sized>(
    state: MdpState<'d>,
    policy: &mut P,
    mode: TaskMode,
) -> Result<(MdpState<'d>, Vec<Action>, f64)> {
    let bound = max_episode_len(state.doc);
    let mut state = state;
    let mut actions = Vec::new();
    let mut total = 0.0;
    while !state.is_terminal(mode) {
        if actions.len() >= bound {
            return Err(Error::Invalid(format!("episode exceeded {bound} steps")));
        }
        let a = policy.choose(&state, mode)?;
        total += state.reward(a, mode)?;
        state = state.transition(a, mode)?;
        actions.push(a);
    }
    Ok((state, actions, total))
}

pub fn run_episode<P: Policy + ?Sized>(doc: &Document, policy: &mut P, mode: TaskMode) -> Result<EpisodeLog> {
    let (last, actions, reward) = run_from(MdpState::initial(doc), policy, mode)?;
    Ok(EpisodeLog {
        doc_id: doc.id.clone(),
        actions,
        read: last.p,
        n: doc.n_sentences(),
        yhat: last.assigned,
        reward,
    })
}

/// Serializes `Vec<bool>` as a list of 0/1 integers.
pub(crate) mod bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&b| b as u8))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(serde::de::Error::custom(format!("expected 0 or 1, got {b}"))),
            })
            .collect()
    }
}
