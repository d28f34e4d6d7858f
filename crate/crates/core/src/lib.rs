//! Sequential text classification.
//!
//! Documents are read one sentence at a time by an agent that decides, at
//! every step, whether to assign a category, read the next sentence, or stop.
//! The agent's policy is greedy with respect to a linear Q-function over
//! block state-action features, and is learned by approximate policy
//! iteration with Monte-Carlo rollouts.
//!
//! The crate also ships the text preprocessing pipeline, the tf-idf corpus
//! representation, a one-vs-rest linear baseline over whole documents and the
//! evaluation harness that compares the two.

pub mod baseline;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod learn;
pub mod linear;
pub mod mdp;
pub mod model;
pub mod policy;
pub mod preprocess;
pub mod seed;
pub mod sparse;
pub mod synthetic;

pub use error::{Error, Result};
