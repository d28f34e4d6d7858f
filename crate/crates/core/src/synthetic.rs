//! Toy corpora whose labels are fully determined by keyword sentences.
//!
//! Every sentence is a bag of pseudo-words drawn from a shared noise
//! vocabulary. A document of class `k` additionally contains class `k`'s
//! keyword in one sentence, so a reader that has seen the keyword sentence
//! can always label the document exactly.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::RawDocument;
use crate::error::{Error, Result};
use crate::preprocess;
use crate::seed;

/// Class keywords. Each survives preprocessing unchanged: at least three
/// characters, not a stop-word, and its own Porter stem.
pub const KEYWORDS: &[&str] = &[
    "cocoa", "copper", "grain", "crude", "zinc", "wheat", "cotton", "nickel", "silver", "rubber", "sugar",
    "gold", "lead", "pork", "tin", "rice", "corn", "wool", "jet", "soybean",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum KeywordPosition {
    /// Always in this 1-based sentence.
    Fixed(usize),
    /// Uniform over sentences `1..=k`.
    UniformFirst(usize),
    /// Uniform over all sentences.
    UniformAll,
}

impl KeywordPosition {
    fn sample<R: Rng>(self, n: usize, rng: &mut R) -> usize {
        match self {
            KeywordPosition::Fixed(p) => p,
            KeywordPosition::UniformFirst(k) => rng.gen_range(1..=k),
            KeywordPosition::UniformAll => rng.gen_range(1..=n),
        }
    }

    /// Expected 1-based position.
    pub fn mean(self, n: usize) -> f64 {
        match self {
            KeywordPosition::Fixed(p) => p as f64,
            KeywordPosition::UniformFirst(k) => (k as f64 + 1.0) / 2.0,
            KeywordPosition::UniformAll => (n as f64 + 1.0) / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub docs_per_class: usize,
    pub sentences_per_doc: usize,
    pub keyword_position: KeywordPosition,
    pub noise_vocab_size: usize,
    pub words_per_sentence: usize,
    /// Labels per document. 1 gives a mono-label corpus; a larger maximum
    /// adds extra labels, each with its own keyword at its own position.
    pub max_labels: usize,
    /// Chance of each of the `max_labels - 1` possible extra labels.
    pub extra_label_prob: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_classes: 4,
            docs_per_class: 200,
            sentences_per_doc: 6,
            keyword_position: KeywordPosition::UniformFirst(3),
            noise_vocab_size: 50,
            words_per_sentence: 5,
            max_labels: 1,
            extra_label_prob: 0.5,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 || self.n_classes > KEYWORDS.len() {
            return Err(Error::config("n_classes", format!("must be in 2..={}", KEYWORDS.len())));
        }
        if self.sentences_per_doc == 0 || self.docs_per_class == 0 {
            return Err(Error::config("sentences_per_doc", "documents and sentences must be non-empty"));
        }
        let bad_position = match self.keyword_position {
            KeywordPosition::Fixed(p) => p == 0 || p > self.sentences_per_doc,
            KeywordPosition::UniformFirst(k) => k == 0 || k > self.sentences_per_doc,
            KeywordPosition::UniformAll => false,
        };
        if bad_position {
            return Err(Error::config("keyword_position", "outside the document"));
        }
        if self.max_labels == 0 || self.max_labels > self.n_classes {
            return Err(Error::config("max_labels", "must be in 1..=n_classes"));
        }
        if !(0.0..=1.0).contains(&self.extra_label_prob) {
            return Err(Error::config("extra_label_prob", "must be in [0, 1]"));
        }
        if self.noise_vocab_size == 0 || self.noise_vocab_size > MAX_NOISE_WORDS {
            return Err(Error::config("noise_vocab_size", format!("must be in 1..={MAX_NOISE_WORDS}")));
        }
        Ok(())
    }
}

const ONSETS: &[u8] = b"bdfgkmpt";
const VOWELS: &[u8] = b"aou";
const CODAS: &[u8] = b"bdgkmpt";
const MAX_NOISE_WORDS: usize = 8 * 3 * 8 * 3 * 7;

/// Consonant-vowel-consonant-vowel-consonant pseudo-words. The letter sets
/// exclude every Porter suffix, so these stem to themselves.
fn noise_word(i: usize) -> String {
    let mut i = i;
    let mut pick = |set: &[u8]| {
        let c = set[i % set.len()];
        i /= set.len();
        c as char
    };
    let chars = [pick(ONSETS), pick(VOWELS), pick(ONSETS), pick(VOWELS), pick(CODAS)];
    chars.iter().collect()
}

pub fn noise_vocabulary(size: usize, seed: u64) -> Vec<String> {
    let mut all: Vec<usize> = (0..MAX_NOISE_WORDS).collect();
    all.shuffle(&mut seed::derived_rng(seed, &[0x401_5e]));
    all.into_iter().take(size).map(noise_word).collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<RawDocument>> {
    spec.validate()?;
    let noise = noise_vocabulary(spec.noise_vocab_size, spec.seed);
    let mut rng = seed::derived_rng(spec.seed, &[0xD0C5]);
    let n = spec.sentences_per_doc;
    let mut docs = Vec::with_capacity(spec.n_classes * spec.docs_per_class);
    for i in 0..spec.docs_per_class {
        for primary in 0..spec.n_classes {
            let mut labels = vec![primary];
            let extra = (1..spec.max_labels)
                .filter(|_| rng.gen_bool(spec.extra_label_prob))
                .count();
            let mut others: Vec<usize> = (0..spec.n_classes).filter(|&k| k != primary).collect();
            others.shuffle(&mut rng);
            labels.extend(others.into_iter().take(extra));
            labels.sort_unstable();

            let mut sentences: Vec<Vec<String>> = (0..n)
                .map(|_| {
                    (0..spec.words_per_sentence)
                        .map(|_| noise[rng.gen_range(0..noise.len())].clone())
                        .collect()
                })
                .collect();
            for &k in &labels {
                let pos = spec.keyword_position.sample(n, &mut rng);
                let s = &mut sentences[pos - 1];
                let at = rng.gen_range(0..=s.len());
                s.insert(at, KEYWORDS[k].to_string());
            }
            docs.push(RawDocument {
                id: format!("syn-{:05}", i * spec.n_classes + primary),
                labels: labels.iter().map(|&k| KEYWORDS[k].to_string()).collect(),
                sentences: sentences.into_iter().map(|s| s.join(" ")).collect(),
                provenance: None,
            });
        }
    }
    Ok(docs)
}

/// Sentence index (1-based) of the first keyword of any of `doc`'s labels.
pub fn first_keyword_position(doc: &RawDocument) -> Option<usize> {
    doc.sentences.iter().position(|s| {
        let toks = preprocess::preprocess_sentence(s);
        doc.labels.iter().any(|l| toks.iter().any(|t| t == l))
    })
    .map(|i| i + 1)
}
