//! Raw text to stemmed tokens, sentence by sentence.
//!
//! Periods are the only sentence boundary. Within a sentence every other
//! non-alphanumeric character becomes a space, words shorter than three
//! characters and SMART stop-words are dropped, and survivors are Porter
//! stemmed.

pub mod porter;
pub mod stopwords;

pub use porter::stem as porter_stem;
pub use stopwords::StopList;

pub const MIN_TOKEN_LEN: usize = 3;

/// Splits on `.`; empty or whitespace-only pieces are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.split('.')
        .filter(|s| !s.trim().is_empty())
        .map(str::to_string)
        .collect()
}

/// Lowercases and replaces every character that is neither alphanumeric nor
/// whitespace with a space.
pub fn normalize(text: &str) -> String {
    text.to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect()
}

pub fn is_stopword(token: &str) -> bool {
    stopwords::global().contains(token)
}

/// Sentence preprocessing bound to a particular stop list.
#[derive(Debug, Clone, Copy)]
pub struct Preprocessor<'a> {
    stop: &'a StopList,
}

impl Default for Preprocessor<'static> {
    fn default() -> Self {
        Preprocessor {
            stop: stopwords::global(),
        }
    }
}

impl<'a> Preprocessor<'a> {
    pub fn new(stop: &'a StopList) -> Self {
        Preprocessor { stop }
    }

    pub fn sentence(&self, sentence: &str) -> Vec<String> {
        normalize(sentence)
            .split_whitespace()
            .filter(|t| !self.stop.contains(t))
            .filter(|t| t.chars().count() >= MIN_TOKEN_LEN)
            .map(porter_stem)
            .collect()
    }
}

pub fn preprocess_sentence(sentence: &str) -> Vec<String> {
    Preprocessor::default().sentence(sentence)
}
