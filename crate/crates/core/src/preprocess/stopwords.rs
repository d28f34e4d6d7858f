//! The SMART stop-word list.
//!
//! The list ships as `assets/smart_stopwords.txt` (571 lines, one word per line)
//! and is compiled into the binary. Setting `STC_ASSETS_DIR` makes the
//! process read `smart_stopwords.txt` from that directory instead.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const ASSETS_DIR_ENV: &str = "STC_ASSETS_DIR";
pub const FILE_NAME: &str = "smart_stopwords.txt";

/// SHA-256 of the bundled asset.
pub const BUNDLED_SHA256: &str = "9869c9b6c582d7485871e136b05b64556a1741657c2401fb0698d56a6cf190fe";

const BUNDLED: &str = include_str!("../../assets/smart_stopwords.txt");

#[derive(Debug, Clone)]
pub struct StopList {
    words: HashSet<String>,
    sha256: String,
}

impl StopList {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect();
        StopList {
            words,
            sha256: hex_sha256(text.as_bytes()),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn sha256(&self) -> &str {
        &self.sha256
    }
}

/// The process-wide list: `$STC_ASSETS_DIR/smart_stopwords.txt` if the
/// variable is set, the bundled copy otherwise.
pub fn global() -> &'static StopList {
    static LIST: OnceLock<StopList> = OnceLock::new();
    LIST.get_or_init(|| match std::env::var_os(ASSETS_DIR_ENV) {
        Some(dir) => {
            let path = Path::new(&dir).join(FILE_NAME);
            StopList::from_file(&path).unwrap_or_else(|e| {
                log::warn!("{e}; falling back to the bundled stop-word list");
                StopList::bundled()
            })
        }
        None => StopList::bundled(),
    })
}

pub(crate) fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
