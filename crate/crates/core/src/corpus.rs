//! Labeled corpora: loading, vocabulary/idf, tf-idf vectors and splits.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TaskMode;
use crate::preprocess::{self, Preprocessor};
use crate::seed;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub labels: Vec<String>,
    pub sentences: Vec<String>,
    /// Which side of a distributed train/test partition the document came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl RawDocument {
    /// Splits `text` into sentences.
    pub fn from_text(id: &str, labels: &[&str], text: &str) -> Self {
        RawDocument {
            id: id.to_string(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
            sentences: preprocess::split_sentences(text),
            provenance: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    labels: Vec<String>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    sentences: Option<Vec<String>>,
    #[serde(default)]
    provenance: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Loaded {
    pub docs: Vec<RawDocument>,
    /// Records dropped because no sentence survived segmentation.
    pub dropped: usize,
}

/// Reads a canonical corpus file: one JSON record per line with `id`,
/// `labels` and either `text` or `sentences`.
pub fn load_jsonl(path: &Path) -> Result<Loaded> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Loaded::default();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let rec: Record = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if rec.labels.is_empty() {
            return Err(parse_err(format!("document `{}` has no labels", rec.id)));
        }
        let sentences = match (rec.text, rec.sentences) {
            (Some(text), None) => preprocess::split_sentences(&text),
            (None, Some(s)) => s.into_iter().filter(|s| !s.trim().is_empty()).collect(),
            _ => return Err(parse_err("exactly one of `text` or `sentences` is required".into())),
        };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        if sentences.is_empty() {
            out.dropped += 1;
            continue;
        }
        out.docs.push(RawDocument {
            id: rec.id,
            labels: rec.labels,
            sentences,
            provenance: rec.provenance,
        });
    }
    if out.dropped > 0 {
        log::warn!("{}: dropped {} documents with no sentences", path.display(), out.dropped);
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, docs: &[RawDocument]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in docs {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Converts the `label<TAB>text` one-document-per-line layout (as used by the
/// R8/R52/20NG/WebKB single-label distributions). Blank lines are skipped and
/// documents whose text has no sentence are dropped.
pub fn convert_cardoso(train_path: &Path, test_path: &Path) -> Result<Loaded> {
    let mut out = Loaded::default();
    for (path, side) in [(train_path, "train"), (test_path, "test")] {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut n = 0usize;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let Some((label, text)) = line.split_once('\t') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "missing tab separator".into(),
                });
            };
            n += 1;
            let sentences = preprocess::split_sentences(text);
            if sentences.is_empty() || label.trim().is_empty() {
                out.dropped += 1;
                continue;
            }
            out.docs.push(RawDocument {
                id: format!("{side}-{n:05}"),
                labels: vec![label.trim().to_string()],
                sentences,
                provenance: Some(side.to_string()),
            });
        }
    }
    Ok(out)
}

/// Converts a directory with one sub-directory per category and one file per
/// document.
pub fn convert_dirs_by_class(root: &Path) -> Result<Loaded> {
    let mut classes: Vec<_> = std::fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    classes.sort();
    if classes.is_empty() {
        return Err(Error::Invalid(format!("{}: no class directories", root.display())));
    }
    let mut out = Loaded::default();
    for dir in classes {
        let label = dir.file_name().unwrap().to_string_lossy().into_owned();
        let mut files: Vec<_> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for f in files {
            let bytes = std::fs::read(&f).map_err(|e| Error::io(&f, e))?;
            let text = String::from_utf8_lossy(&bytes);
            let sentences = preprocess::split_sentences(&text);
            if sentences.is_empty() {
                out.dropped += 1;
                continue;
            }
            out.docs.push(RawDocument {
                id: format!("{label}/{}", f.file_name().unwrap().to_string_lossy()),
                labels: vec![label.clone()],
                sentences,
                provenance: None,
            });
        }
    }
    Ok(out)
}

/// Category names in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorySet {
    names: Vec<String>,
}

impl CategorySet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        if set.len() < 2 {
            return Err(Error::Invalid(format!(
                "at least two categories are required, found {}",
                set.len()
            )));
        }
        Ok(CategorySet {
            names: set.into_iter().collect(),
        })
    }

    pub fn from_docs<D: Labeled>(docs: &[D]) -> Result<Self> {
        Self::new(docs.iter().flat_map(|d| d.labels().iter().cloned()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn name(&self, k: usize) -> &str {
        &self.names[k]
    }
}

pub trait Labeled {
    fn id(&self) -> &str;
    fn labels(&self) -> &[String];
}

impl Labeled for RawDocument {
    fn id(&self) -> &str {
        &self.id
    }
    fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// A document after sentence preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedDocument {
    pub id: String,
    pub labels: Vec<String>,
    pub sentences: Vec<Vec<String>>,
}

impl Labeled for TokenizedDocument {
    fn id(&self) -> &str {
        &self.id
    }
    fn labels(&self) -> &[String] {
        &self.labels
    }
}

pub fn tokenize(doc: &RawDocument, pre: &Preprocessor<'_>) -> TokenizedDocument {
    TokenizedDocument {
        id: doc.id.clone(),
        labels: doc.labels.clone(),
        sentences: doc.sentences.iter().map(|s| pre.sentence(s)).collect(),
    }
}

pub fn tokenize_corpus(docs: &[RawDocument]) -> Vec<TokenizedDocument> {
    let pre = Preprocessor::default();
    docs.par_iter().map(|d| tokenize(d, &pre)).collect()
}

/// Term index and idf table, frozen once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<u32>,
    idf: Vec<f64>,
    n_docs: usize,
    checksum: Arc<str>,
}

impl Vocabulary {
    /// Builds the vocabulary from training documents; `df` counts documents,
    /// and `idf = ln(N / df)`. Term indices follow first-seen order.
    pub fn build(train_docs: &[TokenizedDocument]) -> Result<Self> {
        if train_docs.is_empty() {
            return Err(Error::Invalid("cannot build a vocabulary from zero documents".into()));
        }
        let mut terms = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut df: Vec<u32> = Vec::new();
        let mut seen_in_doc: HashSet<u32> = HashSet::new();
        for doc in train_docs {
            seen_in_doc.clear();
            for tok in doc.sentences.iter().flatten() {
                let id = match index.get(tok) {
                    Some(&id) => id,
                    None => {
                        let id = terms.len() as u32;
                        terms.push(tok.clone());
                        index.insert(tok.clone(), id);
                        df.push(0);
                        id
                    }
                };
                if seen_in_doc.insert(id) {
                    df[id as usize] += 1;
                }
            }
        }
        let n = train_docs.len() as f64;
        let idf = df.iter().map(|&d| (n / d as f64).ln()).collect();
        Ok(Self::assemble(terms, index, df, idf, train_docs.len()))
    }

    /// Rebuilds a vocabulary from stored terms and idf weights (document
    /// frequencies are not kept in model files).
    pub fn from_parts(terms: Vec<String>, idf: Vec<f64>, n_docs: usize) -> Result<Self> {
        if terms.len() != idf.len() {
            return Err(Error::LengthMismatch(terms.len(), idf.len()));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Invalid(format!("duplicate vocabulary term `{t}`")));
            }
        }
        let df = vec![0; terms.len()];
        Ok(Self::assemble(terms, index, df, idf, n_docs))
    }

    fn assemble(
        terms: Vec<String>,
        index: HashMap<String, u32>,
        df: Vec<u32>,
        idf: Vec<f64>,
        n_docs: usize,
    ) -> Self {
        let mut bytes = Vec::new();
        for (t, w) in terms.iter().zip(&idf) {
            bytes.extend_from_slice(t.as_bytes());
            bytes.push(0);
            bytes.extend_from_slice(&w.to_bits().to_le_bytes());
        }
        let checksum = preprocess::stopwords::hex_sha256(&bytes).into();
        Vocabulary {
            terms,
            index,
            df,
            idf,
            n_docs,
            checksum,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<u32> {
        self.index_of(term).map(|i| self.df[i as usize])
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.index_of(term).map(|i| self.idf[i as usize])
    }

    pub fn idf_weights(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// SHA-256 over terms and idf bit patterns.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    fn checksum_arc(&self) -> Arc<str> {
        self.checksum.clone()
    }

    /// tf-idf over `tokens`, L2-normalized. Out-of-vocabulary tokens are
    /// dropped. When every in-vocabulary token has idf 0 the normalized raw
    /// term counts are used instead.
    pub fn vectorize<'t, I>(&self, tokens: I) -> SparseVector
    where
        I: IntoIterator<Item = &'t String>,
    {
        let mut tf: HashMap<u32, f64> = HashMap::new();
        for t in tokens {
            if let Some(i) = self.index_of(t) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let weighted: Vec<(u32, f64)> = tf.iter().map(|(&i, &c)| (i, c * self.idf[i as usize])).collect();
        let dim = self.len();
        let v = SparseVector::from_pairs(dim, weighted).expect("indices come from the vocabulary");
        if v.is_empty() && !tf.is_empty() {
            SparseVector::from_pairs(dim, tf.into_iter().collect())
                .expect("indices come from the vocabulary")
                .normalized()
        } else {
            v.normalized()
        }
    }
}

pub fn vectorize_sentence(tokens: &[String], vocab: &Vocabulary) -> SparseVector {
    vocab.vectorize(tokens)
}

/// A document ready for the reading process and the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    /// `y[k]` is true iff the document belongs to category `k`.
    pub y: Vec<bool>,
    pub sentences: Vec<SparseVector>,
    /// tf-idf over all tokens of the document.
    pub global: SparseVector,
    pub vocab_checksum: Arc<str>,
}

impl Document {
    pub fn n_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn n_categories(&self) -> usize {
        self.y.len()
    }
}

pub fn vectorize_document(
    doc: &TokenizedDocument,
    vocab: &Vocabulary,
    categories: &CategorySet,
    mode: TaskMode,
) -> Result<Document> {
    if doc.sentences.is_empty() {
        return Err(Error::InvalidDocument {
            doc_id: doc.id.clone(),
            reason: "no sentences".into(),
        });
    }
    let mut y = vec![false; categories.len()];
    for label in &doc.labels {
        let k = categories.index(label).ok_or_else(|| Error::UnknownLabel {
            doc_id: doc.id.clone(),
            label: label.clone(),
        })?;
        y[k] = true;
    }
    let n_labels = y.iter().filter(|&&b| b).count();
    if n_labels == 0 || (mode == TaskMode::MonoLabel && n_labels != 1) {
        return Err(Error::InvalidDocument {
            doc_id: doc.id.clone(),
            reason: format!("{n_labels} labels in {mode} mode"),
        });
    }
    Ok(Document {
        id: doc.id.clone(),
        y,
        sentences: doc.sentences.iter().map(|s| vocab.vectorize(s)).collect(),
        global: vocab.vectorize(doc.sentences.iter().flatten()),
        vocab_checksum: vocab.checksum_arc(),
    })
}

pub fn vectorize_corpus(
    docs: &[TokenizedDocument],
    vocab: &Vocabulary,
    categories: &CategorySet,
    mode: TaskMode,
) -> Result<Vec<Document>> {
    docs.par_iter()
        .map(|d| vectorize_document(d, vocab, categories, mode))
        .collect()
}

const SPLIT_STREAM: u64 = 0x5B17;

/// One train/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub fraction: f64,
    pub run: usize,
    pub train: Vec<String>,
    pub test: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Split {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Partitions `docs` by this split, preserving corpus order on each side.
    pub fn partition<'a, D: Labeled>(&self, docs: &'a [D]) -> (Vec<&'a D>, Vec<&'a D>) {
        let train: HashSet<&str> = self.train.iter().map(String::as_str).collect();
        docs.iter().partition(|d| train.contains(d.id()))
    }
}

pub fn make_split<D: Labeled>(docs: &[D], fraction: f64, run: usize, master_seed: u64) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config("fraction", format!("{fraction} is not in (0, 1)")));
    }
    let mut ids: Vec<&str> = docs.iter().map(|d| d.id()).collect();
    let mut rng = seed::derived_rng(master_seed, &[SPLIT_STREAM, run as u64]);
    ids.shuffle(&mut rng);
    let n_train = ((fraction * ids.len() as f64).ceil() as usize).min(ids.len());
    let train: Vec<String> = ids[..n_train].iter().map(|s| s.to_string()).collect();
    let test: Vec<String> = ids[n_train..].iter().map(|s| s.to_string()).collect();

    let train_set: HashSet<&str> = ids[..n_train].iter().copied().collect();
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    let mut all: BTreeSet<&str> = BTreeSet::new();
    for d in docs {
        for l in d.labels() {
            all.insert(l);
            if train_set.contains(d.id()) {
                covered.insert(l);
            }
        }
    }
    let warnings = all
        .difference(&covered)
        .map(|c| format!("category `{c}` has no training documents"))
        .collect();
    Ok(Split {
        seed: master_seed,
        fraction,
        run,
        train,
        test,
        warnings,
    })
}

pub fn make_splits<D: Labeled>(docs: &[D], fraction: f64, n_runs: usize, seed: u64) -> Result<Vec<Split>> {
    if n_runs == 0 {
        return Err(Error::config("n_runs", "must be at least 1"));
    }
    (0..n_runs).map(|run| make_split(docs, fraction, run, seed)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub n_categories: usize,
    pub mean_sentences_per_doc: f64,
}

pub fn corpus_stats(docs: &[RawDocument]) -> CorpusStats {
    let cats: HashSet<&str> = docs.iter().flat_map(|d| d.labels.iter().map(String::as_str)).collect();
    let total: usize = docs.iter().map(|d| d.sentences.len()).sum();
    CorpusStats {
        n_docs: docs.len(),
        n_categories: cats.len(),
        mean_sentences_per_doc: if docs.is_empty() { 0.0 } else { total as f64 / docs.len() as f64 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(id: &str, labels: &[&str], sentences: &[&[&str]]) -> TokenizedDocument {
        TokenizedDocument {
            id: id.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn idf_follows_document_frequency() {
        let docs = vec![
            tok("a", &["x"], &[&["price", "cocoa"]]),
            tok("b", &["y"], &[&["price"], &["price"]]),
        ];
        let v = Vocabulary::build(&docs).unwrap();
        assert_eq!(v.df("price"), Some(2));
        assert_eq!(v.df("cocoa"), Some(1));
        assert_eq!(v.idf("price"), Some(0.0));
        assert!((v.idf("cocoa").unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(v.index_of("price"), Some(0));
        assert_eq!(v.index_of("sugar"), None);

        let single = Vocabulary::build(&docs[..1]).unwrap();
        assert!(single.idf_weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn sentence_vectorization() {
        let docs = vec![
            tok("a", &["x"], &[&["price", "cocoa"]]),
            tok("b", &["y"], &[&["price"]]),
        ];
        let v = Vocabulary::build(&docs).unwrap();
        let s = |xs: &[&str]| xs.iter().map(|t| t.to_string()).collect::<Vec<_>>();

        let x = vectorize_sentence(&s(&["cocoa", "cocoa", "price"]), &v);
        assert_eq!(x.entries(), &[(1, 1.0)]);
        assert!(vectorize_sentence(&[], &v).is_empty());
        assert!(vectorize_sentence(&s(&["unknown"]), &v).is_empty());

        // all idf zero: fall back to normalized tf
        let x = vectorize_sentence(&s(&["price", "price"]), &v);
        assert_eq!(x.entries(), &[(0, 1.0)]);
    }

    #[test]
    fn label_vectors_and_modes() {
        let docs = vec![
            tok("a", &["earn"], &[&["price", "cocoa"]]),
            tok("b", &["earn", "acq"], &[&["price"]]),
        ];
        let cats = CategorySet::from_docs(&docs).unwrap();
        assert_eq!(cats.names(), &["acq", "earn"]);
        let v = Vocabulary::build(&docs).unwrap();
        let d = vectorize_document(&docs[0], &v, &cats, TaskMode::MonoLabel).unwrap();
        assert_eq!(d.y, vec![false, true]);
        assert!((d.global.norm() - 1.0).abs() < 1e-9);
        let d = vectorize_document(&docs[1], &v, &cats, TaskMode::MultiLabel).unwrap();
        assert_eq!(d.y, vec![true, true]);
        assert!(vectorize_document(&docs[1], &v, &cats, TaskMode::MonoLabel).is_err());

        let stray = tok("c", &["grain"], &[&["price"]]);
        assert!(matches!(
            vectorize_document(&stray, &v, &cats, TaskMode::MonoLabel),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn category_set_needs_two() {
        assert!(CategorySet::new(["a"]).is_err());
        let c = CategorySet::new(["b", "a", "b"]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.index("b"), Some(1));
    }

    fn raw(id: &str, label: &str) -> RawDocument {
        RawDocument {
            id: id.into(),
            labels: vec![label.into()],
            sentences: vec!["x".into()],
            provenance: None,
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let docs: Vec<_> = (0..100).map(|i| raw(&format!("d{i}"), if i % 2 == 0 { "a" } else { "b" })).collect();
        let s = make_split(&docs, 0.3, 0, 42).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (30, 70));
        assert_eq!(s, make_split(&docs, 0.3, 0, 42).unwrap());
        let train: HashSet<_> = s.train.iter().collect();
        assert!(s.test.iter().all(|t| !train.contains(t)));

        let runs = make_splits(&docs, 0.3, 5, 42).unwrap();
        assert!(runs.windows(2).any(|w| w[0].train != w[1].train));
        assert!(make_split(&docs, 1.0, 0, 42).is_err());
        assert!(make_splits(&docs, 0.5, 0, 42).is_err());
    }

    #[test]
    fn tiny_fraction_warns_about_missing_categories() {
        let mut docs: Vec<_> = (0..50).map(|i| raw(&format!("d{i}"), "a")).collect();
        docs.push(raw("rare", "b"));
        let s = make_split(&docs, 0.01, 0, 1).unwrap();
        assert_eq!(s.train.len(), 1);
        assert!(!s.warnings.is_empty() || s.train[0] == "rare");
    }

    #[test]
    fn stats() {
        let mut a = raw("a", "x");
        let mut b = raw("b", "y");
        a.sentences = vec!["1".into()];
        b.sentences = vec!["1".into(), "2".into(), "3".into()];
        let s = corpus_stats(&[a, b]);
        assert_eq!(s.n_docs, 2);
        assert_eq!(s.n_categories, 2);
        assert_eq!(s.mean_sentences_per_doc, 2.0);
    }
}
