//! Loading and splitting article/reference-summary corpora stored in the
//! BBC-style directory layout:
//!
//! ```text
//! root/
//!   News Articles/<category>/<file>.txt   # first line = title, rest = body
//!   Summaries/<category>/<file>.txt       # whole file = reference summary
//! ```
//!
//! Both tree names are configurable through [`CorpusLayout`]. Categories are
//! discovered from subdirectory names; nothing is hard-coded.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus root not found: {0}")]
    MissingRoot(PathBuf),
    #[error("document {id} has no counterpart in the {missing_from} tree")]
    UnpairedDocument { id: String, missing_from: String },
    #[error("file is not valid UTF-8: {0}")]
    EncodingError(PathBuf),
    #[error("document {0} is empty after trimming")]
    EmptyDocument(String),
    #[error("no article/summary pairs found under the corpus root")]
    EmptyCorpus,
    #[error("corpus has {0} documents; at least 2 are required to split")]
    CorpusTooSmall(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidTrainFraction(f64),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One article with its category and human reference summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Category-qualified id, e.g. `business/001`.
    pub id: String,
    pub category: String,
    /// First line of the article file.
    pub title: String,
    /// Article text after the title line.
    pub body: String,
    pub reference_summary: String,
}

/// An ordered, immutable collection of documents.
///
/// Documents are kept sorted by `(category, id)` so iteration order is
/// deterministic for any loading or splitting path.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    categories: BTreeSet<String>,
}

impl Corpus {
    /// Builds a corpus from documents, sorting them and deriving the category
    /// set. Panics on duplicate ids; loaders guarantee uniqueness.
    pub fn from_documents(mut documents: Vec<Document>) -> Self {
        documents.sort_by(|a, b| (&a.category, &a.id).cmp(&(&b.category, &b.id)));
        for pair in documents.windows(2) {
            assert_ne!(pair[0].id, pair[1].id, "duplicate document id {}", pair[0].id);
        }
        let categories = documents.iter().map(|d| d.category.clone()).collect();
        Corpus { documents, categories }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Fraction and seed controlling a deterministic train/test split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self, CorpusError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(CorpusError::InvalidTrainFraction(train_fraction));
        }
        Ok(SplitSpec { train_fraction, seed })
    }
}

/// Names of the two top-level trees under the corpus root.
#[derive(Debug, Clone)]
pub struct CorpusLayout {
    pub articles_dir: String,
    pub summaries_dir: String,
}

impl Default for CorpusLayout {
    fn default() -> Self {
        CorpusLayout {
            articles_dir: "News Articles".to_string(),
            summaries_dir: "Summaries".to_string(),
        }
    }
}

fn read_utf8(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text =
        String::from_utf8(bytes).map_err(|_| CorpusError::EncodingError(path.to_path_buf()))?;
    // Normalize line endings so document content is platform-independent.
    Ok(text.replace("\r\n", "\n").replace('\r', "\n"))
}

/// Sorted names of the subdirectories of `dir`.
fn subdirectories(dir: &Path) -> Result<Vec<String>, CorpusError> {
    let mut names = Vec::new();
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Sorted stems of the `.txt` files directly inside `dir`.
fn text_file_stems(dir: &Path) -> Result<Vec<String>, CorpusError> {
    let mut stems = Vec::new();
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            if let Some(stem) = path.file_stem() {
                stems.push(stem.to_string_lossy().into_owned());
            }
        }
    }
    stems.sort();
    Ok(stems)
}

/// Loads a corpus using the default `News Articles`/`Summaries` tree names.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    load_corpus_with_layout(root, &CorpusLayout::default())
}

/// Loads a corpus from `root` with explicit tree names.
///
/// Every article file must have a summary file with the same name in the same
/// category, and vice versa; an unpaired file is an error, not a skip.
pub fn load_corpus_with_layout(root: &Path, layout: &CorpusLayout) -> Result<Corpus, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::MissingRoot(root.to_path_buf()));
    }
    let articles_root = root.join(&layout.articles_dir);
    let summaries_root = root.join(&layout.summaries_dir);
    if !articles_root.is_dir() {
        return Err(CorpusError::MissingRoot(articles_root));
    }
    if !summaries_root.is_dir() {
        return Err(CorpusError::MissingRoot(summaries_root));
    }

    let mut categories = subdirectories(&articles_root)?;
    for extra in subdirectories(&summaries_root)? {
        if !categories.contains(&extra) {
            categories.push(extra);
        }
    }
    categories.sort();

    let mut documents = Vec::new();
    for category in &categories {
        let article_dir = articles_root.join(category);
        let summary_dir = summaries_root.join(category);
        let article_stems = if article_dir.is_dir() {
            text_file_stems(&article_dir)?
        } else {
            Vec::new()
        };
        let summary_stems = if summary_dir.is_dir() {
            text_file_stems(&summary_dir)?
        } else {
            Vec::new()
        };

        for stem in &article_stems {
            if !summary_stems.contains(stem) {
                return Err(CorpusError::UnpairedDocument {
                    id: format!("{category}/{stem}"),
                    missing_from: layout.summaries_dir.clone(),
                });
            }
        }
        for stem in &summary_stems {
            if !article_stems.contains(stem) {
                return Err(CorpusError::UnpairedDocument {
                    id: format!("{category}/{stem}"),
                    missing_from: layout.articles_dir.clone(),
                });
            }
        }

        for stem in article_stems {
            let id = format!("{category}/{stem}");
            let article = read_utf8(&article_dir.join(format!("{stem}.txt")))?;
            let summary = read_utf8(&summary_dir.join(format!("{stem}.txt")))?;

            let (title, body) = match article.split_once('\n') {
                Some((first, rest)) => (first.trim().to_string(), rest.trim().to_string()),
                None => (article.trim().to_string(), String::new()),
            };
            let reference_summary = summary.trim().to_string();
            if body.is_empty() || reference_summary.is_empty() {
                return Err(CorpusError::EmptyDocument(id));
            }
            documents.push(Document {
                id,
                category: category.clone(),
                title,
                body,
                reference_summary,
            });
        }
    }

    if documents.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(Corpus::from_documents(documents))
}

/// Splits a corpus into disjoint train/test parts.
///
/// The shuffle is keyed by `spec.seed` only, so the same corpus and spec
/// always produce identical splits. Train size is
/// `round(train_fraction * len)` clamped to `[1, len - 1]`.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus), CorpusError> {
    if corpus.len() < 2 {
        return Err(CorpusError::CorpusTooSmall(corpus.len()));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(CorpusError::InvalidTrainFraction(spec.train_fraction));
    }
    let n = corpus.len();
    let train_size = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let train_docs = order[..train_size]
        .iter()
        .map(|&i| corpus.documents()[i].clone())
        .collect();
    let test_docs = order[train_size..]
        .iter()
        .map(|&i| corpus.documents()[i].clone())
        .collect();
    Ok((
        Corpus::from_documents(train_docs),
        Corpus::from_documents(test_docs),
    ))
}
