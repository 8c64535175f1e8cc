//! Text preprocessing: contraction expansion, casing, punctuation handling,
//! stopword removal, stemming/lemmatization, sentence segmentation and the
//! token↔id vocabulary codec.
//!
//! The pipeline stages run in a fixed order (contractions, casing,
//! punctuation/tokenization, stopwords, morphology) so contractions are
//! matched before case folding and only content words reach the stemmer.

pub mod lemma;
pub mod porter;
mod sentence;
mod vocab;

pub use sentence::{segment_sentences, SentenceList};
pub use vocab::{
    build_vocabulary, codec_decode, codec_encode, VocabError, Vocabulary, BOS_ID, BOS_TOKEN,
    EOS_ID, EOS_TOKEN, MASK_ID, MASK_TOKEN, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN,
};

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

const STOPWORDS_TXT: &str = include_str!("../../resources/stopwords.txt");
const CONTRACTIONS_TSV: &str = include_str!("../../resources/contractions.tsv");

#[derive(Debug, Error, PartialEq)]
pub enum TextprocError {
    #[error("stopword entry {0:?} must be lowercase, non-empty and punctuation-free")]
    InvalidStopword(String),
}

/// Punctuation characters removed when `strip_punctuation` is on.
pub fn is_punctuation(c: char) -> bool {
    matches!(
        c,
        '!' | '"'
            | '#'
            | '$'
            | '%'
            | '&'
            | '\''
            | '('
            | ')'
            | '*'
            | '+'
            | ','
            | '-'
            | '.'
            | '/'
            | ':'
            | ';'
            | '<'
            | '='
            | '>'
            | '?'
            | '@'
            | '['
            | '\\'
            | ']'
            | '^'
            | '_'
            | '{'
            | '}'
            | '~'
            | '`'
    )
}

/// Morphological normalization mode. Stemming and lemmatization are mutually
/// exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Morphology {
    None,
    Stem,
    Lemmatize,
}

/// Switches for each preprocessing stage.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub expand_contractions: bool,
    pub remove_stopwords: bool,
    pub morphology: Morphology,
    pub stopword_list: HashSet<String>,
}

impl Default for PipelineConfig {
    /// The model-input pipeline: everything on, Porter stemming.
    fn default() -> Self {
        PipelineConfig {
            lowercase: true,
            strip_punctuation: true,
            expand_contractions: true,
            remove_stopwords: true,
            morphology: Morphology::Stem,
            stopword_list: builtin_stopwords().clone(),
        }
    }
}

impl PipelineConfig {
    /// The metric-tokenization pipeline: lowercase and punctuation strip only,
    /// so ROUGE values stay comparable to common practice.
    pub fn metric() -> Self {
        PipelineConfig {
            lowercase: true,
            strip_punctuation: true,
            expand_contractions: false,
            remove_stopwords: false,
            morphology: Morphology::None,
            stopword_list: HashSet::new(),
        }
    }

    pub fn validate(&self) -> Result<(), TextprocError> {
        for word in &self.stopword_list {
            let ok = !word.is_empty()
                && !word.chars().any(|c| c.is_uppercase() || is_punctuation(c));
            if !ok {
                return Err(TextprocError::InvalidStopword(word.clone()));
            }
        }
        Ok(())
    }
}

/// The built-in English stopword list shipped in `resources/stopwords.txt`.
pub fn builtin_stopwords() -> &'static HashSet<String> {
    static LIST: OnceLock<HashSet<String>> = OnceLock::new();
    LIST.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    })
}

fn contraction_table() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        CONTRACTIONS_TSV
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (k, v) = l.split_once('\t').expect("malformed contraction line");
                (k.trim().to_string(), v.trim().to_string())
            })
            .collect()
    })
}

fn contraction_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // Longer keys first so "can't've" wins over "can't".
        let mut keys: Vec<&String> = contraction_table().keys().collect();
        keys.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let alternation = keys
            .iter()
            .map(|k| regex::escape(k))
            .collect::<Vec<_>>()
            .join("|");
        Regex::new(&format!(r"(?i)\b(?:{alternation})\b")).expect("contraction regex")
    })
}

/// Replaces every table contraction, matched case-insensitively at word
/// boundaries, with its expansion. Total: all other text is untouched.
pub fn expand_contractions(text: &str) -> String {
    contraction_regex()
        .replace_all(text, |caps: &regex::Captures<'_>| {
            let key = caps[0].to_lowercase();
            contraction_table()
                .get(&key)
                .cloned()
                .unwrap_or_else(|| caps[0].to_string())
        })
        .into_owned()
}

/// Splits one whitespace-free word at punctuation boundaries.
///
/// With `strip` on, punctuation runs are dropped (so an intra-word apostrophe
/// splits the word). With `strip` off, punctuation runs become their own
/// tokens, except that a single `'` or `-` flanked by regular characters
/// stays inside its word.
fn split_word(word: &str, strip: bool, out: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut current = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !is_punctuation(c) {
            current.push(c);
            i += 1;
            continue;
        }
        let run_len = chars[i..].iter().take_while(|&&p| is_punctuation(p)).count();
        let joiner = !strip
            && run_len == 1
            && (c == '\'' || c == '-')
            && !current.is_empty()
            && i + 1 < chars.len();
        if joiner {
            current.push(c);
            i += 1;
            continue;
        }
        if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
        if !strip {
            out.push(chars[i..i + run_len].iter().collect());
        }
        i += run_len;
    }
    if !current.is_empty() {
        out.push(current);
    }
}

/// Contraction expansion (optional), lowercasing (optional), then splitting
/// on Unicode whitespace and punctuation boundaries.
pub fn normalize_and_tokenize(text: &str, config: &PipelineConfig) -> Vec<String> {
    let expanded;
    let mut text = if config.expand_contractions {
        expanded = expand_contractions(text);
        expanded.as_str()
    } else {
        text
    };
    let lowered;
    if config.lowercase {
        lowered = text.to_lowercase();
        text = &lowered;
    }
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        split_word(word, config.strip_punctuation, &mut tokens);
    }
    tokens
}

/// Drops stopwords, preserving the relative order of survivors.
pub fn filter_stopwords(tokens: Vec<String>, config: &PipelineConfig) -> Vec<String> {
    if !config.remove_stopwords {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !config.stopword_list.contains(t))
        .collect()
}

/// Reduces one lowercase token to a root form according to `mode`.
pub fn reduce_morphology(token: &str, mode: Morphology) -> String {
    match mode {
        Morphology::None => token.to_string(),
        Morphology::Stem => porter::stem(token),
        Morphology::Lemmatize => lemma::lemmatize(token),
    }
}

/// The full pipeline: contractions → casing/tokenization → stopwords →
/// morphology.
pub fn preprocess(text: &str, config: &PipelineConfig) -> Vec<String> {
    let tokens = normalize_and_tokenize(text, config);
    let tokens = filter_stopwords(tokens, config);
    tokens
        .iter()
        .map(|t| reduce_morphology(t, config.morphology))
        .collect()
}
