//! Dictionary-backed lemmatization: an exception table for irregular forms,
//! then a few suffix rules whose output must be a word from the shipped word
//! list. Tokens that resolve to nothing known are returned unchanged.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

const EXCEPTIONS_TSV: &str = include_str!("../../resources/lemma_exceptions.tsv");
const WORDLIST_TXT: &str = include_str!("../../resources/lemma_wordlist.txt");

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| {
        EXCEPTIONS_TSV
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (k, v) = l.split_once('\t').expect("malformed lemma exception line");
                (k.trim(), v.trim())
            })
            .collect()
    })
}

fn word_list() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        WORDLIST_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

/// Candidate base forms after removing an `-ing`/`-ed` style suffix: the bare
/// stem, and the stem with a doubled final consonant undone.
fn undouble_candidates(stem: &str) -> Vec<String> {
    let mut out = vec![stem.to_string()];
    let bytes = stem.as_bytes();
    if bytes.len() >= 2 && bytes[bytes.len() - 1] == bytes[bytes.len() - 2] {
        out.push(stem[..stem.len() - 1].to_string());
    }
    out
}

fn known(candidate: &str) -> bool {
    word_list().contains(candidate)
}

/// Lemmatizes one lowercase token. Unknown forms come back unchanged.
pub fn lemmatize(token: &str) -> String {
    if let Some(base) = exceptions().get(token) {
        return (*base).to_string();
    }
    if let Some(stem) = token.strip_suffix("ies") {
        let candidate = format!("{stem}y");
        if known(&candidate) {
            return candidate;
        }
    }
    if !token.ends_with("ss") {
        if let Some(stem) = token.strip_suffix('s') {
            if known(stem) {
                return stem.to_string();
            }
        }
    }
    for suffix in ["ing", "ed"] {
        if let Some(stem) = token.strip_suffix(suffix) {
            for candidate in undouble_candidates(stem) {
                if known(&candidate) {
                    return candidate;
                }
            }
        }
    }
    token.to_string()
}

#[cfg(test)]
mod tests {
    use super::lemmatize;

    #[test]
    fn irregular_forms_use_the_exception_table() {
        assert_eq!(lemmatize("went"), "go");
        assert_eq!(lemmatize("mice"), "mouse");
        assert_eq!(lemmatize("children"), "child");
        assert_eq!(lemmatize("was"), "be");
    }

    #[test]
    fn suffix_rules_check_the_word_list() {
        assert_eq!(lemmatize("cats"), "cat");
        assert_eq!(lemmatize("studies"), "study");
        assert_eq!(lemmatize("running"), "run");
        assert_eq!(lemmatize("hopped"), "hop");
        assert_eq!(lemmatize("walked"), "walk");
        assert_eq!(lemmatize("sleeping"), "sleep");
    }

    #[test]
    fn unknown_outputs_leave_the_token_unchanged() {
        assert_eq!(lemmatize("zebras"), "zebras");
        assert_eq!(lemmatize("qing"), "qing");
    }

    #[test]
    fn ss_endings_never_lose_the_s() {
        assert_eq!(lemmatize("pass"), "pass");
        assert_eq!(lemmatize("caress"), "caress");
    }

    #[test]
    fn roots_are_fixed_points() {
        assert_eq!(lemmatize("run"), "run");
        assert_eq!(lemmatize("go"), "go");
    }
}
