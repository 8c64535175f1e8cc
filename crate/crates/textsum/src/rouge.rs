//! ROUGE-N and ROUGE-L scoring for candidate/reference token sequences.
//!
//! N-gram overlap uses clipped counts (per-type minimum of candidate and
//! reference frequencies). ROUGE-L scores the longest common subsequence of
//! the whole token sequences with a balanced F1. Degenerate inputs (an empty
//! side, or sequences shorter than `n`) score zero on every component rather
//! than erroring, so corpus-level evaluation never aborts on a short text.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RougeError {
    #[error("cannot aggregate an empty pair list")]
    EmptyPairList,
}

/// Precision/recall/F1 triple for one metric variant on one pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    /// Builds a score from an overlap count and the two denominators,
    /// substituting 0 wherever a denominator is 0.
    fn from_counts(overlap: usize, candidate_total: usize, reference_total: usize) -> Self {
        let precision = if candidate_total == 0 {
            0.0
        } else {
            overlap as f64 / candidate_total as f64
        };
        let recall = if reference_total == 0 {
            0.0
        } else {
            overlap as f64 / reference_total as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore { precision, recall, f1 }
    }
}

/// Metric variant: n-gram overlap of a given order, or LCS-based ROUGE-L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RougeVariant {
    N(usize),
    L,
}

impl fmt::Display for RougeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RougeVariant::N(n) => write!(f, "ROUGE-{n}"),
            RougeVariant::L => write!(f, "ROUGE-L"),
        }
    }
}

/// All contiguous n-grams of `tokens` with their multiplicities.
pub fn extract_ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    assert!(n >= 1, "n-gram order must be at least 1");
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// ROUGE-N with clipped n-gram matching.
pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> RougeScore {
    assert!(n >= 1, "n-gram order must be at least 1");
    let cand_ngrams = extract_ngrams(candidate, n);
    let ref_ngrams = extract_ngrams(reference, n);

    let cand_total: usize = cand_ngrams.values().sum();
    let ref_total: usize = ref_ngrams.values().sum();

    let overlap: usize = cand_ngrams
        .iter()
        .filter_map(|(gram, &c)| ref_ngrams.get(gram).map(|&r| c.min(r)))
        .sum();

    RougeScore::from_counts(overlap, cand_total, ref_total)
}

/// Length of a longest common subsequence, by two-row dynamic programming.
pub fn lcs_length(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for ai in a {
        for (j, bj) in b.iter().enumerate() {
            curr[j + 1] = if ai == bj {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// ROUGE-L over the full token sequences with a balanced F-score.
pub fn rouge_l(candidate: &[String], reference: &[String]) -> RougeScore {
    let lcs = lcs_length(candidate, reference);
    RougeScore::from_counts(lcs, candidate.len(), reference.len())
}

/// Scores one pair under one variant.
pub fn score(candidate: &[String], reference: &[String], variant: RougeVariant) -> RougeScore {
    match variant {
        RougeVariant::N(n) => rouge_n(candidate, reference, n),
        RougeVariant::L => rouge_l(candidate, reference),
    }
}

/// Arithmetic mean of per-pair scores, separately for P, R and F, per variant.
pub fn evaluate_pairs(
    pairs: &[(Vec<String>, Vec<String>)],
    variants: &[RougeVariant],
) -> Result<Vec<(RougeVariant, RougeScore)>, RougeError> {
    if pairs.is_empty() {
        return Err(RougeError::EmptyPairList);
    }
    let mut means = Vec::with_capacity(variants.len());
    for &variant in variants {
        let mut sum = RougeScore::default();
        for (candidate, reference) in pairs {
            let s = score(candidate, reference, variant);
            sum.precision += s.precision;
            sum.recall += s.recall;
            sum.f1 += s.f1;
        }
        let n = pairs.len() as f64;
        means.push((
            variant,
            RougeScore {
                precision: sum.precision / n,
                recall: sum.recall / n,
                f1: sum.f1 / n,
            },
        ));
    }
    Ok(means)
}

/// Per-system mean scores as rendered in comparison reports. Row order is the
/// order systems were requested in.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub rows: Vec<(String, Vec<(RougeVariant, RougeScore)>)>,
    pub pair_count: usize,
}
