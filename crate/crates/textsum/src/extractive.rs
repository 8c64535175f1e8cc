//! Extractive summarizers and sentence selectors: TF-IDF ranking, gap-sentence
//! selection, lead/random baselines, and pseudo-pair generation for abstractive
//! training.
//!
//! Selection operates on preprocessed tokens, but summaries are always emitted
//! verbatim (original casing and punctuation), since reference summaries are
//! raw text.

use thiserror::Error;

use crate::corpus::Corpus;
use crate::rouge::rouge_n;
use crate::textproc::{preprocess, segment_sentences, PipelineConfig, SentenceList, MASK_TOKEN};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractiveError {
    #[error("document has no sentences")]
    NoSentences,
    #[error("gap-sentence selection needs at least 2 sentences, got {0}")]
    TooFewSentences(usize),
    #[error("invalid extraction budget: {0}")]
    BudgetInvalid(String),
    #[error("scores and sentences disagree: {scores} scores for {sentences} sentences")]
    ScoreCountMismatch { scores: usize, sentences: usize },
    #[error("no document had enough sentences to build pseudo-pairs")]
    NoUsablePairs,
}

/// A sentence's position and its selection score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceScore {
    pub index: usize,
    pub score: f64,
}

/// How many sentences a summary may keep: a fixed count or a fraction of the
/// document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtractBudget {
    Count(usize),
    Ratio(f64),
}

impl ExtractBudget {
    /// Resolves the budget against a document of `n` sentences.
    pub fn resolve(&self, n: usize) -> Result<usize, ExtractiveError> {
        match *self {
            ExtractBudget::Count(k) => {
                if k == 0 {
                    return Err(ExtractiveError::BudgetInvalid("count must be >= 1".into()));
                }
                Ok(k.min(n))
            }
            ExtractBudget::Ratio(r) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(ExtractiveError::BudgetInvalid(format!(
                        "ratio must lie in (0, 1], got {r}"
                    )));
                }
                Ok(((r * n as f64).round() as usize).clamp(1, n.max(1)))
            }
        }
    }
}

/// Scores each sentence by the mean tf·idf of its content tokens.
///
/// Sentences act as the pseudo-documents: `tf(w, s) = count(w in s) / |s|`
/// and `idf(w) = ln(n / df(w))` with `n` the sentence count and `df(w)` the
/// number of sentences containing `w`. A sentence emptied by preprocessing
/// scores 0.
pub fn tfidf_sentence_scores(
    sentences: &SentenceList,
    config: &PipelineConfig,
) -> Result<Vec<SentenceScore>, ExtractiveError> {
    if sentences.is_empty() {
        return Err(ExtractiveError::NoSentences);
    }
    let token_lists: Vec<Vec<String>> = sentences
        .sentences
        .iter()
        .map(|s| preprocess(s, config))
        .collect();

    let n = token_lists.len() as f64;
    let mut document_freq: std::collections::HashMap<&str, usize> =
        std::collections::HashMap::new();
    for tokens in &token_lists {
        let mut seen: Vec<&str> = tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for token in seen {
            *document_freq.entry(token).or_insert(0) += 1;
        }
    }

    let scores = token_lists
        .iter()
        .enumerate()
        .map(|(index, tokens)| {
            if tokens.is_empty() {
                return SentenceScore { index, score: 0.0 };
            }
            let len = tokens.len() as f64;
            let mut term_freq: std::collections::HashMap<&str, usize> =
                std::collections::HashMap::new();
            for token in tokens {
                *term_freq.entry(token).or_insert(0) += 1;
            }
            let total: f64 = tokens
                .iter()
                .map(|token| {
                    let tf = term_freq[token.as_str()] as f64 / len;
                    let idf = (n / document_freq[token.as_str()] as f64).ln();
                    tf * idf
                })
                .sum();
            SentenceScore { index, score: total / len }
        })
        .collect();
    Ok(scores)
}

/// Indices of the `m` best-scoring sentences, ties broken by smaller index,
/// returned in ascending order.
fn top_indices(scores: &[SentenceScore], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .score
            .partial_cmp(&scores[a].score)
            .expect("sentence scores are finite")
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(m).collect();
    picked.sort_unstable();
    picked
}

fn join_selected(sentences: &SentenceList, indices: &[usize]) -> String {
    indices
        .iter()
        .map(|&i| sentences.sentences[i].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Emits the top-scoring sentences, in original document order, joined by a
/// single space.
pub fn extract_summary(
    sentences: &SentenceList,
    scores: &[SentenceScore],
    budget: &ExtractBudget,
) -> Result<String, ExtractiveError> {
    if scores.len() != sentences.len() {
        return Err(ExtractiveError::ScoreCountMismatch {
            scores: scores.len(),
            sentences: sentences.len(),
        });
    }
    let m = budget.resolve(sentences.len())?;
    Ok(join_selected(sentences, &top_indices(scores, m)))
}

/// Comparison-floor strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineStrategy {
    /// First `m` sentences.
    Lead,
    /// `m` distinct uniformly chosen sentences, deterministic per seed.
    Random { seed: u64 },
}

/// Lead-k or seeded-random extractive baseline, emitted in document order.
pub fn baseline_summary(
    sentences: &SentenceList,
    budget: &ExtractBudget,
    strategy: BaselineStrategy,
) -> Result<String, ExtractiveError> {
    if sentences.is_empty() {
        return Err(ExtractiveError::NoSentences);
    }
    let n = sentences.len();
    let m = budget.resolve(n)?;
    let indices: Vec<usize> = match strategy {
        BaselineStrategy::Lead => (0..m).collect(),
        BaselineStrategy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, n, m).into_vec();
            picked.sort_unstable();
            picked
        }
    };
    Ok(join_selected(sentences, &indices))
}

/// Selects the sentences most representative of the rest of the document.
///
/// Each sentence is scored independently by ROUGE-1 F1 between its tokens and
/// the tokens of all other sentences concatenated; the top
/// `clamp(round(ratio·n), 1, n−1)` indices are returned in ascending order.
pub fn gap_sentence_select(
    sentences: &SentenceList,
    ratio: f64,
    config: &PipelineConfig,
) -> Result<Vec<usize>, ExtractiveError> {
    let n = sentences.len();
    if n < 2 {
        return Err(ExtractiveError::TooFewSentences(n));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ExtractiveError::BudgetInvalid(format!(
            "gap ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let token_lists: Vec<Vec<String>> = sentences
        .sentences
        .iter()
        .map(|s| preprocess(s, config))
        .collect();

    let scores: Vec<SentenceScore> = (0..n)
        .map(|i| {
            let rest: Vec<String> = token_lists
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, toks)| toks.iter().cloned())
                .collect();
            SentenceScore {
                index: i,
                score: rouge_n(&token_lists[i], &rest, 1).f1,
            }
        })
        .collect();

    let m = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
    Ok(top_indices(&scores, m))
}

/// A gap-sentence supervision pair: the document with selected sentences
/// masked, and those sentences as the target.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPair {
    pub doc_id: String,
    /// Document tokens with each selected sentence replaced by one MASK token.
    pub source: Vec<String>,
    /// Tokens of the selected sentences, in document order.
    pub target: Vec<String>,
}

/// Builds gap-sentence training pairs for every document with at least two
/// sentences. Returns the pairs plus the count of skipped documents.
pub fn make_pseudo_pairs(
    corpus: &Corpus,
    ratio: f64,
    config: &PipelineConfig,
) -> Result<(Vec<PseudoPair>, usize), ExtractiveError> {
    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for doc in corpus.documents() {
        let sentences = segment_sentences(&doc.body);
        if sentences.len() < 2 {
            skipped += 1;
            continue;
        }
        let selected = gap_sentence_select(&sentences, ratio, config)?;
        let mut source = Vec::new();
        let mut target = Vec::new();
        for (i, sentence) in sentences.sentences.iter().enumerate() {
            if selected.contains(&i) {
                source.push(MASK_TOKEN.to_string());
                target.extend(preprocess(sentence, config));
            } else {
                source.extend(preprocess(sentence, config));
            }
        }
        pairs.push(PseudoPair {
            doc_id: doc.id.clone(),
            source,
            target,
        });
    }
    if pairs.is_empty() {
        return Err(ExtractiveError::NoUsablePairs);
    }
    Ok((pairs, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::textproc::Morphology;

    fn plain_config() -> PipelineConfig {
        PipelineConfig {
            lowercase: true,
            strip_punctuation: true,
            expand_contractions: false,
            remove_stopwords: false,
            morphology: Morphology::None,
            stopword_list: Default::default(),
        }
    }

    fn sentence_list(sentences: &[&str]) -> SentenceList {
        let mut offsets = Vec::new();
        let mut cursor = 0;
        for s in sentences {
            offsets.push((cursor, cursor + s.len()));
            cursor += s.len() + 1;
        }
        SentenceList {
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
            offsets,
        }
    }

    #[test]
    fn tfidf_hand_computed_scores() {
        let sentences = sentence_list(&["cats purr", "cats sleep"]);
        let scores = tfidf_sentence_scores(&sentences, &plain_config()).unwrap();
        let expected = (2.0f64).ln() / 4.0;
        assert_eq!(scores.len(), 2);
        for s in &scores {
            assert!((s.score - expected).abs() < 1e-12, "score {}", s.score);
        }
    }

    #[test]
    fn tfidf_single_sentence_scores_zero() {
        let sentences = sentence_list(&["one lonely sentence"]);
        let scores = tfidf_sentence_scores(&sentences, &plain_config()).unwrap();
        assert_eq!(scores[0].score, 0.0);
    }

    #[test]
    fn tfidf_no_sentences_errors() {
        let empty = SentenceList { sentences: vec![], offsets: vec![] };
        assert_eq!(
            tfidf_sentence_scores(&empty, &plain_config()).unwrap_err(),
            ExtractiveError::NoSentences
        );
    }

    #[test]
    fn duplicating_a_sentence_never_raises_its_words_idf() {
        let base = ["cats purr loudly", "dogs bark", "birds sing songs"];
        let with_dup = ["cats purr loudly", "dogs bark", "birds sing songs", "dogs bark"];
        let idf_of = |sents: &[&str], word: &str| {
            let lists: Vec<Vec<String>> = sents
                .iter()
                .map(|s| preprocess(s, &plain_config()))
                .collect();
            let df = lists
                .iter()
                .filter(|l| l.iter().any(|t| t == word))
                .count();
            (sents.len() as f64 / df as f64).ln()
        };
        for word in ["dogs", "bark"] {
            assert!(idf_of(&with_dup, word) <= idf_of(&base, word) + 1e-12);
        }
    }

    #[test]
    fn extract_summary_top_two() {
        let sentences = sentence_list(&["First one.", "Second one.", "Third one."]);
        let scores = vec![
            SentenceScore { index: 0, score: 0.1 },
            SentenceScore { index: 1, score: 0.9 },
            SentenceScore { index: 2, score: 0.5 },
        ];
        let summary = extract_summary(&sentences, &scores, &ExtractBudget::Count(2)).unwrap();
        assert_eq!(summary, "Second one. Third one.");
    }

    #[test]
    fn extract_summary_ties_break_by_index() {
        let sentences = sentence_list(&["A.", "B.", "C."]);
        let scores: Vec<SentenceScore> = (0..3)
            .map(|index| SentenceScore { index, score: 0.5 })
            .collect();
        let summary = extract_summary(&sentences, &scores, &ExtractBudget::Count(2)).unwrap();
        assert_eq!(summary, "A. B.");
    }

    #[test]
    fn ratio_budget_clamps_to_one() {
        assert_eq!(ExtractBudget::Ratio(0.2).resolve(5).unwrap(), 1);
        assert_eq!(ExtractBudget::Ratio(1.0).resolve(4).unwrap(), 4);
        assert_eq!(ExtractBudget::Count(10).resolve(3).unwrap(), 3);
    }

    #[test]
    fn invalid_budgets_error() {
        assert!(matches!(
            ExtractBudget::Count(0).resolve(3),
            Err(ExtractiveError::BudgetInvalid(_))
        ));
        assert!(matches!(
            ExtractBudget::Ratio(0.0).resolve(3),
            Err(ExtractiveError::BudgetInvalid(_))
        ));
        assert!(matches!(
            ExtractBudget::Ratio(1.5).resolve(3),
            Err(ExtractiveError::BudgetInvalid(_))
        ));
    }

    #[test]
    fn lead_baseline_takes_prefix() {
        let sentences = sentence_list(&["s1.", "s2.", "s3."]);
        let summary =
            baseline_summary(&sentences, &ExtractBudget::Count(2), BaselineStrategy::Lead)
                .unwrap();
        assert_eq!(summary, "s1. s2.");
    }

    #[test]
    fn lead_with_full_budget_is_whole_document() {
        let sentences = sentence_list(&["s1.", "s2.", "s3."]);
        let summary =
            baseline_summary(&sentences, &ExtractBudget::Count(3), BaselineStrategy::Lead)
                .unwrap();
        assert_eq!(summary, "s1. s2. s3.");
    }

    #[test]
    fn random_baseline_is_deterministic() {
        let sentences = sentence_list(&["s1.", "s2.", "s3.", "s4.", "s5."]);
        let strategy = BaselineStrategy::Random { seed: 9 };
        let a = baseline_summary(&sentences, &ExtractBudget::Count(2), strategy).unwrap();
        let b = baseline_summary(&sentences, &ExtractBudget::Count(2), strategy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_baseline_keeps_document_order() {
        let sentences = sentence_list(&["s1.", "s2.", "s3.", "s4.", "s5."]);
        for seed in 0..20 {
            let summary = baseline_summary(
                &sentences,
                &ExtractBudget::Count(3),
                BaselineStrategy::Random { seed },
            )
            .unwrap();
            let positions: Vec<usize> = summary
                .split_whitespace()
                .map(|part| {
                    sentences
                        .sentences
                        .iter()
                        .position(|s| s == part)
                        .unwrap()
                })
                .collect();
            assert!(positions.windows(2).all(|w| w[0] < w[1]), "seed {seed}");
        }
    }

    #[test]
    fn random_with_full_budget_is_whole_document() {
        let sentences = sentence_list(&["s1.", "s2.", "s3."]);
        let summary = baseline_summary(
            &sentences,
            &ExtractBudget::Count(3),
            BaselineStrategy::Random { seed: 4 },
        )
        .unwrap();
        assert_eq!(summary, "s1. s2. s3.");
    }

    #[test]
    fn gap_selection_favors_the_overlapping_sentence() {
        let sentences = sentence_list(&[
            "Alpha bravo.",
            "Alpha bravo charlie delta.",
            "Charlie delta.",
        ]);
        let picked = gap_sentence_select(&sentences, 0.34, &plain_config()).unwrap();
        assert_eq!(picked, vec![1]);
    }

    #[test]
    fn gap_selection_clamps_low_and_high_ratios() {
        let sentences = sentence_list(&["One two.", "Two three.", "Three four."]);
        assert_eq!(
            gap_sentence_select(&sentences, 0.01, &plain_config())
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            gap_sentence_select(&sentences, 0.99, &plain_config())
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn gap_selection_needs_two_sentences() {
        let sentences = sentence_list(&["Only one."]);
        assert_eq!(
            gap_sentence_select(&sentences, 0.3, &plain_config()).unwrap_err(),
            ExtractiveError::TooFewSentences(1)
        );
    }

    #[test]
    fn gap_indices_are_sorted_unique_and_bounded() {
        let sentences = sentence_list(&[
            "Markets rose on news.",
            "Markets fell on fears.",
            "Rain soaked the match.",
            "Markets rose again today.",
            "The match was abandoned.",
        ]);
        let picked = gap_sentence_select(&sentences, 0.5, &plain_config()).unwrap();
        assert_eq!(picked.len(), 3);
        assert!(picked.windows(2).all(|w| w[0] < w[1]));
        assert!(picked.iter().all(|&i| i < 5));
    }

    fn doc(id: &str, body: &str) -> Document {
        Document {
            id: format!("cat/{id}"),
            category: "cat".into(),
            title: "t".into(),
            body: body.into(),
            reference_summary: "s".into(),
        }
    }

    #[test]
    fn pseudo_pairs_mask_the_selected_sentence() {
        let corpus = Corpus::from_documents(vec![doc(
            "1",
            "Alpha bravo. Alpha bravo charlie delta. Charlie delta.",
        )]);
        let (pairs, skipped) = make_pseudo_pairs(&corpus, 0.34, &plain_config()).unwrap();
        assert_eq!(skipped, 0);
        assert_eq!(pairs.len(), 1);
        let pair = &pairs[0];
        assert_eq!(
            pair.source,
            vec!["alpha", "bravo", MASK_TOKEN, "charlie", "delta"]
        );
        assert_eq!(pair.target, vec!["alpha", "bravo", "charlie", "delta"]);
    }

    #[test]
    fn single_sentence_documents_are_skipped() {
        let corpus = Corpus::from_documents(vec![
            doc("1", "Only one sentence here."),
            doc("2", "First sentence rain. Second sentence rain."),
        ]);
        let (pairs, skipped) = make_pseudo_pairs(&corpus, 0.5, &plain_config()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn all_documents_skipped_is_an_error() {
        let corpus = Corpus::from_documents(vec![doc("1", "Just one.")]);
        assert_eq!(
            make_pseudo_pairs(&corpus, 0.5, &plain_config()).unwrap_err(),
            ExtractiveError::NoUsablePairs
        );
    }

    #[test]
    fn near_total_ratio_masks_all_but_one() {
        let corpus = Corpus::from_documents(vec![doc(
            "1",
            "Alpha one. Bravo two. Charlie three. Delta four.",
        )]);
        let (pairs, _) = make_pseudo_pairs(&corpus, 0.99, &plain_config()).unwrap();
        let masks = pairs[0]
            .source
            .iter()
            .filter(|t| t.as_str() == MASK_TOKEN)
            .count();
        assert_eq!(masks, 3);
    }
}
