//! Experiment orchestration: load a corpus, run every requested system over
//! the evaluation documents, score candidates against references, and render
//! the comparison table. Also hosts the training and single-file
//! summarization flows behind the `textsum` command-line binary.

mod config;
mod report;

pub use config::{
    parse_config, parse_train_config, ConfigError, EvalSplit, ExperimentConfig, PairsSource,
    ReportFormat, SystemSpec, TrainConfig,
};
pub use report::{parse_rendered_csv, render_report};

use std::path::Path;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{
    load_corpus_with_layout, split_corpus, Corpus, CorpusError, CorpusLayout, Document,
};
use crate::extractive::{
    baseline_summary, extract_summary, gap_sentence_select, make_pseudo_pairs,
    tfidf_sentence_scores, BaselineStrategy, ExtractiveError,
};
use crate::rouge::{evaluate_pairs, RougeScore, RougeVariant, ScoreTable};
use crate::textproc::{
    build_vocabulary, codec_decode, codec_encode, preprocess, segment_sentences, PipelineConfig,
    VocabError, Vocabulary,
};
use crate::transformer::{
    decode_summary, load_checkpoint, save_checkpoint, train_model, CheckpointError,
    DecodeStrategy, TrainError, TrainHyper, TransformerError, TransformerModel,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Transformer(#[from] TransformerError),
    #[error(transparent)]
    Extractive(#[from] ExtractiveError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report error: {0}")]
    Report(String),
    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    /// CLI exit code: 1 for configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Usage(_) => 1,
            HarnessError::Transformer(TransformerError::InvalidConfig(_)) => 1,
            HarnessError::Train(TrainError::Transformer(TransformerError::InvalidConfig(_))) => 1,
            _ => 2,
        }
    }
}

/// A rendered experiment: the score table plus reproducibility metadata.
/// Wall-clock time is informational and never rendered into reports.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: ScoreTable,
    pub corpus_size: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub split_seed: u64,
    pub budget_note: String,
    pub config_digest: String,
    /// Per-system count of documents skipped (recorded, never fatal).
    pub skips: Vec<(String, usize)>,
    pub wall_clock: Duration,
}

fn config_digest(config: &ExperimentConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.canonical_string().as_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// One system's candidate summary for one document, or `None` to skip it.
fn summarize_document(
    system: &SystemSpec,
    doc: &Document,
    config: &ExperimentConfig,
    model: Option<&(TransformerModel, Vocabulary)>,
) -> Result<Option<String>, HarnessError> {
    let sentences = segment_sentences(&doc.body);
    if sentences.is_empty() {
        return Ok(None);
    }
    let n = sentences.len();
    let summary = match system {
        SystemSpec::Lead => baseline_summary(&sentences, &config.budget, BaselineStrategy::Lead)?,
        SystemSpec::Random => baseline_summary(
            &sentences,
            &config.budget,
            BaselineStrategy::Random { seed: config.split.seed },
        )?,
        SystemSpec::Tfidf => {
            let scores = tfidf_sentence_scores(&sentences, &config.pipeline)?;
            extract_summary(&sentences, &scores, &config.budget)?
        }
        SystemSpec::Gsg => {
            if n < 2 {
                return Ok(None);
            }
            // Budget parity: aim for the same resolved budget, capped at the
            // structural maximum of n − 1 gap sentences.
            let target = config.budget.resolve(n)?.min(n - 1);
            let ratio = target as f64 / n as f64;
            let picked = gap_sentence_select(&sentences, ratio, &config.pipeline)?;
            picked
                .iter()
                .map(|&i| sentences.sentences[i].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        }
        SystemSpec::Transformer(_) => {
            let (model, vocab) = model.expect("checkpoint loaded before evaluation");
            let tokens = preprocess(&doc.body, &config.pipeline);
            let mut ids = codec_encode(&tokens, vocab, false);
            ids.truncate(model.config.max_len);
            if ids.is_empty() {
                return Ok(None);
            }
            let out = decode_summary(
                model,
                &ids,
                DecodeStrategy::Greedy,
                model.config.max_len - 1,
            )?;
            codec_decode(&out, vocab)?.join(" ")
        }
    };
    Ok(Some(summary))
}

/// Loads the corpus, splits it, summarizes every evaluation document with
/// every requested system under one shared budget, and aggregates mean ROUGE
/// per system per variant. The `eval.split` setting chooses which documents
/// are scored (default: all of them).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let started = Instant::now();
    let layout = CorpusLayout {
        articles_dir: config.articles_dir.clone(),
        summaries_dir: config.summaries_dir.clone(),
    };
    let corpus = load_corpus_with_layout(&config.corpus_root, &layout)?;
    let (train, test) = split_corpus(&corpus, &config.split)?;
    let evaluated: &Corpus = match config.eval_split {
        EvalSplit::All => &corpus,
        EvalSplit::Test => &test,
        EvalSplit::Train => &train,
    };
    let metric = PipelineConfig::metric();

    let mut rows = Vec::with_capacity(config.systems.len());
    let mut skips = Vec::with_capacity(config.systems.len());
    for system in &config.systems {
        let loaded = match system {
            SystemSpec::Transformer(path) => Some(load_checkpoint(path)?),
            _ => None,
        };
        let mut pairs: Vec<(Vec<String>, Vec<String>)> = Vec::new();
        let mut skipped = 0usize;
        for doc in evaluated.documents() {
            let outcome = summarize_document(system, doc, config, loaded.as_ref());
            let summary = match outcome {
                Ok(Some(s)) => s,
                Ok(None) | Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            let mut candidate = preprocess(&summary, &metric);
            if matches!(system, SystemSpec::Transformer(_)) {
                // Fairness: cap abstractive output at the token budget the
                // lead baseline gets for this document.
                let sentences = segment_sentences(&doc.body);
                let lead =
                    baseline_summary(&sentences, &config.budget, BaselineStrategy::Lead)?;
                let budget_tokens = preprocess(&lead, &metric).len().max(1);
                candidate.truncate(budget_tokens);
            }
            let reference = preprocess(&doc.reference_summary, &metric);
            pairs.push((candidate, reference));
        }
        let scores: Vec<(RougeVariant, RougeScore)> = if pairs.is_empty() {
            config
                .rouge_variants
                .iter()
                .map(|&v| (v, RougeScore::default()))
                .collect()
        } else {
            evaluate_pairs(&pairs, &config.rouge_variants)
                .expect("pair list checked non-empty")
        };
        rows.push((system.name().to_string(), scores));
        skips.push((system.name().to_string(), skipped));
    }

    let budget_note = match config.budget {
        crate::extractive::ExtractBudget::Count(k) => format!(
            "{k} sentences per document; abstractive output capped at the lead baseline's token count"
        ),
        crate::extractive::ExtractBudget::Ratio(r) => format!(
            "{r} of each document's sentences; abstractive output capped at the lead baseline's token count"
        ),
    };
    Ok(Report {
        table: ScoreTable { rows, pair_count: evaluated.len() },
        corpus_size: corpus.len(),
        train_size: train.len(),
        test_size: test.len(),
        split_seed: config.split.seed,
        budget_note,
        config_digest: config_digest(config),
        skips,
        wall_clock: started.elapsed(),
    })
}

/// Outcome of a `train` run.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub pair_count: usize,
    pub skipped_documents: usize,
    pub vocab_size: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// Builds supervision pairs from the training split, fits a model, and
/// writes a checkpoint.
pub fn train_from_corpus(
    experiment: &ExperimentConfig,
    train_config: &TrainConfig,
    out_path: &Path,
) -> Result<TrainSummary, HarnessError> {
    let layout = CorpusLayout {
        articles_dir: experiment.articles_dir.clone(),
        summaries_dir: experiment.summaries_dir.clone(),
    };
    let corpus = load_corpus_with_layout(&experiment.corpus_root, &layout)?;
    let (train, _test) = split_corpus(&corpus, &experiment.split)?;

    let (token_pairs, skipped) =
        build_token_pairs(&train, train_config, &experiment.pipeline)?;
    let mut streams: Vec<Vec<String>> = Vec::with_capacity(token_pairs.len() * 2);
    for (src, tgt) in &token_pairs {
        streams.push(src.clone());
        streams.push(tgt.clone());
    }
    let vocab = build_vocabulary(&streams, train_config.vocab_min_freq, train_config.vocab_max_size)?;

    let mut model_config = train_config.model.clone();
    model_config.vocab_size = vocab.size();
    let mut model = TransformerModel::new(model_config.clone())?;

    let max_src = model_config.max_len;
    let max_tgt = model_config.max_len - 1;
    let id_pairs: Vec<(Vec<usize>, Vec<usize>)> = token_pairs
        .iter()
        .map(|(src, tgt)| {
            let mut s = codec_encode(src, &vocab, false);
            s.truncate(max_src);
            let mut t = codec_encode(tgt, &vocab, false);
            t.truncate(max_tgt);
            (s, t)
        })
        .filter(|(s, t)| !s.is_empty() && !t.is_empty())
        .collect();

    let hyper = TrainHyper {
        learning_rate: train_config.learning_rate,
        batch_size: train_config.batch_size,
        steps: train_config.steps,
        grad_clip: train_config.grad_clip,
    };
    let history = train_model(&mut model, &id_pairs, &hyper)?;
    save_checkpoint(&model, &vocab, out_path)?;
    Ok(TrainSummary {
        pair_count: id_pairs.len(),
        skipped_documents: skipped,
        vocab_size: vocab.size(),
        initial_loss: history.first().copied().unwrap_or(f64::NAN),
        final_loss: history.last().copied().unwrap_or(f64::NAN),
    })
}

fn build_token_pairs(
    train: &Corpus,
    train_config: &TrainConfig,
    pipeline: &PipelineConfig,
) -> Result<(Vec<(Vec<String>, Vec<String>)>, usize), HarnessError> {
    match train_config.pairs_source {
        PairsSource::Gsg => {
            let (pairs, skipped) = make_pseudo_pairs(train, train_config.gap_ratio, pipeline)?;
            Ok((
                pairs.into_iter().map(|p| (p.source, p.target)).collect(),
                skipped,
            ))
        }
        PairsSource::Reference => {
            let pairs = train
                .documents()
                .iter()
                .map(|doc| {
                    (
                        preprocess(&doc.body, pipeline),
                        preprocess(&doc.reference_summary, pipeline),
                    )
                })
                .filter(|(s, t)| !s.is_empty() && !t.is_empty())
                .collect();
            Ok((pairs, 0))
        }
    }
}

/// Which engine `summarize` should use for a single input file.
#[derive(Debug, Clone)]
pub enum SummarizeWith {
    System(SystemSpec),
    Checkpoint(std::path::PathBuf),
}

/// Summarizes the text of one file and returns the summary string.
pub fn summarize_file(
    input: &Path,
    with: SummarizeWith,
    budget: &crate::extractive::ExtractBudget,
    pipeline: &PipelineConfig,
    seed: u64,
) -> Result<String, HarnessError> {
    let text = std::fs::read_to_string(input).map_err(|source| HarnessError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    let sentences = segment_sentences(&text);
    match with {
        SummarizeWith::System(SystemSpec::Lead) => {
            Ok(baseline_summary(&sentences, budget, BaselineStrategy::Lead)?)
        }
        SummarizeWith::System(SystemSpec::Random) => Ok(baseline_summary(
            &sentences,
            budget,
            BaselineStrategy::Random { seed },
        )?),
        SummarizeWith::System(SystemSpec::Tfidf) => {
            let scores = tfidf_sentence_scores(&sentences, pipeline)?;
            Ok(extract_summary(&sentences, &scores, budget)?)
        }
        SummarizeWith::System(SystemSpec::Gsg) => {
            let n = sentences.len();
            if n < 2 {
                return Err(ExtractiveError::TooFewSentences(n).into());
            }
            let m = budget.resolve(n)?.min(n - 1);
            let picked = gap_sentence_select(&sentences, m as f64 / n as f64, pipeline)?;
            Ok(picked
                .iter()
                .map(|&i| sentences.sentences[i].as_str())
                .collect::<Vec<_>>()
                .join(" "))
        }
        SummarizeWith::System(SystemSpec::Transformer(path)) => {
            summarize_file(input, SummarizeWith::Checkpoint(path), budget, pipeline, seed)
        }
        SummarizeWith::Checkpoint(path) => {
            let (model, vocab) = load_checkpoint(&path)?;
            let tokens = preprocess(&text, pipeline);
            let mut ids = codec_encode(&tokens, &vocab, false);
            ids.truncate(model.config.max_len);
            if ids.is_empty() {
                return Err(ExtractiveError::NoSentences.into());
            }
            let out = decode_summary(
                &model,
                &ids,
                DecodeStrategy::Greedy,
                model.config.max_len - 1,
            )?;
            Ok(codec_decode(&out, &vocab)?.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_fixture_corpus(root: &Path, docs: usize) {
        for i in 0..docs {
            let cat = if i % 2 == 0 { "alpha" } else { "beta" };
            let a_dir = root.join("News Articles").join(cat);
            let s_dir = root.join("Summaries").join(cat);
            fs::create_dir_all(&a_dir).unwrap();
            fs::create_dir_all(&s_dir).unwrap();
            let body = format!(
                "Market news item {i} arrived today. Analysts debated the move at length. \
                 Prices shifted by {i} points in heavy trading. Officials declined to comment."
            );
            fs::write(
                a_dir.join(format!("{i:03}.txt")),
                format!("Headline {i}\n{body}"),
            )
            .unwrap();
            fs::write(
                s_dir.join(format!("{i:03}.txt")),
                format!("Market news item {i} arrived today."),
            )
            .unwrap();
        }
    }

    fn fixture_config(root: &Path) -> ExperimentConfig {
        parse_config(
            None,
            &[
                ("corpus_root".to_string(), root.display().to_string()),
                ("systems".to_string(), "lead,random".to_string()),
                ("split.seed".to_string(), "7".to_string()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn report_structure_matches_request() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture_corpus(dir.path(), 10);
        let config = fixture_config(dir.path());
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.table.rows.len(), 2);
        assert_eq!(report.table.rows[0].0, "lead");
        assert_eq!(report.table.rows[1].0, "random");
        for (_, scores) in &report.table.rows {
            assert_eq!(scores.len(), 3);
        }
        assert_eq!(report.corpus_size, 10);
        assert_eq!(report.table.pair_count, 10, "default evaluation covers all documents");
    }

    #[test]
    fn score_cells_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture_corpus(dir.path(), 8);
        let config = fixture_config(dir.path());
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        for ((_, ra), (_, rb)) in a.table.rows.iter().zip(&b.table.rows) {
            for ((_, sa), (_, sb)) in ra.iter().zip(rb) {
                assert_eq!(sa.f1.to_bits(), sb.f1.to_bits());
                assert_eq!(sa.precision.to_bits(), sb.precision.to_bits());
            }
        }
        assert_eq!(a.config_digest, b.config_digest);
    }

    #[test]
    fn every_requested_system_appears_exactly_once() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture_corpus(dir.path(), 6);
        let mut config = fixture_config(dir.path());
        config.systems = vec![
            SystemSpec::Tfidf,
            SystemSpec::Lead,
            SystemSpec::Gsg,
            SystemSpec::Random,
        ];
        let report = run_experiment(&config).unwrap();
        let names: Vec<&str> = report.table.rows.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, vec!["tfidf", "lead", "gsg", "random"]);
    }

    #[test]
    fn summarize_file_lead_and_tfidf() {
        let dir = tempfile::tempdir().unwrap();
        let article = dir.path().join("article.txt");
        fs::write(
            &article,
            "Rates rose sharply on Monday. The move surprised analysts. Markets closed mixed.",
        )
        .unwrap();
        let budget = crate::extractive::ExtractBudget::Count(1);
        let pipeline = PipelineConfig::default();
        let lead = summarize_file(
            &article,
            SummarizeWith::System(SystemSpec::Lead),
            &budget,
            &pipeline,
            0,
        )
        .unwrap();
        assert_eq!(lead, "Rates rose sharply on Monday.");
        let tfidf = summarize_file(
            &article,
            SummarizeWith::System(SystemSpec::Tfidf),
            &budget,
            &pipeline,
            0,
        )
        .unwrap();
        assert!(!tfidf.is_empty());
    }

    #[test]
    fn exit_codes_split_config_from_data() {
        let config_err = HarnessError::Config(ConfigError::MissingRequired("corpus_root"));
        assert_eq!(config_err.exit_code(), 1);
        let data_err = HarnessError::Corpus(CorpusError::EmptyCorpus);
        assert_eq!(data_err.exit_code(), 2);
    }
}
