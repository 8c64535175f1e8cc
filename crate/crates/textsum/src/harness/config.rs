//! Experiment and training configuration: `key = value` files with `#`
//! comments, overridable by command-line flags that use the same keys.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::SplitSpec;
use crate::extractive::ExtractBudget;
use crate::rouge::RougeVariant;
use crate::textproc::{Morphology, PipelineConfig};
use crate::transformer::ModelConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("value {value:?} for key {key:?} cannot be parsed: {expected}")]
    TypeError {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("missing required configuration key {0:?}")]
    MissingRequired(&'static str),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One summarization system to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Lead,
    Random,
    Tfidf,
    Gsg,
    Transformer(PathBuf),
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Lead => "lead",
            SystemSpec::Random => "random",
            SystemSpec::Tfidf => "tfidf",
            SystemSpec::Gsg => "gsg",
            SystemSpec::Transformer(_) => "transformer",
        }
    }

    fn parse(token: &str) -> Option<SystemSpec> {
        match token {
            "lead" => Some(SystemSpec::Lead),
            "random" => Some(SystemSpec::Random),
            "tfidf" => Some(SystemSpec::Tfidf),
            "gsg" => Some(SystemSpec::Gsg),
            other => other
                .strip_prefix("transformer:")
                .map(|path| SystemSpec::Transformer(PathBuf::from(path))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

/// Which side of the split an evaluation scores. The default scores every
/// document; the report records the counts either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSplit {
    All,
    Test,
    Train,
}

impl EvalSplit {
    pub fn name(&self) -> &'static str {
        match self {
            EvalSplit::All => "all",
            EvalSplit::Test => "test",
            EvalSplit::Train => "train",
        }
    }
}

/// Fully resolved evaluation configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub corpus_root: PathBuf,
    pub articles_dir: String,
    pub summaries_dir: String,
    pub systems: Vec<SystemSpec>,
    pub budget: ExtractBudget,
    pub rouge_variants: Vec<RougeVariant>,
    pub split: SplitSpec,
    pub pipeline: PipelineConfig,
    pub gap_ratio: f64,
    pub eval_split: EvalSplit,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

impl ExperimentConfig {
    /// Canonical listing used for the report's config digest.
    pub fn canonical_string(&self) -> String {
        let systems: Vec<String> = self
            .systems
            .iter()
            .map(|s| match s {
                SystemSpec::Transformer(p) => format!("transformer:{}", p.display()),
                other => other.name().to_string(),
            })
            .collect();
        let variants: Vec<String> =
            self.rouge_variants.iter().map(|v| v.to_string()).collect();
        let budget = match self.budget {
            ExtractBudget::Count(k) => format!("count:{k}"),
            ExtractBudget::Ratio(r) => format!("ratio:{r}"),
        };
        format!(
            "corpus_root={}\narticles_dir={}\nsummaries_dir={}\nsystems={}\nbudget={}\nrouge={}\ntrain_fraction={}\nseed={}\ngap_ratio={}\neval={}\nlowercase={}\nstrip_punctuation={}\nexpand_contractions={}\nremove_stopwords={}\nmorphology={:?}\n",
            self.corpus_root.display(),
            self.articles_dir,
            self.summaries_dir,
            systems.join(","),
            budget,
            variants.join(","),
            self.split.train_fraction,
            self.split.seed,
            self.gap_ratio,
            self.eval_split.name(),
            self.pipeline.lowercase,
            self.pipeline.strip_punctuation,
            self.pipeline.expand_contractions,
            self.pipeline.remove_stopwords,
            self.pipeline.morphology,
        )
    }
}

/// Model/training keys for the `train` subcommand, same file format.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub vocab_min_freq: usize,
    pub vocab_max_size: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub grad_clip: f64,
    pub pairs_source: PairsSource,
    pub gap_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairsSource {
    /// Gap-sentence pseudo-pairs.
    Gsg,
    /// (article, reference summary) pairs truncated to the model window.
    Reference,
}

fn type_error(key: &str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::TypeError {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    }
}

fn parse_flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(type_error(key, value, "boolean (true/false)")),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse()
        .map_err(|_| type_error(key, value, "real number"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| type_error(key, value, "non-negative integer"))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse()
        .map_err(|_| type_error(key, value, "unsigned integer"))
}

fn parse_variants(key: &str, value: &str) -> Result<Vec<RougeVariant>, ConfigError> {
    let mut out = Vec::new();
    for token in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let variant = match token {
            "L" | "l" => RougeVariant::L,
            digits => RougeVariant::N(
                digits
                    .parse()
                    .map_err(|_| type_error(key, value, "list like 1,2,L"))?,
            ),
        };
        if !out.contains(&variant) {
            out.push(variant);
        }
    }
    if out.is_empty() {
        return Err(type_error(key, value, "list like 1,2,L"));
    }
    // Canonical report order: ROUGE-N ascending, then ROUGE-L.
    out.sort_by_key(|v| match v {
        RougeVariant::N(n) => (0, *n),
        RougeVariant::L => (1, 0),
    });
    Ok(out)
}

fn parse_systems(key: &str, value: &str) -> Result<Vec<SystemSpec>, ConfigError> {
    let mut out = Vec::new();
    for token in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let system =
            SystemSpec::parse(token).ok_or_else(|| type_error(key, value, "system list"))?;
        if !out.contains(&system) {
            out.push(system);
        }
    }
    if out.is_empty() {
        return Err(type_error(key, value, "system list"));
    }
    Ok(out)
}

/// Reads `key = value` lines (with `#` comments) from an optional file, then
/// applies `overrides` (typically command-line flags) on top.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::UnknownKey(line.to_string()))?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
    }
    entries.extend(overrides.iter().cloned());

    let mut corpus_root: Option<PathBuf> = None;
    let mut articles_dir = "News Articles".to_string();
    let mut summaries_dir = "Summaries".to_string();
    let mut systems = vec![
        SystemSpec::Lead,
        SystemSpec::Random,
        SystemSpec::Tfidf,
        SystemSpec::Gsg,
    ];
    let mut budget = ExtractBudget::Ratio(0.2);
    let mut variants = vec![RougeVariant::N(1), RougeVariant::N(2), RougeVariant::L];
    let mut train_fraction = 0.8;
    let mut seed = 0u64;
    let mut pipeline = PipelineConfig::default();
    let mut gap_ratio = 0.3;
    let mut eval_split = EvalSplit::All;
    let mut output: Option<PathBuf> = None;
    let mut format = ReportFormat::Csv;

    for (key, value) in &entries {
        match key.as_str() {
            "corpus_root" => corpus_root = Some(PathBuf::from(value)),
            "articles_dir" => articles_dir = value.clone(),
            "summaries_dir" => summaries_dir = value.clone(),
            "systems" => systems = parse_systems(key, value)?,
            "budget.count" => {
                let k = parse_usize(key, value)?;
                if k == 0 {
                    return Err(type_error(key, value, "integer >= 1"));
                }
                budget = ExtractBudget::Count(k);
            }
            "budget.ratio" => {
                let r = parse_f64(key, value)?;
                if !(r > 0.0 && r <= 1.0) {
                    return Err(type_error(key, value, "ratio in (0, 1]"));
                }
                budget = ExtractBudget::Ratio(r);
            }
            "rouge" => variants = parse_variants(key, value)?,
            "split.train_fraction" => {
                let f = parse_f64(key, value)?;
                if !(f > 0.0 && f < 1.0) {
                    return Err(type_error(key, value, "fraction in (0, 1)"));
                }
                train_fraction = f;
            }
            "split.seed" => seed = parse_u64(key, value)?,
            "gap.ratio" => {
                let r = parse_f64(key, value)?;
                if !(r > 0.0 && r < 1.0) {
                    return Err(type_error(key, value, "ratio in (0, 1)"));
                }
                gap_ratio = r;
            }
            "pipeline.lowercase" => pipeline.lowercase = parse_flag(key, value)?,
            "pipeline.strip_punctuation" => pipeline.strip_punctuation = parse_flag(key, value)?,
            "pipeline.expand_contractions" => {
                pipeline.expand_contractions = parse_flag(key, value)?
            }
            "pipeline.remove_stopwords" => pipeline.remove_stopwords = parse_flag(key, value)?,
            "pipeline.morphology" => {
                pipeline.morphology = match value.as_str() {
                    "none" => Morphology::None,
                    "stem" => Morphology::Stem,
                    "lemmatize" => Morphology::Lemmatize,
                    _ => return Err(type_error(key, value, "none|stem|lemmatize")),
                }
            }
            "eval.split" => {
                eval_split = match value.as_str() {
                    "all" => EvalSplit::All,
                    "test" => EvalSplit::Test,
                    "train" => EvalSplit::Train,
                    _ => return Err(type_error(key, value, "all|test|train")),
                }
            }
            "output" => output = Some(PathBuf::from(value)),
            "format" => {
                format = match value.as_str() {
                    "csv" => ReportFormat::Csv,
                    "markdown" => ReportFormat::Markdown,
                    _ => return Err(type_error(key, value, "csv|markdown")),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.clone())),
        }
    }

    let corpus_root = corpus_root.ok_or(ConfigError::MissingRequired("corpus_root"))?;
    let split = SplitSpec { train_fraction, seed };
    Ok(ExperimentConfig {
        corpus_root,
        articles_dir,
        summaries_dir,
        systems,
        budget,
        rouge_variants: variants,
        split,
        pipeline,
        gap_ratio,
        eval_split,
        output,
        format,
    })
}

/// Parses model/training keys (same file syntax as [`parse_config`]).
pub fn parse_train_config(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<TrainConfig, ConfigError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::UnknownKey(line.to_string()))?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
    }
    entries.extend(overrides.iter().cloned());

    let mut model = ModelConfig {
        d_model: 32,
        n_heads: 4,
        n_enc_layers: 1,
        n_dec_layers: 1,
        d_ff: 64,
        vocab_size: 6, // overwritten once the vocabulary is built
        max_len: 64,
        dropout_rate: 0.0,
        seed: 0,
    };
    let mut vocab_min_freq = 2;
    let mut vocab_max_size = 2000;
    let mut learning_rate = 1e-3;
    let mut batch_size = 16;
    let mut steps = 500;
    let mut grad_clip = 1.0;
    let mut pairs_source = PairsSource::Gsg;
    let mut gap_ratio = 0.3;

    for (key, value) in &entries {
        match key.as_str() {
            "model.d_model" => model.d_model = parse_usize(key, value)?,
            "model.n_heads" => model.n_heads = parse_usize(key, value)?,
            "model.n_enc_layers" => model.n_enc_layers = parse_usize(key, value)?,
            "model.n_dec_layers" => model.n_dec_layers = parse_usize(key, value)?,
            "model.d_ff" => model.d_ff = parse_usize(key, value)?,
            "model.max_len" => model.max_len = parse_usize(key, value)?,
            "model.dropout" => model.dropout_rate = parse_f64(key, value)?,
            "model.seed" => model.seed = parse_u64(key, value)?,
            "vocab.min_freq" => vocab_min_freq = parse_usize(key, value)?,
            "vocab.max_size" => vocab_max_size = parse_usize(key, value)?,
            "train.lr" => learning_rate = parse_f64(key, value)?,
            "train.batch_size" => batch_size = parse_usize(key, value)?,
            "train.steps" => steps = parse_usize(key, value)?,
            "train.grad_clip" => grad_clip = parse_f64(key, value)?,
            "pairs" => {
                pairs_source = match value.as_str() {
                    "gsg" => PairsSource::Gsg,
                    "reference" => PairsSource::Reference,
                    _ => return Err(type_error(key, value, "gsg|reference")),
                }
            }
            "gap.ratio" => {
                let r = parse_f64(key, value)?;
                if !(r > 0.0 && r < 1.0) {
                    return Err(type_error(key, value, "ratio in (0, 1)"));
                }
                gap_ratio = r;
            }
            _ => return Err(ConfigError::UnknownKey(key.clone())),
        }
    }

    Ok(TrainConfig {
        model,
        vocab_min_freq,
        vocab_max_size,
        learning_rate,
        batch_size,
        steps,
        grad_clip,
        pairs_source,
        gap_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults_from_flags_only() {
        let config = parse_config(None, &flags(&[("corpus_root", "/data/bbc")])).unwrap();
        assert_eq!(config.corpus_root, PathBuf::from("/data/bbc"));
        assert_eq!(config.systems.len(), 4);
        assert_eq!(config.budget, ExtractBudget::Ratio(0.2));
        assert_eq!(
            config.rouge_variants,
            vec![RougeVariant::N(1), RougeVariant::N(2), RougeVariant::L]
        );
        assert_eq!(config.split.train_fraction, 0.8);
        assert_eq!(config.format, ReportFormat::Csv);
    }

    #[test]
    fn file_values_then_flag_overrides() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment line").unwrap();
        writeln!(file, "corpus_root = /from/file").unwrap();
        writeln!(file, "budget.ratio = 0.5  # inline comment").unwrap();
        writeln!(file, "split.seed = 9").unwrap();
        let config = parse_config(
            Some(file.path()),
            &flags(&[("split.seed", "42")]),
        )
        .unwrap();
        assert_eq!(config.corpus_root, PathBuf::from("/from/file"));
        assert_eq!(config.budget, ExtractBudget::Ratio(0.5));
        assert_eq!(config.split.seed, 42);
    }

    #[test]
    fn budget_ratio_key_is_parsed() {
        let config = parse_config(
            None,
            &flags(&[("corpus_root", "/x"), ("budget.ratio", "0.2")]),
        )
        .unwrap();
        assert_eq!(config.budget, ExtractBudget::Ratio(0.2));
    }

    #[test]
    fn unparseable_value_names_the_key() {
        let err = parse_config(
            None,
            &flags(&[("corpus_root", "/x"), ("budget.ratio", "two")]),
        )
        .unwrap_err();
        match err {
            ConfigError::TypeError { key, .. } => assert_eq!(key, "budget.ratio"),
            other => panic!("expected TypeError, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config(
            None,
            &flags(&[("corpus_root", "/x"), ("budgetratio", "0.3")]),
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(k) if k == "budgetratio"));
    }

    #[test]
    fn missing_corpus_root_is_reported() {
        let err = parse_config(None, &[]).unwrap_err();
        assert!(matches!(err, ConfigError::MissingRequired("corpus_root")));
    }

    #[test]
    fn rouge_variants_normalize_to_canonical_order() {
        let config = parse_config(
            None,
            &flags(&[("corpus_root", "/x"), ("rouge", "L,2,1,2")]),
        )
        .unwrap();
        assert_eq!(
            config.rouge_variants,
            vec![RougeVariant::N(1), RougeVariant::N(2), RougeVariant::L]
        );
    }

    #[test]
    fn transformer_system_carries_its_checkpoint_path() {
        let config = parse_config(
            None,
            &flags(&[
                ("corpus_root", "/x"),
                ("systems", "lead,transformer:model.ckpt"),
            ]),
        )
        .unwrap();
        assert_eq!(config.systems.len(), 2);
        assert_eq!(
            config.systems[1],
            SystemSpec::Transformer(PathBuf::from("model.ckpt"))
        );
    }

    #[test]
    fn eval_split_key_parses() {
        let config = parse_config(None, &flags(&[("corpus_root", "/x")])).unwrap();
        assert_eq!(config.eval_split, EvalSplit::All);
        let config = parse_config(
            None,
            &flags(&[("corpus_root", "/x"), ("eval.split", "test")]),
        )
        .unwrap();
        assert_eq!(config.eval_split, EvalSplit::Test);
        assert!(parse_config(
            None,
            &flags(&[("corpus_root", "/x"), ("eval.split", "half")]),
        )
        .is_err());
    }

    #[test]
    fn train_config_defaults_and_overrides() {
        let config = parse_train_config(
            None,
            &flags(&[("model.d_model", "16"), ("pairs", "reference")]),
        )
        .unwrap();
        assert_eq!(config.model.d_model, 16);
        assert_eq!(config.pairs_source, PairsSource::Reference);
        assert_eq!(config.vocab_max_size, 2000);
    }

    #[test]
    fn canonical_string_is_stable() {
        let a = parse_config(None, &flags(&[("corpus_root", "/x")])).unwrap();
        let b = parse_config(None, &flags(&[("corpus_root", "/x")])).unwrap();
        assert_eq!(a.canonical_string(), b.canonical_string());
    }
}
