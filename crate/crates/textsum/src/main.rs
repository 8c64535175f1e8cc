//! Thin command-line front end over the library's harness module.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 on data errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use textsum::extractive::ExtractBudget;
use textsum::harness::{
    parse_config, parse_rendered_csv, parse_train_config, render_report, run_experiment,
    summarize_file, train_from_corpus, HarnessError, Report, ReportFormat,
    SummarizeWith, SystemSpec,
};

const USAGE: &str = "\
textsum: news summarization workbench

USAGE:
    textsum evaluate  --corpus <dir> [--systems tfidf,gsg,lead,random]
                      [--rouge 1,2,L] [--budget-ratio R | --budget-count K]
                      [--seed N] [--train-fraction F] [--gap-ratio R]
                      [--eval all|test|train] [--config file.cfg]
                      [--format csv|markdown] [--out path]
    textsum train     --corpus <dir> [--config model.cfg] [--pairs gsg|reference]
                      [--seed N] [--train-fraction F] --out <model.ckpt>
    textsum summarize (--system tfidf|lead|random|gsg | --model <model.ckpt>)
                      --input <article.txt> [--budget-count K | --budget-ratio R]
    textsum report    --in <report.csv> [--format markdown|csv] [--out path]

Config files hold `key = value` lines with `#` comments; flags override file
values. See README.md for the full key reference.
";

fn usage_error(message: String) -> HarnessError {
    HarnessError::Usage(message)
}

/// Collects `--flag value` pairs.
fn parse_flags(args: &[String]) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let flag = args[i]
            .strip_prefix("--")
            .ok_or_else(|| usage_error(format!("expected --flag, got {:?}", args[i])))?;
        let value = args
            .get(i + 1)
            .ok_or_else(|| usage_error(format!("flag --{flag} needs a value")))?;
        out.push((flag.to_string(), value.clone()));
        i += 2;
    }
    Ok(out)
}

fn take_flag(flags: &mut Vec<(String, String)>, name: &str) -> Option<String> {
    let position = flags.iter().position(|(k, _)| k == name)?;
    Some(flags.remove(position).1)
}

fn reject_leftovers(flags: &[(String, String)]) -> Result<(), HarnessError> {
    match flags.first() {
        Some((flag, _)) => Err(usage_error(format!("unknown flag --{flag}"))),
        None => Ok(()),
    }
}

/// Maps CLI spellings onto config-file keys.
fn to_config_overrides(flags: Vec<(String, String)>) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (flag, value) in flags {
        let key = match flag.as_str() {
            "corpus" => "corpus_root",
            "articles-dir" => "articles_dir",
            "summaries-dir" => "summaries_dir",
            "systems" => "systems",
            "rouge" => "rouge",
            "budget-ratio" => "budget.ratio",
            "budget-count" => "budget.count",
            "seed" => "split.seed",
            "train-fraction" => "split.train_fraction",
            "gap-ratio" => "gap.ratio",
            "eval" => "eval.split",
            "out" => "output",
            "format" => "format",
            other => return Err(usage_error(format!("unknown flag --{other}"))),
        };
        out.push((key.to_string(), value));
    }
    Ok(out)
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_evaluate(args: &[String]) -> Result<(), HarnessError> {
    let mut flags = parse_flags(args)?;
    let config_file = take_flag(&mut flags, "config").map(PathBuf::from);
    let overrides = to_config_overrides(flags)?;
    let config = parse_config(config_file.as_deref(), &overrides)?;
    let report = run_experiment(&config)?;
    let text = render_report(&report, config.format);
    write_or_print(&text, config.output.as_deref())?;
    eprintln!(
        "evaluated {} systems over {} documents in {:.1?}",
        report.table.rows.len(),
        report.table.pair_count,
        report.wall_clock
    );
    Ok(())
}

fn cmd_train(args: &[String]) -> Result<(), HarnessError> {
    let mut flags = parse_flags(args)?;
    let config_file = take_flag(&mut flags, "config").map(PathBuf::from);
    let out = take_flag(&mut flags, "out")
        .ok_or_else(|| usage_error("train needs --out <model.ckpt>".to_string()))?;
    let mut train_overrides = Vec::new();
    if let Some(pairs) = take_flag(&mut flags, "pairs") {
        train_overrides.push(("pairs".to_string(), pairs));
    }
    if let Some(seed) = take_flag(&mut flags, "model-seed") {
        train_overrides.push(("model.seed".to_string(), seed));
    }
    let experiment_overrides = to_config_overrides(flags)?;
    let experiment = parse_config(None, &experiment_overrides)?;
    let train_config = parse_train_config(config_file.as_deref(), &train_overrides)?;

    let summary = train_from_corpus(&experiment, &train_config, Path::new(&out))?;
    eprintln!(
        "trained on {} pairs (skipped {} documents), vocab {}, loss {:.4} -> {:.4}; wrote {}",
        summary.pair_count,
        summary.skipped_documents,
        summary.vocab_size,
        summary.initial_loss,
        summary.final_loss,
        out
    );
    Ok(())
}

fn cmd_summarize(args: &[String]) -> Result<(), HarnessError> {
    let mut flags = parse_flags(args)?;
    let input = take_flag(&mut flags, "input")
        .ok_or_else(|| usage_error("summarize needs --input <file>".to_string()))?;
    let system = take_flag(&mut flags, "system");
    let model = take_flag(&mut flags, "model");
    let budget = match (
        take_flag(&mut flags, "budget-count"),
        take_flag(&mut flags, "budget-ratio"),
    ) {
        (Some(k), _) => ExtractBudget::Count(
            k.parse()
                .map_err(|_| usage_error(format!("bad --budget-count {k:?}")))?,
        ),
        (None, Some(r)) => ExtractBudget::Ratio(
            r.parse()
                .map_err(|_| usage_error(format!("bad --budget-ratio {r:?}")))?,
        ),
        (None, None) => ExtractBudget::Count(3),
    };
    let seed = match take_flag(&mut flags, "seed") {
        Some(s) => s
            .parse()
            .map_err(|_| usage_error(format!("bad --seed {s:?}")))?,
        None => 0,
    };
    reject_leftovers(&flags)?;

    let with = match (system, model) {
        (Some(name), None) => SummarizeWith::System(match name.as_str() {
            "lead" => SystemSpec::Lead,
            "random" => SystemSpec::Random,
            "tfidf" => SystemSpec::Tfidf,
            "gsg" => SystemSpec::Gsg,
            other => return Err(usage_error(format!("unknown system {other:?}"))),
        }),
        (None, Some(path)) => SummarizeWith::Checkpoint(PathBuf::from(path)),
        _ => {
            return Err(usage_error(
                "summarize needs exactly one of --system or --model".to_string(),
            ))
        }
    };
    let pipeline = textsum::textproc::PipelineConfig::default();
    let summary = summarize_file(Path::new(&input), with, &budget, &pipeline, seed)?;
    println!("{summary}");
    Ok(())
}

fn cmd_report(args: &[String]) -> Result<(), HarnessError> {
    let mut flags = parse_flags(args)?;
    let input = take_flag(&mut flags, "in")
        .ok_or_else(|| usage_error("report needs --in <report.csv>".to_string()))?;
    let format = match take_flag(&mut flags, "format").as_deref() {
        None | Some("markdown") => ReportFormat::Markdown,
        Some("csv") => ReportFormat::Csv,
        Some(other) => return Err(usage_error(format!("unknown format {other:?}"))),
    };
    let out = take_flag(&mut flags, "out").map(PathBuf::from);
    reject_leftovers(&flags)?;

    let text = std::fs::read_to_string(&input).map_err(|source| HarnessError::Io {
        path: PathBuf::from(&input),
        source,
    })?;
    let table = parse_rendered_csv(&text).map_err(HarnessError::Report)?;
    let pair_count = table.pair_count;
    let report = Report {
        table,
        corpus_size: 0,
        train_size: 0,
        test_size: pair_count,
        split_seed: 0,
        budget_note: format!("re-rendered from {input}"),
        config_digest: "n/a".to_string(),
        skips: Vec::new(),
        wall_clock: std::time::Duration::ZERO,
    };
    write_or_print(&render_report(&report, format), out.as_deref())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return ExitCode::from(1);
    };
    let rest = &args[1..];
    let result = match command.as_str() {
        "evaluate" => cmd_evaluate(rest),
        "train" => cmd_train(rest),
        "summarize" => cmd_summarize(rest),
        "report" => cmd_report(rest),
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        other => {
            eprintln!("unknown subcommand {other:?}\n");
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
