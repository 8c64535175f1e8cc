//! Rendering reports as CSV or markdown. Rendering is a pure function of the
//! report contents, so identical experiments produce byte-identical files.

use super::{Report, ReportFormat};
use crate::rouge::{RougeScore, RougeVariant, ScoreTable};

/// Serializes the score table. CSV carries one row per (system, variant)
/// cell; markdown mirrors a comparison table with F1 up front and a
/// secondary precision/recall table, plus run metadata.
pub fn render_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

fn render_csv(report: &Report) -> String {
    let mut out = String::from("system,variant,precision,recall,f1\n");
    for (system, scores) in &report.table.rows {
        for (variant, score) in scores {
            out.push_str(&format!(
                "{system},{variant},{:.4},{:.4},{:.4}\n",
                score.precision, score.recall, score.f1
            ));
        }
    }
    out
}

fn render_markdown(report: &Report) -> String {
    let variants: Vec<RougeVariant> = report
        .table
        .rows
        .first()
        .map(|(_, scores)| scores.iter().map(|(v, _)| *v).collect())
        .unwrap_or_default();

    let mut out = String::from("# Mean ROUGE comparison\n\n");
    out.push_str("| System |");
    for v in &variants {
        out.push_str(&format!(" {v} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(variants.len()));
    out.push('\n');
    for (system, scores) in &report.table.rows {
        out.push_str(&format!("| {system} |"));
        for (_, score) in scores {
            out.push_str(&format!(" {:.4} |", score.f1));
        }
        out.push('\n');
    }

    out.push_str("\nPrecision / recall:\n\n| System |");
    for v in &variants {
        out.push_str(&format!(" {v} P | {v} R |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|---|".repeat(variants.len()));
    out.push('\n');
    for (system, scores) in &report.table.rows {
        out.push_str(&format!("| {system} |"));
        for (_, score) in scores {
            out.push_str(&format!(" {:.4} | {:.4} |", score.precision, score.recall));
        }
        out.push('\n');
    }

    out.push('\n');
    out.push_str(&format!(
        "- documents: {} evaluated (corpus {}, train {} / test {}, split seed {})\n",
        report.table.pair_count,
        report.corpus_size,
        report.train_size,
        report.test_size,
        report.split_seed
    ));
    out.push_str(&format!("- budget: {}\n", report.budget_note));
    out.push_str(&format!("- config digest: {}\n", report.config_digest));
    let skipped: Vec<String> = report
        .skips
        .iter()
        .filter(|(_, n)| *n > 0)
        .map(|(s, n)| format!("{s}: {n}"))
        .collect();
    if skipped.is_empty() {
        out.push_str("- skipped documents: none\n");
    } else {
        out.push_str(&format!("- skipped documents: {}\n", skipped.join(", ")));
    }
    out
}

/// Rebuilds a score table from CSV produced by [`render_report`], for the
/// `report` subcommand's format conversion.
pub fn parse_rendered_csv(text: &str) -> Result<ScoreTable, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty report file")?;
    if header.trim() != "system,variant,precision,recall,f1" {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut rows: Vec<(String, Vec<(RougeVariant, RougeScore)>)> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format!("malformed row {line:?}"));
        }
        let variant = match fields[1] {
            "ROUGE-L" => RougeVariant::L,
            other => {
                let n = other
                    .strip_prefix("ROUGE-")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| format!("unknown variant {other:?}"))?;
                RougeVariant::N(n)
            }
        };
        let parse = |s: &str| -> Result<f64, String> {
            s.parse().map_err(|_| format!("bad number {s:?}"))
        };
        let score = RougeScore {
            precision: parse(fields[2])?,
            recall: parse(fields[3])?,
            f1: parse(fields[4])?,
        };
        match rows.last_mut() {
            Some((system, scores)) if system == fields[0] => scores.push((variant, score)),
            _ => rows.push((fields[0].to_string(), vec![(variant, score)])),
        }
    }
    if rows.is_empty() {
        return Err("report has no data rows".to_string());
    }
    let pair_count = 0; // not recorded in CSV
    Ok(ScoreTable { rows, pair_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn sample_report() -> Report {
        let score = |p: f64, r: f64| RougeScore {
            precision: p,
            recall: r,
            f1: if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) },
        };
        Report {
            table: ScoreTable {
                rows: vec![(
                    "lead".to_string(),
                    vec![
                        (RougeVariant::N(1), score(0.5, 0.5)),
                        (RougeVariant::L, score(0.25, 1.0)),
                    ],
                )],
                pair_count: 3,
            },
            corpus_size: 10,
            train_size: 7,
            test_size: 3,
            split_seed: 7,
            budget_note: "2 sentences".to_string(),
            config_digest: "cafebabe".to_string(),
            skips: vec![("lead".to_string(), 0)],
            wall_clock: Duration::from_millis(5),
        }
    }

    #[test]
    fn csv_shape_and_rounding() {
        let text = render_report(&sample_report(), ReportFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "system,variant,precision,recall,f1");
        assert_eq!(lines[1], "lead,ROUGE-1,0.5000,0.5000,0.5000");
        assert_eq!(lines[2], "lead,ROUGE-L,0.2500,1.0000,0.4000");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn markdown_has_one_row_per_system() {
        let text = render_report(&sample_report(), ReportFormat::Markdown);
        let data_rows = text
            .lines()
            .filter(|l| l.starts_with("| lead"))
            .count();
        assert_eq!(data_rows, 2); // primary table + P/R table
        assert!(text.contains("| lead | 0.5000 | 0.4000 |"));
        assert!(text.contains("split seed 7"));
        assert!(!text.to_lowercase().contains("wall"), "timing must not render");
    }

    #[test]
    fn rendering_is_deterministic() {
        let report = sample_report();
        for format in [ReportFormat::Csv, ReportFormat::Markdown] {
            assert_eq!(render_report(&report, format), render_report(&report, format));
        }
    }

    #[test]
    fn csv_round_trips_through_the_parser() {
        let report = sample_report();
        let text = render_report(&report, ReportFormat::Csv);
        let table = parse_rendered_csv(&text).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].0, "lead");
        assert_eq!(table.rows[0].1.len(), 2);
        assert_eq!(table.rows[0].1[0].1.precision, 0.5);
    }

    #[test]
    fn csv_parser_rejects_garbage() {
        assert!(parse_rendered_csv("").is_err());
        assert!(parse_rendered_csv("not,a,report\n").is_err());
        assert!(
            parse_rendered_csv("system,variant,precision,recall,f1\nx,ROUGE-1,a,b,c\n").is_err()
        );
    }
}
