//! Harness-level integration: forced-separation fixtures and a synthetic
//! corpus at the full 2225-document scale.

use std::fs;
use std::path::Path;

use textsum::harness::{parse_config, render_report, run_experiment, ReportFormat};

fn write_doc(root: &Path, category: &str, stem: &str, article: &str, summary: &str) {
    let a_dir = root.join("News Articles").join(category);
    let s_dir = root.join("Summaries").join(category);
    fs::create_dir_all(&a_dir).unwrap();
    fs::create_dir_all(&s_dir).unwrap();
    fs::write(a_dir.join(format!("{stem}.txt")), article).unwrap();
    fs::write(s_dir.join(format!("{stem}.txt")), summary).unwrap();
}

/// References equal the two highest-tf·idf sentences, so the tfidf system
/// must hit F1 = 1 on the test split while the random baseline stays lower.
#[test]
fn tfidf_wins_on_forced_fixture_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..30 {
        let target_a = format!("Nebula{i} flare crossed the detector{i}.");
        let target_b = format!("Quasar{i} murmur reached the station{i}.");
        let filler = "Common words repeat here again today. \
                      Words repeat again here today common. \
                      Repeat today common here words again.";
        let body = format!("{target_a} {filler} {target_b}");
        let reference = format!("{target_a} {target_b}");
        write_doc(
            dir.path(),
            "science",
            &format!("{i:03}"),
            &format!("Signal report {i}\n{body}"),
            &reference,
        );
    }
    let config = parse_config(
        None,
        &[
            ("corpus_root".to_string(), dir.path().display().to_string()),
            ("systems".to_string(), "tfidf,random".to_string()),
            ("budget.count".to_string(), "2".to_string()),
            ("split.seed".to_string(), "0".to_string()),
        ],
    )
    .unwrap();
    let report = run_experiment(&config).unwrap();
    let f1_of = |name: &str| -> f64 {
        report
            .table
            .rows
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, scores)| scores[0].1.f1)
            .unwrap()
    };
    assert!((f1_of("tfidf") - 1.0).abs() < 5e-5, "tfidf F1 {}", f1_of("tfidf"));
    assert!(f1_of("random") < 1.0, "random F1 {}", f1_of("random"));
}

/// The full experiment must complete, stay deterministic and keep its shape
/// at the 2225-document / 5-category scale of the real dataset.
#[test]
fn synthetic_corpus_at_full_scale_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let categories = ["business", "entertainment", "politics", "sport", "tech"];
    let mut count = 0usize;
    'outer: for round in 0..445 {
        for category in categories {
            if count == 2225 {
                break 'outer;
            }
            let body = format!(
                "The {category} committee met on day {round} to review plans. \
                 Spending on {category} projects rose {round} percent last year. \
                 Critics called the {category} figures optimistic. \
                 A final decision arrives after round {round} consultations. \
                 Officials promised more detail within weeks."
            );
            let summary = format!(
                "The {category} committee met on day {round} to review plans. \
                 A final decision arrives after round {round} consultations."
            );
            write_doc(
                dir.path(),
                category,
                &format!("{round:03}"),
                &format!("{category} plans {round}\n{body}"),
                &summary,
            );
            count += 1;
        }
    }
    assert_eq!(count, 2225);

    let config = parse_config(
        None,
        &[
            ("corpus_root".to_string(), dir.path().display().to_string()),
            ("systems".to_string(), "lead,random,tfidf,gsg".to_string()),
            ("budget.ratio".to_string(), "0.2".to_string()),
            ("split.train_fraction".to_string(), "0.9".to_string()),
            ("split.seed".to_string(), "1".to_string()),
            ("eval.split".to_string(), "test".to_string()),
        ],
    )
    .unwrap();
    let report = run_experiment(&config).unwrap();
    assert_eq!(report.corpus_size, 2225);
    assert_eq!(report.train_size, 2003);
    assert_eq!(report.test_size, 222);
    assert_eq!(report.table.pair_count, 222);
    assert_eq!(report.table.rows.len(), 4);
    for (_, scores) in &report.table.rows {
        assert_eq!(scores.len(), 3, "Table 2 shape: three metric columns");
    }

    let text_a = render_report(&report, ReportFormat::Csv);
    let text_b = render_report(&run_experiment(&config).unwrap(), ReportFormat::Csv);
    assert_eq!(text_a.into_bytes(), text_b.into_bytes());
}
