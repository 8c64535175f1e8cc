//! Run the full comparison harness over the bundled corpus and print the
//! markdown report — the library equivalent of `textsum evaluate`.
//!
//! ```bash
//! cargo run -p textsum --example compare_systems
//! ```

use std::path::Path;

use textsum::harness::{parse_config, render_report, run_experiment, ReportFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bbc_mini");
    let config = parse_config(
        None,
        &[
            ("corpus_root".to_string(), root.display().to_string()),
            ("systems".to_string(), "lead,random,tfidf,gsg".to_string()),
            ("budget.count".to_string(), "2".to_string()),
            ("split.train_fraction".to_string(), "0.7".to_string()),
            ("split.seed".to_string(), "7".to_string()),
        ],
    )?;
    let report = run_experiment(&config)?;
    print!("{}", render_report(&report, ReportFormat::Markdown));
    eprintln!("\n(wall clock: {:.1?})", report.wall_clock);
    Ok(())
}
