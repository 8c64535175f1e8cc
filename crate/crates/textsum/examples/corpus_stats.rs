//! Load the bundled mini corpus, split it, and print per-category counts.
//!
//! ```bash
//! cargo run -p textsum --example corpus_stats
//! ```

use std::path::Path;

use textsum::corpus::{load_corpus, split_corpus, SplitSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bbc_mini");
    let corpus = load_corpus(&root)?;

    println!("loaded {} documents from {}", corpus.len(), root.display());
    for category in corpus.categories() {
        let count = corpus
            .documents()
            .iter()
            .filter(|d| &d.category == category)
            .count();
        println!("  {category}: {count}");
    }

    let spec = SplitSpec::new(0.75, 7)?;
    let (train, test) = split_corpus(&corpus, &spec)?;
    println!(
        "split with fraction {} seed {}: {} train / {} test",
        spec.train_fraction,
        spec.seed,
        train.len(),
        test.len()
    );

    let doc = &corpus.documents()[0];
    println!("\nfirst document: {} — {:?}", doc.id, doc.title);
    println!("  body starts: {:?}", &doc.body[..60.min(doc.body.len())]);
    println!("  reference:   {:?}", doc.reference_summary);
    Ok(())
}
