//! Rank sentences by mean tf·idf and extract a two-sentence summary.
//!
//! ```bash
//! cargo run -p textsum --example tfidf_summary
//! ```

use std::path::Path;

use textsum::corpus::load_corpus;
use textsum::extractive::{extract_summary, tfidf_sentence_scores, ExtractBudget};
use textsum::textproc::{segment_sentences, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bbc_mini");
    let corpus = load_corpus(&root)?;
    let doc = &corpus.documents()[0];

    println!("document: {} — {}\n", doc.id, doc.title);
    let sentences = segment_sentences(&doc.body);
    let config = PipelineConfig::default();
    let scores = tfidf_sentence_scores(&sentences, &config)?;
    for s in &scores {
        println!("  [{:.4}] {}", s.score, sentences.sentences[s.index]);
    }

    let summary = extract_summary(&sentences, &scores, &ExtractBudget::Count(2))?;
    println!("\ntf-idf summary: {summary}");
    println!("reference:      {}", doc.reference_summary);
    Ok(())
}
