//! Select gap sentences and build a masked pseudo-pair from them.
//!
//! ```bash
//! cargo run -p textsum --example gap_sentences
//! ```

use std::path::Path;

use textsum::corpus::load_corpus;
use textsum::extractive::{gap_sentence_select, make_pseudo_pairs};
use textsum::textproc::{segment_sentences, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bbc_mini");
    let corpus = load_corpus(&root)?;
    let config = PipelineConfig::default();

    let doc = &corpus.documents()[0];
    let sentences = segment_sentences(&doc.body);
    let picked = gap_sentence_select(&sentences, 0.3, &config)?;
    println!("document: {}", doc.id);
    for (i, sentence) in sentences.sentences.iter().enumerate() {
        let marker = if picked.contains(&i) { ">>" } else { "  " };
        println!("{marker} {sentence}");
    }

    let (pairs, skipped) = make_pseudo_pairs(&corpus, 0.3, &config)?;
    println!(
        "\nbuilt {} pseudo-pairs ({} documents skipped)",
        pairs.len(),
        skipped
    );
    let pair = &pairs[0];
    println!("source ({}): {:?}", pair.doc_id, pair.source.join(" "));
    println!("target: {:?}", pair.target.join(" "));
    Ok(())
}
