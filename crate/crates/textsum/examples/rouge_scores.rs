//! Score a candidate summary against a reference with ROUGE-1/2/L.
//!
//! ```bash
//! cargo run -p textsum --example rouge_scores
//! ```

use textsum::rouge::{score, RougeVariant};
use textsum::textproc::{preprocess, PipelineConfig};

fn main() {
    let candidate = "The cat sat.";
    let reference = "The cat sat on the mat.";

    let metric = PipelineConfig::metric();
    let cand_tokens = preprocess(candidate, &metric);
    let ref_tokens = preprocess(reference, &metric);

    println!("candidate tokens: {cand_tokens:?}");
    println!("reference tokens: {ref_tokens:?}\n");
    for variant in [RougeVariant::N(1), RougeVariant::N(2), RougeVariant::L] {
        let s = score(&cand_tokens, &ref_tokens, variant);
        println!(
            "{variant}: P={:.4} R={:.4} F1={:.4}",
            s.precision, s.recall, s.f1
        );
    }
}
