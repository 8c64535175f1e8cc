//! End-to-end abstractive pipeline on the bundled corpus: build gap-sentence
//! pseudo-pairs, train a toy model, round-trip it through a checkpoint, and
//! decode a summary.
//!
//! ```bash
//! cargo run --release -p textsum --example train_summarizer
//! ```

use std::path::Path;

use textsum::corpus::load_corpus;
use textsum::extractive::make_pseudo_pairs;
use textsum::textproc::{build_vocabulary, codec_decode, codec_encode, PipelineConfig};
use textsum::transformer::{
    decode_summary, load_checkpoint, save_checkpoint, train_model, DecodeStrategy, ModelConfig,
    TrainHyper, TransformerModel,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bbc_mini");
    let corpus = load_corpus(&root)?;
    let pipeline = PipelineConfig::default();

    let (pairs, skipped) = make_pseudo_pairs(&corpus, 0.3, &pipeline)?;
    println!("pseudo-pairs: {} (skipped {skipped})", pairs.len());

    let streams: Vec<Vec<String>> = pairs
        .iter()
        .flat_map(|p| [p.source.clone(), p.target.clone()])
        .collect();
    let vocab = build_vocabulary(&streams, 1, 600)?;
    println!("vocabulary: {} tokens", vocab.size());

    let config = ModelConfig {
        d_model: 32,
        n_heads: 4,
        n_enc_layers: 1,
        n_dec_layers: 1,
        d_ff: 64,
        vocab_size: vocab.size(),
        max_len: 64,
        dropout_rate: 0.0,
        seed: 9,
    };
    let mut model = TransformerModel::new(config.clone())?;
    let id_pairs: Vec<(Vec<usize>, Vec<usize>)> = pairs
        .iter()
        .map(|p| {
            let mut src = codec_encode(&p.source, &vocab, false);
            src.truncate(config.max_len);
            let mut tgt = codec_encode(&p.target, &vocab, false);
            tgt.truncate(config.max_len - 1);
            (src, tgt)
        })
        .collect();

    let hyper = TrainHyper {
        learning_rate: 1e-3,
        batch_size: 8,
        steps: 400,
        grad_clip: 1.0,
    };
    let history = train_model(&mut model, &id_pairs, &hyper)?;
    println!("loss {:.4} -> {:.4}", history[0], history.last().unwrap());

    let ckpt = std::env::temp_dir().join("textsum_example.ckpt");
    save_checkpoint(&model, &vocab, &ckpt)?;
    let (reloaded, vocab) = load_checkpoint(&ckpt)?;
    println!("checkpoint round-trip ok: {}", ckpt.display());

    let (src, _) = &id_pairs[0];
    let out = decode_summary(&reloaded, src, DecodeStrategy::Greedy, 24)?;
    println!(
        "\nsource (memorized): {}",
        codec_decode(src, &vocab)?.join(" ")
    );
    println!("decoded gap target: {}", codec_decode(&out, &vocab)?.join(" "));
    Ok(())
}
