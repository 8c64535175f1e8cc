//! Train the transformer to copy random sequences — the standard sanity
//! check that attention, masking and the optimizer work together.
//!
//! ```bash
//! cargo run --release -p textsum --example copy_task
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use textsum::transformer::{
    decode_summary, train_model, DecodeStrategy, ModelConfig, TrainHyper, TransformerModel,
};

fn random_sequence(rng: &mut ChaCha8Rng, vocab: usize) -> Vec<usize> {
    let len = rng.random_range(1..=8);
    (0..len).map(|_| rng.random_range(5..vocab)).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ModelConfig {
        d_model: 32,
        n_heads: 4,
        n_enc_layers: 1,
        n_dec_layers: 1,
        d_ff: 64,
        vocab_size: 20,
        max_len: 10,
        dropout_rate: 0.0,
        seed: 5,
    };
    let mut model = TransformerModel::new(config.clone())?;

    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = (0..1024)
        .map(|_| {
            let seq = random_sequence(&mut rng, config.vocab_size);
            (seq.clone(), seq)
        })
        .collect();

    let hyper = TrainHyper {
        learning_rate: 1e-3,
        batch_size: 32,
        steps: 1600,
        grad_clip: 1.0,
    };
    println!("training on {} sequences for {} steps...", pairs.len(), hyper.steps);
    let history = train_model(&mut model, &pairs, &hyper)?;
    println!(
        "loss {:.4} -> {:.4}",
        history[0],
        history.last().unwrap()
    );

    let mut fresh = ChaCha8Rng::seed_from_u64(999);
    let mut correct = 0usize;
    let mut total = 0usize;
    for _ in 0..50 {
        let seq = random_sequence(&mut fresh, config.vocab_size);
        let out = decode_summary(&model, &seq, DecodeStrategy::Greedy, config.max_len - 1)?;
        total += seq.len().max(out.len());
        correct += seq.iter().zip(&out).filter(|(a, b)| a == b).count();
    }
    println!(
        "copy accuracy on fresh sequences: {:.1}%",
        100.0 * correct as f64 / total as f64
    );
    Ok(())
}
