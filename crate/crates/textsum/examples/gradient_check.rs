//! Verify analytic gradients of the attention primitives and a full
//! encoder-decoder pass against central differences.
//!
//! ```bash
//! cargo run --release -p textsum --example gradient_check
//! ```

use textsum::tensor::{gradient_check, Tensor};
use textsum::transformer::{ModelConfig, TransformerModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A single primitive first.
    let x = Tensor::param(&[4, 4], (0..16).map(|i| (i as f64 * 0.37).sin()).collect());
    let report = gradient_check(
        |tape| {
            let soft = tape.softmax(&x);
            let sq = tape.mul(&soft, &soft)?;
            Ok(tape.sum(&sq))
        },
        &[("softmax-squared", x.clone())],
        1e-5,
        1e-7,
    )?;
    for e in &report.entries {
        println!("{:<18} max rel err {:.3e}  pass={}", e.name, e.max_rel_error, e.pass);
    }

    // Then the whole model: cross-entropy of a tiny seq2seq forward.
    let model = TransformerModel::new(ModelConfig {
        d_model: 8,
        n_heads: 2,
        n_enc_layers: 1,
        n_dec_layers: 1,
        d_ff: 16,
        vocab_size: 11,
        max_len: 8,
        dropout_rate: 0.0,
        seed: 1,
    })?;
    let src = vec![5, 6, 7, 8, 9];
    let tgt = vec![1, 6, 7, 8, 9];
    let labels = vec![6, 7, 8, 9, 2];
    let named = model.named_parameters();
    let params: Vec<(&str, Tensor)> = named
        .iter()
        .map(|(n, t)| (n.as_str(), t.clone()))
        .collect();
    let report = gradient_check(
        |tape| {
            let logits = model
                .seq2seq_forward(tape, &src, &tgt, false, 0)
                .expect("valid forward");
            tape.cross_entropy(&logits, &labels, 0)
        },
        &params,
        1e-5,
        1e-5,
    )?;
    println!(
        "\nseq2seq: {} tensors checked, max rel err {:.3e}, all pass = {}",
        report.entries.len(),
        report.max_error(),
        report.all_pass()
    );
    Ok(())
}
