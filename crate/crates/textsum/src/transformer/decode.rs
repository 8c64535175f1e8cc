//! Autoregressive decoding: greedy argmax and length-normalized beam search.

use super::{TransformerError, TransformerModel};
use crate::tensor::Tape;
use crate::textproc::{BOS_ID, EOS_ID};

/// Default length-normalization exponent for beam search.
pub const DEFAULT_LENGTH_PENALTY: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecodeStrategy {
    Greedy,
    /// Standard beam search scored by `log_prob / len^length_penalty`.
    Beam { width: usize, length_penalty: f64 },
}

impl DecodeStrategy {
    /// Beam search of the given width with the default length penalty.
    pub fn beam(width: usize) -> DecodeStrategy {
        DecodeStrategy::Beam { width, length_penalty: DEFAULT_LENGTH_PENALTY }
    }
}

#[derive(Debug, Clone)]
struct Hypothesis {
    ids: Vec<usize>,
    log_prob: f64,
    finished: bool,
}

impl Hypothesis {
    /// Steps taken so far, counting the EOS that finished the hypothesis.
    fn steps(&self) -> usize {
        self.ids.len() + usize::from(self.finished)
    }

    fn score(&self, alpha: f64) -> f64 {
        let len = self.steps().max(1) as f64;
        self.log_prob / len.powf(alpha)
    }
}

fn log_softmax_row(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logits.iter().map(|v| v - log_norm).collect()
}

/// Last-row token log-probabilities for one partial hypothesis.
fn next_token_log_probs(
    model: &TransformerModel,
    src_ids: &[usize],
    generated: &[usize],
) -> Result<Vec<f64>, TransformerError> {
    let mut decoder_input = Vec::with_capacity(generated.len() + 1);
    decoder_input.push(BOS_ID);
    decoder_input.extend_from_slice(generated);
    let tape = Tape::new();
    let logits = model.seq2seq_forward(&tape, src_ids, &decoder_input, false, 0)?;
    let vocab = model.config.vocab_size;
    let data = logits.data();
    let last = &data[(decoder_input.len() - 1) * vocab..];
    Ok(log_softmax_row(last))
}

/// Generates ids autoregressively until EOS or the output budget is spent.
/// BOS/EOS never appear in the returned sequence.
pub fn decode_summary(
    model: &TransformerModel,
    src_ids: &[usize],
    strategy: DecodeStrategy,
    max_out: usize,
) -> Result<Vec<usize>, TransformerError> {
    if max_out > model.config.max_len {
        return Err(TransformerError::SequenceTooLong {
            len: max_out,
            max: model.config.max_len,
        });
    }
    // The decoder input carries a leading BOS, so at most max_len − 1 tokens
    // can be generated in one pass.
    let budget = max_out.min(model.config.max_len - 1);
    match strategy {
        DecodeStrategy::Greedy => greedy(model, src_ids, budget),
        DecodeStrategy::Beam { width, length_penalty } => {
            assert!(width >= 1, "beam width must be at least 1");
            beam(model, src_ids, width, length_penalty, budget)
        }
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn greedy(
    model: &TransformerModel,
    src_ids: &[usize],
    budget: usize,
) -> Result<Vec<usize>, TransformerError> {
    let mut out = Vec::new();
    while out.len() < budget {
        let log_probs = next_token_log_probs(model, src_ids, &out)?;
        let token = argmax(&log_probs);
        if token == EOS_ID {
            break;
        }
        out.push(token);
    }
    Ok(out)
}

fn beam(
    model: &TransformerModel,
    src_ids: &[usize],
    width: usize,
    alpha: f64,
    budget: usize,
) -> Result<Vec<usize>, TransformerError> {
    let mut beams = vec![Hypothesis { ids: Vec::new(), log_prob: 0.0, finished: false }];
    for _ in 0..budget {
        if beams.iter().all(|h| h.finished) {
            break;
        }
        let mut candidates: Vec<Hypothesis> = Vec::new();
        for hyp in &beams {
            if hyp.finished {
                candidates.push(hyp.clone());
                continue;
            }
            let log_probs = next_token_log_probs(model, src_ids, &hyp.ids)?;
            for (token, &lp) in log_probs.iter().enumerate() {
                let mut next = hyp.clone();
                next.log_prob += lp;
                if token == EOS_ID {
                    next.finished = true;
                } else {
                    next.ids.push(token);
                }
                candidates.push(next);
            }
        }
        // Deterministic ranking: score, then lexicographically smaller ids.
        candidates.sort_by(|a, b| {
            b.score(alpha)
                .partial_cmp(&a.score(alpha))
                .expect("finite beam scores")
                .then_with(|| a.ids.cmp(&b.ids))
        });
        candidates.truncate(width);
        beams = candidates;
    }
    let best = beams
        .into_iter()
        .max_by(|a, b| {
            a.score(alpha)
                .partial_cmp(&b.score(alpha))
                .expect("finite beam scores")
                .then_with(|| b.ids.cmp(&a.ids))
        })
        .expect("at least one hypothesis");
    Ok(best.ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transformer::ModelConfig;

    fn model() -> TransformerModel {
        TransformerModel::new(ModelConfig {
            d_model: 8,
            n_heads: 2,
            n_enc_layers: 1,
            n_dec_layers: 1,
            d_ff: 16,
            vocab_size: 12,
            max_len: 10,
            dropout_rate: 0.0,
            seed: 3,
        })
        .unwrap()
    }

    #[test]
    fn beam_width_one_equals_greedy() {
        let model = model();
        for seed_src in [vec![5, 6, 7], vec![9, 10, 11, 5], vec![8]] {
            let greedy = decode_summary(&model, &seed_src, DecodeStrategy::Greedy, 8).unwrap();
            let beam1 = decode_summary(
                &model,
                &seed_src,
                DecodeStrategy::Beam { width: 1, length_penalty: 0.7 },
                8,
            )
            .unwrap();
            assert_eq!(greedy, beam1);
        }
    }

    #[test]
    fn max_out_one_emits_at_most_one_token() {
        let model = model();
        let out = decode_summary(&model, &[5, 6], DecodeStrategy::Greedy, 1).unwrap();
        assert!(out.len() <= 1);
    }

    #[test]
    fn output_never_contains_bos_or_eos() {
        let model = model();
        let out = decode_summary(&model, &[5, 6, 7], DecodeStrategy::Greedy, 9).unwrap();
        assert!(out.iter().all(|&t| t != BOS_ID && t != EOS_ID));
        assert!(out.len() <= 9);
    }

    #[test]
    fn max_out_beyond_max_len_is_rejected() {
        let model = model();
        assert!(matches!(
            decode_summary(&model, &[5], DecodeStrategy::Greedy, 11),
            Err(TransformerError::SequenceTooLong { .. })
        ));
    }

    #[test]
    fn decoding_is_deterministic() {
        let model = model();
        let strategy = DecodeStrategy::Beam { width: 3, length_penalty: 0.7 };
        let a = decode_summary(&model, &[5, 9, 6], strategy, 8).unwrap();
        let b = decode_summary(&model, &[5, 9, 6], strategy, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn argmax_ties_take_the_smaller_id() {
        assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
    }
}
