//! Teacher-forced training with Adam and global-norm gradient clipping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{TransformerError, TransformerModel};
use crate::tensor::{clip_global_norm, AdamState, Tape, Tensor};
use crate::textproc::{BOS_ID, EOS_ID, PAD_ID};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no training pairs supplied")]
    EmptyTrainingSet,
    #[error("loss became non-finite at step {step}")]
    DivergedLoss { step: usize, history: Vec<f64> },
    #[error(transparent)]
    Transformer(#[from] TransformerError),
}

/// Optimization hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub grad_clip: f64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            learning_rate: 1e-3,
            batch_size: 16,
            steps: 500,
            grad_clip: 1.0,
        }
    }
}

/// One teacher-forcing example: decoder input `BOS + target`, loss labels
/// `target + EOS`, PAD-extended to the batch maximum.
fn teacher_forced(target: &[usize], width: usize) -> (Vec<usize>, Vec<usize>) {
    let mut decoder_input = Vec::with_capacity(width);
    decoder_input.push(BOS_ID);
    decoder_input.extend_from_slice(target);
    decoder_input.resize(width, PAD_ID);
    let mut labels = Vec::with_capacity(width);
    labels.extend_from_slice(target);
    labels.push(EOS_ID);
    labels.resize(width, PAD_ID);
    (decoder_input, labels)
}

/// Runs `hyper.steps` Adam steps over `(source ids, target ids)` pairs.
///
/// Sources and decoder inputs are PAD-extended within each batch; PAD
/// positions are masked out of attention, and PAD labels are excluded from
/// the loss. Everything (shuffling order, dropout masks) is keyed off
/// `model.config.seed`, so a given config and pair list always trains to
/// bitwise-identical parameters. Returns the mean loss per step.
pub fn train_model(
    model: &mut TransformerModel,
    pairs: &[(Vec<usize>, Vec<usize>)],
    hyper: &TrainHyper,
) -> Result<Vec<f64>, TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    for (src, tgt) in pairs {
        if src.len() > model.config.max_len {
            return Err(TransformerError::SequenceTooLong {
                len: src.len(),
                max: model.config.max_len,
            }
            .into());
        }
        // Add one slot for BOS/EOS on the decoder side.
        if tgt.len() + 1 > model.config.max_len {
            return Err(TransformerError::SequenceTooLong {
                len: tgt.len() + 1,
                max: model.config.max_len,
            }
            .into());
        }
    }

    let params = model.parameters();
    for p in &params {
        p.zero_grad();
    }
    let mut adam = AdamState::new(&params, hyper.learning_rate);
    let mut order_rng = ChaCha8Rng::seed_from_u64(model.config.seed ^ 0x7261_696e);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut order_rng);
    let mut cursor = 0usize;

    let batch_size = hyper.batch_size.max(1);
    let mut history = Vec::with_capacity(hyper.steps);

    for step in 0..hyper.steps {
        let mut batch = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            if cursor == order.len() {
                order.shuffle(&mut order_rng);
                cursor = 0;
            }
            batch.push(&pairs[order[cursor]]);
            cursor += 1;
        }
        let src_width = batch.iter().map(|(s, _)| s.len()).max().unwrap();
        let tgt_width = batch.iter().map(|(_, t)| t.len() + 1).max().unwrap();

        let tape = Tape::new();
        let mut batch_loss: Option<Tensor> = None;
        for (i, (src, tgt)) in batch.iter().enumerate() {
            let mut padded_src = (*src).clone();
            padded_src.resize(src_width, PAD_ID);
            let (decoder_input, labels) = teacher_forced(tgt, tgt_width);
            let salt = (step as u64) << 8 | i as u64;
            let logits =
                model.seq2seq_forward(&tape, &padded_src, &decoder_input, true, salt)?;
            let loss = tape
                .cross_entropy(&logits, &labels, PAD_ID)
                .map_err(TransformerError::from)?;
            batch_loss = Some(match batch_loss {
                None => loss,
                Some(acc) => tape.add(&acc, &loss).map_err(TransformerError::from)?,
            });
        }
        let total = batch_loss.expect("batch is non-empty");
        let mean = tape.scale(&total, 1.0 / batch.len() as f64);
        let loss_value = mean.item();
        history.push(loss_value);
        if !loss_value.is_finite() {
            return Err(TrainError::DivergedLoss { step, history });
        }
        tape.backward(&mean).map_err(TransformerError::from)?;
        if hyper.grad_clip > 0.0 {
            clip_global_norm(&params, hyper.grad_clip);
        }
        adam.step(&params).map_err(TransformerError::from)?;
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transformer::ModelConfig;

    fn config() -> ModelConfig {
        ModelConfig {
            d_model: 16,
            n_heads: 2,
            n_enc_layers: 1,
            n_dec_layers: 1,
            d_ff: 32,
            vocab_size: 13,
            max_len: 12,
            dropout_rate: 0.0,
            seed: 11,
        }
    }

    fn toy_pairs() -> Vec<(Vec<usize>, Vec<usize>)> {
        (0..8)
            .map(|i| {
                let a = 5 + (i % 8);
                let b = 5 + ((i + 3) % 8);
                (vec![a, b, a], vec![b, a])
            })
            .collect()
    }

    #[test]
    fn empty_training_set_errors() {
        let mut model = TransformerModel::new(config()).unwrap();
        assert!(matches!(
            train_model(&mut model, &[], &TrainHyper::default()),
            Err(TrainError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let mut model = TransformerModel::new(config()).unwrap();
        let before: Vec<Vec<f64>> = model.parameters().iter().map(Tensor::to_vec).collect();
        // Full-batch steps so every step sees the same data.
        let hyper = TrainHyper { learning_rate: 0.0, batch_size: 8, steps: 5, grad_clip: 1.0 };
        let history = train_model(&mut model, &toy_pairs(), &hyper).unwrap();
        let after: Vec<Vec<f64>> = model.parameters().iter().map(Tensor::to_vec).collect();
        assert_eq!(before, after);
        assert_eq!(history.len(), 5);
        for w in history.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12, "loss history not flat: {history:?}");
        }
    }

    #[test]
    fn toy_set_loss_collapses() {
        let mut model = TransformerModel::new(config()).unwrap();
        let hyper = TrainHyper {
            learning_rate: 3e-3,
            batch_size: 8,
            steps: 300,
            grad_clip: 1.0,
        };
        let history = train_model(&mut model, &toy_pairs(), &hyper).unwrap();
        let initial = history[0];
        let last = *history.last().unwrap();
        assert!(
            last < 0.1 * initial,
            "expected 10x loss reduction, got {initial} -> {last}"
        );
    }

    #[test]
    fn same_seed_trains_to_identical_parameters() {
        let hyper = TrainHyper { learning_rate: 1e-3, batch_size: 4, steps: 20, grad_clip: 1.0 };
        let run = || {
            let mut model = TransformerModel::new(ModelConfig {
                dropout_rate: 0.1,
                ..config()
            })
            .unwrap();
            train_model(&mut model, &toy_pairs(), &hyper).unwrap();
            model
                .parameters()
                .iter()
                .flat_map(|p| p.to_vec())
                .collect::<Vec<f64>>()
        };
        let a = run();
        let b = run();
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn long_sequences_are_rejected_up_front() {
        let mut model = TransformerModel::new(config()).unwrap();
        let pairs = vec![(vec![5usize; 13], vec![5usize, 6])];
        assert!(matches!(
            train_model(&mut model, &pairs, &TrainHyper::default()),
            Err(TrainError::Transformer(TransformerError::SequenceTooLong { .. }))
        ));
    }
}
