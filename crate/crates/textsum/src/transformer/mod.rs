//! A desk-scale encoder-decoder transformer: sinusoidal positional encoding,
//! multi-head scaled dot-product attention, position-wise feed-forward blocks
//! with post-norm residuals, and a final linear projection to vocabulary
//! logits.
//!
//! PAD tokens are hidden from attention everywhere they appear as keys, so
//! batch padding never leaks into other positions.

mod checkpoint;
mod decode;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, CHECKPOINT_MAGIC};
pub use decode::{decode_summary, DecodeStrategy, DEFAULT_LENGTH_PENALTY};
pub use train::{train_model, TrainError, TrainHyper};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use thiserror::Error;

use crate::tensor::{Tape, Tensor, TensorError};
use crate::textproc::PAD_ID;

#[derive(Debug, Error, PartialEq)]
pub enum TransformerError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("positional encoding needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("source and target sequences must be non-empty")]
    EmptySequence,
    #[error("sequence of length {len} exceeds max_len {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("token id {id} out of range for vocabulary of {vocab}")]
    IdOutOfRange { id: usize, vocab: usize },
    #[error("attention query row {0} has no visible key positions")]
    FullyMaskedRow(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Transformer hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_enc_layers: usize,
    pub n_dec_layers: usize,
    pub d_ff: usize,
    pub vocab_size: usize,
    pub max_len: usize,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), TransformerError> {
        if self.d_model == 0 || self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(TransformerError::InvalidConfig(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.d_model % 2 != 0 {
            return Err(TransformerError::InvalidConfig(
                "d_model must be even for sinusoidal positions".into(),
            ));
        }
        if self.vocab_size < 6 {
            return Err(TransformerError::InvalidConfig(format!(
                "vocab_size must be at least 6, got {}",
                self.vocab_size
            )));
        }
        if self.max_len < 2 {
            return Err(TransformerError::InvalidConfig(format!(
                "max_len must be at least 2, got {}",
                self.max_len
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(TransformerError::InvalidConfig(format!(
                "dropout_rate must lie in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if self.n_enc_layers == 0 || self.n_dec_layers == 0 || self.d_ff == 0 {
            return Err(TransformerError::InvalidConfig(
                "layer counts and d_ff must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Per-head key/value width.
    pub fn d_k(&self) -> usize {
        self.d_model / self.n_heads
    }
}

/// The fixed sine/cosine position table:
/// `PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(...)`.
pub fn positional_encoding(max_len: usize, d_model: usize) -> Result<Tensor, TransformerError> {
    if d_model % 2 != 0 {
        return Err(TransformerError::OddDimension(d_model));
    }
    let mut data = vec![0.0; max_len * d_model];
    for pos in 0..max_len {
        for i in 0..d_model / 2 {
            let rate = (pos as f64) / 10000f64.powf(2.0 * i as f64 / d_model as f64);
            data[pos * d_model + 2 * i] = rate.sin();
            data[pos * d_model + 2 * i + 1] = rate.cos();
        }
    }
    Ok(Tensor::constant(&[max_len, d_model], data))
}

/// Per-head projection matrices plus the shared output projection, exactly
/// the W_Q/W_K/W_V (d_model×d_k each) and W_O (h·d_v×d_model) layout.
#[derive(Debug, Clone)]
pub struct MultiHeadParams {
    pub w_q: Vec<Tensor>,
    pub w_k: Vec<Tensor>,
    pub w_v: Vec<Tensor>,
    pub w_o: Tensor,
}

impl MultiHeadParams {
    fn init(config: &ModelConfig, rng: &mut ChaCha8Rng) -> MultiHeadParams {
        let d = config.d_model;
        let dk = config.d_k();
        let heads = config.n_heads;
        MultiHeadParams {
            w_q: (0..heads).map(|_| xavier(d, dk, rng)).collect(),
            w_k: (0..heads).map(|_| xavier(d, dk, rng)).collect(),
            w_v: (0..heads).map(|_| xavier(d, dk, rng)).collect(),
            w_o: xavier(heads * dk, d, rng),
        }
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        for (i, t) in self.w_q.iter().enumerate() {
            out.push((format!("{prefix}.w_q.{i}"), t.clone()));
        }
        for (i, t) in self.w_k.iter().enumerate() {
            out.push((format!("{prefix}.w_k.{i}"), t.clone()));
        }
        for (i, t) in self.w_v.iter().enumerate() {
            out.push((format!("{prefix}.w_v.{i}"), t.clone()));
        }
        out.push((format!("{prefix}.w_o"), self.w_o.clone()));
    }
}

#[derive(Debug, Clone)]
struct LayerNormParams {
    gain: Tensor,
    bias: Tensor,
}

impl LayerNormParams {
    fn init(d: usize) -> LayerNormParams {
        LayerNormParams {
            gain: Tensor::param(&[d], vec![1.0; d]),
            bias: Tensor::param(&[d], vec![0.0; d]),
        }
    }

    fn apply(&self, tape: &Tape, x: &Tensor) -> Result<Tensor, TensorError> {
        tape.layer_norm(x, &self.gain, &self.bias, 1e-5)
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        out.push((format!("{prefix}.gain"), self.gain.clone()));
        out.push((format!("{prefix}.bias"), self.bias.clone()));
    }
}

#[derive(Debug, Clone)]
struct FeedForward {
    w1: Tensor,
    b1: Tensor,
    w2: Tensor,
    b2: Tensor,
}

impl FeedForward {
    fn init(config: &ModelConfig, rng: &mut ChaCha8Rng) -> FeedForward {
        FeedForward {
            w1: xavier(config.d_model, config.d_ff, rng),
            b1: Tensor::param(&[config.d_ff], vec![0.0; config.d_ff]),
            w2: xavier(config.d_ff, config.d_model, rng),
            b2: Tensor::param(&[config.d_model], vec![0.0; config.d_model]),
        }
    }

    fn apply(&self, tape: &Tape, x: &Tensor) -> Result<Tensor, TensorError> {
        let hidden = tape.relu(&tape.add_bias(&tape.matmul(x, &self.w1)?, &self.b1)?);
        tape.add_bias(&tape.matmul(&hidden, &self.w2)?, &self.b2)
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        out.push((format!("{prefix}.w1"), self.w1.clone()));
        out.push((format!("{prefix}.b1"), self.b1.clone()));
        out.push((format!("{prefix}.w2"), self.w2.clone()));
        out.push((format!("{prefix}.b2"), self.b2.clone()));
    }
}

#[derive(Debug, Clone)]
struct EncoderLayer {
    self_attn: MultiHeadParams,
    norm1: LayerNormParams,
    ff: FeedForward,
    norm2: LayerNormParams,
}

#[derive(Debug, Clone)]
struct DecoderLayer {
    self_attn: MultiHeadParams,
    norm1: LayerNormParams,
    cross_attn: MultiHeadParams,
    norm2: LayerNormParams,
    ff: FeedForward,
    norm3: LayerNormParams,
}

/// Token embeddings, stacked encoder/decoder layers and the output
/// projection, all seeded deterministically from the config.
#[derive(Debug, Clone)]
pub struct TransformerModel {
    pub config: ModelConfig,
    token_embedding: Tensor,
    positional: Tensor,
    enc_layers: Vec<EncoderLayer>,
    dec_layers: Vec<DecoderLayer>,
    output_proj: Tensor,
}

fn xavier(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("uniform bounds");
    let data = (0..rows * cols).map(|_| dist.sample(rng)).collect();
    Tensor::param(&[rows, cols], data)
}

impl TransformerModel {
    pub fn new(config: ModelConfig) -> Result<TransformerModel, TransformerError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let emb_std = 1.0 / (config.d_model as f64).sqrt();
        let normal = Normal::new(0.0, emb_std).expect("normal params");
        let emb_data = (0..config.vocab_size * config.d_model)
            .map(|_| normal.sample(&mut rng))
            .collect();
        let token_embedding = Tensor::param(&[config.vocab_size, config.d_model], emb_data);

        let enc_layers = (0..config.n_enc_layers)
            .map(|_| EncoderLayer {
                self_attn: MultiHeadParams::init(&config, &mut rng),
                norm1: LayerNormParams::init(config.d_model),
                ff: FeedForward::init(&config, &mut rng),
                norm2: LayerNormParams::init(config.d_model),
            })
            .collect();
        let dec_layers = (0..config.n_dec_layers)
            .map(|_| DecoderLayer {
                self_attn: MultiHeadParams::init(&config, &mut rng),
                norm1: LayerNormParams::init(config.d_model),
                cross_attn: MultiHeadParams::init(&config, &mut rng),
                norm2: LayerNormParams::init(config.d_model),
                ff: FeedForward::init(&config, &mut rng),
                norm3: LayerNormParams::init(config.d_model),
            })
            .collect();
        let output_proj = xavier(config.d_model, config.vocab_size, &mut rng);
        let positional = positional_encoding(config.max_len, config.d_model)?;

        Ok(TransformerModel {
            config,
            token_embedding,
            positional,
            enc_layers,
            dec_layers,
            output_proj,
        })
    }

    /// All trainable tensors with stable, unique names.
    pub fn named_parameters(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        out.push(("token_embedding".to_string(), self.token_embedding.clone()));
        for (l, layer) in self.enc_layers.iter().enumerate() {
            layer.self_attn.collect(&format!("enc.{l}.self_attn"), &mut out);
            layer.norm1.collect(&format!("enc.{l}.norm1"), &mut out);
            layer.ff.collect(&format!("enc.{l}.ff"), &mut out);
            layer.norm2.collect(&format!("enc.{l}.norm2"), &mut out);
        }
        for (l, layer) in self.dec_layers.iter().enumerate() {
            layer.self_attn.collect(&format!("dec.{l}.self_attn"), &mut out);
            layer.norm1.collect(&format!("dec.{l}.norm1"), &mut out);
            layer.cross_attn.collect(&format!("dec.{l}.cross_attn"), &mut out);
            layer.norm2.collect(&format!("dec.{l}.norm2"), &mut out);
            layer.ff.collect(&format!("dec.{l}.ff"), &mut out);
            layer.norm3.collect(&format!("dec.{l}.norm3"), &mut out);
        }
        out.push(("output_proj".to_string(), self.output_proj.clone()));
        out
    }

    pub fn parameters(&self) -> Vec<Tensor> {
        self.named_parameters().into_iter().map(|(_, t)| t).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(Tensor::len).sum()
    }

    fn validate_ids(&self, ids: &[usize]) -> Result<(), TransformerError> {
        if ids.len() > self.config.max_len {
            return Err(TransformerError::SequenceTooLong {
                len: ids.len(),
                max: self.config.max_len,
            });
        }
        for &id in ids {
            if id >= self.config.vocab_size {
                return Err(TransformerError::IdOutOfRange {
                    id,
                    vocab: self.config.vocab_size,
                });
            }
        }
        Ok(())
    }

    /// Embedding scaled by √d_model plus the position table.
    fn embed(&self, tape: &Tape, ids: &[usize]) -> Result<Tensor, TransformerError> {
        let gathered = tape.embedding(&self.token_embedding, ids)?;
        let scaled = tape.scale(&gathered, (self.config.d_model as f64).sqrt());
        let positions = tape.embedding(&self.positional, &(0..ids.len()).collect::<Vec<_>>())?;
        Ok(tape.add(&scaled, &positions)?)
    }

    /// Full encoder-decoder pass producing `[len(tgt), vocab_size]` logits.
    ///
    /// Dropout fires only in `train_mode`; `dropout_salt` varies the masks
    /// between steps while keeping each run reproducible.
    pub fn seq2seq_forward(
        &self,
        tape: &Tape,
        src_ids: &[usize],
        tgt_ids: &[usize],
        train_mode: bool,
        dropout_salt: u64,
    ) -> Result<Tensor, TransformerError> {
        self.validate_ids(src_ids)?;
        self.validate_ids(tgt_ids)?;
        if src_ids.is_empty() || tgt_ids.is_empty() {
            return Err(TransformerError::EmptySequence);
        }
        let s = src_ids.len();
        let t = tgt_ids.len();
        let src_visible: Vec<bool> = src_ids.iter().map(|&id| id != PAD_ID).collect();
        let tgt_visible: Vec<bool> = tgt_ids.iter().map(|&id| id != PAD_ID).collect();

        let mut drop_site = 0u64;
        let mut dropout = |tape: &Tape, x: &Tensor| -> Tensor {
            if !train_mode || self.config.dropout_rate == 0.0 {
                return x.clone();
            }
            drop_site += 1;
            let seed = mix_seed(self.config.seed, dropout_salt, drop_site);
            tape.dropout(x, self.config.dropout_rate, seed)
        };

        // Encoder: every query may attend to every non-pad source position.
        let enc_mask: Vec<bool> = (0..s * s).map(|i| src_visible[i % s]).collect();
        let mut x = dropout(tape, &self.embed(tape, src_ids)?);
        for layer in &self.enc_layers {
            let attended =
                multi_head_attention(tape, &x, &x, Some(&enc_mask), &layer.self_attn)?;
            x = layer.norm1.apply(tape, &tape.add(&x, &dropout(tape, &attended))?)?;
            let ff = layer.ff.apply(tape, &x)?;
            x = layer.norm2.apply(tape, &tape.add(&x, &dropout(tape, &ff))?)?;
        }
        let memory = x;

        // Decoder: causal self-attention plus cross-attention over the
        // encoder output.
        let causal_mask: Vec<bool> = (0..t * t)
            .map(|i| {
                let (row, col) = (i / t, i % t);
                col <= row && tgt_visible[col]
            })
            .collect();
        let cross_mask: Vec<bool> = (0..t * s).map(|i| src_visible[i % s]).collect();

        let mut y = dropout(tape, &self.embed(tape, tgt_ids)?);
        for layer in &self.dec_layers {
            let self_attended =
                multi_head_attention(tape, &y, &y, Some(&causal_mask), &layer.self_attn)?;
            y = layer.norm1.apply(tape, &tape.add(&y, &dropout(tape, &self_attended))?)?;
            let cross =
                multi_head_attention(tape, &y, &memory, Some(&cross_mask), &layer.cross_attn)?;
            y = layer.norm2.apply(tape, &tape.add(&y, &dropout(tape, &cross))?)?;
            let ff = layer.ff.apply(tape, &y)?;
            y = layer.norm3.apply(tape, &tape.add(&y, &dropout(tape, &ff))?)?;
        }

        Ok(tape.matmul(&y, &self.output_proj)?)
    }

    /// Copy of the model with vocabulary rows/columns remapped by `perm`
    /// (`new id = perm[old id]`). Layer weights are shared.
    #[cfg(test)]
    fn clone_with_permuted_vocab(&self, perm: &[usize]) -> TransformerModel {
        let d = self.config.d_model;
        let v = self.config.vocab_size;
        let old_emb = self.token_embedding.to_vec();
        let mut new_emb = vec![0.0; old_emb.len()];
        for i in 0..v {
            for j in 0..d {
                new_emb[perm[i] * d + j] = old_emb[i * d + j];
            }
        }
        let old_out = self.output_proj.to_vec();
        let mut new_out = vec![0.0; old_out.len()];
        for r in 0..d {
            for i in 0..v {
                new_out[r * v + perm[i]] = old_out[r * v + i];
            }
        }
        let mut permuted = self.clone();
        permuted.token_embedding = Tensor::param(&[v, d], new_emb);
        permuted.output_proj = Tensor::param(&[d, v], new_out);
        permuted
    }
}

fn mix_seed(seed: u64, salt: u64, site: u64) -> u64 {
    // splitmix64 over the combined words
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add(site.wrapping_mul(0xBF58476D1CE4E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// `softmax(QKᵀ/√d_k)V` with an optional visibility mask (`true` = visible)
/// over the last two axes.
pub fn scaled_dot_attention(
    tape: &Tape,
    q: &Tensor,
    k: &Tensor,
    v: &Tensor,
    mask: Option<&[bool]>,
) -> Result<Tensor, TransformerError> {
    let d_k = *q.shape().last().ok_or_else(|| {
        TensorError::ShapeMismatch { op: "attention", lhs: q.shape().to_vec(), rhs: vec![] }
    })?;
    let q_len = q.shape()[q.shape().len() - 2];
    let s_len = k.shape()[k.shape().len() - 2];
    if let Some(mask) = mask {
        if mask.len() != q_len * s_len {
            return Err(TensorError::ShapeMismatch {
                op: "attention mask",
                lhs: vec![q_len, s_len],
                rhs: vec![mask.len()],
            }
            .into());
        }
        for row in 0..q_len {
            if !mask[row * s_len..(row + 1) * s_len].iter().any(|&m| m) {
                return Err(TransformerError::FullyMaskedRow(row));
            }
        }
    }
    let scores = tape.scale(
        &tape.matmul(q, &tape.transpose(k)?)?,
        1.0 / (d_k as f64).sqrt(),
    );
    let masked = match mask {
        Some(mask) => tape.mask_fill(&scores, mask)?,
        None => scores,
    };
    let weights = tape.softmax(&masked);
    Ok(tape.matmul(&weights, v)?)
}

/// Per-head projections, scaled dot-product attention, concatenation and the
/// output projection.
pub fn multi_head_attention(
    tape: &Tape,
    x_q: &Tensor,
    x_kv: &Tensor,
    mask: Option<&[bool]>,
    params: &MultiHeadParams,
) -> Result<Tensor, TransformerError> {
    let mut heads = Vec::with_capacity(params.w_q.len());
    for i in 0..params.w_q.len() {
        let q = tape.matmul(x_q, &params.w_q[i])?;
        let k = tape.matmul(x_kv, &params.w_k[i])?;
        let v = tape.matmul(x_kv, &params.w_v[i])?;
        heads.push(scaled_dot_attention(tape, &q, &k, &v, mask)?);
    }
    let concat = tape.concat_last(&heads)?;
    Ok(tape.matmul(&concat, &params.w_o)?)
}
