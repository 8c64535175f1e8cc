//! Binary model checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic  b"SMTF"
//! format_version       u32
//! d_model, n_heads, n_enc_layers, n_dec_layers,
//! d_ff, vocab_size, max_len                      u32 each
//! dropout_rate         f64
//! seed                 u64
//! vocab: count u32, then per token (id order): byte length u32 + UTF-8
//! params: count u32, then per record:
//!     name length u16 + UTF-8 name, rank u8, dims u64 each, f64 data
//! crc32 over all preceding bytes                 u32
//! ```
//!
//! Loading a saved model reproduces every parameter bit for bit.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{ModelConfig, TransformerError, TransformerModel};
use crate::textproc::{Vocabulary, BOS_TOKEN, EOS_TOKEN, MASK_TOKEN, PAD_TOKEN, UNK_TOKEN};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"SMTF";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint file ends prematurely")]
    TruncatedFile,
    #[error("checkpoint checksum does not match its contents")]
    ChecksumMismatch,
    #[error("malformed checkpoint record: {0}")]
    InvalidRecord(String),
    #[error(transparent)]
    Model(#[from] TransformerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

/// Serializes the model and its vocabulary to `path`.
pub fn save_checkpoint(
    model: &TransformerModel,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<(), CheckpointError> {
    let config = &model.config;
    if vocab.size() != config.vocab_size {
        return Err(CheckpointError::InvalidRecord(format!(
            "vocabulary size {} does not match model vocab_size {}",
            vocab.size(),
            config.vocab_size
        )));
    }
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    push_u32(&mut buf, FORMAT_VERSION);
    push_u32(&mut buf, config.d_model as u32);
    push_u32(&mut buf, config.n_heads as u32);
    push_u32(&mut buf, config.n_enc_layers as u32);
    push_u32(&mut buf, config.n_dec_layers as u32);
    push_u32(&mut buf, config.d_ff as u32);
    push_u32(&mut buf, config.vocab_size as u32);
    push_u32(&mut buf, config.max_len as u32);
    buf.extend_from_slice(&config.dropout_rate.to_le_bytes());
    push_u64(&mut buf, config.seed);

    push_u32(&mut buf, vocab.size() as u32);
    for id in 0..vocab.size() {
        let token = vocab.token_of(id).expect("contiguous vocabulary ids");
        push_u32(&mut buf, token.len() as u32);
        buf.extend_from_slice(token.as_bytes());
    }

    let params = model.named_parameters();
    push_u32(&mut buf, params.len() as u32);
    for (name, tensor) in &params {
        buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.push(tensor.shape().len() as u8);
        for &dim in tensor.shape() {
            push_u64(&mut buf, dim as u64);
        }
        for v in tensor.data().iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    let crc = crc32fast::hash(&buf);
    push_u32(&mut buf, crc);
    fs::write(path, buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if n > self.remaining() {
            return Err(CheckpointError::TruncatedFile);
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn utf8(&mut self, len: usize) -> Result<String, CheckpointError> {
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| CheckpointError::InvalidRecord("non-UTF-8 string".into()))
    }
}

/// Restores a model and vocabulary saved by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<(TransformerModel, Vocabulary), CheckpointError> {
    let bytes = fs::read(path)?;
    let mut cursor = Cursor { bytes: &bytes, pos: 0 };

    if cursor.take(4)? != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = cursor.u32()?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let config = ModelConfig {
        d_model: cursor.u32()? as usize,
        n_heads: cursor.u32()? as usize,
        n_enc_layers: cursor.u32()? as usize,
        n_dec_layers: cursor.u32()? as usize,
        d_ff: cursor.u32()? as usize,
        vocab_size: cursor.u32()? as usize,
        max_len: cursor.u32()? as usize,
        dropout_rate: cursor.f64()?,
        seed: cursor.u64()?,
    };

    // Counts are sanity-checked against the bytes left so a corrupt length
    // field cannot trigger an enormous allocation before the CRC is seen.
    let vocab_count = cursor.u32()? as usize;
    if vocab_count > cursor.remaining() / 4 {
        return Err(CheckpointError::TruncatedFile);
    }
    let mut tokens = Vec::with_capacity(vocab_count);
    for _ in 0..vocab_count {
        let len = cursor.u32()? as usize;
        tokens.push(cursor.utf8(len)?);
    }

    let param_count = cursor.u32()? as usize;
    if param_count > cursor.remaining() / 3 {
        return Err(CheckpointError::TruncatedFile);
    }
    let mut records = Vec::with_capacity(param_count);
    for _ in 0..param_count {
        let name_len = cursor.u16()? as usize;
        let name = cursor.utf8(name_len)?;
        let rank = cursor.u8()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(cursor.u64()? as usize);
        }
        let count = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(CheckpointError::TruncatedFile)?;
        if count > cursor.remaining() / 8 {
            return Err(CheckpointError::TruncatedFile);
        }
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(cursor.f64()?);
        }
        records.push((name, shape, data));
    }

    let stored_crc = cursor.u32()?;
    if cursor.pos != bytes.len() {
        return Err(CheckpointError::InvalidRecord(format!(
            "{} trailing bytes after checksum",
            bytes.len() - cursor.pos
        )));
    }
    if crc32fast::hash(&bytes[..bytes.len() - 4]) != stored_crc {
        return Err(CheckpointError::ChecksumMismatch);
    }

    let expected_specials = [PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, MASK_TOKEN];
    if tokens.len() < expected_specials.len()
        || tokens[..5].iter().map(String::as_str).ne(expected_specials)
    {
        return Err(CheckpointError::InvalidRecord(
            "vocabulary does not start with the reserved specials".into(),
        ));
    }
    let vocab = Vocabulary::from_ranked_tokens(tokens[5..].iter().cloned())
        .map_err(|e| CheckpointError::InvalidRecord(e.to_string()))?;
    if vocab.size() != config.vocab_size {
        return Err(CheckpointError::InvalidRecord(format!(
            "vocabulary has {} entries but config says {}",
            vocab.size(),
            config.vocab_size
        )));
    }

    let model = TransformerModel::new(config)?;
    let mut params = model.named_parameters();
    if params.len() != records.len() {
        return Err(CheckpointError::InvalidRecord(format!(
            "expected {} parameter records, found {}",
            params.len(),
            records.len()
        )));
    }
    for (name, shape, data) in records {
        let position = params
            .iter()
            .position(|(n, _)| *n == name)
            .ok_or_else(|| CheckpointError::InvalidRecord(format!("unknown parameter {name}")))?;
        let (_, tensor) = params.swap_remove(position);
        if tensor.shape() != shape.as_slice() {
            return Err(CheckpointError::InvalidRecord(format!(
                "parameter {name} has shape {:?}, checkpoint says {shape:?}",
                tensor.shape()
            )));
        }
        tensor.set_data(data);
    }
    Ok((model, vocab))
}
