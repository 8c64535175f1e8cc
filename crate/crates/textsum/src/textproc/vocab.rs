//! Word-level vocabulary with five reserved ids and a token↔id codec.

use std::collections::HashMap;

use thiserror::Error;

pub const PAD_ID: usize = 0;
pub const BOS_ID: usize = 1;
pub const EOS_ID: usize = 2;
pub const UNK_ID: usize = 3;
pub const MASK_ID: usize = 4;

pub const PAD_TOKEN: &str = "⟨pad⟩";
pub const BOS_TOKEN: &str = "⟨bos⟩";
pub const EOS_TOKEN: &str = "⟨eos⟩";
pub const UNK_TOKEN: &str = "⟨unk⟩";
pub const MASK_TOKEN: &str = "⟨mask⟩";

const SPECIAL_TOKENS: [&str; 5] = [PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, MASK_TOKEN];

#[derive(Debug, Error, PartialEq)]
pub enum VocabError {
    #[error("no tokens left to build a vocabulary from")]
    NoTokens,
    #[error("max_size must be at least 6 to fit the specials plus one token, got {0}")]
    MaxSizeTooSmall(usize),
    #[error("id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: usize, size: usize },
    #[error("regular token {0:?} collides with a reserved special token")]
    ReservedToken(String),
    #[error("token {0:?} appears twice in the vocabulary")]
    DuplicateToken(String),
}

/// Bidirectional token↔id map. Ids are contiguous, with the five specials
/// pinned to ids 0–4.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from regular tokens already ranked in id order
    /// (used when deserializing). The specials must not appear in `regular`.
    pub fn from_ranked_tokens<I>(regular: I) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = String>,
    {
        let mut id_to_token: Vec<String> =
            SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        for token in regular {
            if SPECIAL_TOKENS.contains(&token.as_str()) {
                return Err(VocabError::ReservedToken(token));
            }
            id_to_token.push(token);
        }
        let mut token_to_id = HashMap::with_capacity(id_to_token.len());
        for (id, token) in id_to_token.iter().enumerate() {
            if token_to_id.insert(token.clone(), id).is_some() {
                return Err(VocabError::DuplicateToken(token.clone()));
            }
        }
        Ok(Vocabulary { token_to_id, id_to_token })
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    /// Regular (non-special) tokens in id order.
    pub fn regular_tokens(&self) -> &[String] {
        &self.id_to_token[SPECIAL_TOKENS.len()..]
    }
}

/// Ranks tokens by corpus frequency (ties broken by token, ascending) and
/// assigns ids starting at 5. Tokens below `min_freq` are dropped; at most
/// `max_size − 5` regular tokens are kept.
pub fn build_vocabulary(
    token_streams: &[Vec<String>],
    min_freq: usize,
    max_size: usize,
) -> Result<Vocabulary, VocabError> {
    if max_size < 6 {
        return Err(VocabError::MaxSizeTooSmall(max_size));
    }
    let min_freq = min_freq.max(1);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for stream in token_streams {
        for token in stream {
            if !SPECIAL_TOKENS.contains(&token.as_str()) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_freq)
        .collect();
    if ranked.is_empty() {
        return Err(VocabError::NoTokens);
    }
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(max_size - SPECIAL_TOKENS.len());
    Vocabulary::from_ranked_tokens(ranked.into_iter().map(|(t, _)| t.to_string()))
}

/// Maps tokens to ids, sending unknown tokens to `UNK_ID` and optionally
/// wrapping the sequence in BOS/EOS.
pub fn codec_encode(tokens: &[String], vocab: &Vocabulary, add_bos_eos: bool) -> Vec<usize> {
    let mut ids = Vec::with_capacity(tokens.len() + 2);
    if add_bos_eos {
        ids.push(BOS_ID);
    }
    ids.extend(tokens.iter().map(|t| vocab.id_of(t).unwrap_or(UNK_ID)));
    if add_bos_eos {
        ids.push(EOS_ID);
    }
    ids
}

/// Maps ids back to tokens, dropping PAD/BOS/EOS. UNK and MASK render as
/// their surface forms.
pub fn codec_decode(ids: &[usize], vocab: &Vocabulary) -> Result<Vec<String>, VocabError> {
    let mut tokens = Vec::with_capacity(ids.len());
    for &id in ids {
        if id >= vocab.size() {
            return Err(VocabError::IdOutOfRange { id, size: vocab.size() });
        }
        if matches!(id, PAD_ID | BOS_ID | EOS_ID) {
            continue;
        }
        tokens.push(vocab.id_to_token[id].clone());
    }
    Ok(tokens)
}
