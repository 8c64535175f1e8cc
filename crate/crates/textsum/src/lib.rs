//! A self-contained news-summarization workbench.
//!
//! The crate bundles everything needed to run summarization experiments on a
//! BBC-style article/summary corpus without external model weights or
//! services:
//!
//! - [`corpus`]: load and split article/reference-summary directory trees
//! - [`textproc`]: contraction expansion, tokenization, stopwords, Porter
//!   stemming, dictionary lemmatization, sentence segmentation, vocabulary
//! - [`rouge`]: ROUGE-1/2/L precision, recall and F1
//! - [`extractive`]: TF-IDF ranking, gap-sentence selection, lead/random
//!   baselines and pseudo-pair generation
//! - [`tensor`]: a small f64 tensor core with reverse-mode autodiff and Adam
//! - [`transformer`]: a desk-scale encoder-decoder transformer with training,
//!   greedy/beam decoding and binary checkpoints
//! - [`harness`]: experiment configuration, orchestration and report
//!   rendering, also exposed through the `textsum` command-line binary
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod corpus;
pub mod extractive;
pub mod harness;
pub mod rouge;
pub mod tensor;
pub mod textproc;
pub mod transformer;

pub use corpus::{load_corpus, split_corpus, Corpus, Document, SplitSpec};
pub use extractive::{ExtractBudget, SentenceScore};
pub use rouge::{RougeScore, RougeVariant};
pub use textproc::{preprocess, segment_sentences, Morphology, PipelineConfig, Vocabulary};
