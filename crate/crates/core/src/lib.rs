//! Longitudinal sentiment classification of university Reddit posts.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`corpus`]: ingest JSON-lines dumps, keep keyword-bearing posts, tokenize
//!    and strip stopwords.
//! 2. [`lexicon`]: valence-lexicon compound scores and threshold labelling.
//! 3. [`embeddings`]: CBOW word vectors trained with negative sampling.
//! 4. [`features`]: per-polarity word lists, counts and averaged vectors.
//! 5. [`models`]: softmax logistic regression and one-vs-rest linear SVM.
//! 6. [`eval`]: stratified k-fold cross-validation, macro metrics, threshold
//!    sweeps, cohort reports and error plots.
//!
//! [`cli`] wires the stages together behind the `longsent` binary.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod lexicon;
pub mod models;
pub mod synthetic;

pub use error::{Error, Result};

/// A trained artefact together with the per-step loss recorded while fitting it.
#[derive(Debug, Clone)]
pub struct Trained<M> {
    pub model: M,
    pub loss_history: Vec<f64>,
}

/// Hex-encoded SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
