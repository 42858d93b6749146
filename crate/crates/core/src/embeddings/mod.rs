//! CBOW word embeddings trained with negative sampling.

mod cbow;
mod io;
mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cbow::{
    loss_and_gradients, train_cbow, train_cbow_with_workers, CbowExample, Gradients, RowStore,
};
pub use io::{load_model, save_model, FORMAT_VERSION};
pub use vocab::{build_vocab, Vocab};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negative_samples: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Floor of the linearly decayed learning rate.
    pub min_lr: f64,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 100,
            window: 5,
            min_count: 1,
            negative_samples: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_lr: 0.0001,
            seed: 1,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negative_samples", self.negative_samples),
            ("epochs", self.epochs),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("embedding {name} must be at least 1")));
            }
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return Err(Error::Config("embedding initial_lr must be positive".into()));
        }
        if !(self.min_lr.is_finite() && self.min_lr >= 0.0 && self.min_lr <= self.initial_lr) {
            return Err(Error::Config("embedding min_lr must lie in [0, initial_lr]".into()));
        }
        Ok(())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data has {} values, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub config: EmbeddingConfig,
    pub vocab: Vocab,
    /// Word vectors proper; one row per vocabulary entry.
    pub input_vectors: Matrix,
    /// Context-prediction weights used only during training.
    pub output_vectors: Matrix,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.input_vectors.cols()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.id(token).map(|i| self.input_vectors.row(i))
    }

    /// Mean input vector of the in-vocabulary tokens, or zeros when none are known.
    pub fn doc_vector<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        let mut n = 0usize;
        for id in tokens.iter().filter_map(|t| self.vocab.id(t.as_ref())) {
            for (a, v) in acc.iter_mut().zip(self.input_vectors.row(id)) {
                *a += v;
            }
            n += 1;
        }
        if n > 0 {
            let inv = 1.0 / n as f64;
            acc.iter_mut().for_each(|a| *a *= inv);
        }
        acc
    }

    /// SHA-256 of the serialized model.
    pub fn content_hash(&self) -> String {
        crate::sha256_hex(io::to_text(self).unwrap_or_default().as_bytes())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
