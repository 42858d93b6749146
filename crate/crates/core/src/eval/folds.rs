use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lexicon::SentimentLabel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Folds {
    /// Sorted index sets that partition `0..n`.
    pub folds: Vec<Vec<usize>>,
    /// Classes with fewer than `k` examples (some folds lack them).
    pub sparse_classes: Vec<SentimentLabel>,
}

impl Folds {
    /// Indices outside fold `i`, ascending.
    pub fn training(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Shuffles each class with the seed, then deals its members round-robin,
/// continuing the rotation from where the previous class stopped.
pub fn stratified_folds(labels: &[SentimentLabel], k: usize, seed: u64) -> Result<Folds> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be at least 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the dataset size {}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut sparse_classes = Vec::new();
    let mut next = 0;
    for class in SentimentLabel::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            warn!("class {class} has {} examples, fewer than k = {k}", members.len());
            sparse_classes.push(class);
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(Folds { folds, sparse_classes })
}
