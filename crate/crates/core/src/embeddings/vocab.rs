use std::collections::HashMap;

use crate::corpus::CleanPost;
use crate::error::{Error, Result};

/// Tokens ordered by descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocab {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Builds a vocabulary from `(token, count)` pairs that are already in order.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut vocab = Vocab::default();
        for (token, count) in entries {
            if vocab.index.insert(token.clone(), vocab.tokens.len()).is_some() {
                return Err(Error::InvalidInput(format!("duplicate vocabulary token {token:?}")));
            }
            vocab.tokens.push(token);
            vocab.counts.push(count);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

pub fn build_vocab(corpus: &[CleanPost], min_count: u64) -> Result<Vocab> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for post in corpus {
        for t in &post.tokens {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(String, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocab::from_entries(entries)
}
