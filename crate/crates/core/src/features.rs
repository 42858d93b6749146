//! Feature construction for the classifiers.
//!
//! Layout of a feature vector for embedding dimension `d` (403 values at d=100):
//!
//! | range            | content                                  |
//! |------------------|------------------------------------------|
//! | `0..d`           | mean vector of all tokens                |
//! | `d..2d`          | mean vector of positive tokens           |
//! | `2d..3d`         | mean vector of negative tokens           |
//! | `3d..4d`         | mean vector of neutral tokens            |
//! | `4d`, `4d+1`, `4d+2` | positive, negative, neutral token counts |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CleanPost, University};
use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::lexicon::{classify_score, Lexicon, SentimentLabel, Threshold};

pub fn feature_len(dim: usize) -> usize {
    4 * dim + 3
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn dim(&self) -> usize {
        (self.0.len() - 3) / 4
    }

    pub fn doc_avg(&self) -> &[f64] {
        &self.0[..self.dim()]
    }

    pub fn polarity_avg(&self, label: SentimentLabel) -> &[f64] {
        let d = self.dim();
        let block = match label {
            SentimentLabel::Positive => 1,
            SentimentLabel::Negative => 2,
            SentimentLabel::Neutral => 3,
        };
        &self.0[block * d..(block + 1) * d]
    }

    /// (positive, negative, neutral) token counts.
    pub fn counts(&self) -> (f64, f64, f64) {
        let n = self.0.len();
        (self.0[n - 3], self.0[n - 2], self.0[n - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub post_id: String,
    pub university: University,
    pub year: i32,
    pub label: SentimentLabel,
    /// Text compound score the label was derived from.
    pub compound: f64,
    pub features: FeatureVector,
}

/// Tokens split by per-token polarity, each list in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Wordlists {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
}

pub fn split_wordlists<S: AsRef<str>>(lex: &Lexicon, tokens: &[S], threshold: Threshold) -> Wordlists {
    let mut lists = Wordlists::default();
    for t in tokens {
        let t = t.as_ref();
        let list = match classify_score(lex.token_compound(t), threshold) {
            SentimentLabel::Positive => &mut lists.positive,
            SentimentLabel::Negative => &mut lists.negative,
            SentimentLabel::Neutral => &mut lists.neutral,
        };
        list.push(t.to_string());
    }
    lists
}

pub fn featurize(
    model: &EmbeddingModel,
    lex: &Lexicon,
    post: &CleanPost,
    threshold: Threshold,
) -> LabeledExample {
    let lists = split_wordlists(lex, &post.tokens, threshold);
    let mut values = Vec::with_capacity(feature_len(model.dim()));
    values.extend(model.doc_vector(&post.tokens));
    values.extend(model.doc_vector(&lists.positive));
    values.extend(model.doc_vector(&lists.negative));
    values.extend(model.doc_vector(&lists.neutral));
    values.push(lists.positive.len() as f64);
    values.push(lists.negative.len() as f64);
    values.push(lists.neutral.len() as f64);
    let compound = lex.text_compound(&post.tokens);
    LabeledExample {
        post_id: post.post_id.clone(),
        university: post.university,
        year: post.year,
        label: classify_score(compound, threshold),
        compound,
        features: FeatureVector(values),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub threshold: Threshold,
    pub examples: Vec<LabeledExample>,
}

/// Counts indexed by [`SentimentLabel::index`].
pub type LabelCounts = [usize; 3];

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<SentimentLabel> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn label_counts(&self) -> LabelCounts {
        let mut counts = [0; 3];
        for e in &self.examples {
            counts[e.label.index()] += 1;
        }
        counts
    }

    pub fn cell_counts(&self) -> BTreeMap<(i32, University), LabelCounts> {
        let mut cells: BTreeMap<(i32, University), LabelCounts> = BTreeMap::new();
        for e in &self.examples {
            cells.entry((e.year, e.university)).or_default()[e.label.index()] += 1;
        }
        cells
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            threshold: self.threshold,
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    /// Checks every stored label against its compound score and the threshold.
    pub fn verify_labels(&self) -> Result<()> {
        for e in &self.examples {
            let expected = classify_score(e.compound, self.threshold);
            if expected != e.label {
                return Err(Error::InvalidInput(format!(
                    "post {}: stored label {} but compound {} at threshold {} gives {}",
                    e.post_id, e.label, e.compound, self.threshold, expected
                )));
            }
        }
        Ok(())
    }
}

/// Featurizes every post. Posts are processed in parallel; output order
/// follows the corpus.
pub fn build_dataset(
    corpus: &[CleanPost],
    model: &EmbeddingModel,
    lex: &Lexicon,
    threshold: Threshold,
) -> Dataset {
    Dataset {
        threshold,
        examples: corpus
            .par_iter()
            .map(|p| featurize(model, lex, p, threshold))
            .collect(),
    }
}

/// Sidecar metadata written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub threshold: f64,
    pub lexicon_sha256: String,
    pub model_sha256: String,
    pub seed: u64,
    pub examples: usize,
    pub feature_count: usize,
    pub label_counts: BTreeMap<String, usize>,
}

impl DatasetMeta {
    pub fn describe(dataset: &Dataset, lexicon_sha256: String, model_sha256: String, seed: u64) -> Self {
        let counts = dataset.label_counts();
        DatasetMeta {
            threshold: dataset.threshold.value(),
            lexicon_sha256,
            model_sha256,
            seed,
            examples: dataset.len(),
            feature_count: dataset.examples.first().map_or(0, |e| e.features.len()),
            label_counts: SentimentLabel::ALL
                .iter()
                .map(|l| (l.to_string(), counts[l.index()]))
                .collect(),
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path.display().to_string(), 0, format!("{other:?}")),
    }
}

/// Writes `post_id,university,year,label,compound,f0..` and the JSON sidecar
/// at `<path>.meta.json`.
pub fn write_dataset(path: &Path, dataset: &Dataset, meta: &DatasetMeta) -> Result<()> {
    let width = dataset.examples.first().map_or(0, |e| e.features.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = ["post_id", "university", "year", "label", "compound"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..width).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for e in &dataset.examples {
        let mut row = vec![
            e.post_id.clone(),
            e.university.to_string(),
            e.year.to_string(),
            e.label.to_string(),
            e.compound.to_string(),
        ];
        row.extend(e.features.as_slice().iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let meta_path = meta_path(path);
    let json = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
}

pub fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

pub fn read_dataset(path: &Path) -> Result<(Dataset, DatasetMeta)> {
    let origin = path.display().to_string();
    let meta_path = meta_path(path);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: DatasetMeta = serde_json::from_str(&meta_text)
        .map_err(|e| Error::format(meta_path.display().to_string(), e.line(), e.to_string()))?;
    let threshold = Threshold::new(meta.threshold)?;

    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let fixed = ["post_id", "university", "year", "label", "compound"];
    if headers.len() < fixed.len() || fixed.iter().zip(headers.iter()).any(|(a, b)| *a != b) {
        return Err(Error::format(&origin, 1, "unexpected dataset header"));
    }
    let width = headers.len() - fixed.len();
    let mut examples = Vec::new();
    for (i, record) in r.records().enumerate() {
        let line = i + 2;
        let rec = record.map_err(|e| csv_err(path, e))?;
        let bad = |what: &str| Error::format(&origin, line, format!("bad {what}"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("number"));
        let values: Vec<f64> = rec.iter().skip(fixed.len()).map(num).collect::<Result<_>>()?;
        if values.len() != width {
            return Err(bad("row width"));
        }
        examples.push(LabeledExample {
            post_id: rec[0].to_string(),
            university: rec[1].parse().map_err(|_| bad("university"))?,
            year: rec[2].parse().map_err(|_| bad("year"))?,
            label: rec[3].parse().map_err(|_| bad("label"))?,
            compound: num(&rec[4])?,
            features: FeatureVector(values),
        });
    }
    let dataset = Dataset { threshold, examples };
    dataset.verify_labels()?;
    Ok((dataset, meta))
}
