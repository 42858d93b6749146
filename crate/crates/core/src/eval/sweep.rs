use log::{info, warn};

use super::cv::cross_validate;
use super::metrics::MetricsReport;
use crate::corpus::CleanPost;
use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::features::{build_dataset, LabelCounts};
use crate::lexicon::{Lexicon, SentimentLabel, Threshold};
use crate::models::{ClassifierConfigs, ClassifierKind};

pub const DEFAULT_SWEEP: [f64; 4] = [0.075, 0.08, 0.10, 0.12];

pub fn default_thresholds() -> Vec<Threshold> {
    DEFAULT_SWEEP.iter().map(|&t| Threshold::new(t).expect("valid default")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: Threshold,
    pub kind: ClassifierKind,
    pub label_counts: LabelCounts,
    /// `None` when the threshold leaves a single class.
    pub report: Option<MetricsReport>,
}

impl SweepRow {
    pub fn flags(&self) -> Vec<String> {
        match &self.report {
            None => vec!["single-class".into()],
            Some(r) => r
                .unreliable_classes()
                .into_iter()
                .map(|l| format!("unreliable-{l}"))
                .collect(),
        }
    }
}

/// Relabels and refeaturizes the corpus at each threshold and cross-validates
/// both classifiers. Rows are ordered by threshold, then classifier kind.
pub fn threshold_sweep(
    corpus: &[CleanPost],
    model: &EmbeddingModel,
    lex: &Lexicon,
    thresholds: &[Threshold],
    k: usize,
    seed: u64,
    configs: &ClassifierConfigs,
) -> Result<Vec<SweepRow>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidInput("threshold sweep needs at least one threshold".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("sweep thresholds must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(thresholds.len() * 2);
    for &t in thresholds {
        let dataset = build_dataset(corpus, model, lex, t);
        let counts = dataset.label_counts();
        let classes = counts.iter().filter(|&&c| c > 0).count();
        info!(
            "threshold {t}: {} positive, {} negative, {} neutral",
            counts[SentimentLabel::Positive.index()],
            counts[SentimentLabel::Negative.index()],
            counts[SentimentLabel::Neutral.index()]
        );
        for kind in ClassifierKind::ALL {
            let report = if classes < 2 {
                warn!("threshold {t} leaves {classes} class(es); skipping {kind}");
                None
            } else {
                Some(cross_validate(&dataset, kind, k, seed, configs)?.report)
            };
            rows.push(SweepRow { threshold: t, kind, label_counts: counts, report });
        }
    }
    Ok(rows)
}
