use log::{debug, warn};
use rayon::prelude::*;

use super::folds::stratified_folds;
use super::metrics::{macro_from_confusion, ConfusionMatrix, MetricsReport};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::lexicon::SentimentLabel;
use crate::models::{
    train_classifier, ClassifierConfigs, ClassifierKind, ClassifierModel, Standardizer, TrainSettings, N_CLASSES,
};

/// A held-out prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Position in the evaluated dataset.
    pub index: usize,
    pub post_id: String,
    pub compound: f64,
    pub actual: SentimentLabel,
    pub predicted: SentimentLabel,
    pub fold: usize,
}

impl Prediction {
    pub fn correct(&self) -> bool {
        self.actual == self.predicted
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub kind: ClassifierKind,
    /// Macro metrics of the pooled held-out confusion matrix.
    pub report: MetricsReport,
    pub fold_reports: Vec<MetricsReport>,
    /// Ordered by `index`.
    pub predictions: Vec<Prediction>,
    pub sparse_classes: Vec<SentimentLabel>,
    /// Folds whose training split held a single class; they predict that class.
    pub single_class_folds: Vec<usize>,
}

/// Zero-weight model whose tie-break always yields the training class.
fn constant_model(kind: ClassifierKind, standardizer: Standardizer, class_counts: [usize; N_CLASSES]) -> ClassifierModel {
    ClassifierModel {
        kind,
        weights: vec![0.0; N_CLASSES * standardizer.dim()],
        bias: [0.0; N_CLASSES],
        standardizer,
        class_counts,
        settings: TrainSettings { learning_rate: 0.0, epochs: 0, l2: 0.0, seed: 0 },
    }
}

pub fn cross_validate(
    dataset: &Dataset,
    kind: ClassifierKind,
    k: usize,
    seed: u64,
    configs: &ClassifierConfigs,
) -> Result<CvResult> {
    if dataset.is_empty() {
        return Err(Error::InvalidInput("cannot cross-validate an empty dataset".into()));
    }
    let labels = dataset.labels();
    let folds = stratified_folds(&labels, k, seed)?;

    let per_fold: Vec<(Vec<Prediction>, bool)> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<(Vec<Prediction>, bool)> {
            let train = folds.training(f);
            let rows: Vec<&[f64]> = train.iter().map(|&i| dataset.examples[i].features.as_slice()).collect();
            let y: Vec<SentimentLabel> = train.iter().map(|&i| labels[i]).collect();
            let mut cfg = *configs;
            cfg.svm.seed = cfg.svm.seed.wrapping_add(f as u64);
            let (model, single) = match train_classifier(kind, &rows, &y, &cfg) {
                Ok(t) => (t.model, false),
                Err(Error::SingleClass { .. }) => {
                    let mut counts = [0; N_CLASSES];
                    y.iter().for_each(|l| counts[l.index()] += 1);
                    (constant_model(kind, Standardizer::fit(&rows), counts), true)
                }
                Err(e) => return Err(e),
            };
            debug!("{kind} fold {f}: trained on {} examples", rows.len());
            let preds = folds.folds[f]
                .iter()
                .map(|&i| {
                    let e = &dataset.examples[i];
                    Ok(Prediction {
                        index: i,
                        post_id: e.post_id.clone(),
                        compound: e.compound,
                        actual: e.label,
                        predicted: model.predict(e.features.as_slice())?,
                        fold: f,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((preds, single))
        })
        .collect::<Result<_>>()?;

    let mut pooled = ConfusionMatrix::default();
    let mut fold_reports = Vec::with_capacity(k);
    let mut single_class_folds = Vec::new();
    let mut predictions = Vec::with_capacity(dataset.len());
    for (f, (preds, single)) in per_fold.into_iter().enumerate() {
        let cm = ConfusionMatrix::from_pairs(preds.iter().map(|p| (p.actual, p.predicted)));
        pooled += cm;
        fold_reports.push(macro_from_confusion(&cm));
        if single {
            warn!("{kind} fold {f}: training split has a single class");
            single_class_folds.push(f);
        }
        predictions.extend(preds);
    }
    predictions.sort_by_key(|p| p.index);
    Ok(CvResult {
        kind,
        report: macro_from_confusion(&pooled),
        fold_reports,
        predictions,
        sparse_classes: folds.sparse_classes,
        single_class_folds,
    })
}
