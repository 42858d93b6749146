use std::ops::AddAssign;

use crate::lexicon::SentimentLabel;

/// Classes with fewer actual examples than this are reported as unreliable.
pub const MIN_RELIABLE_SUPPORT: usize = 39;

/// Rows are actual classes, columns predicted, both in [`SentimentLabel::index`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn new(counts: [[usize; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (SentimentLabel, SentimentLabel)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (actual, predicted) in pairs {
            cm.record(actual, predicted);
        }
        cm
    }

    pub fn record(&mut self, actual: SentimentLabel, predicted: SentimentLabel) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Actual examples of class `c`.
    pub fn support(&self, c: usize) -> usize {
        self.counts[c].iter().sum()
    }

    pub fn predicted(&self, c: usize) -> usize {
        self.counts.iter().map(|row| row[c]).sum()
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.counts.iter_mut().flatten().zip(rhs.counts.iter().flatten()) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Some metric for this class was 0/0 and reported as 0.
    pub undefined: bool,
    /// Support below [`MIN_RELIABLE_SUPPORT`] or an undefined metric.
    pub unreliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub per_class: [ClassMetrics; 3],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl MetricsReport {
    pub fn class(&self, label: SentimentLabel) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    pub fn unreliable_classes(&self) -> Vec<SentimentLabel> {
        SentimentLabel::ALL
            .into_iter()
            .filter(|l| self.class(*l).unreliable)
            .collect()
    }

    /// Reports are starred when the Neutral class is unreliable.
    pub fn starred(&self) -> bool {
        self.class(SentimentLabel::Neutral).unreliable
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn macro_from_confusion(cm: &ConfusionMatrix) -> MetricsReport {
    let mut per_class = [ClassMetrics::default(); 3];
    for (c, m) in per_class.iter_mut().enumerate() {
        let tp = cm.counts[c][c];
        let (precision, p_undef) = ratio(tp, cm.predicted(c));
        let (recall, r_undef) = ratio(tp, cm.support(c));
        let (f1, f_undef) = if precision + recall > 0.0 {
            (2.0 * precision * recall / (precision + recall), false)
        } else {
            (0.0, true)
        };
        let support = cm.support(c);
        let undefined = p_undef || r_undef || f_undef;
        *m = ClassMetrics {
            precision,
            recall,
            f1,
            support,
            undefined,
            unreliable: undefined || support < MIN_RELIABLE_SUPPORT,
        };
    }
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / 3.0;
    MetricsReport {
        confusion: *cm,
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SentimentLabel::*;

    #[test]
    fn perfect_diagonal() {
        let r = macro_from_confusion(&ConfusionMatrix::new([[40, 0, 0], [0, 40, 0], [0, 0, 40]]));
        assert_eq!((r.macro_precision, r.macro_recall, r.macro_f1), (1.0, 1.0, 1.0));
        assert!(!r.starred());
    }

    #[test]
    fn worked_example() {
        let r = macro_from_confusion(&ConfusionMatrix::new([[5, 0, 0], [0, 0, 2], [1, 0, 4]]));
        assert_eq!(format!("{:.4}", r.macro_precision), "0.5000");
        assert_eq!(format!("{:.4}", r.macro_recall), "0.6000");
        assert!(r.class(Neutral).undefined);
        assert!(!r.class(Negative).undefined);
        assert_eq!(r.class(Positive).precision, 4.0 / 6.0);
    }

    #[test]
    fn empty_matrix() {
        let r = macro_from_confusion(&ConfusionMatrix::default());
        assert_eq!((r.macro_precision, r.macro_recall, r.macro_f1), (0.0, 0.0, 0.0));
        assert!(r.per_class.iter().all(|m| m.undefined && m.unreliable));
    }

    fn label() -> impl Strategy<Value = SentimentLabel> {
        (0usize..3).prop_map(|i| SentimentLabel::from_index(i).unwrap())
    }

    proptest! {
        #[test]
        fn class_permutation_keeps_macro(pairs in proptest::collection::vec((label(), label()), 0..60), rot in 1usize..3) {
            let perm = |l: SentimentLabel| SentimentLabel::from_index((l.index() + rot) % 3).unwrap();
            let a = macro_from_confusion(&ConfusionMatrix::from_pairs(pairs.iter().copied()));
            let b = macro_from_confusion(&ConfusionMatrix::from_pairs(pairs.iter().map(|&(x, y)| (perm(x), perm(y)))));
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
            prop_assert!((a.macro_precision - b.macro_precision).abs() < 1e-12);
        }

        #[test]
        fn total_matches_pairs(pairs in proptest::collection::vec((label(), label()), 0..60)) {
            prop_assert_eq!(ConfusionMatrix::from_pairs(pairs.iter().copied()).total(), pairs.len());
        }
    }
}
