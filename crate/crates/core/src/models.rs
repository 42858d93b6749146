//! Linear classifiers over standardized feature vectors.
//!
//! Both classifiers score the three classes as `W x + b` with class rows in
//! the fixed order (negative, neutral, positive) and predict the argmax.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::SentimentLabel;
use crate::Trained;

pub const N_CLASSES: usize = 3;
pub const FORMAT_VERSION: u32 = 1;

/// Allowed per-iteration loss increase before full-batch descent is judged unstable.
const LOSS_INCREASE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation, with zeros replaced by 1.
    pub stddev: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(*r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(*r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let stddev = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 { sd } else { 1.0 }
            })
            .collect();
        Standardizer { mean, stddev }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            x.iter()
                .zip(&self.mean)
                .zip(&self.stddev)
                .map(|((v, m), s)| (v - m) / s),
        );
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        self.apply_into(x, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logistic,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Logistic, ClassifierKind::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Svm => "svm",
        }
    }

    /// Human-readable name used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "Logistic Regression",
            ClassifierKind::Svm => "Support Vector Machine",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(ClassifierKind::Logistic),
            "svm" => Ok(ClassifierKind::Svm),
            other => Err(Error::InvalidInput(format!("unknown classifier kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            iterations: 500,
            l2: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    /// Initial step; epoch `e` (from 0) uses `learning_rate / (1 + e)`.
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            learning_rate: 0.05,
            epochs: 500,
            l2: 1e-3,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfigs {
    pub logistic: LogisticConfig,
    pub svm: SvmConfig,
}

pub fn train_classifier(
    kind: ClassifierKind,
    rows: &[&[f64]],
    labels: &[SentimentLabel],
    configs: &ClassifierConfigs,
) -> Result<Trained<ClassifierModel>> {
    match kind {
        ClassifierKind::Logistic => train_logistic(rows, labels, &configs.logistic),
        ClassifierKind::Svm => train_svm(rows, labels, &configs.svm),
    }
}

/// Hyperparameters recorded with a trained model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub kind: ClassifierKind,
    /// Row-major `N_CLASSES x n_features`.
    pub weights: Vec<f64>,
    pub bias: [f64; N_CLASSES],
    pub standardizer: Standardizer,
    /// Training-set class frequencies, used to break score ties.
    pub class_counts: [usize; N_CLASSES],
    pub settings: TrainSettings,
}

impl ClassifierModel {
    pub fn n_features(&self) -> usize {
        self.standardizer.dim()
    }

    /// Class scores for an already standardized vector.
    pub fn raw_scores(&self, z: &[f64]) -> [f64; N_CLASSES] {
        linear_scores(&self.weights, &self.bias, z)
    }

    pub fn scores(&self, x: &[f64]) -> Result<[f64; N_CLASSES]> {
        if x.len() != self.n_features() {
            return Err(Error::InvalidInput(format!(
                "feature vector has {} values, model expects {}",
                x.len(),
                self.n_features()
            )));
        }
        Ok(self.raw_scores(&self.standardizer.apply(x)))
    }

    pub fn predict(&self, x: &[f64]) -> Result<SentimentLabel> {
        Ok(self.pick(&self.scores(x)?))
    }

    /// Softmax of the class scores.
    pub fn probabilities(&self, x: &[f64]) -> Result<[f64; N_CLASSES]> {
        Ok(softmax(&self.scores(x)?))
    }

    /// Argmax; ties go to the more frequent training class, then the lower index.
    pub fn pick(&self, scores: &[f64; N_CLASSES]) -> SentimentLabel {
        let mut best = 0;
        for c in 1..N_CLASSES {
            let better = scores[c] > scores[best]
                || (scores[c] == scores[best] && self.class_counts[c] > self.class_counts[best]);
            if better {
                best = c;
            }
        }
        SentimentLabel::from_index(best).expect("class index in range")
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

fn linear_scores(weights: &[f64], bias: &[f64; N_CLASSES], z: &[f64]) -> [f64; N_CLASSES] {
    let d = z.len();
    let mut s = *bias;
    for (c, sc) in s.iter_mut().enumerate() {
        *sc += dot(&weights[c * d..(c + 1) * d], z);
    }
    s
}

/// Four-lane dot product; fixed summation order keeps results reproducible.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn softmax(scores: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p = scores.map(|s| (s - max).exp());
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// Standardized training matrix.
#[derive(Debug, Clone)]
pub struct Design {
    pub data: Vec<f64>,
    pub dim: usize,
    pub labels: Vec<usize>,
}

impl Design {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

fn prepare(rows: &[&[f64]], labels: &[SentimentLabel]) -> Result<(Standardizer, Design, [usize; N_CLASSES])> {
    if rows.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let d = rows.first().map_or(0, |r| r.len());
    if let Some(i) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::InvalidInput(format!("row {i} has {} features, expected {d}", rows[i].len())));
    }
    if let Some(i) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput(format!("row {i} has a non-finite feature")));
    }
    let mut counts = [0; N_CLASSES];
    for l in labels {
        counts[l.index()] += 1;
    }
    let distinct = counts.iter().filter(|&&c| c > 0).count();
    if distinct < 2 {
        return Err(Error::SingleClass { found: distinct });
    }
    let standardizer = Standardizer::fit(rows);
    let mut data = Vec::with_capacity(rows.len() * d);
    let mut buf = Vec::with_capacity(d);
    for r in rows {
        standardizer.apply_into(r, &mut buf);
        data.extend_from_slice(&buf);
    }
    let design = Design {
        data,
        dim: d,
        labels: labels.iter().map(|l| l.index()).collect(),
    };
    Ok((standardizer, design, counts))
}

/// Mean softmax cross-entropy plus `l2/2 * ||W||²` (bias unpenalized), with its gradient.
pub fn softmax_objective(
    weights: &[f64],
    bias: &[f64; N_CLASSES],
    design: &Design,
    l2: f64,
) -> (f64, Vec<f64>, [f64; N_CLASSES]) {
    let d = design.dim;
    let n = design.rows() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = [0.0; N_CLASSES];
    let mut loss = 0.0;
    for i in 0..design.rows() {
        let x = design.row(i);
        let y = design.labels[i];
        let s = linear_scores(weights, bias, x);
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += log_z - s[y];
        for c in 0..N_CLASSES {
            let residual = (s[c] - log_z).exp() - if c == y { 1.0 } else { 0.0 };
            gb[c] += residual;
            for (g, v) in gw[c * d..(c + 1) * d].iter_mut().zip(x) {
                *g += residual * v;
            }
        }
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    gb.iter_mut().for_each(|g| *g /= n);
    (loss / n + penalty, gw, gb)
}

/// Mean hinge loss of one binary problem plus `l2/2 * ||w||²`, with a subgradient.
/// `signs[i]` is +1 or -1.
pub fn hinge_objective(w: &[f64], b: f64, design: &Design, signs: &[f64], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = design.rows() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    let mut loss = 0.0;
    for (i, &y) in signs.iter().enumerate() {
        let x = design.row(i);
        let margin = y * (dot(w, x) + b);
        if margin < 1.0 {
            loss += 1.0 - margin;
            for (g, v) in gw.iter_mut().zip(x) {
                *g -= y * v;
            }
            gb -= y;
        }
    }
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    let penalty = w.iter().map(|v| v * v).sum::<f64>() * l2 / 2.0;
    (loss / n + penalty, gw, gb / n)
}

/// Full-batch gradient descent on the softmax objective from zero weights.
/// If the loss ever rises, training restarts once at half the learning rate.
pub fn train_logistic(
    rows: &[&[f64]],
    labels: &[SentimentLabel],
    cfg: &LogisticConfig,
) -> Result<Trained<ClassifierModel>> {
    let (standardizer, design, class_counts) = prepare(rows, labels)?;
    let d = design.dim;
    let safe = 1.0 / smoothness_bound(&design, cfg.l2);
    let mut lr = cfg.learning_rate;
    if lr > safe {
        debug!("logistic: capping learning rate {lr} at {safe:.6}");
        lr = safe;
    }
    for attempt in 0..2 {
        match descend(&design, d, lr, cfg) {
            Ok((weights, bias, history)) => {
                return Ok(Trained {
                    model: ClassifierModel {
                        kind: ClassifierKind::Logistic,
                        weights,
                        bias,
                        standardizer,
                        class_counts,
                        settings: TrainSettings {
                            learning_rate: lr,
                            epochs: cfg.iterations,
                            l2: cfg.l2,
                            seed: 0,
                        },
                    },
                    loss_history: history,
                })
            }
            Err(Error::LossIncreased { iteration, .. }) if attempt == 0 => {
                warn!("logistic loss rose at iteration {iteration}; retrying with learning rate {}", lr / 2.0);
                lr /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("second attempt either returns or errors")
}

/// Upper estimate of the Lipschitz constant of the softmax objective's
/// gradient: `0.5 * λmax([X 1]ᵀ[X 1] / n) + l2`, with λmax from power iteration
/// padded by 5%.
pub fn smoothness_bound(design: &Design, l2: f64) -> f64 {
    let d = design.dim;
    let n = design.rows() as f64;
    let mut v = vec![1.0 / ((d + 1) as f64).sqrt(); d + 1];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut next = vec![0.0; d + 1];
        for i in 0..design.rows() {
            let x = design.row(i);
            let proj = dot(x, &v[..d]) + v[d];
            for (o, xv) in next[..d].iter_mut().zip(x) {
                *o += proj * xv;
            }
            next[d] += proj;
        }
        next.iter_mut().for_each(|o| *o /= n);
        let norm = dot(&next, &next).sqrt();
        if norm == 0.0 {
            break;
        }
        let converged = (norm - lambda).abs() <= 1e-9 * norm;
        lambda = norm;
        next.iter_mut().for_each(|o| *o /= norm);
        v = next;
        if converged {
            break;
        }
    }
    0.5 * lambda * 1.05 + l2
}

fn descend(
    design: &Design,
    d: usize,
    lr: f64,
    cfg: &LogisticConfig,
) -> Result<(Vec<f64>, [f64; N_CLASSES], Vec<f64>)> {
    let mut weights = vec![0.0; N_CLASSES * d];
    let mut bias = [0.0; N_CLASSES];
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    for it in 0..=cfg.iterations {
        let (loss, gw, gb) = softmax_objective(&weights, &bias, design, cfg.l2);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                stage: "logistic regression",
                at: format!("iteration {it}"),
            });
        }
        if history.last().is_some_and(|&prev| loss > prev + LOSS_INCREASE_TOLERANCE) {
            return Err(Error::LossIncreased {
                stage: "logistic regression",
                iteration: it,
            });
        }
        history.push(loss);
        if it == cfg.iterations {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= lr * g;
        }
        for (b, g) in bias.iter_mut().zip(&gb) {
            *b -= lr * g;
        }
    }
    debug!("logistic: final loss {:.6} after {} iterations", history.last().unwrap(), cfg.iterations);
    Ok((weights, bias, history))
}

/// One-vs-rest linear SVM, each binary problem fit by per-example
/// subgradient steps over shuffled epochs.
pub fn train_svm(
    rows: &[&[f64]],
    labels: &[SentimentLabel],
    cfg: &SvmConfig,
) -> Result<Trained<ClassifierModel>> {
    let (standardizer, design, class_counts) = prepare(rows, labels)?;
    let d = design.dim;
    let n = design.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights: Vec<f64> = (0..N_CLASSES * d).map(|_| rng.gen_range(-0.01..0.01)).collect();
    let mut bias = [0.0; N_CLASSES];
    let mut history = vec![0.0; cfg.epochs];
    let mut order: Vec<usize> = (0..n).collect();

    // w_c is stored as scale[c] * weights_c so the L2 shrink is O(1) per step
    let mut scale = [1.0; N_CLASSES];
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let lr = cfg.learning_rate / (1.0 + epoch as f64);
        let shrink = 1.0 - lr * cfg.l2;
        let mut hinge = 0.0;
        for &i in &order {
            let x = design.row(i);
            for c in 0..N_CLASSES {
                let y = if design.labels[i] == c { 1.0 } else { -1.0 };
                let w = &mut weights[c * d..(c + 1) * d];
                let margin = y * (scale[c] * dot(w, x) + bias[c]);
                scale[c] *= shrink;
                if margin < 1.0 {
                    hinge += 1.0 - margin;
                    let step = lr * y / scale[c];
                    for (v, xi) in w.iter_mut().zip(x) {
                        *v += step * xi;
                    }
                    bias[c] += lr * y;
                }
                if scale[c] < 1e-6 {
                    w.iter_mut().for_each(|v| *v *= scale[c]);
                    scale[c] = 1.0;
                }
            }
        }
        for c in 0..N_CLASSES {
            weights[c * d..(c + 1) * d].iter_mut().for_each(|v| *v *= scale[c]);
            scale[c] = 1.0;
        }
        let penalty = weights.iter().map(|w| w * w).sum::<f64>() * cfg.l2 / 2.0;
        let objective = hinge / n as f64 + penalty;
        if !objective.is_finite() {
            return Err(Error::NonFiniteLoss {
                stage: "linear svm",
                at: format!("epoch {epoch}"),
            });
        }
        history[epoch] = objective;
    }

    Ok(Trained {
        model: ClassifierModel {
            kind: ClassifierKind::Svm,
            weights,
            bias,
            standardizer,
            class_counts,
            settings: TrainSettings {
                learning_rate: cfg.learning_rate,
                epochs: cfg.epochs,
                l2: cfg.l2,
                seed: cfg.seed,
            },
        },
        loss_history: history,
    })
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn model_to_text(model: &ClassifierModel) -> String {
    let d = model.n_features();
    let s = &model.settings;
    let mut out = format!(
        "CLF {} {N_CLASSES} {d} {FORMAT_VERSION}\nconfig learning_rate={} epochs={} l2={} seed={}\n",
        model.kind, s.learning_rate, s.epochs, s.l2, s.seed
    );
    let c = model.class_counts;
    out += &format!("class_counts {} {} {}\n", c[0], c[1], c[2]);
    out += &format!("mean {}\n", join(&model.standardizer.mean));
    out += &format!("stddev {}\n", join(&model.standardizer.stddev));
    for (i, label) in SentimentLabel::ALL.iter().enumerate() {
        out += &format!("weights {label} {}\n", join(&model.weights[i * d..(i + 1) * d]));
    }
    out += &format!("bias {}\n", join(&model.bias));
    out
}

pub fn save_classifier(model: &ClassifierModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load_classifier(path: &Path) -> Result<ClassifierModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_text(&text, &path.display().to_string())
}

pub fn model_from_text(text: &str, origin: &str) -> Result<ClassifierModel> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    let mut next = |tag: &str| -> Result<(usize, Vec<&str>)> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::format(origin, 0, format!("unexpected end of file, expected {tag}")))?;
        let mut parts: Vec<&str> = line.split(' ').collect();
        if parts.first() != Some(&tag) {
            return Err(Error::format(origin, i + 1, format!("expected {tag} line")));
        }
        parts.remove(0);
        Ok((i + 1, parts))
    };
    let floats = |line: usize, parts: &[&str], want: usize| -> Result<Vec<f64>> {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| Error::format(origin, line, format!("bad number {p:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != want {
            return Err(Error::format(origin, line, format!("expected {want} values, found {}", v.len())));
        }
        Ok(v)
    };

    let (l, h) = next("CLF")?;
    if h.len() != 4 {
        return Err(Error::format(origin, l, "CLF header needs 4 fields"));
    }
    let kind: ClassifierKind = h[0].parse()?;
    let bad_header = || Error::format(origin, l, "malformed CLF header");
    let classes: usize = h[1].parse().map_err(|_| bad_header())?;
    let d: usize = h[2].parse().map_err(|_| bad_header())?;
    let version: u32 = h[3].parse().map_err(|_| bad_header())?;
    if version != FORMAT_VERSION {
        return Err(Error::format(origin, l, format!("unsupported format version {version}")));
    }
    if classes != N_CLASSES {
        return Err(Error::format(origin, l, format!("expected {N_CLASSES} classes, found {classes}")));
    }

    let (l, cfg) = next("config")?;
    let mut settings = TrainSettings { learning_rate: 0.0, epochs: 0, l2: 0.0, seed: 0 };
    for kv in cfg {
        let bad = || Error::format(origin, l, format!("bad config entry {kv:?}"));
        let (k, v) = kv.split_once('=').ok_or_else(bad)?;
        match k {
            "learning_rate" => settings.learning_rate = v.parse().map_err(|_| bad())?,
            "epochs" => settings.epochs = v.parse().map_err(|_| bad())?,
            "l2" => settings.l2 = v.parse().map_err(|_| bad())?,
            "seed" => settings.seed = v.parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
    }
    let (l, counts) = next("class_counts")?;
    let counts: Vec<usize> = counts
        .iter()
        .map(|c| c.parse().map_err(|_| Error::format(origin, l, "bad class count")))
        .collect::<Result<_>>()?;
    let class_counts: [usize; N_CLASSES] = counts
        .try_into()
        .map_err(|_| Error::format(origin, l, "expected 3 class counts"))?;
    let (l, mean) = next("mean")?;
    let mean = floats(l, &mean, d)?;
    let (l, sd) = next("stddev")?;
    let stddev = floats(l, &sd, d)?;
    let mut weights = Vec::with_capacity(N_CLASSES * d);
    for label in SentimentLabel::ALL {
        let (l, row) = next("weights")?;
        if row.first() != Some(&label.as_str()) {
            return Err(Error::format(origin, l, format!("expected weights for {label}")));
        }
        weights.extend(floats(l, &row[1..], d)?);
    }
    let (l, b) = next("bias")?;
    let b = floats(l, &b, N_CLASSES)?;
    let model = ClassifierModel {
        kind,
        weights,
        bias: [b[0], b[1], b[2]],
        standardizer: Standardizer { mean, stddev },
        class_counts,
        settings,
    };
    if !model.is_finite() {
        return Err(Error::format(origin, 0, "non-finite parameters"));
    }
    Ok(model)
}
