//! Valence-lexicon sentiment scoring.
//!
//! A token's valence `v` lies in `[-4, 4]`. Texts are scored by summing
//! valences, damping-and-flipping any valence that follows a negator within a
//! short window, and squashing the sum `s` into `(-1, 1)` with
//! `s / sqrt(s² + α)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../resources/lexicon.tsv");
const DEFAULT_NEGATORS: &str = include_str!("../resources/negators.txt");

pub const MAX_VALENCE: f64 = 4.0;
pub const DEFAULT_THRESHOLD: f64 = 0.075;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringParams {
    /// Normalization constant α.
    pub alpha: f64,
    /// Multiplier applied to a valence preceded by a negator.
    pub negation_factor: f64,
    /// How many preceding tokens are searched for a negator.
    pub negation_window: usize,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            alpha: 15.0,
            negation_factor: -0.74,
            negation_window: 3,
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !self.negation_factor.is_finite() {
            return Err(Error::Config("negation_factor must be finite".into()));
        }
        Ok(())
    }
}

/// Maps a raw valence sum into `[-1, 1]`.
pub fn normalize(sum: f64, alpha: f64) -> f64 {
    (sum / (sum * sum + alpha).sqrt()).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    /// Fixed class order used by every matrix and model: negative, neutral, positive.
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
        SentimentLabel::Positive,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        SentimentLabel::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            "positive" => Ok(SentimentLabel::Positive),
            other => Err(Error::InvalidInput(format!("unknown label {other:?}"))),
        }
    }
}

/// Half-width of the closed neutral band `[-t, t]`, with `0 < t < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(t: f64) -> Result<Self> {
        if t > 0.0 && t < 1.0 {
            Ok(Threshold(t))
        } else {
            Err(Error::InvalidInput(format!("threshold must lie in (0, 1), got {t}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold(DEFAULT_THRESHOLD)
    }
}

impl TryFrom<f64> for Threshold {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        Threshold::new(t)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn classify_score(score: f64, threshold: Threshold) -> SentimentLabel {
    let t = threshold.value();
    if score > t {
        SentimentLabel::Positive
    } else if score < -t {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
    negators: HashSet<String>,
    params: ScoringParams,
}

/// A parsed lexicon plus how many lines were overridden or unparseable.
#[derive(Debug, Clone)]
pub struct LexiconLoad {
    pub lexicon: Lexicon,
    pub duplicates: usize,
    pub skipped: usize,
}

impl Lexicon {
    pub fn new(
        valences: impl IntoIterator<Item = (String, f64)>,
        negators: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let mut map = HashMap::new();
        for (token, v) in valences {
            check_valence(v).map_err(|m| Error::InvalidInput(format!("{token}: {m}")))?;
            map.insert(token.to_lowercase(), v);
        }
        Ok(Lexicon {
            valences: map,
            negators: negators.into_iter().map(|n| n.to_lowercase()).collect(),
            params: ScoringParams::default(),
        })
    }

    /// Parses the `token<TAB>valence` format. Extra columns are ignored,
    /// duplicates resolve last-wins, and out-of-range valences are fatal.
    pub fn parse_tsv(text: &str, origin: &str) -> Result<LexiconLoad> {
        let mut valences = HashMap::new();
        let mut duplicates = 0;
        let mut skipped = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or("").trim().to_lowercase();
            let value = cols.next().map(str::trim).and_then(|v| v.parse::<f64>().ok());
            let (false, Some(v)) = (token.is_empty(), value) else {
                warn!("{origin}:{}: skipping unparseable lexicon line", i + 1);
                skipped += 1;
                continue;
            };
            check_valence(v).map_err(|m| Error::format(origin, i + 1, m))?;
            if valences.insert(token.clone(), v).is_some() {
                warn!("{origin}:{}: duplicate entry for {token:?}, last one wins", i + 1);
                duplicates += 1;
            }
        }
        Ok(LexiconLoad {
            lexicon: Lexicon {
                valences,
                negators: HashSet::new(),
                params: ScoringParams::default(),
            },
            duplicates,
            skipped,
        })
    }

    pub fn load(path: &Path) -> Result<LexiconLoad> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::parse_tsv(&text, &path.display().to_string())
    }

    pub fn parse_negators(text: &str) -> HashSet<String> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect()
    }

    pub fn load_negators(path: &Path) -> Result<HashSet<String>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Lexicon::parse_negators(&text))
    }

    pub fn negators(&self) -> &HashSet<String> {
        &self.negators
    }

    pub fn with_negators(mut self, negators: HashSet<String>) -> Self {
        self.negators = negators;
        self
    }

    pub fn with_params(mut self, params: ScoringParams) -> Self {
        self.params = params;
        self
    }

    pub fn params(&self) -> ScoringParams {
        self.params
    }

    pub fn valence(&self, token: &str) -> f64 {
        self.valences.get(token).copied().unwrap_or(0.0)
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.valences.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Compound score of a single token, ignoring context.
    pub fn token_compound(&self, token: &str) -> f64 {
        normalize(self.valence(token), self.params.alpha)
    }

    /// Compound score of a token sequence.
    pub fn text_compound<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        normalize(self.raw_sum(tokens), self.params.alpha)
    }

    /// Sum of valences after negation, before normalization.
    pub fn raw_sum<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let window = self.params.negation_window;
        let mut sum = 0.0;
        for (i, token) in tokens.iter().enumerate() {
            let v = self.valence(token.as_ref());
            if v == 0.0 {
                continue;
            }
            let negated = tokens[i.saturating_sub(window)..i]
                .iter()
                .any(|t| self.is_negator(t.as_ref()));
            sum += if negated { v * self.params.negation_factor } else { v };
        }
        sum
    }

    /// Stable content digest covering valences, negators and scoring parameters.
    pub fn content_hash(&self) -> String {
        let sorted: BTreeMap<&str, f64> = self.entries().collect();
        let mut negators: Vec<&str> = self.negators.iter().map(String::as_str).collect();
        negators.sort_unstable();
        let mut buf = String::new();
        for (k, v) in sorted {
            buf.push_str(&format!("{k}\t{v}\n"));
        }
        buf.push_str("--\n");
        for n in negators {
            buf.push_str(n);
            buf.push('\n');
        }
        let p = self.params;
        buf.push_str(&format!("{} {} {}\n", p.alpha, p.negation_factor, p.negation_window));
        crate::sha256_hex(buf.as_bytes())
    }
}

impl Default for Lexicon {
    /// The shipped lexicon and negator list.
    fn default() -> Self {
        let load = Lexicon::parse_tsv(DEFAULT_LEXICON, "lexicon.tsv").expect("shipped lexicon is valid");
        load.lexicon
            .with_negators(Lexicon::parse_negators(DEFAULT_NEGATORS))
    }
}

fn check_valence(v: f64) -> std::result::Result<(), String> {
    if v.is_finite() && (-MAX_VALENCE..=MAX_VALENCE).contains(&v) {
        Ok(())
    } else {
        Err(format!("valence {v} outside [-{MAX_VALENCE}, {MAX_VALENCE}]"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex() -> Lexicon {
        Lexicon::new(
            [("good".to_string(), 1.9), ("bad".to_string(), -2.5)],
            ["not".to_string()],
        )
        .unwrap()
    }

    #[test]
    fn load_examples() {
        let l = Lexicon::parse_tsv("# c\ngood\t1.9\n", "t").unwrap();
        assert_eq!(l.lexicon.valence("good"), 1.9);
        assert_eq!(l.duplicates, 0);

        let l = Lexicon::parse_tsv("bad\t-2.5\nbad\t-1.0\n", "t").unwrap();
        assert_eq!(l.lexicon.valence("bad"), -1.0);
        assert_eq!(l.duplicates, 1);

        let err = Lexicon::parse_tsv("ok\t1\nterrible\t-9.0\n", "lex.tsv").unwrap_err();
        match err {
            Error::Format { origin, line, .. } => {
                assert_eq!(origin, "lex.tsv");
                assert_eq!(line, 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn load_tolerates_extra_columns_and_junk() {
        let l = Lexicon::parse_tsv("Happy\t2.7\t0.6\t[3, 2]\nnovalue\n\tx\n", "t").unwrap();
        assert_eq!(l.lexicon.valence("happy"), 2.7);
        assert_eq!(l.skipped, 2);
        assert_eq!(l.lexicon.len(), 1);
    }

    #[test]
    fn shipped_lexicon_has_reference_values() {
        let l = Lexicon::default();
        assert_eq!(l.valence("good"), 1.9);
        assert_eq!(l.valence("bad"), -2.5);
        assert_eq!(l.valence("mental"), 0.0);
        assert!(l.is_negator("not"));
        assert!(l.entries().all(|(k, v)| k == k.to_lowercase() && v.abs() <= 4.0));
    }

    #[test]
    fn token_compound_values() {
        let l = lex();
        assert_eq!(l.token_compound("exam"), 0.0);
        assert!((l.token_compound("good") - 0.4404336).abs() < 5e-6);
        assert!((l.token_compound("bad") + 0.5423261).abs() < 5e-6);
    }

    #[test]
    fn text_compound_values() {
        let l = lex();
        assert_eq!(l.text_compound::<&str>(&[]), 0.0);
        assert!((l.text_compound(&["good"]) - 0.4404336).abs() < 5e-6);
        assert!((l.raw_sum(&["not", "good"]) + 1.406).abs() < 1e-12);
        assert!((l.text_compound(&["not", "good"]) + 0.3412377).abs() < 5e-6);
    }

    #[test]
    fn negation_window_is_three_tokens() {
        let l = lex();
        assert!(l.raw_sum(&["not", "x", "y", "good"]) < 0.0);
        assert_eq!(l.raw_sum(&["not", "x", "y", "z", "good"]), 1.9);
        // a negator does not affect itself or earlier tokens
        assert_eq!(l.raw_sum(&["good", "not"]), 1.9);
    }

    #[test]
    fn classify_examples() {
        let t = Threshold::new(0.075).unwrap();
        assert_eq!(classify_score(0.5, t), SentimentLabel::Positive);
        assert_eq!(classify_score(-0.075, t), SentimentLabel::Neutral);
        assert_eq!(classify_score(0.075, t), SentimentLabel::Neutral);
        assert_eq!(classify_score(-0.076, t), SentimentLabel::Negative);
    }

    #[test]
    fn threshold_bounds() {
        assert!(Threshold::new(0.0).is_err());
        assert!(Threshold::new(1.0).is_err());
        assert!(Threshold::new(f64::NAN).is_err());
        assert_eq!(Threshold::default().value(), 0.075);
    }

    #[test]
    fn content_hash_is_order_independent() {
        let a = Lexicon::parse_tsv("a\t1\nb\t2\n", "t").unwrap().lexicon;
        let b = Lexicon::parse_tsv("b\t2\na\t1\n", "t").unwrap().lexicon;
        assert_eq!(a.content_hash(), b.content_hash());
        let c = Lexicon::parse_tsv("b\t2\na\t1.5\n", "t").unwrap().lexicon;
        assert_ne!(a.content_hash(), c.content_hash());
    }

    proptest! {
        #[test]
        fn normalization_is_monotone_and_odd(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if lo < hi && hi - lo > 1e-9 {
                prop_assert!(normalize(lo, 15.0) < normalize(hi, 15.0));
            }
            prop_assert!((normalize(-a, 15.0) + normalize(a, 15.0)).abs() <= 1e-12);
            prop_assert!(normalize(a, 15.0).abs() <= 1.0);
        }

        #[test]
        fn single_token_text_matches_token_score(v in -4.0f64..4.0) {
            let l = Lexicon::new([("w".to_string(), v)], []).unwrap();
            prop_assert_eq!(l.text_compound(&["w"]), l.token_compound("w"));
        }

        #[test]
        fn neutral_count_grows_with_threshold(
            scores in proptest::collection::vec(-1.0f64..1.0, 0..50),
            t1 in 0.001f64..0.999,
            t2 in 0.001f64..0.999,
        ) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let count = |t: f64| scores
                .iter()
                .filter(|&&s| classify_score(s, Threshold::new(t).unwrap()) == SentimentLabel::Neutral)
                .count();
            prop_assert!(count(lo) <= count(hi));
        }
    }

    #[test]
    fn normalization_zero() {
        assert_eq!(normalize(0.0, 15.0), 0.0);
        assert_eq!(normalize(-0.0, 15.0), 0.0);
    }
}
