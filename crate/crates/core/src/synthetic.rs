//! Synthetic Reddit dumps with planted sentiment.
//!
//! Every (year, university) cell gets the same number of keyword posts.
//! Positive posts carry several strong positive lexicon words, negative posts
//! several strong negative ones, neutral posts only filler and at most one
//! weak word. A few borderline posts carry two or three weak words of one
//! sign, so their label depends on the threshold. The first year gets a
//! smaller neutral share than the others.
//! A handful of noise records (unmapped subreddit, no keyword, malformed JSON,
//! duplicate id) are appended so ingestion has something to reject.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{tokenize, KeywordSet, Stopwords, University};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, SentimentLabel};

pub const YEARS: [i32; 4] = [2020, 2021, 2022, 2023];

const FILLER: &[&str] = &[
    "exam", "campus", "library", "course", "lecture", "midterm", "professor", "tuition", "semester", "coffee",
    "assignment", "dorm", "cafeteria", "textbook", "schedule", "residence", "lab", "seminar", "tutorial",
    "deadline", "notes", "quiz", "registrar", "bus",
];

/// Keywords with no lexicon entry, used by neutral posts.
const NEUTRAL_KEYWORDS: &[&str] = &["concern", "mental health"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    /// Keyword posts, split evenly over 4 years and 4 universities.
    pub posts: usize,
    pub seed: u64,
    pub first_year_neutral_share: f64,
    pub neutral_share: f64,
    /// Share of the non-neutral posts that are positive.
    pub positive_share: f64,
    /// Share of posts built only from weak same-sign words.
    pub borderline_share: f64,
    pub noise: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            posts: 2000,
            seed: 7,
            first_year_neutral_share: 0.06,
            neutral_share: 0.12,
            positive_share: 0.6,
            borderline_share: 0.03,
            noise: true,
        }
    }
}

struct Pools {
    strong_pos: Vec<String>,
    strong_neg: Vec<String>,
    mild_pos: Vec<String>,
    mild_neg: Vec<String>,
    weak: Vec<String>,
    weak_pos: Vec<String>,
    weak_neg: Vec<String>,
    sentiment_keywords: Vec<String>,
}

fn pools(lex: &Lexicon, stopwords: &Stopwords, keywords: &KeywordSet) -> Pools {
    let mut entries: Vec<(&str, f64)> = lex
        .entries()
        .filter(|(t, _)| {
            !stopwords.contains(t)
                && !lex.is_negator(t)
                && tokenize(t) == [t.to_string()]
                && !keywords.matches(&[t.to_string()])
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    let pick = |f: &dyn Fn(f64) -> bool| -> Vec<String> {
        entries.iter().filter(|(_, v)| f(*v)).map(|(t, _)| t.to_string()).collect()
    };
    let sentiment_keywords = keywords
        .labels()
        .into_iter()
        .filter(|k| !k.contains(' ') && lex.valence(k) < 0.0)
        .collect();
    Pools {
        strong_pos: pick(&|v| v >= 1.5),
        strong_neg: pick(&|v| v <= -1.5),
        mild_pos: pick(&|v| (0.5..1.5).contains(&v)),
        mild_neg: pick(&|v| v > -1.5 && v <= -0.5),
        weak: pick(&|v| v != 0.0 && v.abs() < 0.29),
        weak_pos: pick(&|v| v > 0.0 && v < 0.29),
        weak_neg: pick(&|v| v < 0.0 && v > -0.29),
        sentiment_keywords,
    }
}

fn year_start(year: i32) -> i64 {
    time::Date::from_calendar_date(year, time::Month::January, 1)
        .expect("valid year")
        .midnight()
        .assume_utc()
        .unix_timestamp()
}

fn choose<'a>(rng: &mut ChaCha8Rng, pool: &'a [String]) -> &'a str {
    pool.choose(rng).expect("non-empty pool")
}

#[derive(Clone, Copy)]
enum Planted {
    Label(SentimentLabel),
    Borderline,
}

fn post_tokens(class: Planted, p: &Pools, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    match class {
        Planted::Label(SentimentLabel::Positive) => {
            words.push(choose(rng, &p.sentiment_keywords).into());
            for _ in 0..rng.gen_range(3..=5) {
                words.push(choose(rng, &p.strong_pos).into());
            }
            if rng.gen_bool(0.5) {
                words.push(choose(rng, &p.mild_neg).into());
            }
        }
        Planted::Label(SentimentLabel::Negative) => {
            words.push(choose(rng, &p.sentiment_keywords).into());
            for _ in 0..rng.gen_range(2..=4) {
                words.push(choose(rng, &p.strong_neg).into());
            }
            if rng.gen_bool(0.5) {
                words.push(choose(rng, &p.mild_pos).into());
            }
        }
        Planted::Label(SentimentLabel::Neutral) => {
            words.push((*NEUTRAL_KEYWORDS.choose(rng).unwrap()).into());
            if rng.gen_bool(0.5) {
                words.push(choose(rng, &p.weak).into());
            }
        }
        Planted::Borderline => {
            words.push((*NEUTRAL_KEYWORDS.choose(rng).unwrap()).into());
            let pool = if rng.gen_bool(0.5) { &p.weak_pos } else { &p.weak_neg };
            for _ in 0..rng.gen_range(2..=3) {
                words.push(choose(rng, pool).into());
            }
        }
    }
    for _ in 0..rng.gen_range(4..=10) {
        words.push((*FILLER.choose(rng).unwrap()).into());
    }
    words.shuffle(rng);
    words
}

fn record(id: &str, subreddit: &str, created: i64, words: &[String]) -> String {
    let split = words.len().min(3);
    json!({
        "id": id,
        "subreddit": subreddit,
        "created_utc": created,
        "title": words[..split].join(" "),
        "selftext": words[split..].join(" "),
    })
    .to_string()
}

/// JSON lines for one dump per university, in [`University::ALL`] order.
pub fn generate(cfg: &SyntheticConfig) -> Result<Vec<(University, Vec<String>)>> {
    if !cfg.posts.is_multiple_of(16) || cfg.posts == 0 {
        return Err(Error::InvalidInput(format!(
            "synthetic post count {} must be a positive multiple of 16",
            cfg.posts
        )));
    }
    let lex = Lexicon::default();
    let stopwords = Stopwords::default();
    let keywords = KeywordSet::default();
    let p = pools(&lex, &stopwords, &keywords);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let per_cell = cfg.posts / 16;
    let mut out = Vec::new();
    for u in University::ALL {
        let mut lines = Vec::new();
        for (yi, &year) in YEARS.iter().enumerate() {
            let share = if yi == 0 { cfg.first_year_neutral_share } else { cfg.neutral_share };
            let n_neut = (per_cell as f64 * share).round() as usize;
            let n_border = (per_cell as f64 * cfg.borderline_share).round() as usize;
            let n_pos = ((per_cell - n_neut - n_border) as f64 * cfg.positive_share).round() as usize;
            for j in 0..per_cell {
                let class = if j < n_neut {
                    Planted::Label(SentimentLabel::Neutral)
                } else if j < n_neut + n_border {
                    Planted::Borderline
                } else if j < n_neut + n_border + n_pos {
                    Planted::Label(SentimentLabel::Positive)
                } else {
                    Planted::Label(SentimentLabel::Negative)
                };
                let words = post_tokens(class, &p, &mut rng);
                let created = year_start(year) + rng.gen_range(0..364 * 86_400);
                let id = format!("{}-{year}-{j:04}", u.name().to_lowercase());
                lines.push(record(&id, u.subreddit(), created, &words));
            }
        }
        lines.shuffle(&mut rng);
        if cfg.noise {
            let created = year_start(2021) + 1000;
            let filler: Vec<String> = FILLER[..6].iter().map(|s| s.to_string()).collect();
            let mut with_kw = filler.clone();
            with_kw.push("stress".into());
            let tag = u.name().to_lowercase();
            lines.push(record(&format!("{tag}-offtopic"), "AskReddit", created, &with_kw));
            lines.push(record(&format!("{tag}-nokeyword"), u.subreddit(), created, &filler));
            lines.push("{\"id\": \"broken\", \"subreddit\": ".to_string());
            lines.push(lines[0].clone());
        }
        out.push((u, lines));
    }
    Ok(out)
}

/// Writes `<university>.jsonl` files into `dir` and returns their paths.
pub fn write_dumps(dir: &Path, cfg: &SyntheticConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for (u, lines) in generate(cfg)? {
        let path = dir.join(format!("{}.jsonl", u.name().to_lowercase()));
        fs::write(&path, lines.join("\n") + "\n").map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}
