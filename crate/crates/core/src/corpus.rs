//! Corpus construction: dump ingestion, keyword selection, tokenization and
//! stopword removal.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../resources/stopwords.txt");
const DEFAULT_KEYWORDS: &str = include_str!("../resources/keywords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum University {
    Waterloo,
    #[serde(rename = "UBC")]
    Ubc,
    McGill,
    UofT,
}

impl University {
    pub const ALL: [University; 4] = [
        University::Waterloo,
        University::Ubc,
        University::McGill,
        University::UofT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            University::Waterloo => "Waterloo",
            University::Ubc => "UBC",
            University::McGill => "McGill",
            University::UofT => "UofT",
        }
    }

    /// The subreddit each university's posts are drawn from.
    pub fn subreddit(self) -> &'static str {
        match self {
            University::Waterloo => "uwaterloo",
            University::Ubc => "UBC",
            University::McGill => "mcgill",
            University::UofT => "UofT",
        }
    }
}

impl fmt::Display for University {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for University {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        University::ALL
            .into_iter()
            .find(|u| u.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown university {s:?}")))
    }
}

/// Case-insensitive subreddit name to university lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubredditMap(HashMap<String, University>);

impl SubredditMap {
    pub fn new() -> Self {
        SubredditMap(HashMap::new())
    }

    pub fn insert(&mut self, subreddit: &str, university: University) {
        self.0.insert(subreddit.to_lowercase(), university);
    }

    pub fn get(&self, subreddit: &str) -> Option<University> {
        self.0.get(&subreddit.to_lowercase()).copied()
    }
}

impl Default for SubredditMap {
    fn default() -> Self {
        let mut map = SubredditMap::new();
        for u in University::ALL {
            map.insert(u.subreddit(), u);
        }
        map
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub id: String,
    pub university: University,
    pub created_utc: i64,
    pub year: i32,
    pub title: String,
    pub body: String,
}

impl Post {
    pub fn new(
        id: impl Into<String>,
        university: University,
        created_utc: i64,
        title: impl Into<String>,
        body: impl Into<String>,
    ) -> Result<Self> {
        Ok(Post {
            id: id.into(),
            university,
            created_utc,
            year: utc_year(created_utc)?,
            title: title.into(),
            body: body.into(),
        })
    }

    /// Tokens of the title followed by the body.
    pub fn tokens(&self) -> Vec<String> {
        let mut tokens = tokenize(&self.title);
        tokens.extend(tokenize(&self.body));
        tokens
    }
}

/// A tokenized, stopword-free post. Never holds an empty token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanPost {
    pub post_id: String,
    pub university: University,
    pub year: i32,
    pub tokens: Vec<String>,
}

pub fn utc_year(epoch_seconds: i64) -> Result<i32> {
    time::OffsetDateTime::from_unix_timestamp(epoch_seconds)
        .map(|t| t.year())
        .map_err(|e| Error::InvalidInput(format!("timestamp {epoch_seconds}: {e}")))
}

/// Lowercase and split on every character that is not a letter, a digit, or an
/// apostrophe with a letter or digit on both sides.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = lowered.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.peek().is_some_and(|n| n.is_alphanumeric())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Counters for records that did not become posts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub records: usize,
    pub unmapped: usize,
    pub malformed: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub posts: Vec<Post>,
    pub stats: IngestStats,
}

#[derive(Deserialize)]
struct DumpRecord {
    id: String,
    subreddit: String,
    created_utc: i64,
    title: String,
    selftext: String,
}

/// Reads one JSON-lines dump. Malformed records and duplicate ids are skipped
/// with a warning; unmapped subreddits are skipped and counted.
pub fn ingest_dump(path: &Path, subreddits: &SubredditMap) -> Result<Ingested> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut out = Ingested::default();
    let mut seen = HashSet::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.stats.records += 1;
        let record: DumpRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                warn!("{origin}:{}: skipping malformed record: {e}", lineno + 1);
                out.stats.malformed += 1;
                continue;
            }
        };
        let Some(university) = subreddits.get(&record.subreddit) else {
            out.stats.unmapped += 1;
            continue;
        };
        if record.id.is_empty() {
            warn!("{origin}:{}: skipping record with empty id", lineno + 1);
            out.stats.malformed += 1;
            continue;
        }
        let post = match Post::new(
            record.id,
            university,
            record.created_utc,
            record.title,
            record.selftext,
        ) {
            Ok(p) => p,
            Err(e) => {
                warn!("{origin}:{}: skipping record: {e}", lineno + 1);
                out.stats.malformed += 1;
                continue;
            }
        };
        if !seen.insert(post.id.clone()) {
            warn!("{origin}:{}: skipping duplicate id {}", lineno + 1, post.id);
            out.stats.duplicates += 1;
            continue;
        }
        out.posts.push(post);
    }
    Ok(out)
}

/// Reads one-token-per-line list files, ignoring blanks and `#` comments.
fn list_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSet {
    pub single_tokens: BTreeSet<String>,
    pub phrases: BTreeSet<Vec<String>>,
}

impl KeywordSet {
    /// Builds a set from keyword strings; multi-token entries become phrases.
    pub fn from_keywords<'a>(keywords: impl IntoIterator<Item = &'a str>) -> Self {
        let mut set = KeywordSet {
            single_tokens: BTreeSet::new(),
            phrases: BTreeSet::new(),
        };
        for kw in keywords {
            let mut tokens = tokenize(kw);
            match tokens.len() {
                0 => {}
                1 => {
                    set.single_tokens.insert(tokens.remove(0));
                }
                _ => {
                    set.phrases.insert(tokens);
                }
            }
        }
        set
    }

    pub fn parse(text: &str) -> Self {
        KeywordSet::from_keywords(list_lines(text))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(KeywordSet::parse(&read_text(path)?))
    }

    /// Display labels, single tokens first, phrases space-joined.
    pub fn labels(&self) -> Vec<String> {
        self.single_tokens
            .iter()
            .cloned()
            .chain(self.phrases.iter().map(|p| p.join(" ")))
            .collect()
    }

    /// Labels of every keyword present in `tokens`.
    pub fn matched(&self, tokens: &[String]) -> BTreeSet<String> {
        let mut found: BTreeSet<String> = tokens
            .iter()
            .filter(|t| self.single_tokens.contains(*t))
            .cloned()
            .collect();
        for phrase in &self.phrases {
            if tokens.windows(phrase.len()).any(|w| w == phrase.as_slice()) {
                found.insert(phrase.join(" "));
            }
        }
        found
    }

    pub fn matches(&self, tokens: &[String]) -> bool {
        tokens.iter().any(|t| self.single_tokens.contains(t))
            || self
                .phrases
                .iter()
                .any(|p| tokens.windows(p.len()).any(|w| w == p.as_slice()))
    }
}

impl Default for KeywordSet {
    fn default() -> Self {
        KeywordSet::parse(DEFAULT_KEYWORDS)
    }
}

pub fn filter_by_keywords(posts: &[Post], keywords: &KeywordSet) -> Vec<Post> {
    posts
        .iter()
        .filter(|p| keywords.matches(&p.tokens()))
        .cloned()
        .collect()
}

/// Number of posts containing each keyword; every keyword has an entry.
pub fn keyword_histogram(posts: &[Post], keywords: &KeywordSet) -> BTreeMap<String, usize> {
    let mut hist: BTreeMap<String, usize> =
        keywords.labels().into_iter().map(|k| (k, 0)).collect();
    for post in posts {
        for kw in keywords.matched(&post.tokens()) {
            *hist.entry(kw).or_default() += 1;
        }
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn parse(text: &str) -> Self {
        Stopwords(list_lines(text).map(str::to_lowercase).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Stopwords::parse(&read_text(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::parse(DEFAULT_STOPWORDS)
    }
}

impl<'a> FromIterator<&'a str> for Stopwords {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(str::to_lowercase).collect())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Cleaned {
    pub posts: Vec<CleanPost>,
    /// Posts with nothing left after stopword removal.
    pub dropped: usize,
}

pub fn clean_post(post: &Post, stopwords: &Stopwords) -> CleanPost {
    CleanPost {
        post_id: post.id.clone(),
        university: post.university,
        year: post.year,
        tokens: post
            .tokens()
            .into_iter()
            .filter(|t| !stopwords.contains(t))
            .collect(),
    }
}

pub fn clean_corpus(posts: &[Post], stopwords: &Stopwords) -> Cleaned {
    let mut out = Cleaned::default();
    for post in posts {
        let clean = clean_post(post, stopwords);
        if clean.tokens.is_empty() {
            out.dropped += 1;
        } else {
            out.posts.push(clean);
        }
    }
    out
}

/// Writes cleaned posts as JSON lines.
pub fn write_corpus(path: &Path, posts: &[CleanPost]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for post in posts {
        let line = serde_json::to_string(post).expect("CleanPost serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Vec<CleanPost>> {
    let origin = path.display().to_string();
    let mut posts = Vec::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let post: CleanPost = serde_json::from_str(line)
            .map_err(|e| Error::format(&origin, i + 1, e.to_string()))?;
        if post.tokens.is_empty() {
            return Err(Error::format(&origin, i + 1, "post has no tokens"));
        }
        posts.push(post);
    }
    Ok(posts)
}
