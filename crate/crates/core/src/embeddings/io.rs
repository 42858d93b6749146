//! Text model format.
//!
//! ```text
//! # config dim=100 window=5 min_count=1 negative_samples=5 epochs=5 initial_lr=0.025 min_lr=0.0001 seed=1
//! W2V <vocab_size> <dim> <format_version>
//! <token> <v1> ... <v_dim>          input vectors, one line per token
//! OUT <vocab_size> <dim>
//! <token> <v1> ... <v_dim>          output vectors, same order
//! COUNTS <vocab_size>
//! <token> <count>
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{EmbeddingConfig, EmbeddingModel, Matrix, Vocab};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub(super) fn to_text(model: &EmbeddingModel) -> Result<String> {
    let c = &model.config;
    let (n, dim) = (model.vocab.len(), model.dim());
    let mut s = String::new();
    writeln!(s, "# longsent CBOW embeddings").unwrap();
    writeln!(
        s,
        "# config dim={} window={} min_count={} negative_samples={} epochs={} initial_lr={} min_lr={} seed={}",
        c.dim, c.window, c.min_count, c.negative_samples, c.epochs, c.initial_lr, c.min_lr, c.seed
    )
    .unwrap();
    writeln!(s, "W2V {n} {dim} {FORMAT_VERSION}").unwrap();
    for token in model.vocab.tokens() {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidInput(format!(
                "vocabulary token {token:?} cannot be serialized"
            )));
        }
    }
    let write_rows = |s: &mut String, m: &Matrix| {
        for (i, token) in model.vocab.tokens().iter().enumerate() {
            s.push_str(token);
            for v in m.row(i) {
                write!(s, " {v}").unwrap();
            }
            s.push('\n');
        }
    };
    write_rows(&mut s, &model.input_vectors);
    writeln!(s, "OUT {n} {dim}").unwrap();
    write_rows(&mut s, &model.output_vectors);
    writeln!(s, "COUNTS {n}").unwrap();
    for (t, c) in model.vocab.tokens().iter().zip(model.vocab.counts()) {
        writeln!(s, "{t} {c}").unwrap();
    }
    Ok(s)
}

pub fn save_model(model: &EmbeddingModel, path: &Path) -> Result<()> {
    fs::write(path, to_text(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text, &path.display().to_string())
}

struct Lines<'a> {
    origin: &'a str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    offset: usize,
    line: usize,
    last_len: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl std::fmt::Display) -> Error {
        Error::format(self.origin, self.line, format!("{message} (byte offset {})", self.offset))
    }

    fn next(&mut self, expecting: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                if i > 0 {
                    self.offset += self.last_len + 1;
                }
                self.line = i + 1;
                self.last_len = l.len();
                Ok(l)
            }
            None => {
                self.offset += self.last_len + 1;
                self.line += 1;
                Err(self.err(format!("unexpected end of file, expected {expecting}")))
            }
        }
    }
}

fn parse_config(line: &str, cfg: &mut EmbeddingConfig) -> std::result::Result<(), String> {
    for kv in line.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad config entry {kv:?}"))?;
        let bad = || format!("bad value for {k}: {v:?}");
        match k {
            "dim" => cfg.dim = v.parse().map_err(|_| bad())?,
            "window" => cfg.window = v.parse().map_err(|_| bad())?,
            "min_count" => cfg.min_count = v.parse().map_err(|_| bad())?,
            "negative_samples" => cfg.negative_samples = v.parse().map_err(|_| bad())?,
            "epochs" => cfg.epochs = v.parse().map_err(|_| bad())?,
            "initial_lr" => cfg.initial_lr = v.parse().map_err(|_| bad())?,
            "min_lr" => cfg.min_lr = v.parse().map_err(|_| bad())?,
            "seed" => cfg.seed = v.parse().map_err(|_| bad())?,
            _ => return Err(format!("unknown config key {k:?}")),
        }
    }
    Ok(())
}

fn parse_header<'a>(lines: &Lines<'a>, line: &'a str, tag: &str, fields: usize) -> Result<Vec<usize>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(tag) {
        return Err(lines.err(format!("expected {tag} header")));
    }
    let values: Vec<usize> = parts
        .map(|p| p.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| lines.err(format!("malformed {tag} header")))?;
    if values.len() != fields {
        return Err(lines.err(format!("{tag} header needs {fields} fields")));
    }
    Ok(values)
}

fn read_rows<'a>(
    lines: &mut Lines<'a>,
    n: usize,
    dim: usize,
    section: &str,
) -> Result<(Vec<&'a str>, Matrix)> {
    let mut tokens = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for row in 0..n {
        let line = lines.next(&format!("{section} row {row}"))?;
        let mut parts = line.split(' ');
        let token = parts.next().filter(|t| !t.is_empty()).ok_or_else(|| lines.err("empty row"))?;
        let start = data.len();
        for p in parts {
            let v: f64 = p
                .parse()
                .map_err(|_| lines.err(format!("{section} row {row} ({token}): bad number {p:?}")))?;
            if !v.is_finite() {
                return Err(lines.err(format!("{section} row {row} ({token}): non-finite value")));
            }
            data.push(v);
        }
        let got = data.len() - start;
        if got != dim {
            return Err(lines.err(format!(
                "{section} row {row} ({token}) has {got} values but the header declares dim {dim}"
            )));
        }
        tokens.push(token);
    }
    Ok((tokens, Matrix::from_vec(n, dim, data)?))
}

fn from_text(text: &str, origin: &str) -> Result<EmbeddingModel> {
    let mut lines = Lines {
        origin,
        inner: text.lines().enumerate(),
        offset: 0,
        line: 0,
        last_len: 0,
    };
    let mut config = EmbeddingConfig::default();
    let mut saw_config = false;
    let header = loop {
        let line = lines.next("W2V header")?;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(cfg) = comment.trim().strip_prefix("config ") {
                parse_config(cfg, &mut config).map_err(|m| lines.err(m))?;
                saw_config = true;
            }
            continue;
        }
        break line;
    };
    let h = parse_header(&lines, header, "W2V", 3)?;
    let (n, dim, version) = (h[0], h[1], h[2]);
    if version as u32 != FORMAT_VERSION {
        return Err(lines.err(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    if !saw_config {
        config.dim = dim;
    } else if config.dim != dim {
        return Err(lines.err(format!("config dim {} disagrees with header dim {dim}", config.dim)));
    }
    let (tokens, input) = read_rows(&mut lines, n, dim, "input")?;

    let out_header = lines.next("OUT header")?;
    if parse_header(&lines, out_header, "OUT", 2)? != [n, dim] {
        return Err(lines.err("OUT header disagrees with W2V header"));
    }
    let (out_tokens, output) = read_rows(&mut lines, n, dim, "output")?;
    if out_tokens != tokens {
        return Err(lines.err("output rows are not in vocabulary order"));
    }

    let count_header = lines.next("COUNTS header")?;
    if parse_header(&lines, count_header, "COUNTS", 1)? != [n] {
        return Err(lines.err("COUNTS header disagrees with W2V header"));
    }
    let mut entries = Vec::with_capacity(n);
    for (row, token) in tokens.iter().enumerate() {
        let line = lines.next(&format!("count row {row}"))?;
        let (t, c) = line.split_once(' ').ok_or_else(|| lines.err("malformed count row"))?;
        if t != *token {
            return Err(lines.err(format!("count row {row} is for {t:?}, expected {token:?}")));
        }
        let c: u64 = c.parse().map_err(|_| lines.err(format!("bad count {c:?}")))?;
        entries.push((t.to_string(), c));
    }
    let vocab = Vocab::from_entries(entries).map_err(|e| lines.err(e))?;
    Ok(EmbeddingModel {
        config,
        vocab,
        input_vectors: input,
        output_vectors: output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CleanPost, University};
    use crate::embeddings::train_cbow;

    fn model() -> EmbeddingModel {
        let corpus: Vec<CleanPost> = ["exam stress library", "coffee exam", "stress coffee midterm exam"]
            .iter()
            .map(|t| CleanPost {
                post_id: t.to_string(),
                university: University::Ubc,
                year: 2020,
                tokens: t.split(' ').map(String::from).collect(),
            })
            .collect();
        let cfg = EmbeddingConfig { dim: 7, epochs: 2, seed: 4, initial_lr: 0.1, ..Default::default() };
        train_cbow(&corpus, &cfg).unwrap().model
    }

    #[test]
    fn roundtrip_is_exact() {
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.w2v");
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().any(|l| l == "W2V 5 7 1"));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let text = to_text(&model()).unwrap();
        let cut = &text[..text.len() / 2];
        let cut = &cut[..cut.rfind('\n').unwrap() + 1];
        let err = from_text(cut, "m.w2v").unwrap_err().to_string();
        assert!(err.contains("unexpected end of file"), "{err}");
        assert!(err.contains("byte offset"), "{err}");
    }

    #[test]
    fn dim_mismatch_names_the_row() {
        let text = to_text(&model()).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let idx = lines.iter().position(|l| l.starts_with("W2V")).unwrap() + 2;
        lines[idx].push_str(" 0.5");
        let err = from_text(&lines.join("\n"), "m.w2v").unwrap_err();
        match err {
            Error::Format { line, message, .. } => {
                assert_eq!(line, idx + 1);
                assert!(message.contains("input row 1"), "{message}");
                assert!(message.contains("dim 7"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = to_text(&model()).unwrap().replace("W2V 5 7 1", "W2V 5 7 9");
        let err = from_text(&text, "m").unwrap_err().to_string();
        assert!(err.contains("format version 9"), "{err}");
    }
}
