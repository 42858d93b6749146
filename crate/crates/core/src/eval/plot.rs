//! Classifier error scatter plots.
//!
//! x is the example index, y the compound score. Marker colour follows the
//! predicted class (negative red, neutral yellow, positive blue); correct
//! predictions are drawn as an X, wrong ones as a square.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::cv::Prediction;
use crate::error::{Error, Result};
use crate::lexicon::SentimentLabel;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const GLYPH: f64 = 4.0;

pub fn color(label: SentimentLabel) -> &'static str {
    match label {
        SentimentLabel::Negative => "#d62728",
        SentimentLabel::Neutral => "#e6b800",
        SentimentLabel::Positive => "#1f77b4",
    }
}

pub fn render_svg(predictions: &[Prediction], title: &str) -> String {
    let max_index = predictions.iter().map(|p| p.index).max().unwrap_or(0).max(1) as f64;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x_of = |i: usize| MARGIN + plot_w * i as f64 / max_index;
    let y_of = |c: f64| MARGIN + plot_h * (1.0 - c.clamp(-1.0, 1.0)) / 2.0;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<title>{}</title>"#, escape(title)).unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    // axes and zero line
    let (x0, x1, y_top, y_bot) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, r##"<g stroke="#444" stroke-width="1">"##).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y_bot}" x2="{x1}" y2="{y_bot}"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y_top}" x2="{x0}" y2="{y_bot}"/>"#).unwrap();
    writeln!(s, r##"<line x1="{x0}" y1="{0:.2}" x2="{x1}" y2="{0:.2}" stroke-dasharray="4 4" stroke="#bbb"/>"##, y_of(0.0)).unwrap();
    writeln!(s, "</g>").unwrap();
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick}</text>"#,
            x0 - 6.0,
            y_of(tick) + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">example index (0..{})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        max_index
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">compound score</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();

    writeln!(s, r#"<g id="points">"#).unwrap();
    for p in predictions {
        let (x, y) = (x_of(p.index), y_of(p.compound));
        let c = color(p.predicted);
        if p.correct() {
            writeln!(
                s,
                r#"<path class="correct pred-{}" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{c}" stroke-width="1.5" fill="none"/>"#,
                p.predicted,
                x - GLYPH,
                y - GLYPH,
                x + GLYPH,
                y + GLYPH,
                x - GLYPH,
                y + GLYPH,
                x + GLYPH,
                y - GLYPH
            )
            .unwrap();
        } else {
            writeln!(
                s,
                r#"<rect class="wrong pred-{}" x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{c}"/>"#,
                p.predicted,
                x - GLYPH,
                y - GLYPH,
                2.0 * GLYPH,
                2.0 * GLYPH
            )
            .unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();

    writeln!(s, r#"<g id="legend">"#).unwrap();
    for (i, label) in SentimentLabel::ALL.iter().enumerate() {
        let y = 35.0 + 14.0 * i as f64;
        writeln!(
            s,
            r#"<rect x="{}" y="{y}" width="8" height="8" fill="{}"/><text x="{}" y="{}">{label}</text>"#,
            WIDTH - 120.0,
            color(*label),
            WIDTH - 108.0,
            y + 8.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}">X correct, square wrong</text>"#,
        WIDTH - 120.0,
        35.0 + 14.0 * 3.0 + 8.0
    )
    .unwrap();
    writeln!(s, "</g>\n</svg>").unwrap();
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_plot_csv(predictions: &[Prediction]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "compound", "actual", "predicted", "correct"])
        .expect("writing to memory");
    for p in predictions {
        w.write_record([
            p.index.to_string(),
            p.compound.to_string(),
            p.actual.to_string(),
            p.predicted.to_string(),
            p.correct().to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

/// Writes the SVG at `path` and its CSV twin next to it; returns the CSV path.
pub fn export_error_plot(predictions: &[Prediction], path: &Path, title: &str) -> Result<PathBuf> {
    fs::write(path, render_svg(predictions, title)).map_err(|e| Error::io(path, e))?;
    let csv_path = path.with_extension("csv");
    fs::write(&csv_path, render_plot_csv(predictions)).map_err(|e| Error::io(&csv_path, e))?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    fn pred(index: usize, actual: SentimentLabel, predicted: SentimentLabel) -> Prediction {
        Prediction {
            index,
            post_id: index.to_string(),
            compound: 0.3,
            actual,
            predicted,
            fold: 0,
        }
    }

    #[test]
    fn all_correct_has_no_squares() {
        let ps: Vec<_> = (0..5).map(|i| pred(i, Positive, Positive)).collect();
        let svg = render_svg(&ps, "t");
        assert_eq!(svg.matches("class=\"wrong").count(), 0);
        assert_eq!(svg.matches("class=\"correct pred-positive\"").count(), 5);
    }

    #[test]
    fn one_neutral_miscast_as_positive_is_one_blue_square() {
        let ps = vec![pred(0, Negative, Negative), pred(1, Neutral, Positive)];
        let svg = render_svg(&ps, "t");
        let squares: Vec<&str> = svg.lines().filter(|l| l.contains("class=\"wrong")).collect();
        assert_eq!(squares.len(), 1);
        assert!(squares[0].contains("pred-positive") && squares[0].contains(color(Positive)));
    }

    #[test]
    fn csv_twin_has_a_row_per_prediction() {
        let dir = tempfile::tempdir().unwrap();
        let ps: Vec<_> = (0..7).map(|i| pred(i, Negative, Neutral)).collect();
        let csv = export_error_plot(&ps, &dir.path().join("p.svg"), "x").unwrap();
        let text = fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert_eq!(text.lines().next().unwrap(), "index,compound,actual,predicted,correct");
        assert!(export_error_plot(&ps, &dir.path().join("missing/p.svg"), "x").is_err());
    }
}
