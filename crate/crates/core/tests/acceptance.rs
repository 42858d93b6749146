//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use longsent::cli::dispatch;
use longsent::corpus::read_corpus;
use longsent::embeddings::{loss_and_gradients, CbowExample, Gradients, Matrix};
use longsent::eval::{macro_from_confusion, stratified_folds, ConfusionMatrix};
use longsent::lexicon::{classify_score, normalize, Lexicon, SentimentLabel, Threshold};
use longsent::models::{
    hinge_objective, softmax_objective, train_logistic, train_svm, Design, LogisticConfig, SvmConfig,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

const LABELS: [SentimentLabel; 3] = [SentimentLabel::Negative, SentimentLabel::Neutral, SentimentLabel::Positive];

fn scoring_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let valences: HashMap<String, f64> = (0..50)
        .map(|i| (format!("w{i}"), (rng.gen_range(-40..=40) as f64 / 10.0)))
        .filter(|(_, v)| *v != 0.0)
        .collect();
    let negators = ["not", "never", "without"];
    let lex = Lexicon::new(valences.clone(), negators.iter().map(|s| s.to_string())).map_err(|e| e.to_string())?;
    let mut vocab: Vec<String> = valences.keys().cloned().collect();
    vocab.sort();
    vocab.extend(negators.iter().map(|s| s.to_string()));
    vocab.extend(["campus", "exam", "coffee"].iter().map(|s| s.to_string()));

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.gen_range(0..25);
        let tokens: Vec<String> = (0..len).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
        let mut sum = 0.0;
        for i in 0..tokens.len() {
            let Some(&v) = valences.get(&tokens[i]) else { continue };
            let mut negated = false;
            for prev in &tokens[i.saturating_sub(3)..i] {
                if negators.contains(&prev.as_str()) {
                    negated = true;
                }
            }
            sum += if negated { v * -0.74 } else { v };
        }
        let expected = sum / (sum * sum + 15.0).sqrt();
        let got = lex.text_compound(&tokens);
        check((-1.0..=1.0).contains(&got), format!("{got} outside [-1, 1]"))?;
        worst = worst.max((got - expected).abs());
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-12, format!("max abs error {worst:.1e}"))?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("1000 sequences, max abs error {worst:.1e}, {elapsed:?}"))
}

fn spot_values() -> Outcome {
    let lex = Lexicon::new([("pos".to_string(), 1.9), ("neg".to_string(), -2.5)], Vec::<String>::new())
        .map_err(|e| e.to_string())?;
    // direct form sign(s) / sqrt(1 + alpha / s^2), evaluated independently of the library
    let direct = |s: f64| s.signum() / (1.0 + 15.0 / (s * s)).sqrt();
    let cases = [
        ("v=1.9", lex.token_compound("pos"), direct(1.9)),
        ("v=-2.5", lex.token_compound("neg"), direct(-2.5)),
        ("s=-1.406", normalize(-1.406, 15.0), direct(-1.406)),
    ];
    let mut parts = Vec::new();
    for (name, got, want) in cases {
        check((got - want).abs() <= 5e-6, format!("{name}: {got} vs {want}"))?;
        parts.push(format!("{name} -> {got:.7}"));
    }
    Ok(parts.join(", "))
}

fn cbow_gradients() -> Outcome {
    let start = Instant::now();
    let (vocab, dim, h) = (50, 8, 1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let random_matrix =
        |rng: &mut ChaCha8Rng| Matrix::from_vec(vocab, dim, (0..vocab * dim).map(|_| rng.gen_range(-0.5..0.5)).collect());
    let mut input = random_matrix(&mut rng).map_err(|e| e.to_string())?;
    let mut output = random_matrix(&mut rng).map_err(|e| e.to_string())?;
    let mut grads = Gradients::new(dim);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let context: Vec<usize> = (0..rng.gen_range(1..=10)).map(|_| rng.gen_range(0..vocab)).collect();
        let target = rng.gen_range(0..vocab);
        let negatives: Vec<usize> = (0..5)
            .map(|_| loop {
                let n = rng.gen_range(0..vocab);
                if n != target {
                    break n;
                }
            })
            .collect();
        let ex = CbowExample { context: &context, target, negatives: &negatives };
        loss_and_gradients(&input, &output, &ex, &mut grads);
        let col = rng.gen_range(0..dim);
        let on_input = rng.gen_bool(0.5);
        let (analytic, numeric) = if on_input {
            let row = *context.choose(&mut rng).unwrap();
            let occurrences = context.iter().filter(|&&c| c == row).count() as f64;
            let analytic = grads.hidden[col] * occurrences / context.len() as f64;
            let orig = input.row(row)[col];
            input.row_mut(row)[col] = orig + h;
            let up = loss_and_gradients(&input, &output, &ex, &mut Gradients::new(dim));
            input.row_mut(row)[col] = orig - h;
            let down = loss_and_gradients(&input, &output, &ex, &mut Gradients::new(dim));
            input.row_mut(row)[col] = orig;
            (analytic, (up - down) / (2.0 * h))
        } else {
            let row = *std::iter::once(&target).chain(&negatives).collect::<Vec<_>>().choose(&mut rng).unwrap();
            let analytic: f64 = grads
                .output_words
                .iter()
                .enumerate()
                .filter(|(_, &w)| w == *row)
                .map(|(i, _)| grads.output_row(i)[col])
                .sum();
            let orig = output.row(*row)[col];
            output.row_mut(*row)[col] = orig + h;
            let up = loss_and_gradients(&input, &output, &ex, &mut Gradients::new(dim));
            output.row_mut(*row)[col] = orig - h;
            let down = loss_and_gradients(&input, &output, &ex, &mut Gradients::new(dim));
            output.row_mut(*row)[col] = orig;
            (analytic, (up - down) / (2.0 * h))
        };
        worst = worst.max(rel_err(analytic, numeric));
    }
    let elapsed = start.elapsed();
    check(worst < 1e-4, format!("max relative error {worst:.1e}"))?;
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("100 positions, max relative error {worst:.1e}"))
}

fn random_design(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Design {
    Design {
        data: (0..rows * dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        dim,
        labels: (0..rows).map(|_| rng.gen_range(0..3)).collect(),
    }
}

fn separable() -> (Vec<Vec<f64>>, Vec<SentimentLabel>) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..20 {
        let (label, cx) = if i % 2 == 0 { (SentimentLabel::Negative, -2.0) } else { (SentimentLabel::Positive, 2.0) };
        rows.push(vec![cx + rng.gen_range(-0.8..0.8), rng.gen_range(-1.0..1.0)]);
        labels.push(label);
    }
    (rows, labels)
}

fn classifier_gradients() -> Outcome {
    let start = Instant::now();
    let h = 1e-5;
    let l2 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(505);

    let design = random_design(&mut rng, 5, 4);
    let weights: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bias = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let (_, gw, gb) = softmax_objective(&weights, &bias, &design, l2);
    let mut worst_lr: f64 = 0.0;
    for j in 0..weights.len() {
        let mut w = weights.clone();
        w[j] += h;
        let up = softmax_objective(&w, &bias, &design, l2).0;
        w[j] -= 2.0 * h;
        let down = softmax_objective(&w, &bias, &design, l2).0;
        worst_lr = worst_lr.max(rel_err(gw[j], (up - down) / (2.0 * h)));
    }
    for c in 0..3 {
        let mut b = bias;
        b[c] += h;
        let up = softmax_objective(&weights, &b, &design, l2).0;
        b[c] -= 2.0 * h;
        let down = softmax_objective(&weights, &b, &design, l2).0;
        worst_lr = worst_lr.max(rel_err(gb[c], (up - down) / (2.0 * h)));
    }

    let mut worst_hinge: f64 = 0.0;
    let mut trials = 0;
    while trials < 20 {
        let design = random_design(&mut rng, 8, 4);
        let signs: Vec<f64> = design.labels.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let off_kink = (0..design.rows()).all(|i| {
            let f: f64 = design.row(i).iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() + b;
            (1.0 - signs[i] * f).abs() > 1e-3
        });
        if !off_kink {
            continue;
        }
        trials += 1;
        let (_, gw, gb) = hinge_objective(&w, b, &design, &signs, l2);
        for j in 0..w.len() {
            let mut p = w.clone();
            p[j] += h;
            let up = hinge_objective(&p, b, &design, &signs, l2).0;
            p[j] -= 2.0 * h;
            let down = hinge_objective(&p, b, &design, &signs, l2).0;
            worst_hinge = worst_hinge.max(rel_err(gw[j], (up - down) / (2.0 * h)));
        }
        let up = hinge_objective(&w, b + h, &design, &signs, l2).0;
        let down = hinge_objective(&w, b - h, &design, &signs, l2).0;
        worst_hinge = worst_hinge.max(rel_err(gb, (up - down) / (2.0 * h)));
    }
    check(worst_lr < 1e-5, format!("logistic max relative error {worst_lr:.1e}"))?;
    check(worst_hinge < 1e-5, format!("hinge max relative error {worst_hinge:.1e}"))?;

    let (rows, labels) = separable();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let lr = train_logistic(&refs, &labels, &LogisticConfig::default()).map_err(|e| e.to_string())?.model;
    let svm = train_svm(&refs, &labels, &SvmConfig::default()).map_err(|e| e.to_string())?.model;
    for (name, model) in [("logistic", &lr), ("svm", &svm)] {
        let correct = rows.iter().zip(&labels).filter(|(r, y)| model.predict(r).ok() == Some(**y)).count();
        check(correct == rows.len(), format!("{name} separable accuracy {correct}/{}", rows.len()))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "logistic {worst_lr:.1e}, hinge {worst_hinge:.1e}, separable accuracy 1.0 for both"
    ))
}

fn brute_macro(pairs: &[(usize, usize)]) -> [f64; 3] {
    let mut p = [0.0; 3];
    let mut r = [0.0; 3];
    let mut f = [0.0; 3];
    for c in 0..3 {
        let tp = pairs.iter().filter(|&&(a, b)| a == c && b == c).count();
        let pred = pairs.iter().filter(|&&(_, b)| b == c).count();
        let act = pairs.iter().filter(|&&(a, _)| a == c).count();
        p[c] = if pred == 0 { 0.0 } else { tp as f64 / pred as f64 };
        r[c] = if act == 0 { 0.0 } else { tp as f64 / act as f64 };
        f[c] = if p[c] + r[c] == 0.0 { 0.0 } else { 2.0 * p[c] * r[c] / (p[c] + r[c]) };
    }
    let mean = |v: [f64; 3]| (v[0] + v[1] + v[2]) / 3.0;
    [mean(p), mean(r), mean(f)]
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for set in 0..1000 {
        let n = rng.gen_range(0..150);
        let classes = rng.gen_range(1..=3);
        let pairs: Vec<(usize, usize)> = (0..n).map(|_| (rng.gen_range(0..classes), rng.gen_range(0..3))).collect();
        let cm = ConfusionMatrix::from_pairs(pairs.iter().map(|&(a, b)| (LABELS[a], LABELS[b])));
        let report = macro_from_confusion(&cm);
        let got = [report.macro_precision, report.macro_recall, report.macro_f1];
        check(got == brute_macro(&pairs), format!("set {set}: {got:?} vs {:?}", brute_macro(&pairs)))?;
    }
    let worked = macro_from_confusion(&ConfusionMatrix::new([[5, 0, 0], [0, 0, 2], [1, 0, 4]]));
    let (p, r) = (format!("{:.4}", worked.macro_precision), format!("{:.4}", worked.macro_recall));
    check(p == "0.5000" && r == "0.6000", format!("worked example gave P={p} R={r}"))?;
    Ok(format!("1000 sets exact, worked example P={p} R={r}"))
}

fn fold_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for set in 0..200 {
        let n = rng.gen_range(10..400);
        let k = rng.gen_range(2..=10usize).min(n);
        let weights = [rng.gen_range(1..10), rng.gen_range(0..4), rng.gen_range(1..10)];
        let total: u32 = weights.iter().sum();
        let labels: Vec<SentimentLabel> = (0..n)
            .map(|_| {
                let mut x = rng.gen_range(0..total);
                for (c, &w) in weights.iter().enumerate() {
                    if x < w {
                        return LABELS[c];
                    }
                    x -= w;
                }
                unreachable!()
            })
            .collect();
        let folds = stratified_folds(&labels, k, rng.gen()).map_err(|e| format!("set {set}: {e}"))?;
        check(folds.folds.len() == k, format!("set {set}: {} folds", folds.folds.len()))?;
        let mut all: Vec<usize> = folds.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        check(all == (0..n).collect::<Vec<_>>(), format!("set {set}: folds do not partition 0..{n}"))?;
        for label in LABELS {
            let counts: Vec<usize> =
                folds.folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == label).count()).collect();
            let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
            check(spread <= 1, format!("set {set}: {label} counts {counts:?}"))?;
        }
    }
    Ok("200 datasets partitioned, per-class spread <= 1".into())
}

fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        })
        .collect()
}

fn label_index(s: &str) -> Result<usize, String> {
    LABELS.iter().position(|l| l.to_string() == s).ok_or_else(|| format!("unknown label {s:?}"))
}

struct Run {
    out: PathBuf,
    elapsed: Duration,
}

fn run_pipeline(dumps: &[PathBuf], out: &Path) -> Result<Run, String> {
    let mut argv: Vec<String> = vec!["longsent".into(), "pipeline".into()];
    for d in dumps {
        argv.push("--dump".into());
        argv.push(d.display().to_string());
    }
    argv.extend(
        ["--threshold", "0.075", "--k", "5", "--workers", "1", "--out"].iter().map(|s| s.to_string()),
    );
    argv.push(out.display().to_string());
    let start = Instant::now();
    let code = dispatch(argv);
    let elapsed = start.elapsed();
    check(code == 0, format!("pipeline exited with {code}"))?;
    Ok(Run { out: out.to_path_buf(), elapsed })
}

const REPORTS: [&str; 8] = [
    "table1_sweep.md",
    "table1_sweep.csv",
    "table2_distribution.md",
    "table2_distribution.csv",
    "table3_by_year.md",
    "table3_by_year.csv",
    "table4_by_university.md",
    "table4_by_university.csv",
];

fn end_to_end(run: &Run) -> Outcome {
    let out = &run.out;
    for name in REPORTS {
        check(out.join(name).is_file(), format!("missing {name}"))?;
    }

    // distribution recount from the dataset itself
    let dataset = read_csv(&out.join("dataset.csv"))?;
    check(dataset.len() == 2000, format!("dataset has {} rows", dataset.len()))?;
    let mut by_group: BTreeMap<(String, String), [usize; 3]> = BTreeMap::new();
    for row in &dataset {
        let c = label_index(&row["label"])?;
        for key in [
            ("year".to_string(), row["year"].clone()),
            ("university".to_string(), row["university"].clone()),
            ("year".to_string(), "All".to_string()),
            ("university".to_string(), "All".to_string()),
        ] {
            by_group.entry(key).or_default()[c] += 1;
        }
    }
    let table2 = read_csv(&out.join("table2_distribution.csv"))?;
    check(table2.len() == by_group.len(), format!("table 2 has {} rows", table2.len()))?;
    for row in &table2 {
        let want = by_group
            .get(&(row["group"].clone(), row["cohort"].clone()))
            .ok_or_else(|| format!("unexpected table 2 cohort {}", row["cohort"]))?;
        let got = [&row["negative"], &row["neutral"], &row["positive"]].map(|v| v.parse::<usize>().unwrap_or(usize::MAX));
        check(got == *want, format!("table 2 {}: {got:?} vs {want:?}", row["cohort"]))?;
        check(row["total"] == want.iter().sum::<usize>().to_string(), "table 2 total mismatch")?;
    }

    // cohort metrics recomputed from the per-example predictions
    let mut cohort_rows = read_csv(&out.join("table3_by_year.csv"))?;
    cohort_rows.extend(read_csv(&out.join("table4_by_university.csv"))?);
    check(cohort_rows.len() == 2 * 9, format!("{} cohort rows", cohort_rows.len()))?;
    let mut all_f1 = BTreeMap::new();
    for row in &cohort_rows {
        let slug = row["cohort"].to_lowercase();
        let preds = read_csv(&out.join("predictions").join(format!("{slug}_{}.csv", row["model"])))?;
        let pairs: Vec<(usize, usize)> = preds
            .iter()
            .map(|p| Ok((label_index(&p["actual"])?, label_index(&p["predicted"])?)))
            .collect::<Result<_, String>>()?;
        let want = brute_macro(&pairs);
        let got = ["macro_precision", "macro_recall", "macro_f1"].map(|k| row[k].clone());
        check(
            got == want.map(|v| format!("{v:.3}")),
            format!("{} {}: reported {got:?}, recount {want:?}", row["cohort"], row["model"]),
        )?;
        let neutral = pairs.iter().filter(|(a, _)| *a == 1).count();
        check(row["neutral_support"] == neutral.to_string(), "neutral support mismatch")?;
        if slug == "all" {
            check(pairs.len() == 2000, format!("All cohort has {} predictions", pairs.len()))?;
            all_f1.insert(row["model"].clone(), want[2]);
        }
    }

    let detail = read_csv(&out.join("metrics_detail.csv"))?;
    let mut parts = Vec::new();
    for model in ["logistic", "svm"] {
        let f1 = *all_f1.get(model).ok_or(format!("no All row for {model}"))?;
        check(f1 >= 0.90, format!("{model} macro F1 {f1:.3}"))?;
        for class in ["positive", "negative"] {
            let row = detail
                .iter()
                .find(|r| r["cohort"] == "All" && r["model"] == model && r["class"] == class)
                .ok_or(format!("no detail row for {model} {class}"))?;
            let cf1: f64 = row["f1"].parse().map_err(|_| "bad f1".to_string())?;
            check(cf1 >= 0.85, format!("{model} {class} F1 {cf1:.3}"))?;
        }
        parts.push(format!("{model} macro F1 {f1:.3}"));
    }
    check(run.elapsed < Duration::from_secs(120), format!("pipeline took {:?}", run.elapsed))?;
    Ok(format!("{}, {:.1}s single worker", parts.join(", "), run.elapsed.as_secs_f64()))
}

fn report_shape(run: &Run) -> Outcome {
    let out = &run.out;
    let sweep = read_csv(&out.join("table1_sweep.csv"))?;
    check(sweep.len() == 8, format!("sweep has {} rows", sweep.len()))?;
    let thresholds: Vec<f64> = sweep.iter().step_by(2).map(|r| r["threshold"].parse().unwrap_or(f64::NAN)).collect();
    check(thresholds.windows(2).all(|w| w[0] < w[1]), format!("thresholds {thresholds:?}"))?;
    for pair in sweep.chunks(2) {
        let models: Vec<&str> = pair.iter().map(|r| r["model"].as_str()).collect();
        check(pair[0]["threshold"] == pair[1]["threshold"] && models == ["logistic", "svm"], "sweep row layout")?;
    }

    // neutral counts recomputed from the cleaned corpus
    let corpus = read_corpus(&out.join("corpus.jsonl")).map_err(|e| e.to_string())?;
    let lex = Lexicon::default();
    let neutral: Vec<usize> = thresholds
        .iter()
        .map(|&t| {
            let t = Threshold::new(t).expect("valid threshold");
            corpus
                .iter()
                .filter(|p| classify_score(lex.text_compound(&p.tokens), t) == SentimentLabel::Neutral)
                .count()
        })
        .collect();
    check(neutral.windows(2).all(|w| w[0] <= w[1]), format!("neutral counts {neutral:?}"))?;
    let md = fs::read_to_string(out.join("table1_sweep.md")).map_err(|e| e.to_string())?;
    let md_row = md.lines().find(|l| l.starts_with("| Neutral posts")).ok_or("no Neutral row in sweep table")?;
    let md_counts: Vec<String> =
        md_row.split('|').map(str::trim).skip(2).filter(|s| !s.is_empty()).map(String::from).collect();
    check(
        md_counts == neutral.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
        format!("sweep table neutral row {md_counts:?} vs recount {neutral:?}"),
    )?;

    let mut starred = Vec::new();
    for (csv_name, md_name) in [
        ("table3_by_year.csv", "table3_by_year.md"),
        ("table4_by_university.csv", "table4_by_university.md"),
    ] {
        let rows = read_csv(&out.join(csv_name))?;
        let md = fs::read_to_string(out.join(md_name)).map_err(|e| e.to_string())?;
        for row in rows {
            let support: usize = row["neutral_support"].parse().map_err(|_| "bad support".to_string())?;
            let should_star = support < 39;
            check(
                row["starred"] == should_star.to_string(),
                format!("{} {} starred={} with neutral support {support}", row["cohort"], row["model"], row["starred"]),
            )?;
            // the markdown block for this cohort
            let header = if row["cohort"] == "All" { "| **All years** |".to_string() } else { format!("| **{}** |", row["cohort"]) };
            let block: Vec<&str> = md
                .lines()
                .skip_while(|l| !l.starts_with(&header))
                .skip(1)
                .take_while(|l| !l.starts_with("| **"))
                .collect();
            check(block.len() == 2, format!("markdown block for {}", row["cohort"]))?;
            for line in block {
                let cells: Vec<&str> = line.split('|').map(str::trim).filter(|s| !s.is_empty()).skip(1).collect();
                check(
                    cells.iter().all(|c| c.ends_with('*') == should_star),
                    format!("markdown star mismatch for {}: {line}", row["cohort"]),
                )?;
            }
            if should_star && row["model"] == "svm" {
                starred.push(format!("{} ({support})", row["cohort"]));
            }
        }
    }
    check(!starred.is_empty(), "no cohort fell below the reliability bar")?;
    Ok(format!("8 sweep rows, neutral counts {neutral:?}, starred {}", starred.join(", ")))
}

fn files_to_compare(root: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "clf" | "w2v")) {
                files.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    files
}

fn determinism(first: &Run, second: &Run) -> Outcome {
    let a = files_to_compare(&first.out);
    let b = files_to_compare(&second.out);
    check(a == b, "runs produced different file sets")?;
    for rel in &a {
        let x = fs::read(first.out.join(rel)).map_err(|e| e.to_string())?;
        let y = fs::read(second.out.join(rel)).map_err(|e| e.to_string())?;
        check(x == y, format!("{} differs between runs", rel.display()))?;
    }
    Ok(format!("{} CSV and model files byte-identical", a.len()))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "scoring oracle", scoring_oracle()),
        (2, "normalization spot values", spot_values()),
        (3, "CBOW gradient check", cbow_gradients()),
        (4, "classifier gradient checks", classifier_gradients()),
        (5, "metrics oracle", metrics_oracle()),
        (6, "fold properties", fold_properties()),
    ];

    let tmp = tempfile::tempdir().expect("temp dir");
    let dumps_dir = tmp.path().join("dumps");
    let synth = dispatch(["longsent", "synth", "--out", dumps_dir.to_str().unwrap(), "--posts", "2000"]);
    let mut dumps: Vec<PathBuf> = fs::read_dir(&dumps_dir)
        .map(|d| d.flatten().map(|e| e.path()).collect())
        .unwrap_or_default();
    dumps.sort();
    let first = if synth == 0 && dumps.len() == 4 {
        run_pipeline(&dumps, &tmp.path().join("run1"))
    } else {
        Err(format!("synth exited with {synth}, {} dumps", dumps.len()))
    };
    let second = first.as_ref().map_err(Clone::clone).and_then(|_| run_pipeline(&dumps, &tmp.path().join("run2")));

    results.push((7, "end-to-end synthetic reproduction", first.as_ref().map_err(Clone::clone).and_then(end_to_end)));
    results.push((8, "report-shape checks", first.as_ref().map_err(Clone::clone).and_then(report_shape)));
    results.push((
        9,
        "determinism",
        match (&first, &second) {
            (Ok(a), Ok(b)) => determinism(a, b),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        },
    ));

    let mut failed = 0;
    println!();
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {detail}");
            }
        }
    }
    println!("\nacceptance: {} passed, {failed} failed\n", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
