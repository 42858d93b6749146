//! The `longsent` command line: subcommands, run configuration and manifests.
//!
//! Every stage reads its inputs from the output directory by default, so
//! `ingest`, `embed`, `featurize`, `sweep`, `evaluate` and `plot` can be run
//! one after another, or all at once with `pipeline`.

use std::collections::{BTreeMap, HashSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    clean_corpus, filter_by_keywords, ingest_dump, keyword_histogram, read_corpus, write_corpus, CleanPost,
    KeywordSet, Stopwords, SubredditMap, University,
};
use crate::embeddings::{load_model, save_model, train_cbow_with_workers, EmbeddingConfig, EmbeddingModel};
use crate::error::{Error, Result};
use crate::eval::{
    cross_validate, export_error_plot, render_cohort_table, render_distribution, render_metrics_detail,
    render_predictions, render_sweep, slice_dataset, threshold_sweep, Cohort, CohortMetrics, Prediction,
    ReportFormat, SliceBy, SweepRow, DEFAULT_SWEEP,
};
use crate::features::{build_dataset, meta_path, read_dataset, write_dataset, Dataset, DatasetMeta};
use crate::lexicon::{Lexicon, ScoringParams, SentimentLabel, Threshold, DEFAULT_THRESHOLD};
use crate::models::{save_classifier, train_classifier, ClassifierConfigs, ClassifierKind, LogisticConfig, SvmConfig};
use crate::synthetic::{write_dumps, SyntheticConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const EMBEDDINGS_FILE: &str = "embeddings.w2v";
pub const DATASET_FILE: &str = "dataset.csv";
pub const PREDICTIONS_DIR: &str = "predictions";
pub const PLOTS_DIR: &str = "plots";

/// Settings for a run, read from TOML and overridden by flags. Relative
/// paths in a config file resolve against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dumps: Vec<PathBuf>,
    /// Defaults to the shipped lexicon when unset; likewise the other lists.
    pub lexicon: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub out: PathBuf,
    pub threshold: f64,
    /// Sweep thresholds.
    pub thresholds: Vec<f64>,
    pub k: usize,
    /// Seeds CBOW, fold assignment and SVM initialisation.
    pub seed: u64,
    pub workers: usize,
    pub embedding: EmbeddingConfig,
    pub logistic: LogisticConfig,
    pub svm: SvmConfig,
    pub scoring: ScoringParams,
    /// Subreddit name to university.
    pub subreddits: BTreeMap<String, University>,
    /// Run record written by a previous invocation; ignored on input.
    #[serde(skip_serializing)]
    pub manifest: Option<toml::Table>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dumps: Vec::new(),
            lexicon: None,
            negators: None,
            stopwords: None,
            keywords: None,
            out: PathBuf::from("out"),
            threshold: DEFAULT_THRESHOLD,
            thresholds: DEFAULT_SWEEP.to_vec(),
            k: 5,
            seed: 1,
            workers: 1,
            embedding: EmbeddingConfig::default(),
            logistic: LogisticConfig::default(),
            svm: SvmConfig::default(),
            scoring: ScoringParams::default(),
            subreddits: University::ALL.iter().map(|u| (u.subreddit().to_string(), *u)).collect(),
            manifest: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", origin.display(), e.message())))?;
        let base = origin.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.dumps.iter_mut().for_each(resolve);
        for p in [&mut cfg.lexicon, &mut cfg.negators, &mut cfg.stopwords, &mut cfg.keywords]
            .into_iter()
            .flatten()
        {
            resolve(p);
        }
        resolve(&mut cfg.out);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text, path)
    }

    /// The same config with every path made absolute, so it can be replayed
    /// from any directory.
    pub fn absolutized(&self) -> Result<RunConfig> {
        let abs = |p: &Path| std::path::absolute(p).map_err(|e| Error::io(p, e));
        let mut cfg = self.clone();
        for p in cfg.dumps.iter_mut() {
            *p = abs(p)?;
        }
        for p in [&mut cfg.lexicon, &mut cfg.negators, &mut cfg.stopwords, &mut cfg.keywords]
            .into_iter()
            .flatten()
        {
            *p = abs(p)?;
        }
        cfg.out = abs(&cfg.out)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Copies the run seed into every seeded component.
    fn propagate_seed(&mut self) {
        self.embedding.seed = self.seed;
        self.svm.seed = self.seed;
    }

    pub fn threshold(&self) -> Result<Threshold> {
        Threshold::new(self.threshold)
    }

    /// Sorted, de-duplicated sweep thresholds.
    pub fn sweep_thresholds(&self) -> Result<Vec<Threshold>> {
        let mut ts: Vec<f64> = self.thresholds.clone();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.into_iter().map(Threshold::new).collect()
    }

    pub fn classifier_configs(&self) -> ClassifierConfigs {
        ClassifierConfigs { logistic: self.logistic, svm: self.svm }
    }

    pub fn validate(&self) -> Result<()> {
        self.threshold()?;
        if self.thresholds.is_empty() {
            return Err(Error::Config("thresholds must not be empty".into()));
        }
        self.sweep_thresholds()?;
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.embedding.validate()?;
        self.scoring.validate()?;
        for (name, lr, l2) in [
            ("logistic", self.logistic.learning_rate, self.logistic.l2),
            ("svm", self.svm.learning_rate, self.svm.l2),
        ] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::Config(format!("{name} learning_rate must be positive")));
            }
            if !(l2.is_finite() && l2 >= 0.0) {
                return Err(Error::Config(format!("{name} l2 must be non-negative")));
            }
        }
        for (what, path) in [
            ("lexicon", &self.lexicon),
            ("negators", &self.negators),
            ("stopwords", &self.stopwords),
            ("keywords", &self.keywords),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Error::Config(format!("{what} file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

#[derive(Parser, Debug)]
#[command(name = "longsent", version, about = "Lexicon-labelled sentiment classification of university subreddit posts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    /// TOML run configuration
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// JSON-lines dump file (repeatable)
    #[arg(long = "dump", value_name = "PATH")]
    dumps: Vec<PathBuf>,
    /// Neutral band half-width, in (0, 1)
    #[arg(long, value_name = "T", value_parser = parse_threshold)]
    threshold: Option<f64>,
    /// Cross-validation folds
    #[arg(long, value_name = "N")]
    k: Option<usize>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; 1 gives bit-reproducible output
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum By {
    Year,
    University,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read dumps, keep keyword posts, write the cleaned corpus
    Ingest {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train CBOW embeddings on the cleaned corpus
    Embed {
        #[command(flatten)]
        run: RunArgs,
        /// Cleaned corpus (default: <out>/corpus.jsonl)
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Label posts and build feature vectors
    Featurize {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Embedding model (default: <out>/embeddings.w2v)
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
    },
    /// Cross-validate both classifiers over a list of thresholds
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        /// Comma-separated thresholds (default: 0.075,0.08,0.10,0.12)
        #[arg(long, value_delimiter = ',', value_parser = parse_threshold)]
        thresholds: Vec<f64>,
    },
    /// Cross-validate by cohort and write distribution and metrics tables
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Dataset CSV (default: <out>/dataset.csv)
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = By::All)]
        by: By,
    },
    /// Draw error scatter plots from prediction files
    Plot {
        #[command(flatten)]
        run: RunArgs,
        /// Prediction CSV or directory of them (default: <out>/predictions)
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Run every stage in order
    Pipeline {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = By::All)]
        by: By,
        #[arg(long, value_delimiter = ',', value_parser = parse_threshold)]
        thresholds: Vec<f64>,
    },
    /// Write synthetic dumps for trying the pipeline
    Synth {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        posts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_threshold(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    Threshold::new(t).map(Threshold::value).map_err(|e| e.to_string())
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.dumps.is_empty() {
            cfg.dumps = self.dumps.clone();
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(w) = self.workers {
            cfg.workers = w as usize;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.propagate_seed();
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let args = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli.command, args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            EXIT_DATA
        }
    }
}

fn run(command: Command, args: Vec<String>) -> Result<()> {
    if let Command::Synth { out, posts, seed } = &command {
        let cfg = SyntheticConfig { posts: *posts, seed: *seed, ..Default::default() };
        for path in write_dumps(out, &cfg)? {
            println!("{}", path.display());
        }
        return Ok(());
    }
    let (name, run_args) = match &command {
        Command::Ingest { run } => ("ingest", run),
        Command::Embed { run, .. } => ("embed", run),
        Command::Featurize { run, .. } => ("featurize", run),
        Command::Sweep { run, .. } => ("sweep", run),
        Command::Evaluate { run, .. } => ("evaluate", run),
        Command::Plot { run, .. } => ("plot", run),
        Command::Pipeline { run, .. } => ("pipeline", run),
        Command::Synth { .. } => unreachable!(),
    };
    let mut cfg = run_args.resolve()?;
    let explicit_threshold = run_args.threshold;
    match &command {
        Command::Sweep { thresholds, .. } | Command::Pipeline { thresholds, .. } if !thresholds.is_empty() => {
            cfg.thresholds = thresholds.clone();
        }
        _ => {}
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let mut session = Session::new(cfg, args)?;
    pool.install(|| -> Result<()> {
        let cfg = session.cfg.clone();
        match command {
            Command::Ingest { .. } => {
                session.ingest()?;
            }
            Command::Embed { input, .. } => {
                let corpus = session.read_corpus(input)?;
                session.embed(&corpus)?;
            }
            Command::Featurize { input, model, .. } => {
                let corpus = session.read_corpus(input)?;
                let model = session.read_model(model)?;
                session.featurize(&corpus, &model)?;
            }
            Command::Sweep { input, model, .. } => {
                let corpus = session.read_corpus(input)?;
                let model = session.read_model(model)?;
                session.sweep(&corpus, &model)?;
            }
            Command::Evaluate { input, by, .. } => {
                let path = input.unwrap_or_else(|| cfg.out_path(DATASET_FILE));
                session.note_input(&path)?;
                let (dataset, meta) = read_dataset(&path)?;
                if explicit_threshold.is_some_and(|t| t != meta.threshold) {
                    return Err(Error::Config(format!(
                        "dataset {} was built at threshold {}, not {}; re-run featurize",
                        path.display(),
                        meta.threshold,
                        cfg.threshold
                    )));
                }
                if meta.threshold != cfg.threshold {
                    info!("using the dataset's threshold {}", meta.threshold);
                    session.cfg.threshold = meta.threshold;
                }
                session.evaluate(&dataset, by)?;
            }
            Command::Plot { input, .. } => {
                let path = input.unwrap_or_else(|| cfg.out_path(PREDICTIONS_DIR));
                session.plot_from(&path)?;
            }
            Command::Pipeline { by, .. } => {
                let corpus = session.ingest()?;
                let model = session.embed(&corpus)?;
                let dataset = session.featurize(&corpus, &model)?;
                session.sweep(&corpus, &model)?;
                let predictions = session.evaluate(&dataset, by)?;
                for (stem, preds) in &predictions {
                    session.plot(stem, preds)?;
                }
            }
            Command::Synth { .. } => unreachable!(),
        }
        Ok(())
    })?;
    session.write_manifest(name)
}

struct Session {
    cfg: RunConfig,
    lexicon: Lexicon,
    stopwords: Stopwords,
    keywords: KeywordSet,
    subreddits: SubredditMap,
    inputs: BTreeMap<PathBuf, String>,
    outputs: Vec<PathBuf>,
    args: Vec<String>,
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(crate::sha256_hex(&bytes))
}

impl Session {
    fn new(cfg: RunConfig, args: Vec<String>) -> Result<Self> {
        let mut inputs = BTreeMap::new();
        let lexicon = match &cfg.lexicon {
            Some(path) => {
                inputs.insert(path.clone(), hash_file(path)?);
                let load = Lexicon::load(path)?;
                if load.duplicates + load.skipped > 0 {
                    warn!(
                        "{}: {} duplicate and {} unparseable lines",
                        path.display(),
                        load.duplicates,
                        load.skipped
                    );
                }
                let negators = match &cfg.negators {
                    Some(n) => Lexicon::load_negators(n)?,
                    None => Lexicon::default().negators().clone(),
                };
                load.lexicon.with_negators(negators)
            }
            None => match &cfg.negators {
                Some(n) => Lexicon::default().with_negators(Lexicon::load_negators(n)?),
                None => Lexicon::default(),
            },
        }
        .with_params(cfg.scoring);
        if let Some(n) = &cfg.negators {
            inputs.insert(n.clone(), hash_file(n)?);
        }
        let stopwords = match &cfg.stopwords {
            Some(p) => {
                inputs.insert(p.clone(), hash_file(p)?);
                Stopwords::load(p)?
            }
            None => Stopwords::default(),
        };
        let keywords = match &cfg.keywords {
            Some(p) => {
                inputs.insert(p.clone(), hash_file(p)?);
                KeywordSet::load(p)?
            }
            None => KeywordSet::default(),
        };
        let mut subreddits = SubredditMap::new();
        for (name, u) in &cfg.subreddits {
            subreddits.insert(name, *u);
        }
        Ok(Session {
            cfg,
            lexicon,
            stopwords,
            keywords,
            subreddits,
            inputs,
            outputs: Vec::new(),
            args,
        })
    }

    fn note_input(&mut self, path: &Path) -> Result<()> {
        let hash = hash_file(path)?;
        self.inputs.insert(path.to_path_buf(), hash);
        Ok(())
    }

    fn write_output(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(path);
        Ok(())
    }

    fn read_corpus(&mut self, input: Option<PathBuf>) -> Result<Vec<CleanPost>> {
        let path = input.unwrap_or_else(|| self.cfg.out_path(CORPUS_FILE));
        self.note_input(&path)?;
        read_corpus(&path)
    }

    fn read_model(&mut self, input: Option<PathBuf>) -> Result<EmbeddingModel> {
        let path = input.unwrap_or_else(|| self.cfg.out_path(EMBEDDINGS_FILE));
        self.note_input(&path)?;
        load_model(&path)
    }

    fn ingest(&mut self) -> Result<Vec<CleanPost>> {
        if self.cfg.dumps.is_empty() {
            return Err(Error::Config("no dump files given; pass --dump or set `dumps` in the config".into()));
        }
        let mut posts = Vec::new();
        let mut seen = HashSet::new();
        for path in self.cfg.dumps.clone() {
            self.note_input(&path)?;
            let ing = ingest_dump(&path, &self.subreddits)?;
            let s = &ing.stats;
            info!(
                "{}: {} records, {} posts, {} unmapped, {} malformed, {} duplicates",
                path.display(),
                s.records,
                ing.posts.len(),
                s.unmapped,
                s.malformed,
                s.duplicates
            );
            for post in ing.posts {
                if seen.insert(post.id.clone()) {
                    posts.push(post);
                } else {
                    warn!("{}: post {} already read from an earlier dump", path.display(), post.id);
                }
            }
        }
        let kept = filter_by_keywords(&posts, &self.keywords);
        let hist = keyword_histogram(&kept, &self.keywords);
        let cleaned = clean_corpus(&kept, &self.stopwords);
        info!(
            "{} posts, {} with keywords, {} empty after cleaning",
            posts.len(),
            kept.len(),
            cleaned.dropped
        );
        if cleaned.posts.is_empty() {
            return Err(Error::InvalidInput("no keyword posts left after filtering and cleaning".into()));
        }
        let corpus_path = self.cfg.out_path(CORPUS_FILE);
        write_corpus(&corpus_path, &cleaned.posts)?;
        self.outputs.push(corpus_path);

        let mut csv = String::from("keyword,posts\n");
        let mut md = String::from("| Keyword | Posts |\n| --- | --- |\n");
        for (kw, n) in &hist {
            writeln!(csv, "{kw},{n}").unwrap();
            writeln!(md, "| {kw} | {n} |").unwrap();
        }
        self.write_output(self.cfg.out_path("keyword_histogram.csv"), &csv)?;
        self.write_output(self.cfg.out_path("keyword_histogram.md"), &md)?;
        Ok(cleaned.posts)
    }

    fn embed(&mut self, corpus: &[CleanPost]) -> Result<EmbeddingModel> {
        let trained = train_cbow_with_workers(corpus, &self.cfg.embedding, self.cfg.workers)?;
        if let (Some(first), Some(last)) = (trained.loss_history.first(), trained.loss_history.last()) {
            info!(
                "embeddings: {} tokens, loss {first:.4} -> {last:.4}",
                trained.model.vocab.len()
            );
        }
        let path = self.cfg.out_path(EMBEDDINGS_FILE);
        save_model(&trained.model, &path)?;
        self.outputs.push(path);
        Ok(trained.model)
    }

    fn featurize(&mut self, corpus: &[CleanPost], model: &EmbeddingModel) -> Result<Dataset> {
        let dataset = build_dataset(corpus, model, &self.lexicon, self.cfg.threshold()?);
        let counts = dataset.label_counts();
        info!(
            "dataset at threshold {}: {} positive, {} negative, {} neutral",
            self.cfg.threshold,
            counts[SentimentLabel::Positive.index()],
            counts[SentimentLabel::Negative.index()],
            counts[SentimentLabel::Neutral.index()]
        );
        let meta = DatasetMeta::describe(&dataset, self.lexicon.content_hash(), model.content_hash(), self.cfg.seed);
        let path = self.cfg.out_path(DATASET_FILE);
        write_dataset(&path, &dataset, &meta)?;
        self.outputs.push(path.clone());
        self.outputs.push(meta_path(&path));
        Ok(dataset)
    }

    fn sweep(&mut self, corpus: &[CleanPost], model: &EmbeddingModel) -> Result<Vec<SweepRow>> {
        let thresholds = self.cfg.sweep_thresholds()?;
        let rows = threshold_sweep(
            corpus,
            model,
            &self.lexicon,
            &thresholds,
            self.cfg.k,
            self.cfg.seed,
            &self.cfg.classifier_configs(),
        )?;
        for format in [ReportFormat::Markdown, ReportFormat::Csv] {
            let path = self.cfg.out_path(&format!("table1_sweep.{}", format.extension()));
            self.write_output(path, &render_sweep(&rows, format))?;
        }
        Ok(rows)
    }

    /// Returns held-out predictions keyed by `<cohort>_<model>`.
    fn evaluate(&mut self, dataset: &Dataset, by: By) -> Result<Vec<(String, Vec<Prediction>)>> {
        let mut cohorts: Vec<(Cohort, Dataset)> = vec![(Cohort::All, dataset.clone())];
        let slices: &[SliceBy] = match by {
            By::Year => &[SliceBy::Year],
            By::University => &[SliceBy::University],
            By::All => &[SliceBy::Year, SliceBy::University],
        };
        for &s in slices {
            cohorts.extend(slice_dataset(dataset, s));
        }
        let configs = self.cfg.classifier_configs();
        let mut results = Vec::new();
        let mut predictions = Vec::new();
        for (cohort, data) in &cohorts {
            for kind in ClassifierKind::ALL {
                let cv = cross_validate(data, kind, self.cfg.k, self.cfg.seed, &configs)
                    .map_err(|e| Error::InvalidInput(format!("cohort {cohort}, {kind}: {e}")))?;
                info!("cohort {cohort}, {kind}: macro F1 {:.3}", cv.report.macro_f1);
                let stem = format!("{}_{kind}", cohort.slug());
                let path = self.cfg.out_path(PREDICTIONS_DIR).join(format!("{stem}.csv"));
                self.write_output(path, &render_predictions(&cv.predictions))?;
                predictions.push((stem, cv.predictions));
                results.push(CohortMetrics { cohort: *cohort, kind, report: cv.report });
            }
        }

        for format in [ReportFormat::Markdown, ReportFormat::Csv] {
            let ext = format.extension();
            self.write_output(
                self.cfg.out_path(&format!("table2_distribution.{ext}")),
                &render_distribution(dataset, format),
            )?;
            if by != By::University {
                let rows: Vec<CohortMetrics> = results
                    .iter()
                    .filter(|r| matches!(r.cohort, Cohort::All | Cohort::Year(_)))
                    .cloned()
                    .collect();
                self.write_output(
                    self.cfg.out_path(&format!("table3_by_year.{ext}")),
                    &render_cohort_table(&rows, format, "All years"),
                )?;
            }
            if by != By::Year {
                let rows: Vec<CohortMetrics> = results
                    .iter()
                    .filter(|r| matches!(r.cohort, Cohort::University(_)))
                    .cloned()
                    .collect();
                self.write_output(
                    self.cfg.out_path(&format!("table4_by_university.{ext}")),
                    &render_cohort_table(&rows, format, "All universities"),
                )?;
            }
        }
        self.write_output(self.cfg.out_path("metrics_detail.csv"), &render_metrics_detail(&results))?;

        let rows: Vec<&[f64]> = dataset.examples.iter().map(|e| e.features.as_slice()).collect();
        let labels = dataset.labels();
        for kind in ClassifierKind::ALL {
            let trained = train_classifier(kind, &rows, &labels, &configs)?;
            let path = self.cfg.out_path(&format!("classifier_{kind}.clf"));
            save_classifier(&trained.model, &path)?;
            self.outputs.push(path);
        }
        Ok(predictions)
    }

    fn plot(&mut self, stem: &str, predictions: &[Prediction]) -> Result<()> {
        let dir = self.cfg.out_path(PLOTS_DIR);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let svg = dir.join(format!("{stem}.svg"));
        let csv = export_error_plot(predictions, &svg, stem)?;
        self.outputs.push(svg);
        self.outputs.push(csv);
        Ok(())
    }

    fn plot_from(&mut self, input: &Path) -> Result<()> {
        let files: Vec<PathBuf> = if input.is_dir() {
            let mut v: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| Error::io(input, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            v.sort();
            v
        } else {
            vec![input.to_path_buf()]
        };
        if files.is_empty() {
            return Err(Error::InvalidInput(format!("no prediction files in {}", input.display())));
        }
        for path in files {
            self.note_input(&path)?;
            let preds = read_predictions(&path)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            self.plot(&stem, &preds)?;
        }
        Ok(())
    }

    fn write_manifest(&self, subcommand: &str) -> Result<()> {
        let mut doc: toml::Table = toml::from_str(&self.cfg.absolutized()?.to_toml()).expect("config round-trips");
        let mut m = toml::Table::new();
        m.insert("subcommand".into(), subcommand.into());
        m.insert("args".into(), self.args.clone().into());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert("lexicon_sha256".into(), self.lexicon.content_hash().into());
        let files = |entries: Vec<(String, String)>| -> toml::Value {
            toml::Value::Array(
                entries
                    .into_iter()
                    .map(|(path, sha)| {
                        let mut t = toml::Table::new();
                        t.insert("path".into(), path.into());
                        t.insert("sha256".into(), sha.into());
                        toml::Value::Table(t)
                    })
                    .collect(),
            )
        };
        let inputs = self.inputs.iter().map(|(p, h)| (p.display().to_string(), h.clone())).collect();
        m.insert("inputs".into(), files(inputs));
        let mut outputs = Vec::new();
        let mut seen = HashSet::new();
        for p in &self.outputs {
            if seen.insert(p) {
                let rel = p.strip_prefix(&self.cfg.out).unwrap_or(p);
                outputs.push((rel.display().to_string(), hash_file(p)?));
            }
        }
        outputs.sort();
        m.insert("outputs".into(), files(outputs));
        doc.insert("manifest".into(), toml::Value::Table(m));
        let path = self.cfg.out_path(&format!("manifest_{subcommand}.toml"));
        let text = toml::to_string(&doc).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

#[derive(Deserialize)]
struct PredictionRow {
    index: usize,
    post_id: String,
    fold: usize,
    compound: f64,
    actual: SentimentLabel,
    predicted: SentimentLabel,
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let origin = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::format(&origin, 0, e.to_string()))?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<PredictionRow>().enumerate() {
        let row = row.map_err(|e| Error::format(&origin, i + 2, e.to_string()))?;
        out.push(Prediction {
            index: row.index,
            post_id: row.post_id,
            compound: row.compound,
            actual: row.actual,
            predicted: row.predicted,
            fold: row.fold,
        });
    }
    Ok(out)
}
