//! Continuous bag-of-words training with negative sampling.
//!
//! For a target word `t` with context words `c_1..c_n` the hidden vector is
//! `h = (1/n) Σ in[c_i]` and the example loss is
//!
//! ```text
//! L = -ln σ(out[t]·h) - Σ_j ln σ(-out[n_j]·h)
//! ```
//!
//! over `k` noise words `n_j` drawn from the unigram distribution raised to
//! the 3/4 power. Updates are plain SGD on the exact gradient of `L`.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_vocab, EmbeddingConfig, EmbeddingModel, Matrix, Vocab};
use crate::corpus::CleanPost;
use crate::error::{Error, Result};
use crate::Trained;

/// Row access shared by the owned matrix and the lock-free shared one.
pub trait RowStore {
    fn dim(&self) -> usize;
    fn read_row(&self, row: usize, out: &mut [f64]);
    /// `row += scale * delta`
    fn add_to_row(&mut self, row: usize, delta: &[f64], scale: f64);
}

impl RowStore for Matrix {
    fn dim(&self) -> usize {
        self.cols()
    }

    fn read_row(&self, row: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row(row));
    }

    fn add_to_row(&mut self, row: usize, delta: &[f64], scale: f64) {
        for (r, d) in self.row_mut(row).iter_mut().zip(delta) {
            *r += scale * d;
        }
    }
}

/// Matrix of f64 bit patterns updated without locks. Concurrent writers may
/// overwrite each other's updates; that loss is accepted in multi-worker mode.
struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU64>,
}

impl SharedMatrix {
    fn from_matrix(m: &Matrix) -> Self {
        SharedMatrix {
            cols: m.cols(),
            data: m.as_slice().iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    fn into_matrix(self, rows: usize) -> Matrix {
        let data = self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect();
        Matrix::from_vec(rows, self.cols, data).expect("shape preserved")
    }
}

impl RowStore for &SharedMatrix {
    fn dim(&self) -> usize {
        self.cols
    }

    fn read_row(&self, row: usize, out: &mut [f64]) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_to_row(&mut self, row: usize, delta: &[f64], scale: f64) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (c, d) in cells.iter().zip(delta) {
            let v = f64::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CbowExample<'a> {
    pub context: &'a [usize],
    pub target: usize,
    pub negatives: &'a [usize],
}

/// Gradients of one example's loss.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    /// dL/dh. Each context occurrence receives `hidden / n` as its input-row gradient.
    pub hidden: Vec<f64>,
    /// Output rows touched, target first then negatives; repeats are kept separate.
    pub output_words: Vec<usize>,
    /// dL/d out[w], row-major, aligned with `output_words`.
    pub output: Vec<f64>,
    h: Vec<f64>,
    row: Vec<f64>,
}

impl Gradients {
    pub fn new(dim: usize) -> Self {
        Gradients {
            hidden: vec![0.0; dim],
            output_words: Vec::new(),
            output: Vec::new(),
            h: vec![0.0; dim],
            row: vec![0.0; dim],
        }
    }

    pub fn output_row(&self, i: usize) -> &[f64] {
        let d = self.hidden.len();
        &self.output[i * d..(i + 1) * d]
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Computes the example loss and fills `grads`. The context must be non-empty.
pub fn loss_and_gradients<I: RowStore + ?Sized, O: RowStore + ?Sized>(
    input: &I,
    output: &O,
    example: &CbowExample<'_>,
    grads: &mut Gradients,
) -> f64 {
    let dim = input.dim();
    if grads.hidden.len() != dim {
        *grads = Gradients::new(dim);
    }
    let Gradients { hidden, output_words, output: out_grads, h, row } = grads;

    h.iter_mut().for_each(|v| *v = 0.0);
    for &c in example.context {
        input.read_row(c, row);
        for (a, r) in h.iter_mut().zip(row.iter()) {
            *a += r;
        }
    }
    let inv_n = 1.0 / example.context.len() as f64;
    h.iter_mut().for_each(|v| *v *= inv_n);

    hidden.iter_mut().for_each(|v| *v = 0.0);
    output_words.clear();
    out_grads.clear();
    let mut loss = 0.0;
    let words = std::iter::once((example.target, true))
        .chain(example.negatives.iter().map(|&n| (n, false)));
    for (w, positive) in words {
        output.read_row(w, row);
        let f: f64 = h.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
        // dL/df
        let g = if positive {
            loss += softplus(-f);
            sigmoid(f) - 1.0
        } else {
            loss += softplus(f);
            sigmoid(f)
        };
        for (hd, r) in hidden.iter_mut().zip(row.iter()) {
            *hd += g * r;
        }
        output_words.push(w);
        out_grads.extend(h.iter().map(|v| g * v));
    }
    loss
}

fn sgd_step<I: RowStore, O: RowStore>(
    input: &mut I,
    output: &mut O,
    example: &CbowExample<'_>,
    lr: f64,
    grads: &mut Gradients,
) -> f64 {
    let loss = loss_and_gradients(&*input, &*output, example, grads);
    let dim = grads.hidden.len();
    for (i, &w) in grads.output_words.iter().enumerate() {
        output.add_to_row(w, &grads.output[i * dim..(i + 1) * dim], -lr);
    }
    let scale = -lr / example.context.len() as f64;
    for &c in example.context {
        input.add_to_row(c, &grads.hidden, scale);
    }
    loss
}

/// Draws noise words with probability proportional to count^0.75.
struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(vocab: &Vocab) -> Self {
        let mut acc = 0.0;
        let cumulative = vocab
            .counts()
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseSampler { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }

    /// Fills `out` with up to `k` draws, discarding any equal to `target`.
    fn draw(&self, k: usize, target: usize, rng: &mut impl Rng, out: &mut Vec<usize>) {
        out.clear();
        for _ in 0..k {
            let w = self.sample(rng);
            if w != target {
                out.push(w);
            }
        }
    }
}

struct Schedule {
    initial: f64,
    floor: f64,
    total: usize,
}

impl Schedule {
    fn lr(&self, processed: usize) -> f64 {
        let progress = processed as f64 / self.total.max(1) as f64;
        (self.initial - (self.initial - self.floor) * progress).max(self.floor)
    }
}

fn encode(corpus: &[CleanPost], vocab: &Vocab) -> Vec<Vec<usize>> {
    corpus
        .iter()
        .map(|p| p.tokens.iter().filter_map(|t| vocab.id(t)).collect())
        .collect()
}

fn fill_context(sentence: &[usize], pos: usize, window: usize, out: &mut Vec<usize>) {
    out.clear();
    let lo = pos.saturating_sub(window);
    let hi = (pos + window + 1).min(sentence.len());
    out.extend_from_slice(&sentence[lo..pos]);
    out.extend_from_slice(&sentence[pos + 1..hi]);
}

fn trainable_positions(sentences: &[Vec<usize>]) -> usize {
    sentences.iter().filter(|s| s.len() > 1).map(Vec::len).sum()
}

/// Running loss totals for one epoch.
#[derive(Debug, Clone, Copy, Default)]
struct EpochLoss {
    sum: f64,
    positions: usize,
}

struct Worker<'a> {
    cfg: &'a EmbeddingConfig,
    sampler: &'a NoiseSampler,
    schedule: &'a Schedule,
    rng: ChaCha8Rng,
    grads: Gradients,
    context: Vec<usize>,
    negatives: Vec<usize>,
}

impl Worker<'_> {
    /// Trains over `sentences` once, advancing the shared progress counter.
    fn run_epoch<I: RowStore, O: RowStore>(
        &mut self,
        epoch: usize,
        sentences: &[Vec<usize>],
        first_sentence: usize,
        input: &mut I,
        output: &mut O,
        progress: &AtomicUsize,
    ) -> Result<EpochLoss> {
        let mut acc = EpochLoss::default();
        for (s, sentence) in sentences.iter().enumerate() {
            for pos in 0..sentence.len() {
                fill_context(sentence, pos, self.cfg.window, &mut self.context);
                if self.context.is_empty() {
                    continue;
                }
                let target = sentence[pos];
                self.sampler
                    .draw(self.cfg.negative_samples, target, &mut self.rng, &mut self.negatives);
                let lr = self.schedule.lr(progress.fetch_add(1, Ordering::Relaxed));
                let example = CbowExample {
                    context: &self.context,
                    target,
                    negatives: &self.negatives,
                };
                let loss = sgd_step(input, output, &example, lr, &mut self.grads);
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        stage: "cbow training",
                        at: format!("epoch {epoch}, post {}, position {pos}", first_sentence + s),
                    });
                }
                acc.sum += loss;
                acc.positions += 1;
            }
        }
        Ok(acc)
    }
}

fn init_vectors(vocab_len: usize, cfg: &EmbeddingConfig, rng: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    let half = 0.5 / cfg.dim as f64;
    let data = (0..vocab_len * cfg.dim)
        .map(|_| rng.gen_range(-half..half))
        .collect();
    let input = Matrix::from_vec(vocab_len, cfg.dim, data).expect("shape");
    (input, Matrix::zeros(vocab_len, cfg.dim))
}

fn epoch_means(losses: &[EpochLoss]) -> Vec<f64> {
    losses
        .iter()
        .map(|l| if l.positions == 0 { 0.0 } else { l.sum / l.positions as f64 })
        .collect()
}

/// Single-worker training; the result is a pure function of corpus order and
/// `cfg` (including its seed).
pub fn train_cbow(corpus: &[CleanPost], cfg: &EmbeddingConfig) -> Result<Trained<EmbeddingModel>> {
    train_cbow_with_workers(corpus, cfg, 1)
}

/// Trains with `workers` threads. With more than one worker, threads share the
/// parameters without locking and results are no longer reproducible.
pub fn train_cbow_with_workers(
    corpus: &[CleanPost],
    cfg: &EmbeddingConfig,
    workers: usize,
) -> Result<Trained<EmbeddingModel>> {
    cfg.validate()?;
    let vocab = build_vocab(corpus, cfg.min_count)?;
    let sentences = encode(corpus, &vocab);
    let sampler = NoiseSampler::new(&vocab);
    let schedule = Schedule {
        initial: cfg.initial_lr,
        floor: cfg.min_lr,
        total: trainable_positions(&sentences) * cfg.epochs,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut input, mut output) = init_vectors(vocab.len(), cfg, &mut rng);
    let progress = AtomicUsize::new(0);
    let workers = workers.max(1).min(sentences.len().max(1));

    let losses = if workers == 1 {
        let mut worker = Worker {
            cfg,
            sampler: &sampler,
            schedule: &schedule,
            rng,
            grads: Gradients::new(cfg.dim),
            context: Vec::new(),
            negatives: Vec::new(),
        };
        let mut losses = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            let l = worker.run_epoch(epoch, &sentences, 0, &mut input, &mut output, &progress)?;
            debug!("cbow epoch {epoch}: mean loss {:.6}", l.sum / l.positions.max(1) as f64);
            losses.push(l);
        }
        losses
    } else {
        let shared_in = SharedMatrix::from_matrix(&input);
        let shared_out = SharedMatrix::from_matrix(&output);
        let chunk = sentences.len().div_ceil(workers);
        let results: Vec<Result<Vec<EpochLoss>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .enumerate()
                .map(|(w, shard)| {
                    let (sampler, schedule, progress) = (&sampler, &schedule, &progress);
                    let (mut win, mut wout) = (&shared_in, &shared_out);
                    scope.spawn(move || {
                        let mut worker = Worker {
                            cfg,
                            sampler,
                            schedule,
                            rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(w as u64 + 1)),
                            grads: Gradients::new(cfg.dim),
                            context: Vec::new(),
                            negatives: Vec::new(),
                        };
                        (0..cfg.epochs)
                            .map(|epoch| {
                                worker.run_epoch(epoch, shard, w * chunk, &mut win, &mut wout, progress)
                            })
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("cbow worker panicked"))
                .collect()
        });
        let mut totals = vec![EpochLoss::default(); cfg.epochs];
        for per_worker in results {
            for (t, l) in totals.iter_mut().zip(per_worker?) {
                t.sum += l.sum;
                t.positions += l.positions;
            }
        }
        input = shared_in.into_matrix(vocab.len());
        output = shared_out.into_matrix(vocab.len());
        totals
    };

    if !(input.is_finite() && output.is_finite()) {
        return Err(Error::NonFiniteLoss {
            stage: "cbow training",
            at: "final parameters".into(),
        });
    }
    Ok(Trained {
        model: EmbeddingModel {
            config: *cfg,
            vocab,
            input_vectors: input,
            output_vectors: output,
        },
        loss_history: epoch_means(&losses),
    })
}
