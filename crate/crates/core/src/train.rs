//! Epoch loop for the conjoined model.
//!
//! GRAPH pairs step with `beta1`, TEXT pairs with `beta2`; both rates decay
//! linearly over the whole run. With one worker the run is bitwise
//! reproducible for a seed. With several workers the shuffled pair stream is
//! split into contiguous chunks that update shared tables without locks, so
//! results vary from run to run.

use std::sync::atomic::{AtomicU64, Ordering};

use log::{debug, info};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{step, Layout, ParamStore, SenseModel, StepRates, StepScratch, Variant};
use crate::rng::{derived, SenseRng};
use crate::sampler::{build_epoch, PairKind, SampleConfig, TrainingPair};
use crate::vocab::{EncodedDocs, NoiseTable, Vocab, DEFAULT_NOISE_POWER};

pub const DEFAULT_DIM: usize = 128;
pub const DEFAULT_EPOCHS: usize = 5;
pub const DEFAULT_NEGATIVES: usize = 5;
pub const DEFAULT_BETA1: f64 = 0.025;
pub const DEFAULT_BETA2: f64 = 0.0125;
/// Running loss is reported as the mean over blocks of this many pairs.
pub const LOSS_BLOCK: usize = 10_000;
const MIN_RATE_FACTOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub variant: Variant,
    pub epochs: usize,
    pub negatives: usize,
    /// Rate for GRAPH pairs.
    pub beta1: f64,
    /// Rate for TEXT pairs.
    pub beta2: f64,
    pub lr_decay: bool,
    pub noise_power: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: DEFAULT_DIM,
            variant: Variant::Add,
            epochs: DEFAULT_EPOCHS,
            negatives: DEFAULT_NEGATIVES,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            lr_decay: true,
            noise_power: DEFAULT_NOISE_POWER,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > self.beta2 && self.beta2 > 0.0) {
            return Err(Error::Config(format!(
                "learning rates must satisfy beta1 > beta2 > 0 (got beta1 = {}, beta2 = {})",
                self.beta1, self.beta2
            )));
        }
        if self.negatives < 1 {
            return Err(Error::Config("need at least one negative sample".into()));
        }
        if self.dim < 1 || self.epochs < 1 || self.threads < 1 {
            return Err(Error::Config("dim, epochs and threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rates(&self) -> StepRates {
        StepRates {
            graph: self.beta1,
            text: self.beta2,
        }
    }

    /// Multiplier on both rates after `progress` (0..1) of the run.
    pub fn decay(&self, progress: f64) -> f64 {
        if self.lr_decay {
            (1.0 - progress).max(MIN_RATE_FACTOR)
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean pair loss of each epoch.
    pub epoch_mean_loss: Vec<f64>,
    /// Mean pair loss of each consecutive block of [`LOSS_BLOCK`] pairs.
    pub running_loss: Vec<f64>,
    pub pairs_per_epoch: Vec<usize>,
}

struct LossTracker {
    block_sum: f64,
    block_len: usize,
    report: TrainReport,
}

impl LossTracker {
    fn push(&mut self, loss: f64) {
        self.block_sum += loss;
        self.block_len += 1;
        if self.block_len == LOSS_BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.block_len > 0 {
            let mean = self.block_sum / self.block_len as f64;
            debug!("running loss {mean:.5}");
            self.report.running_loss.push(mean);
        }
        self.block_sum = 0.0;
        self.block_len = 0;
    }
}

/// Trains a model on pairs drawn fresh every epoch.
///
/// `vocab` may be `None` when the mode uses no text.
pub fn train(
    graph: &Graph,
    docs: &EncodedDocs,
    vocab: Option<&Vocab>,
    sample: &SampleConfig,
    cfg: &TrainConfig,
) -> Result<(SenseModel, TrainReport)> {
    cfg.validate()?;
    sample.validate()?;
    let use_text = sample.mode.uses_text() && vocab.is_some();
    if sample.mode.uses_text() && vocab.is_none() {
        return Err(Error::Config("text training needs a vocabulary".into()));
    }
    let n_words = if use_text { vocab.map_or(0, Vocab::len) } else { 0 };
    if use_text && docs.seqs.len() != graph.node_count() {
        return Err(Error::Data(format!(
            "{} documents for {} nodes",
            docs.seqs.len(),
            graph.node_count()
        )));
    }
    let word_noise = match vocab {
        Some(v) if use_text => Some(v.word_noise(cfg.noise_power)?),
        _ => None,
    };

    let mut init_rng = derived(cfg.seed, &[0]);
    let mut model = SenseModel::init(n_words, graph.node_count(), cfg.dim, cfg.variant, &mut init_rng)?;
    let mut tracker = LossTracker {
        block_sum: 0.0,
        block_len: 0,
        report: TrainReport::default(),
    };
    if cfg.threads > 1 {
        log::warn!(
            "training with {} threads: updates race and results are not reproducible",
            cfg.threads
        );
    }

    for epoch in 0..cfg.epochs {
        let mut epoch_rng = derived(cfg.seed, &[1, epoch as u64]);
        let batch = build_epoch(graph, docs, vocab.filter(|_| use_text), sample, &mut epoch_rng);
        if batch.pairs.is_empty() {
            return Err(Error::NoPairs);
        }
        let node_noise = if batch.pairs.iter().any(|p| p.kind() == PairKind::Graph) {
            Some(NoiseTable::new(&batch.node_visits, cfg.noise_power)?)
        } else {
            None
        };
        let noise = Noise {
            word: word_noise.as_ref(),
            node: node_noise.as_ref(),
        };
        let epoch_start = epoch as f64 / cfg.epochs as f64;
        let epoch_span = 1.0 / cfg.epochs as f64;

        let losses = if cfg.threads == 1 {
            let mut rng = derived(cfg.seed, &[2, epoch as u64]);
            run_serial(&mut model, &batch.pairs, &noise, cfg, epoch_start, epoch_span, &mut rng)
        } else {
            run_hogwild(&mut model, &batch.pairs, &noise, cfg, epoch, epoch_start, epoch_span)
        };
        let mut sum = 0.0;
        for &l in &losses {
            sum += l;
            tracker.push(l);
        }
        let mean = sum / losses.len() as f64;
        info!("epoch {}: {} pairs, mean loss {mean:.5}", epoch + 1, losses.len());
        tracker.report.epoch_mean_loss.push(mean);
        tracker.report.pairs_per_epoch.push(losses.len());
    }
    tracker.flush();
    Ok((model, tracker.report))
}

struct Noise<'a> {
    word: Option<&'a NoiseTable>,
    node: Option<&'a NoiseTable>,
}

impl Noise<'_> {
    fn draw(&self, pair: &TrainingPair, k: usize, rng: &mut SenseRng, out: &mut Vec<usize>) {
        let (table, exclude) = match pair.target() {
            crate::sampler::Target::Word(w) => (self.word, w as usize),
            crate::sampler::Target::Node(v) => (self.node, v as usize),
        };
        match table {
            Some(t) => t.sample_negatives(rng, k, exclude, out),
            None => out.clear(),
        }
    }
}

fn run_serial(
    model: &mut SenseModel,
    pairs: &[TrainingPair],
    noise: &Noise<'_>,
    cfg: &TrainConfig,
    epoch_start: f64,
    epoch_span: f64,
    rng: &mut SenseRng,
) -> Vec<f64> {
    let layout = model.layout();
    let base = cfg.rates();
    let mut scratch = StepScratch::new(layout.variant.out_dim(layout.dim), cfg.negatives);
    let mut negatives = Vec::with_capacity(cfg.negatives);
    let (word_in, node_in, out) = model.tables_mut();
    let (word_in, node_in, out) = (word_in.as_mut_slice(), node_in.as_mut_slice(), out.as_mut_slice());
    let total = pairs.len() as f64;
    let mut losses = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let progress = epoch_start + epoch_span * i as f64 / total;
        let rate = base.for_kind(pair.kind()) * cfg.decay(progress);
        noise.draw(pair, cfg.negatives, rng, &mut negatives);
        losses.push(step(
            &layout,
            word_in,
            node_in,
            out,
            pair,
            &negatives,
            rate,
            &mut scratch,
        ));
    }
    losses
}

/// Shared `f64` table updated without synchronization.
struct AtomicTable(Vec<AtomicU64>);

impl AtomicTable {
    fn from_slice(values: &[f64]) -> Self {
        AtomicTable(values.iter().map(|v| AtomicU64::new(v.to_bits())).collect())
    }

    fn write_back(&self, dst: &mut [f64]) {
        for (d, a) in dst.iter_mut().zip(&self.0) {
            *d = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }
}

struct AtomicView<'a>(&'a [AtomicU64]);

impl ParamStore for AtomicView<'_> {
    fn read(&self, start: usize, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.0[start..]) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    // load and store are separate: concurrent writers may lose updates
    fn add(&mut self, start: usize, alpha: f64, x: &[f64]) {
        for (a, xi) in self.0[start..start + x.len()].iter().zip(x) {
            let v = f64::from_bits(a.load(Ordering::Relaxed)) + alpha * xi;
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

fn run_hogwild(
    model: &mut SenseModel,
    pairs: &[TrainingPair],
    noise: &Noise<'_>,
    cfg: &TrainConfig,
    epoch: usize,
    epoch_start: f64,
    epoch_span: f64,
) -> Vec<f64> {
    let layout: Layout = model.layout();
    let base = cfg.rates();
    let (word_in, node_in, out) = model.tables_mut();
    let shared = [
        AtomicTable::from_slice(word_in.as_slice()),
        AtomicTable::from_slice(node_in.as_slice()),
        AtomicTable::from_slice(out.as_slice()),
    ];
    let chunk = pairs.len().div_ceil(cfg.threads);
    let losses: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(chunk.max(1))
            .enumerate()
            .map(|(t, part)| {
                let shared = &shared;
                scope.spawn(move || {
                    let mut rng = derived(cfg.seed, &[3, epoch as u64, t as u64]);
                    let mut w = AtomicView(&shared[0].0);
                    let mut n = AtomicView(&shared[1].0);
                    let mut o = AtomicView(&shared[2].0);
                    let mut scratch = StepScratch::new(layout.variant.out_dim(layout.dim), cfg.negatives);
                    let mut negatives = Vec::with_capacity(cfg.negatives);
                    let len = part.len() as f64;
                    part.iter()
                        .enumerate()
                        .map(|(i, pair)| {
                            // every worker sweeps the epoch's span at the same pace
                            let progress = epoch_start + epoch_span * i as f64 / len;
                            let rate = base.for_kind(pair.kind()) * cfg.decay(progress);
                            noise.draw(pair, cfg.negatives, &mut rng, &mut negatives);
                            step(&layout, &mut w, &mut n, &mut o, pair, &negatives, rate, &mut scratch)
                        })
                        .collect::<Vec<f64>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .collect()
    });
    shared[0].write_back(word_in.as_mut_slice());
    shared[1].write_back(node_in.as_mut_slice());
    shared[2].write_back(out.as_mut_slice());
    losses.concat()
}
