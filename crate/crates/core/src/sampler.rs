//! Training-pair generation.
//!
//! GRAPH pairs come from second-order biased random walks windowed like a
//! sentence; TEXT pairs come from sliding windows over each node's document
//! after frequency subsampling.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{derived, SenseRng};
use crate::vocab::{EncodedDocs, Vocab};

pub const DEFAULT_WALKS_PER_NODE: usize = 10;
pub const DEFAULT_WALK_LENGTH: usize = 80;
pub const DEFAULT_NODE_WINDOW: usize = 10;
pub const DEFAULT_TEXT_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    /// Return parameter: weight `1/p` for stepping back to the previous node.
    pub return_param: f64,
    /// In-out parameter: weight `1/q` for moving away from the previous node.
    pub inout_param: f64,
    pub node_window: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: DEFAULT_WALKS_PER_NODE,
            walk_length: DEFAULT_WALK_LENGTH,
            return_param: 1.0,
            inout_param: 1.0,
            node_window: DEFAULT_NODE_WINDOW,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 {
            return Err(Error::Config("walks per node must be at least 1".into()));
        }
        if self.walk_length < 2 {
            return Err(Error::Config("walk length must be at least 2".into()));
        }
        if self.node_window < 1 {
            return Err(Error::Config("node window must be at least 1".into()));
        }
        if !(self.return_param > 0.0 && self.inout_param > 0.0) {
            return Err(Error::Config("walk parameters p and q must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    Text,
    Graph,
}

/// Prediction target. Word ids live in `0..w`, node ids in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Word(u32),
    Node(u32),
}

/// One SGD sample.
///
/// TEXT pairs always carry an input word and a word target; GRAPH pairs carry
/// no word and a node target. The constructors are the only way to build one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainingPair {
    input_word: Option<u32>,
    input_node: u32,
    target: Target,
}

impl TrainingPair {
    pub fn text(word: usize, node: usize, context_word: usize) -> Self {
        TrainingPair {
            input_word: Some(word as u32),
            input_node: node as u32,
            target: Target::Word(context_word as u32),
        }
    }

    pub fn graph(node: usize, context_node: usize) -> Self {
        TrainingPair {
            input_word: None,
            input_node: node as u32,
            target: Target::Node(context_node as u32),
        }
    }

    pub fn input_word(&self) -> Option<usize> {
        self.input_word.map(|w| w as usize)
    }

    pub fn input_node(&self) -> usize {
        self.input_node as usize
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn kind(&self) -> PairKind {
        match self.target {
            Target::Word(_) => PairKind::Text,
            Target::Node(_) => PairKind::Graph,
        }
    }
}

/// Which pair kinds an epoch produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    #[default]
    Joint,
    GraphOnly,
    TextOnly,
}

impl TrainMode {
    pub fn uses_graph(self) -> bool {
        self != TrainMode::TextOnly
    }

    pub fn uses_text(self) -> bool {
        self != TrainMode::GraphOnly
    }
}

/// Second-order biased walk of at most `walk_length` nodes.
///
/// Stops early at a node without out-neighbors.
pub fn random_walk<R: Rng + ?Sized>(graph: &Graph, start: usize, cfg: &WalkConfig, rng: &mut R) -> Vec<usize> {
    let mut walk = Vec::with_capacity(cfg.walk_length);
    let mut weights = Vec::new();
    walk.push(start);
    let unbiased = cfg.return_param == 1.0 && cfg.inout_param == 1.0;
    while walk.len() < cfg.walk_length {
        let cur = *walk.last().unwrap();
        let nbrs = graph.out_neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        let next = if walk.len() == 1 || unbiased {
            nbrs[rng.random_range(0..nbrs.len())]
        } else {
            let prev = walk[walk.len() - 2];
            weights.clear();
            weights.extend(nbrs.iter().map(|&x| {
                if x == prev {
                    1.0 / cfg.return_param
                } else if graph.has_arc(prev, x) {
                    1.0
                } else {
                    1.0 / cfg.inout_param
                }
            }));
            nbrs[pick_weighted(&weights, rng)]
        };
        walk.push(next);
    }
    walk
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Visits every `(center, context)` pair within `window` positions of each other.
pub fn for_each_window_pair(len: usize, window: usize, mut f: impl FnMut(usize, usize)) {
    for i in 0..len {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(len.saturating_sub(1));
        for j in lo..=hi {
            if j != i {
                f(i, j);
            }
        }
    }
}

/// Number of pairs [`node_pairs`] emits for a sequence of length `len`.
pub fn window_pair_count(len: usize, window: usize) -> usize {
    let mut count = 0;
    for_each_window_pair(len, window, |_, _| count += 1);
    count
}

pub fn node_pairs(walk: &[usize], node_window: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for_each_window_pair(walk.len(), node_window, |i, j| out.push((walk[i], walk[j])));
    out
}

/// TEXT pairs of one node's document after subsampling.
pub fn word_pairs<R: Rng + ?Sized>(
    doc: &[usize],
    node: usize,
    text_window: usize,
    vocab: &Vocab,
    rng: &mut R,
) -> Vec<TrainingPair> {
    let kept: Vec<usize> = doc
        .iter()
        .copied()
        .filter(|&w| {
            let p = vocab.keep_prob(w);
            p >= 1.0 || rng.random::<f64>() < p
        })
        .collect();
    let mut out = Vec::new();
    for_each_window_pair(kept.len(), text_window, |i, j| {
        out.push(TrainingPair::text(kept[i], node, kept[j]))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub walk: WalkConfig,
    pub text_window: usize,
    pub mode: TrainMode,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            walk: WalkConfig::default(),
            text_window: DEFAULT_TEXT_WINDOW,
            mode: TrainMode::Joint,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        self.walk.validate()?;
        if self.text_window < 1 {
            return Err(Error::Config("text window must be at least 1".into()));
        }
        Ok(())
    }
}

/// One epoch's shuffled training pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub pairs: Vec<TrainingPair>,
    /// Occurrences of each node across this epoch's walks.
    pub node_visits: Vec<u64>,
}

/// Generates and shuffles one epoch of pairs.
///
/// Walks and subsampling for each node use a sub-stream derived from a seed
/// drawn from `rng`, so the output does not depend on the rayon pool size.
pub fn build_epoch(
    graph: &Graph,
    docs: &EncodedDocs,
    vocab: Option<&Vocab>,
    cfg: &SampleConfig,
    rng: &mut SenseRng,
) -> Epoch {
    let n = graph.node_count();
    let base: u64 = rng.random();
    let mut node_visits = vec![0u64; n];

    let mut pairs: Vec<TrainingPair> = Vec::new();
    if cfg.mode.uses_graph() {
        let walks: Vec<Vec<Vec<usize>>> = (0..n)
            .into_par_iter()
            .map(|start| {
                let mut r = derived(base, &[0, start as u64]);
                (0..cfg.walk.walks_per_node)
                    .map(|_| random_walk(graph, start, &cfg.walk, &mut r))
                    .collect()
            })
            .collect();
        for walk in walks.iter().flatten() {
            for &v in walk {
                node_visits[v] += 1;
            }
            for_each_window_pair(walk.len(), cfg.walk.node_window, |i, j| {
                pairs.push(TrainingPair::graph(walk[i], walk[j]))
            });
        }
    }
    if cfg.mode.uses_text() {
        if let Some(vocab) = vocab {
            let text: Vec<Vec<TrainingPair>> = docs
                .seqs
                .par_iter()
                .enumerate()
                .map(|(node, doc)| {
                    let mut r = derived(base, &[1, node as u64]);
                    word_pairs(doc, node, cfg.text_window, vocab, &mut r)
                })
                .collect();
            pairs.extend(text.into_iter().flatten());
        }
    }
    pairs.shuffle(rng);
    Epoch { pairs, node_visits }
}
