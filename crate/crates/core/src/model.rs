//! The conjoined skip-gram network.
//!
//! A word row and a node row are combined into one hidden vector, either by
//! addition (`Variant::Add`, hidden size `d`) or by concatenation
//! (`Variant::Concat`, hidden size `2d`). One output table holds a vector for
//! every word target followed by every node target: word `i` is output row
//! `i`, node `j` is output row `w + j`.
//!
//! Training uses negative sampling: the true target is pushed towards the
//! hidden vector and a few noise targets from the same target space are
//! pushed away.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};
use crate::sampler::{PairKind, Target, TrainingPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Add,
    Concat,
}

impl Variant {
    pub fn out_dim(self, dim: usize) -> usize {
        match self {
            Variant::Add => dim,
            Variant::Concat => 2 * dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenseModel {
    variant: Variant,
    dim: usize,
    word_in: Matrix,
    node_in: Matrix,
    out: Matrix,
}

/// Exact gradients of one pair's loss.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub loss: f64,
    pub hidden: Vec<f64>,
    pub grad_hidden: Vec<f64>,
    /// Gradient for the input word row; absent for GRAPH pairs.
    pub word_row: Option<(usize, Vec<f64>)>,
    pub node_row: (usize, Vec<f64>),
    /// Gradient per output row (global target index), duplicates merged.
    pub out_rows: Vec<(usize, Vec<f64>)>,
}

/// Learning rates for the two pair kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRates {
    pub graph: f64,
    pub text: f64,
}

impl StepRates {
    pub fn for_kind(&self, kind: PairKind) -> f64 {
        match kind {
            PairKind::Graph => self.graph,
            PairKind::Text => self.text,
        }
    }

    pub fn scaled(&self, factor: f64) -> StepRates {
        StepRates {
            graph: self.graph * factor,
            text: self.text * factor,
        }
    }
}

/// `ln σ(z)` without overflow.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl SenseModel {
    /// Input rows uniform on `[-0.5/d, 0.5/d]`, output rows zero.
    pub fn init<R: Rng + ?Sized>(
        n_words: usize,
        n_nodes: usize,
        dim: usize,
        variant: Variant,
        rng: &mut R,
    ) -> Result<Self> {
        if n_nodes == 0 || dim == 0 {
            return Err(Error::Config("model needs at least one node and one dimension".into()));
        }
        let bound = 0.5 / dim as f64;
        let mut uniform =
            |len: usize| -> Vec<f64> { (0..len).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * bound).collect() };
        let word_in = Matrix::from_vec(n_words, dim, uniform(n_words * dim));
        let node_in = Matrix::from_vec(n_nodes, dim, uniform(n_nodes * dim));
        let out = Matrix::zeros(n_words + n_nodes, variant.out_dim(dim));
        Ok(SenseModel {
            variant,
            dim,
            word_in,
            node_in,
            out,
        })
    }

    pub fn from_parts(variant: Variant, word_in: Matrix, node_in: Matrix, out: Matrix) -> Result<Self> {
        let dim = node_in.cols();
        if word_in.cols() != dim && word_in.rows() > 0 {
            return Err(Error::Dimension {
                expected: dim,
                actual: word_in.cols(),
            });
        }
        if out.cols() != variant.out_dim(dim) {
            return Err(Error::Dimension {
                expected: variant.out_dim(dim),
                actual: out.cols(),
            });
        }
        if out.rows() != word_in.rows() + node_in.rows() {
            return Err(Error::Dimension {
                expected: word_in.rows() + node_in.rows(),
                actual: out.rows(),
            });
        }
        Ok(SenseModel {
            variant,
            dim,
            word_in,
            node_in,
            out,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn out_dim(&self) -> usize {
        self.variant.out_dim(self.dim)
    }

    pub fn n_words(&self) -> usize {
        self.word_in.rows()
    }

    pub fn n_nodes(&self) -> usize {
        self.node_in.rows()
    }

    pub fn word_in(&self) -> &Matrix {
        &self.word_in
    }

    pub fn node_in(&self) -> &Matrix {
        &self.node_in
    }

    pub fn out_table(&self) -> &Matrix {
        &self.out
    }

    pub fn word_in_mut(&mut self) -> &mut Matrix {
        &mut self.word_in
    }

    pub fn node_in_mut(&mut self) -> &mut Matrix {
        &mut self.node_in
    }

    pub fn out_table_mut(&mut self) -> &mut Matrix {
        &mut self.out
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut Matrix, &mut Matrix, &mut Matrix) {
        (&mut self.word_in, &mut self.node_in, &mut self.out)
    }

    /// Output row of a target.
    pub fn target_index(&self, target: Target) -> usize {
        match target {
            Target::Word(w) => w as usize,
            Target::Node(v) => self.n_words() + v as usize,
        }
    }

    fn check_pair(&self, pair: &TrainingPair) -> Result<()> {
        if pair.input_node() >= self.n_nodes() {
            return Err(Error::Data(format!("node {} out of range", pair.input_node())));
        }
        if let Some(w) = pair.input_word() {
            if w >= self.n_words() {
                return Err(Error::Data(format!("word {w} out of range")));
            }
        }
        let bound = match pair.target() {
            Target::Word(w) => (w as usize, self.n_words()),
            Target::Node(v) => (v as usize, self.n_nodes()),
        };
        if bound.0 >= bound.1 {
            return Err(Error::Data(format!("target {:?} out of range", pair.target())));
        }
        Ok(())
    }

    /// Hidden vector for an input; a missing word contributes zeros.
    pub fn hidden(&self, input_word: Option<usize>, input_node: usize) -> Vec<f64> {
        let node = self.node_in.row(input_node);
        let zeros;
        let word = match input_word {
            Some(w) => self.word_in.row(w),
            None => {
                zeros = vec![0.0; self.dim];
                &zeros
            }
        };
        match self.variant {
            Variant::Add => word.iter().zip(node).map(|(a, b)| a + b).collect(),
            Variant::Concat => [word, node].concat(),
        }
    }

    /// Separate softmaxes over word targets and node targets.
    pub fn full_output_probs(&self, hidden: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if hidden.len() != self.out_dim() {
            return Err(Error::Dimension {
                expected: self.out_dim(),
                actual: hidden.len(),
            });
        }
        let logits: Vec<f64> = self.out.iter_rows().map(|u| dot(u, hidden)).collect();
        let (words, nodes) = logits.split_at(self.n_words());
        let h1 = if words.is_empty() { Vec::new() } else { softmax(words) };
        Ok((h1, softmax(nodes)))
    }

    /// Negative-sampling loss of one pair and its exact gradients.
    ///
    /// `negatives` are ids in the pair's target space (word ids for TEXT
    /// pairs, node ids for GRAPH pairs).
    pub fn pair_loss_and_grads(&self, pair: &TrainingPair, negatives: &[usize]) -> Result<PairGradients> {
        self.check_pair(pair)?;
        let space = match pair.kind() {
            PairKind::Text => self.n_words(),
            PairKind::Graph => self.n_nodes(),
        };
        if let Some(&bad) = negatives.iter().find(|&&j| j >= space) {
            return Err(Error::Data(format!("negative {bad} out of range {space}")));
        }
        let offset = match pair.kind() {
            PairKind::Text => 0,
            PairKind::Graph => self.n_words(),
        };
        let hidden = self.hidden(pair.input_word(), pair.input_node());
        let od = self.out_dim();
        let mut grad_hidden = vec![0.0; od];
        let mut out_rows: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut loss = 0.0;

        let targets = std::iter::once((self.target_index(pair.target()), 1.0))
            .chain(negatives.iter().map(|&j| (offset + j, 0.0)));
        for (t, label) in targets {
            let u = self.out.row(t);
            let z = dot(u, &hidden);
            // d/dz of -ln σ(z) is σ(z) - 1; of -ln σ(-z) is σ(z)
            let g = sigmoid(z) - label;
            loss -= if label == 1.0 { log_sigmoid(z) } else { log_sigmoid(-z) };
            axpy(g, u, &mut grad_hidden);
            match out_rows.iter_mut().find(|(i, _)| *i == t) {
                Some((_, acc)) => axpy(g, &hidden, acc),
                None => out_rows.push((t, hidden.iter().map(|h| g * h).collect())),
            }
        }

        let d = self.dim;
        let (word_part, node_part) = match self.variant {
            Variant::Add => (grad_hidden.clone(), grad_hidden.clone()),
            Variant::Concat => (grad_hidden[..d].to_vec(), grad_hidden[d..].to_vec()),
        };
        let word_row = pair.input_word().map(|w| (w, word_part));
        Ok(PairGradients {
            loss,
            hidden,
            grad_hidden,
            word_row,
            node_row: (pair.input_node(), node_part),
            out_rows,
        })
    }

    /// One plain gradient step; returns the pair's loss before the update.
    ///
    /// The rate is chosen by pair kind. All gradients are evaluated at the
    /// current parameters before any row changes.
    pub fn sgd_step(&mut self, pair: &TrainingPair, negatives: &[usize], rates: &StepRates) -> Result<f64> {
        self.check_pair(pair)?;
        let mut scratch = StepScratch::new(self.out_dim(), negatives.len());
        let layout = self.layout();
        let rate = rates.for_kind(pair.kind());
        let (w, n, o) = self.tables_mut();
        Ok(step(
            &layout,
            w.as_mut_slice(),
            n.as_mut_slice(),
            o.as_mut_slice(),
            pair,
            negatives,
            rate,
            &mut scratch,
        ))
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout {
            variant: self.variant,
            dim: self.dim,
            n_words: self.n_words(),
        }
    }

    /// The node input rows, optionally scaled to unit norm.
    ///
    /// Returns the matrix and the indices of rows that were all zero (left zero).
    pub fn node_embeddings(&self, normalize: bool) -> (Matrix, Vec<usize>) {
        let mut m = self.node_in.clone();
        let zero = if normalize {
            m.normalize_rows()
        } else {
            m.iter_rows()
                .enumerate()
                .filter(|(_, r)| r.iter().all(|&x| x == 0.0))
                .map(|(i, _)| i)
                .collect()
        };
        (m, zero)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub variant: Variant,
    pub dim: usize,
    pub n_words: usize,
}

impl Layout {
    fn out_dim(&self) -> usize {
        self.variant.out_dim(self.dim)
    }
}

/// Flat parameter storage the step kernel reads and updates row by row.
pub(crate) trait ParamStore {
    fn read(&self, start: usize, out: &mut [f64]);
    fn add(&mut self, start: usize, alpha: f64, x: &[f64]);
}

impl ParamStore for [f64] {
    #[inline]
    fn read(&self, start: usize, out: &mut [f64]) {
        out.copy_from_slice(&self[start..start + out.len()]);
    }

    #[inline]
    fn add(&mut self, start: usize, alpha: f64, x: &[f64]) {
        axpy(alpha, x, &mut self[start..start + x.len()]);
    }
}

/// Reusable buffers for [`step`].
#[derive(Debug, Clone)]
pub(crate) struct StepScratch {
    word: Vec<f64>,
    node: Vec<f64>,
    hidden: Vec<f64>,
    grad_hidden: Vec<f64>,
    outs: Vec<f64>,
    targets: Vec<(usize, f64)>,
    coeffs: Vec<f64>,
}

impl StepScratch {
    pub fn new(out_dim: usize, negatives: usize) -> Self {
        StepScratch {
            word: Vec::new(),
            node: Vec::new(),
            hidden: vec![0.0; out_dim],
            grad_hidden: vec![0.0; out_dim],
            outs: Vec::with_capacity((negatives + 1) * out_dim),
            targets: Vec::with_capacity(negatives + 1),
            coeffs: Vec::with_capacity(negatives + 1),
        }
    }
}

/// Gradient step on one pair against any parameter store; returns the loss.
#[allow(clippy::too_many_arguments)]
pub(crate) fn step<S: ParamStore + ?Sized>(
    layout: &Layout,
    word_in: &mut S,
    node_in: &mut S,
    out: &mut S,
    pair: &TrainingPair,
    negatives: &[usize],
    rate: f64,
    s: &mut StepScratch,
) -> f64 {
    let d = layout.dim;
    let od = layout.out_dim();
    s.word.resize(d, 0.0);
    s.node.resize(d, 0.0);
    s.hidden.resize(od, 0.0);
    s.grad_hidden.clear();
    s.grad_hidden.resize(od, 0.0);

    node_in.read(pair.input_node() * d, &mut s.node);
    match pair.input_word() {
        Some(w) => word_in.read(w * d, &mut s.word),
        None => s.word.iter_mut().for_each(|x| *x = 0.0),
    }
    match layout.variant {
        Variant::Add => {
            for ((h, a), b) in s.hidden.iter_mut().zip(&s.word).zip(&s.node) {
                *h = a + b;
            }
        }
        Variant::Concat => {
            s.hidden[..d].copy_from_slice(&s.word);
            s.hidden[d..].copy_from_slice(&s.node);
        }
    }

    let (true_target, offset) = match pair.target() {
        Target::Word(w) => (w as usize, 0),
        Target::Node(v) => (layout.n_words + v as usize, layout.n_words),
    };
    s.targets.clear();
    s.targets.push((true_target, 1.0));
    s.targets.extend(negatives.iter().map(|&j| (offset + j, 0.0)));

    // read every output row before touching any of them
    s.outs.resize(s.targets.len() * od, 0.0);
    for (k, &(t, _)) in s.targets.iter().enumerate() {
        out.read(t * od, &mut s.outs[k * od..(k + 1) * od]);
    }

    let mut loss = 0.0;
    s.coeffs.clear();
    for (k, &(_, label)) in s.targets.iter().enumerate() {
        let u = &s.outs[k * od..(k + 1) * od];
        let z = dot(u, &s.hidden);
        loss -= if label == 1.0 { log_sigmoid(z) } else { log_sigmoid(-z) };
        let g = sigmoid(z) - label;
        axpy(g, u, &mut s.grad_hidden);
        s.coeffs.push(g);
    }

    if rate != 0.0 {
        for (&(t, _), &g) in s.targets.iter().zip(&s.coeffs) {
            out.add(t * od, -rate * g, &s.hidden);
        }
        let (word_grad, node_grad) = match layout.variant {
            Variant::Add => (&s.grad_hidden[..], &s.grad_hidden[..]),
            Variant::Concat => (&s.grad_hidden[..d], &s.grad_hidden[d..]),
        };
        if let Some(w) = pair.input_word() {
            word_in.add(w * d, -rate, word_grad);
        }
        node_in.add(pair.input_node() * d, -rate, node_grad);
    }
    loss
}
