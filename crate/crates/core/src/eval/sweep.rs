//! Exact-recovery rate of encode -> decode over a grid of dimensions and
//! sequence lengths.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::rng::derived;
use crate::sampler::{random_walk, WalkConfig};
use crate::seq::{decode, encode, EmbeddingTable};
use crate::theory::random_unit_vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceMode {
    /// Every position drawn uniformly from all nodes; repeats allowed.
    RandomNodes,
    /// Prefixes of unbiased random walks from uniform start nodes.
    RandomWalk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeExperiment {
    pub mode: SequenceMode,
    pub dims: Vec<usize>,
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// Where node vectors come from.
pub enum TableSource<'a> {
    /// Fresh random unit rows for `n` nodes at every dimension.
    Random { n: usize },
    /// Fixed tables, one per dimension, for nodes of `graph`.
    Trained {
        graph: &'a Graph,
        tables: &'a [EmbeddingTable],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub dim: usize,
    pub length: usize,
    /// Fraction of sequences recovered exactly at every position; `None` when skipped.
    pub accuracy: Option<f64>,
    pub trials: usize,
    pub note: Option<String>,
}

impl SweepCell {
    /// Binomial standard error of the accuracy.
    pub fn std_error(&self) -> f64 {
        match self.accuracy {
            Some(p) if self.trials > 0 => (p * (1.0 - p) / self.trials as f64).sqrt(),
            _ => 0.0,
        }
    }
}

/// Table of `n` random unit rows.
pub fn random_table(n: usize, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| random_unit_vector(dim, &mut derived(seed, &[20, dim as u64, i as u64])))
        .collect();
    EmbeddingTable::from_unit_rows(Matrix::from_rows(&rows))
}

fn draw_sequence<R: Rng>(
    mode: SequenceMode,
    n: usize,
    graph: Option<&Graph>,
    length: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    match (mode, graph) {
        (SequenceMode::RandomNodes, _) => Some((0..length).map(|_| rng.random_range(0..n)).collect()),
        (SequenceMode::RandomWalk, Some(g)) => {
            let cfg = WalkConfig {
                walks_per_node: 1,
                walk_length: length,
                return_param: 1.0,
                inout_param: 1.0,
                node_window: 1,
            };
            // sinks cut walks short; retry from fresh starts
            (0..1000).find_map(|_| {
                let w = random_walk(g, rng.random_range(0..g.node_count()), &cfg, rng);
                (w.len() == length).then_some(w)
            })
        }
        (SequenceMode::RandomWalk, None) => None,
    }
}

fn run_cell(
    table: &EmbeddingTable,
    graph: Option<&Graph>,
    exp: &DecodeExperiment,
    dim: usize,
    length: usize,
) -> SweepCell {
    let outcomes: Vec<Option<bool>> = (0..exp.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = derived(exp.seed, &[21, dim as u64, length as u64, t as u64]);
            let seq = draw_sequence(exp.mode, table.len(), graph, length, &mut rng)?;
            let encoded = encode(&seq, table).ok()?;
            let decoded = decode(&encoded, table).ok()?;
            Some(decoded.iter().map(|d| d.0).eq(seq.iter().copied()))
        })
        .collect();
    if outcomes.iter().any(Option::is_none) {
        return SweepCell {
            dim,
            length,
            accuracy: None,
            trials: exp.trials,
            note: Some(format!("could not draw sequences of length {length}")),
        };
    }
    let hits = outcomes.iter().filter(|o| **o == Some(true)).count();
    SweepCell {
        dim,
        length,
        accuracy: Some(hits as f64 / exp.trials as f64),
        trials: exp.trials,
        note: None,
    }
}

/// Runs every `(dim, length)` cell; cells with `length > dim` are skipped with a note.
pub fn decoding_sweep(exp: &DecodeExperiment, source: &TableSource<'_>) -> Result<Vec<SweepCell>> {
    if exp.trials < 1 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if exp.mode == SequenceMode::RandomWalk && matches!(source, TableSource::Random { .. }) {
        return Err(Error::Config("walk sequences need a graph and trained tables".into()));
    }
    let mut cells = Vec::new();
    for &dim in &exp.dims {
        let (table, graph) = match source {
            TableSource::Random { n } => (Some(random_table(*n, dim, exp.seed)?), None),
            TableSource::Trained { graph, tables } => (tables.iter().find(|t| t.dim() == dim).cloned(), Some(*graph)),
        };
        for &length in &exp.lengths {
            let skip = |note: String| SweepCell {
                dim,
                length,
                accuracy: None,
                trials: exp.trials,
                note: Some(note),
            };
            let Some(table) = table.as_ref() else {
                cells.push(skip(format!("no table of dimension {dim}")));
                continue;
            };
            if length < 1 || length > dim {
                cells.push(skip(format!("length {length} outside [1, {dim}]")));
                continue;
            }
            cells.push(run_cell(table, graph, exp, dim, length));
        }
    }
    Ok(cells)
}

/// Checks that accuracy does not rise with length beyond `sigmas` standard errors.
///
/// Returns the offending `(dim, shorter length, longer length)` triples.
pub fn monotonicity_violations(cells: &[SweepCell], sigmas: f64) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut dims: Vec<usize> = cells.iter().map(|c| c.dim).collect();
    dims.dedup();
    for dim in dims {
        let mut row: Vec<&SweepCell> = cells.iter().filter(|c| c.dim == dim && c.accuracy.is_some()).collect();
        row.sort_by_key(|c| c.length);
        for w in row.windows(2) {
            let (a, b) = (w[0], w[1]);
            let band = sigmas * (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
            if b.accuracy.unwrap() > a.accuracy.unwrap() + band {
                out.push((dim, a.length, b.length));
            }
        }
    }
    out
}

pub fn write_sweep_csv<W: Write>(mut w: W, cells: &[SweepCell]) -> std::io::Result<()> {
    writeln!(w, "dim,length,accuracy,trials")?;
    for c in cells {
        match c.accuracy {
            Some(a) => writeln!(w, "{},{},{:.6},{}", c.dim, c.length, a, c.trials)?,
            None => writeln!(w, "{},{},,{}", c.dim, c.length, c.trials)?,
        }
    }
    w.flush()
}
