//! Node sequence vectors.
//!
//! A sequence `v1 -> v2 -> ... -> vq` is embedded in the same `d` dimensions as
//! its nodes by summing unit node vectors, each cyclically shifted by its
//! position: `S = sum_i shift(v_i, i - 1)`. Shifting moves coordinates towards
//! higher indices, wrapping the tail to the front, so `shift([1,2,3,4], 1)` is
//! `[4,1,2,3]`.
//!
//! Position `k` is decoded by unshifting `S` by `k - 1` and taking the node
//! whose vector has the largest inner product with it. Shifted random unit
//! vectors are nearly orthogonal in high dimension, so the true node scores
//! close to 1 and every other candidate close to 0.

use std::collections::HashMap;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

/// Tolerance on row norms of a table that is declared normalized.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;
/// Stopping score for decoding a vector of unknown length.
pub const DEFAULT_STOP_SCORE: f64 = 0.5;

/// Rotates `v` by `m mod d` positions towards higher indices.
pub fn cyclic_shift(v: &[f64], m: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    shift_in_place(&mut out, m);
    out
}

pub fn shift_in_place(v: &mut [f64], m: usize) {
    if !v.is_empty() {
        v.rotate_right(m % v.len());
    }
}

/// Inverse of [`shift_in_place`].
pub fn unshift_in_place(v: &mut [f64], m: usize) {
    if !v.is_empty() {
        v.rotate_left(m % v.len());
    }
}

/// Unit node vectors addressed by dense index or external id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    rows: Matrix,
}

impl EmbeddingTable {
    /// Builds a table, scaling rows to unit norm when `normalize` is set.
    ///
    /// All-zero rows are rejected. Without `normalize`, every row must already
    /// have norm within [`UNIT_NORM_TOLERANCE`] of one.
    pub fn new(ids: Vec<String>, mut rows: Matrix, normalize: bool) -> Result<Self> {
        if ids.len() != rows.rows() {
            return Err(Error::Dimension {
                expected: rows.rows(),
                actual: ids.len(),
            });
        }
        if rows.rows() == 0 || rows.cols() == 0 {
            return Err(Error::Data("embedding table is empty".into()));
        }
        for (i, row) in rows.iter_rows().enumerate() {
            let n = norm(row);
            if n == 0.0 {
                return Err(Error::ZeroRow(ids[i].clone()));
            }
            if !normalize && (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::Data(format!(
                    "row `{}` has norm {n}, expected a unit vector",
                    ids[i]
                )));
            }
        }
        if normalize {
            rows.normalize_rows();
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate node id `{id}`")));
            }
        }
        Ok(EmbeddingTable { ids, index, rows })
    }

    /// Table with ids `"0"`, `"1"`, ... over already-normalized rows.
    pub fn from_unit_rows(rows: Matrix) -> Result<Self> {
        let ids = (0..rows.rows()).map(|i| i.to_string()).collect();
        Self::new(ids, rows, false)
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }

    pub fn row(&self, node: usize) -> &[f64] {
        self.rows.row(node)
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_owned()))
    }
}

/// Superposed, position-shifted node vectors plus the sequence length.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceVector {
    values: Vec<f64>,
    length: usize,
}

impl SequenceVector {
    pub fn new(values: Vec<f64>, length: usize) -> Result<Self> {
        let dim = values.len();
        if length < 1 || length > dim {
            return Err(Error::SequenceLength { len: length, dim });
        }
        if length > dim / 8 {
            warn!("sequence length {length} is large for dimension {dim}; decoding may be unreliable");
        }
        Ok(SequenceVector { values, length })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Encodes dense node indices; repeats are allowed.
pub fn encode(nodes: &[usize], table: &EmbeddingTable) -> Result<SequenceVector> {
    let d = table.dim();
    if nodes.is_empty() || nodes.len() > d {
        return Err(Error::SequenceLength {
            len: nodes.len(),
            dim: d,
        });
    }
    let mut values = vec![0.0; d];
    for (i, &node) in nodes.iter().enumerate() {
        if node >= table.len() {
            return Err(Error::UnknownNode(node.to_string()));
        }
        // shift(v, i)[j] = v[(j - i) mod d]
        let row = table.row(node);
        let m = i % d;
        for (j, out) in values.iter_mut().enumerate() {
            *out += row[(j + d - m) % d];
        }
    }
    SequenceVector::new(values, nodes.len())
}

/// Encodes external node ids.
pub fn encode_ids<S: AsRef<str>>(ids: &[S], table: &EmbeddingTable) -> Result<SequenceVector> {
    let nodes = ids
        .iter()
        .map(|id| table.index_of(id.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    encode(&nodes, table)
}

fn check_position(seq: &SequenceVector, position: usize, table: &EmbeddingTable) -> Result<()> {
    if seq.dim() != table.dim() {
        return Err(Error::Dimension {
            expected: table.dim(),
            actual: seq.dim(),
        });
    }
    if position < 1 || position > seq.len() {
        return Err(Error::SequenceLength {
            len: position,
            dim: seq.len(),
        });
    }
    Ok(())
}

/// `S . shift(v_node, position - 1)`, positions counted from 1.
pub fn score(seq: &SequenceVector, node: usize, position: usize, table: &EmbeddingTable) -> Result<f64> {
    check_position(seq, position, table)?;
    Ok(dot(seq.values(), &cyclic_shift(table.row(node), position - 1)))
}

/// Scores of every node at one position.
pub fn position_scores(seq: &SequenceVector, position: usize, table: &EmbeddingTable) -> Result<Vec<f64>> {
    check_position(seq, position, table)?;
    // S . shift(v, m) == unshift(S, m) . v
    let mut probe = seq.values().to_vec();
    unshift_in_place(&mut probe, position - 1);
    Ok(table.rows().iter_rows().map(|row| dot(&probe, row)).collect())
}

/// Best node at a position; ties go to the lowest index.
pub fn decode_position(seq: &SequenceVector, position: usize, table: &EmbeddingTable) -> Result<(usize, f64)> {
    let scores = position_scores(seq, position, table)?;
    Ok(argmax(&scores))
}

pub(crate) fn argmax(scores: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &s) in scores.iter().enumerate() {
        if s > best.1 {
            best = (i, s);
        }
    }
    best
}

/// Decodes every position of a sequence of known length.
pub fn decode(seq: &SequenceVector, table: &EmbeddingTable) -> Result<Vec<(usize, f64)>> {
    (1..=seq.len()).map(|k| decode_position(seq, k, table)).collect()
}

/// Decodes a raw vector of unknown length, stopping at the first position whose
/// best score falls below `stop_score`. Heuristic.
pub fn decode_unknown_length(values: &[f64], table: &EmbeddingTable, stop_score: f64) -> Result<Vec<(usize, f64)>> {
    let seq = SequenceVector {
        values: values.to_vec(),
        length: values.len(),
    };
    let mut out = Vec::new();
    for k in 1..=seq.dim() {
        let (node, s) = decode_position(&seq, k, table)?;
        if s < stop_score {
            break;
        }
        out.push((node, s));
    }
    Ok(out)
}
