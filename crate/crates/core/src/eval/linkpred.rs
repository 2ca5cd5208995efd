use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::logistic::{BinaryLogistic, Standardizer, L2_GRID};
use super::split::SplitSpec;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::rng::derived;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub l2: f64,
    pub train_error: f64,
    pub valid_error: f64,
    pub test_error: f64,
    pub positives: usize,
    pub negatives: usize,
}

impl LinkReport {
    pub fn rows(&self) -> [(&'static str, f64); 3] {
        [
            ("train", self.train_error),
            ("valid", self.valid_error),
            ("test", self.test_error),
        ]
    }
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Held-out links and the residual graph they were removed from.
#[derive(Debug, Clone)]
pub struct Holdout {
    pub residual: Graph,
    pub removed: Vec<(usize, usize)>,
}

/// Removes `frac` of the links (both arc directions), never a node's last link.
///
/// Links are unordered node pairs; self-loops are never removed.
pub fn remove_links(graph: &Graph, frac: f64, seed: u64) -> Result<Holdout> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::Config(format!("holdout fraction {frac} must lie in (0, 1)")));
    }
    let mut links: Vec<(usize, usize)> = graph
        .arcs()
        .iter()
        .filter(|(u, v)| u != v)
        .map(|&(u, v)| key(u, v))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    links.sort_unstable();
    let wanted = (frac * links.len() as f64).round() as usize;
    if wanted == 0 {
        return Err(Error::Data(format!(
            "holdout fraction {frac} of {} links removes nothing",
            links.len()
        )));
    }
    let mut degree = vec![0usize; graph.node_count()];
    for &(u, v) in &links {
        degree[u] += 1;
        degree[v] += 1;
    }
    links.shuffle(&mut derived(seed, &[10]));
    let mut removed = Vec::with_capacity(wanted);
    for &(u, v) in &links {
        if removed.len() == wanted {
            break;
        }
        if degree[u] > 1 && degree[v] > 1 {
            degree[u] -= 1;
            degree[v] -= 1;
            removed.push((u, v));
        }
    }
    if removed.len() < wanted {
        return Err(Error::Data(format!(
            "only {} of {wanted} links can be removed without isolating a node",
            removed.len()
        )));
    }
    let gone: HashSet<(usize, usize)> = removed.iter().copied().collect();
    let residual = Graph::from_arcs(
        graph.node_ids().to_vec(),
        graph
            .arcs()
            .iter()
            .copied()
            .filter(|&(u, v)| u == v || !gone.contains(&key(u, v))),
    )?;
    Ok(Holdout { residual, removed })
}

/// Uniform node pairs that are not linked in `graph` in either direction.
pub fn sample_non_links(graph: &Graph, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let n = graph.node_count();
    let linked = |u: usize, v: usize| graph.has_arc(u, v) || graph.has_arc(v, u);
    let mut rng = derived(seed, &[11]);
    let mut chosen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) + 10_000 {
            return Err(Error::Data("graph too dense to sample non-links".into()));
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || linked(u, v) {
            continue;
        }
        if chosen.insert(key(u, v)) {
            out.push(key(u, v));
        }
    }
    Ok(out)
}

fn pair_features(emb: &Matrix, pairs: &[(usize, usize)]) -> Matrix {
    let d = emb.cols();
    let mut data = Vec::with_capacity(pairs.len() * d);
    for &(u, v) in pairs {
        data.extend(emb.row(u).iter().zip(emb.row(v)).map(|(a, b)| (a - b).abs()));
    }
    Matrix::from_vec(pairs.len(), d, data)
}

fn binary_error(model: &BinaryLogistic, x: &Matrix, y: &[bool]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let wrong = y
        .iter()
        .enumerate()
        .filter(|(i, &label)| (model.margin(x.row(*i)) > 0.0) != label)
        .count();
    wrong as f64 / y.len() as f64
}

/// Link prediction with element-wise absolute-difference pair features.
///
/// `embed` receives the residual graph and returns one row per node.
pub fn link_prediction<F>(
    graph: &Graph,
    embed: F,
    holdout_frac: f64,
    split: &SplitSpec,
    seed: u64,
) -> Result<LinkReport>
where
    F: FnOnce(&Graph) -> Result<Matrix>,
{
    split.validate()?;
    let holdout = remove_links(graph, holdout_frac, seed)?;
    let negatives = sample_non_links(graph, holdout.removed.len(), seed)?;
    let emb = embed(&holdout.residual)?;
    if emb.rows() != graph.node_count() {
        return Err(Error::Dimension {
            expected: graph.node_count(),
            actual: emb.rows(),
        });
    }
    let pairs: Vec<(usize, usize)> = holdout.removed.iter().chain(&negatives).copied().collect();
    let labels: Vec<bool> = (0..pairs.len()).map(|i| i < holdout.removed.len()).collect();
    let features = pair_features(&emb, &pairs);

    let parts = split.split(pairs.len());
    let scaler = Standardizer::fit(&features, &parts.train);
    let ys = |idx: &[usize]| -> Vec<bool> { idx.iter().map(|&i| labels[i]).collect() };
    let (x_train, x_valid, x_test) = (
        scaler.apply(&features, &parts.train),
        scaler.apply(&features, &parts.valid),
        scaler.apply(&features, &parts.test),
    );
    let (y_train, y_valid, y_test) = (ys(&parts.train), ys(&parts.valid), ys(&parts.test));

    let mut best: Option<(f64, f64, BinaryLogistic)> = None;
    for &l2 in &L2_GRID {
        let model = BinaryLogistic::fit(&x_train, &y_train, l2);
        let err = binary_error(&model, &x_valid, &y_valid);
        if best.as_ref().is_none_or(|(_, e, _)| err < *e) {
            best = Some((l2, err, model));
        }
    }
    let (l2, valid_error, model) = best.unwrap();
    Ok(LinkReport {
        l2,
        train_error: binary_error(&model, &x_train, &y_train),
        valid_error,
        test_error: binary_error(&model, &x_test, &y_test),
        positives: holdout.removed.len(),
        negatives: negatives.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_with_chords(n: usize) -> Graph {
        let ids = (0..n).map(|i| i.to_string()).collect();
        let arcs = (0..n).flat_map(|i| {
            let j = (i + 1) % n;
            let k = (i + 3) % n;
            [(i, j), (j, i), (i, k), (k, i)]
        });
        Graph::from_arcs(ids, arcs).unwrap()
    }

    #[test]
    fn holdout_keeps_every_node_linked() {
        let g = ring_with_chords(40);
        let h = remove_links(&g, 0.3, 5).unwrap();
        assert_eq!(h.removed.len(), 24);
        for v in 0..40 {
            assert!(!h.residual.out_neighbors(v).is_empty());
        }
        for &(u, v) in &h.removed {
            assert!(g.has_arc(u, v) && !h.residual.has_arc(u, v) && !h.residual.has_arc(v, u));
        }
        assert_eq!(h.residual.arc_count(), g.arc_count() - 2 * h.removed.len());
    }

    #[test]
    fn zero_holdout_is_an_error() {
        let g = ring_with_chords(10);
        assert!(remove_links(&g, 0.0, 1).is_err());
        assert!(remove_links(&g, 0.001, 1).is_err());
    }

    #[test]
    fn path_graph_cannot_lose_many_links() {
        let ids = (0..4).map(|i| i.to_string()).collect();
        let g = Graph::from_arcs(ids, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(remove_links(&g, 0.9, 1).is_err());
    }

    #[test]
    fn non_links_avoid_existing_and_removed_links() {
        let g = ring_with_chords(30);
        let h = remove_links(&g, 0.2, 3).unwrap();
        let neg = sample_non_links(&g, 100, 3).unwrap();
        let removed: HashSet<_> = h.removed.iter().copied().collect();
        let unique: HashSet<_> = neg.iter().copied().collect();
        assert_eq!(unique.len(), 100);
        for &(u, v) in &neg {
            assert_ne!(u, v);
            assert!(!g.has_arc(u, v) && !g.has_arc(v, u));
            assert!(!removed.contains(&(u, v)));
        }
    }

    #[test]
    fn complete_graph_has_no_non_links() {
        let ids = (0..4).map(|i| i.to_string()).collect();
        let arcs = (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)));
        let g = Graph::from_arcs(ids, arcs).unwrap();
        assert!(sample_non_links(&g, 1, 0).is_err());
    }
}
