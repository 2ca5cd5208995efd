//! Finite-difference gradient oracle against an independently written
//! negative-sampling loss.

use rand::Rng;
use sense::linalg::Matrix;
use sense::rng::seeded;
use sense::{SenseModel, Target, TrainingPair, Variant};

const STEP: f64 = 1e-5;

pub fn random_model(variant: Variant, seed: u64) -> SenseModel {
    let mut rng = seeded(seed);
    let (w, n, d) = (5, 4, 3);
    let od = variant.out_dim(d);
    let mut fill = |rows: usize, cols: usize| {
        Matrix::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
        )
    };
    SenseModel::from_parts(variant, fill(w, d), fill(n, d), fill(w + n, od)).unwrap()
}

/// Negative-sampling loss computed from raw rows.
pub fn reference_loss(m: &SenseModel, pair: &TrainingPair, negatives: &[usize]) -> f64 {
    let d = m.dim();
    let word = match pair.input_word() {
        Some(w) => m.word_in().row(w).to_vec(),
        None => vec![0.0; d],
    };
    let node = m.node_in().row(pair.input_node()).to_vec();
    let h: Vec<f64> = match m.variant() {
        Variant::Add => word.iter().zip(&node).map(|(a, b)| a + b).collect(),
        Variant::Concat => word.iter().chain(&node).copied().collect(),
    };
    let out_row = |t: usize| m.out_table().row(t).iter().zip(&h).map(|(u, x)| u * x).sum::<f64>();
    let offset = match pair.target() {
        Target::Word(_) => 0,
        Target::Node(_) => m.n_words(),
    };
    let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
    let t = match pair.target() {
        Target::Word(w) => w as usize,
        Target::Node(v) => m.n_words() + v as usize,
    };
    let mut loss = -sig(out_row(t)).ln();
    for &j in negatives {
        loss -= sig(-out_row(offset + j)).ln();
    }
    loss
}

#[derive(Clone, Copy)]
pub enum Table {
    Word,
    Node,
    Out,
}

pub fn perturbed(m: &SenseModel, table: Table, idx: usize, delta: f64) -> SenseModel {
    let mut p = m.clone();
    let slice = match table {
        Table::Word => p.word_in_mut().as_mut_slice(),
        Table::Node => p.node_in_mut().as_mut_slice(),
        Table::Out => p.out_table_mut().as_mut_slice(),
    };
    slice[idx] += delta;
    p
}

/// Largest relative error over every parameter, with an absolute floor for tiny gradients.
pub fn max_relative_error(variant: Variant, pair: TrainingPair, negatives: &[usize], seed: u64) -> f64 {
    let m = random_model(variant, seed);
    let g = m.pair_loss_and_grads(&pair, negatives).unwrap();
    assert!((g.loss - reference_loss(&m, &pair, negatives)).abs() < 1e-12);

    let (w, n, d, od) = (m.n_words(), m.n_nodes(), m.dim(), m.out_dim());
    let mut analytic_word = vec![0.0; w * d];
    let mut analytic_node = vec![0.0; n * d];
    let mut analytic_out = vec![0.0; (w + n) * od];
    if let Some((row, grad)) = &g.word_row {
        analytic_word[row * d..(row + 1) * d].copy_from_slice(grad);
    }
    analytic_node[g.node_row.0 * d..(g.node_row.0 + 1) * d].copy_from_slice(&g.node_row.1);
    for (row, grad) in &g.out_rows {
        for (a, b) in analytic_out[row * od..(row + 1) * od].iter_mut().zip(grad) {
            *a += b;
        }
    }

    let mut worst: f64 = 0.0;
    for (table, analytic) in [
        (Table::Word, &analytic_word),
        (Table::Node, &analytic_node),
        (Table::Out, &analytic_out),
    ] {
        for (idx, &a) in analytic.iter().enumerate() {
            let plus = reference_loss(&perturbed(&m, table, idx, STEP), &pair, negatives);
            let minus = reference_loss(&perturbed(&m, table, idx, -STEP), &pair, negatives);
            let numeric = (plus - minus) / (2.0 * STEP);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max(err);
        }
    }
    worst
}

pub fn all_combinations() -> Vec<(Variant, TrainingPair, Vec<usize>)> {
    let mut out = Vec::new();
    for variant in [Variant::Add, Variant::Concat] {
        out.push((variant, TrainingPair::text(1, 2, 4), vec![0, 3, 2]));
        out.push((variant, TrainingPair::graph(3, 1), vec![0, 2, 0]));
    }
    out
}
