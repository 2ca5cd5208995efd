//! L2-regularized binary logistic regression and a one-vs-rest wrapper.
//!
//! Features are standardized with training-set statistics. Fitting is
//! accelerated full-batch gradient descent with a step size derived from a
//! power-iteration bound on the loss curvature.

use std::collections::BTreeSet;

use crate::linalg::{axpy, dot, Matrix};
use crate::model::sigmoid;

/// L2 penalties tried on the validation split.
pub const L2_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];
const MAX_ITERS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix, rows: &[usize]) -> Self {
        let d = x.cols();
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for &r in rows {
            axpy(1.0, x.row(r), &mut mean);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for &r in rows {
            for ((v, x), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        // constant columns keep scale 1 and become all-zero
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &Matrix, rows: &[usize]) -> Matrix {
        let mut out = x.select_rows(rows);
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLogistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl BinaryLogistic {
    /// Minimizes mean log loss plus `l2/2 |w|^2` (bias unpenalized).
    pub fn fit(x: &Matrix, y: &[bool], l2: f64) -> Self {
        assert_eq!(x.rows(), y.len());
        let (n, d) = (x.rows(), x.cols());
        if n == 0 {
            return BinaryLogistic {
                weights: vec![0.0; d],
                bias: 0.0,
            };
        }
        let lipschitz = 0.25 * gram_top_eigenvalue(x) + l2;
        let step = 1.0 / lipschitz;

        let loss_grad = |w: &[f64], b: f64, gw: &mut [f64]| -> f64 {
            gw.iter_mut().for_each(|g| *g = 0.0);
            let mut gb = 0.0;
            for (i, &label) in y.iter().enumerate() {
                let row = x.row(i);
                let p = sigmoid(dot(w, row) + b);
                let r = p - if label { 1.0 } else { 0.0 };
                axpy(r / n as f64, row, gw);
                gb += r / n as f64;
            }
            axpy(l2, w, gw);
            gb
        };

        // Nesterov acceleration with restart-free momentum schedule
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut w_prev = w.clone();
        let mut b_prev = b;
        let mut gw = vec![0.0; d];
        let mut look = vec![0.0; d];
        for it in 0..MAX_ITERS {
            let mom = it as f64 / (it as f64 + 3.0);
            for ((l, wi), wp) in look.iter_mut().zip(&w).zip(&w_prev) {
                *l = wi + mom * (wi - wp);
            }
            let look_b = b + mom * (b - b_prev);
            let gb = loss_grad(&look, look_b, &mut gw);
            w_prev.copy_from_slice(&w);
            b_prev = b;
            for ((wi, l), g) in w.iter_mut().zip(&look).zip(&gw) {
                *wi = l - step * g;
            }
            b = look_b - step * gb;
            let grad_norm = (dot(&gw, &gw) + gb * gb).sqrt();
            if grad_norm < 1e-7 {
                break;
            }
        }
        BinaryLogistic { weights: w, bias: b }
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }
}

/// Largest eigenvalue of `X^T X / n` plus the bias column, by power iteration.
fn gram_top_eigenvalue(x: &Matrix) -> f64 {
    let (n, d) = (x.rows(), x.cols());
    let mut v = vec![1.0 / ((d + 1) as f64).sqrt(); d + 1];
    let mut lambda = 1.0;
    let mut xv = vec![0.0; n];
    for _ in 0..50 {
        for (i, out) in xv.iter_mut().enumerate() {
            *out = dot(x.row(i), &v[..d]) + v[d];
        }
        let mut next = vec![0.0; d + 1];
        for (i, &s) in xv.iter().enumerate() {
            axpy(s / n as f64, x.row(i), &mut next[..d]);
            next[d] += s / n as f64;
        }
        let norm = dot(&next, &next).sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        lambda = norm;
        next.iter_mut().for_each(|x| *x /= norm);
        v = next;
    }
    // small safety margin over the power-iteration estimate
    lambda * 1.05
}

/// One binary model per label; `None` for labels excluded from training.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsRest {
    pub models: Vec<Option<BinaryLogistic>>,
}

impl OneVsRest {
    pub fn fit(x: &Matrix, labels: &[BTreeSet<usize>], n_labels: usize, l2: f64, excluded: &BTreeSet<usize>) -> Self {
        let models = (0..n_labels)
            .map(|l| {
                if excluded.contains(&l) {
                    return None;
                }
                let y: Vec<bool> = labels.iter().map(|s| s.contains(&l)).collect();
                Some(BinaryLogistic::fit(x, &y, l2))
            })
            .collect();
        OneVsRest { models }
    }

    /// Labels with positive margin, or the single best label if none is positive.
    pub fn predict(&self, row: &[f64]) -> BTreeSet<usize> {
        let margins: Vec<(usize, f64)> = self
            .models
            .iter()
            .enumerate()
            .filter_map(|(l, m)| m.as_ref().map(|m| (l, m.margin(row))))
            .collect();
        let positive: BTreeSet<usize> = margins.iter().filter(|(_, m)| *m > 0.0).map(|(l, _)| *l).collect();
        if !positive.is_empty() {
            return positive;
        }
        margins
            .iter()
            .fold(None::<(usize, f64)>, |best, &(l, m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((l, m)),
            })
            .map(|(l, _)| BTreeSet::from([l]))
            .unwrap_or_default()
    }
}
