use std::collections::BTreeSet;

use log::warn;

use super::logistic::{OneVsRest, Standardizer, L2_GRID};
use super::split::SplitSpec;
use crate::error::{Error, Result};
use crate::graph::LabelSet;
use crate::linalg::Matrix;

/// Misclassification rates of a one-vs-rest run.
///
/// A node counts as correct only when its predicted label set equals its true set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyReport {
    pub l2: f64,
    pub train_error: f64,
    pub valid_error: f64,
    pub test_error: f64,
    /// Labels left out for having fewer than two training positives.
    pub excluded_labels: Vec<String>,
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
}

impl ClassifyReport {
    /// `(split, error)` rows.
    pub fn rows(&self) -> [(&'static str, f64); 3] {
        [
            ("train", self.train_error),
            ("valid", self.valid_error),
            ("test", self.test_error),
        ]
    }
}

fn set_error(model: &OneVsRest, x: &Matrix, truth: &[&BTreeSet<usize>]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let wrong = truth
        .iter()
        .enumerate()
        .filter(|(i, t)| model.predict(x.row(*i)) != ***t)
        .count();
    wrong as f64 / truth.len() as f64
}

/// Trains one-vs-rest classifiers on node features and reports split errors.
///
/// Only nodes with at least one label take part. The L2 penalty is picked
/// from [`L2_GRID`] by validation error.
pub fn train_ovr_classifier(features: &Matrix, labels: &LabelSet, split: &SplitSpec) -> Result<ClassifyReport> {
    split.validate()?;
    if features.rows() != labels.labels.len() {
        return Err(Error::Dimension {
            expected: labels.labels.len(),
            actual: features.rows(),
        });
    }
    let labeled: Vec<usize> = (0..labels.labels.len())
        .filter(|&i| !labels.labels[i].is_empty())
        .collect();
    if labeled.len() < 3 {
        return Err(Error::Data("need at least three labeled nodes".into()));
    }
    let parts = split.split(labeled.len());
    let pick = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| labeled[i]).collect() };
    let (train, valid, test) = (pick(&parts.train), pick(&parts.valid), pick(&parts.test));

    let n_labels = labels.universe.len();
    let mut excluded = BTreeSet::new();
    for l in 0..n_labels {
        let positives = train.iter().filter(|&&i| labels.labels[i].contains(&l)).count();
        if positives < 2 {
            warn!(
                "label `{}` has {positives} training positives; excluded",
                labels.universe[l]
            );
            excluded.insert(l);
        }
    }
    if excluded.len() == n_labels {
        return Err(Error::Data("no label has two training positives".into()));
    }

    let scaler = Standardizer::fit(features, &train);
    let (x_train, x_valid, x_test) = (
        scaler.apply(features, &train),
        scaler.apply(features, &valid),
        scaler.apply(features, &test),
    );
    let truth = |idx: &[usize]| -> Vec<&BTreeSet<usize>> { idx.iter().map(|&i| &labels.labels[i]).collect() };
    let y_train: Vec<BTreeSet<usize>> = train.iter().map(|&i| labels.labels[i].clone()).collect();

    let mut best: Option<(f64, f64, OneVsRest)> = None;
    for &l2 in &L2_GRID {
        let model = OneVsRest::fit(&x_train, &y_train, n_labels, l2, &excluded);
        let err = set_error(&model, &x_valid, &truth(&valid));
        if best.as_ref().is_none_or(|(_, e, _)| err < *e) {
            best = Some((l2, err, model));
        }
    }
    let (l2, valid_error, model) = best.unwrap();
    Ok(ClassifyReport {
        l2,
        train_error: set_error(&model, &x_train, &truth(&train)),
        valid_error,
        test_error: set_error(&model, &x_test, &truth(&test)),
        excluded_labels: excluded.iter().map(|&l| labels.universe[l].clone()).collect(),
        n_train: train.len(),
        n_valid: valid.len(),
        n_test: test.len(),
    })
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::rng::seeded;

    #[test]
    fn separable_two_label_toy() {
        let mut rng = seeded(1);
        let n = 120;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let side = if i % 2 == 0 { 1.0 } else { -1.0 };
                vec![side + 0.3 * (rng.random::<f64>() - 0.5), rng.random::<f64>()]
            })
            .collect();
        let names: Vec<Vec<&str>> = (0..n).map(|i| vec![if i % 2 == 0 { "pos" } else { "neg" }]).collect();
        let labels = LabelSet::from_names(&names);
        let report = train_ovr_classifier(&Matrix::from_rows(&rows), &labels, &SplitSpec::default()).unwrap();
        assert_eq!(report.test_error, 0.0);
        assert!(report.excluded_labels.is_empty());
    }

    #[test]
    fn random_features_are_near_chance() {
        let mut rng = seeded(2);
        let n = 600;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..16).map(|_| rng.random::<f64>()).collect()).collect();
        let names: Vec<Vec<&str>> = (0..n).map(|i| vec![if i % 2 == 0 { "a" } else { "b" }]).collect();
        let labels = LabelSet::from_names(&names);
        let report = train_ovr_classifier(&Matrix::from_rows(&rows), &labels, &SplitSpec::default()).unwrap();
        // guessing one of two labels is wrong half the time
        assert!(report.test_error > 0.35, "{}", report.test_error);
    }

    #[test]
    fn identical_features_predict_majority_pattern() {
        let n = 100;
        let names: Vec<Vec<&str>> = (0..n).map(|i| vec![if i % 10 < 7 { "x" } else { "y" }]).collect();
        let labels = LabelSet::from_names(&names);
        let features = Matrix::from_rows(&vec![vec![1.0, 2.0]; n]);
        let report = train_ovr_classifier(&features, &labels, &SplitSpec::default()).unwrap();
        let minority_rate = |idx: &[usize]| idx.iter().filter(|&&i| i % 10 >= 7).count() as f64 / idx.len() as f64;
        let parts = SplitSpec::default().split(n);
        assert!((report.test_error - minority_rate(&parts.test)).abs() < 1e-12);
    }

    #[test]
    fn rare_labels_are_excluded() {
        let n = 50;
        let names: Vec<Vec<&str>> = (0..n)
            .map(|i| if i == 0 { vec!["a", "rare"] } else { vec!["a"] })
            .collect();
        let labels = LabelSet::from_names(&names);
        let features = Matrix::from_rows(&(0..n).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let report = train_ovr_classifier(&features, &labels, &SplitSpec::default()).unwrap();
        assert_eq!(report.excluded_labels, ["rare"]);
    }
}
