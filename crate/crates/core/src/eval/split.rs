use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.6,
            valid: 0.2,
            test: 0.2,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitSpec {
    pub fn new(train: f64, valid: f64, test: f64, seed: u64) -> Result<Self> {
        let s = SplitSpec {
            train,
            valid,
            test,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// Parses percentages such as `"60,20,20"`.
    pub fn parse_percentages(text: &str, seed: u64) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::Config(format!("bad split `{text}`")))?;
        match parts.as_slice() {
            [a, b, c] => {
                let total = a + b + c;
                Self::new(a / total, b / total, c / total, seed)
            }
            _ => Err(Error::Config(format!("split needs three parts, got `{text}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |f: f64| f > 0.0 && f < 1.0;
        if !(in_range(self.train) && in_range(self.valid) && in_range(self.test)) {
            return Err(Error::Config("split fractions must lie in (0, 1)".into()));
        }
        if (self.train + self.valid + self.test - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must sum to 1".into()));
        }
        Ok(())
    }

    /// Shuffles `0..n` with the seed and cuts it into three disjoint parts.
    pub fn split(&self, n: usize) -> Split {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut seeded(self.seed));
        let n_train = (self.train * n as f64).round() as usize;
        let n_valid = ((self.valid * n as f64).round() as usize).min(n - n_train.min(n));
        let n_train = n_train.min(n);
        let test = idx.split_off(n_train + n_valid);
        let valid = idx.split_off(n_train);
        Split {
            train: idx,
            valid,
            test,
        }
    }
}
