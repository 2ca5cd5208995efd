//! Word vocabulary, frequency subsampling and noise distributions.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::graph::NodeDocs;

pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_SUBSAMPLE: f64 = 1e-4;
pub const DEFAULT_NOISE_POWER: f64 = 0.75;

/// Word table shared by every node document.
///
/// Ids are dense in `0..len()`, ordered by descending count then token.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    token_to_id: HashMap<String, usize>,
    tokens: Vec<String>,
    counts: Vec<u64>,
    total_count: u64,
    keep_prob: Vec<f64>,
}

/// Retention probability of a word with relative frequency `freq` under threshold `t`.
pub fn keep_probability(freq: f64, t: f64) -> f64 {
    ((freq / t).sqrt() + 1.0) * t / freq
}

impl Vocab {
    pub fn build(docs: &NodeDocs, min_count: u64, subsample_t: f64) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if subsample_t.is_nan() || subsample_t <= 0.0 {
            return Err(Error::Config("subsample threshold must be positive".into()));
        }
        let mut raw: HashMap<&str, u64> = HashMap::new();
        for token in docs.docs.iter().flatten() {
            *raw.entry(token.as_str()).or_default() += 1;
        }
        let mut kept: Vec<(&str, u64)> = raw.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocab { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_counts(
            kept.into_iter().map(|(t, c)| (t.to_owned(), c)),
            subsample_t,
        ))
    }

    /// Builds a vocabulary from explicit `(token, count)` entries, keeping their order.
    pub fn from_counts(entries: impl IntoIterator<Item = (String, u64)>, subsample_t: f64) -> Self {
        let (tokens, counts): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let total_count: u64 = counts.iter().sum();
        let keep_prob = counts
            .iter()
            .map(|&c| keep_probability(c as f64 / total_count as f64, subsample_t).min(1.0))
            .collect();
        let token_to_id = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocab {
            token_to_id,
            tokens,
            counts,
            total_count,
            keep_prob,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    pub fn keep_prob(&self, id: usize) -> f64 {
        self.keep_prob[id]
    }

    /// Overrides retention probabilities; values are clamped to `[0, 1]`.
    pub fn set_keep_probs(&mut self, probs: Vec<f64>) {
        assert_eq!(probs.len(), self.len());
        self.keep_prob = probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    }

    /// Maps every document to word ids, dropping out-of-vocabulary tokens.
    pub fn encode_docs(&self, docs: &NodeDocs) -> EncodedDocs {
        let seqs: Vec<Vec<usize>> = docs
            .docs
            .iter()
            .map(|doc| doc.iter().filter_map(|t| self.id(t)).collect())
            .collect();
        EncodedDocs { seqs }
    }

    pub fn word_noise(&self, power: f64) -> Result<NoiseTable> {
        NoiseTable::new(&self.counts, power)
    }
}

/// Per-node word-id sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EncodedDocs {
    pub seqs: Vec<Vec<usize>>,
}

impl EncodedDocs {
    /// In-vocabulary word count of each node's document.
    pub fn word_counts(&self) -> Vec<usize> {
        self.seqs.iter().map(Vec::len).collect()
    }

    pub fn is_all_empty(&self) -> bool {
        self.seqs.iter().all(Vec::is_empty)
    }
}

/// Sampling table with probability proportional to `count^power`.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    probs: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl NoiseTable {
    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Config("noise distribution over zero targets".into()));
        }
        if power.is_nan() || power < 0.0 {
            return Err(Error::Config(format!("noise power must be non-negative, got {power}")));
        }
        // 0^0 would be 1; a zero count never gets mass.
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { (c as f64).powf(power) })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Config("noise distribution has all-zero counts".into()));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        Ok(NoiseTable { probs, alias })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }

    /// Draws `k` targets different from `exclude`.
    ///
    /// A draw that keeps hitting `exclude` (a near-degenerate table) is given up
    /// after a few retries, so fewer than `k` ids may be returned.
    pub fn sample_negatives<R: Rng + ?Sized>(&self, rng: &mut R, k: usize, exclude: usize, out: &mut Vec<usize>) {
        out.clear();
        for _ in 0..k {
            for _ in 0..16 {
                let t = self.sample(rng);
                if t != exclude {
                    out.push(t);
                    break;
                }
            }
        }
    }
}
