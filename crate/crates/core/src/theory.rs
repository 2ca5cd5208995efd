//! Monte-Carlo estimates of inner products between random unit vectors.
//!
//! Two independent uniform unit vectors in `N` dimensions have an inner
//! product with mean 0 and variance `1/N`. For `x . y = c`, the inner
//! product `x . shift(y, m)` with `m` not a multiple of `N` has mean 0 and
//! variance `(1 - c^2)/(N - 1)` when `y` is a coordinate axis.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::seq::cyclic_shift;

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 10_000;

/// Normalized i.i.d. standard normal draws: uniform on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Uniform unit vector orthogonal to the unit vector `axis`.
pub fn random_orthogonal_unit<R: Rng + ?Sized>(axis: &[f64], rng: &mut R) -> Vec<f64> {
    assert!(axis.len() >= 2, "no orthogonal complement in one dimension");
    loop {
        let mut v: Vec<f64> = (0..axis.len()).map(|_| rng.sample(StandardNormal)).collect();
        let along = dot(&v, axis);
        v.iter_mut().zip(axis).for_each(|(x, a)| *x -= along * a);
        let n = norm(&v);
        if n > 1e-12 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    m2: f64,
}

impl SampleStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for SampleStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = SampleStats::default();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

/// Inner products of independent uniform unit-vector pairs in `dim` dimensions.
pub fn independent_dot_stats<R: Rng + ?Sized>(dim: usize, samples: usize, rng: &mut R) -> Result<SampleStats> {
    check_samples(samples)?;
    if dim < 1 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    Ok((0..samples)
        .map(|_| {
            let x = random_unit_vector(dim, rng);
            let y = random_unit_vector(dim, rng);
            dot(&x, &y)
        })
        .collect())
}

/// How the pair `(x, y)` with `x . y = c` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConditioningFrame {
    /// `y` is the first coordinate axis; `x = c y + sqrt(1 - c^2) u` with `u`
    /// uniform on the unit sphere orthogonal to `y`.
    #[default]
    Axis,
    /// `x` uniform; `y = c x + sqrt(1 - c^2) u` with `u` uniform orthogonal
    /// to `x`. The shifted product then picks up `c^2` times the lag-`m`
    /// autocorrelation of `x`, whose variance is `1/(N + 2)`.
    Uniform,
}

/// Inner products `x . shift(y, m)` over pairs with `x . y = c`.
pub fn shifted_dot_stats<R: Rng + ?Sized>(
    dim: usize,
    c: f64,
    m: usize,
    samples: usize,
    frame: ConditioningFrame,
    rng: &mut R,
) -> Result<SampleStats> {
    check_samples(samples)?;
    if dim < 2 {
        return Err(Error::Config("dimension must be at least 2".into()));
    }
    if c.is_nan() || c.abs() > 1.0 {
        return Err(Error::Config(format!("inner product {c} outside [-1, 1]")));
    }
    if m.is_multiple_of(dim) {
        return Err(Error::DegenerateShift { shift: m, dim });
    }
    let s = (1.0 - c * c).max(0.0).sqrt();
    let mut axis = vec![0.0; dim];
    axis[0] = 1.0;
    Ok((0..samples)
        .map(|_| {
            let (x, y) = match frame {
                ConditioningFrame::Axis => {
                    let u = random_orthogonal_unit(&axis, rng);
                    let x: Vec<f64> = axis.iter().zip(&u).map(|(a, b)| c * a + s * b).collect();
                    (x, axis.clone())
                }
                ConditioningFrame::Uniform => {
                    let x = random_unit_vector(dim, rng);
                    let u = random_orthogonal_unit(&x, rng);
                    let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| c * a + s * b).collect();
                    (x, y)
                }
            };
            dot(&x, &cyclic_shift(&y, m))
        })
        .collect())
}
