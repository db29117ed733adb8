//! Seeded synthetic datasets.
//!
//! All randomness comes from `ChaCha8Rng` (rand_chacha 0.9) seeded with
//! `seed_from_u64`, so a `(generator, params, seed)` triple reproduces the
//! same samples on every platform.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Two-component 1-D Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    pub weights: [f64; 2],
    pub means: [f64; 2],
    pub stddevs: [f64; 2],
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams {
            weights: [0.4, 0.6],
            means: [-1.0, 1.5],
            stddevs: [0.6, 0.4],
        }
    }
}

impl MixtureParams {
    pub fn validate(&self) -> Result<()> {
        let [w1, w2] = self.weights;
        if !(w1 >= 0.0 && w2 >= 0.0 && (w1 + w2 - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "mixture weights {:?} must be nonnegative and sum to 1",
                self.weights
            )));
        }
        if !self.stddevs.iter().all(|&s| s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mixture stddevs {:?} must be positive",
                self.stddevs
            )));
        }
        if !self.means.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidParameter("mixture means must be finite".into()));
        }
        Ok(())
    }

    /// `w₁ N(x; μ₁, σ₁) + w₂ N(x; μ₂, σ₂)`.
    pub fn pdf(&self, x: f64) -> f64 {
        (0..2)
            .map(|k| {
                let z = (x - self.means[k]) / self.stddevs[k];
                self.weights[k] * (-0.5 * z * z).exp() / (self.stddevs[k] * (TAU).sqrt())
            })
            .sum()
    }
}

/// Parameters a dataset was generated with.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Mixture { params: MixtureParams, n: usize, seed: u64 },
    Grid { lo: f64, hi: f64, n: usize },
    Moons { n: usize, noise: f64, seed: u64 },
    Circles { n: usize, noise: f64, factor: f64, seed: u64 },
    Loaded,
}

/// Raw samples with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    pub generator: Generator,
}

impl Dataset {
    pub fn new(samples: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != samples.len() {
                return Err(Error::DimensionMismatch {
                    expected: samples.len(),
                    found: l.len(),
                });
            }
        }
        Ok(Dataset {
            samples,
            labels,
            generator: Generator::Loaded,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Coordinates per sample (0 for an empty dataset).
    pub fn input_dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// `max label + 1`, or 1 for unlabelled data.
    pub fn num_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(1, |&m| m + 1)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        match &self.labels {
            Some(labels) => labels.iter().for_each(|&l| counts[l] += 1),
            None => counts[0] = self.len(),
        }
        counts
    }

    fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            generator: self.generator.clone(),
        }
    }
}

/// `n` draws from a two-component Gaussian mixture.
pub fn gen_gaussian_mixture_1d(n: usize, params: &MixtureParams, seed: u64) -> Result<Dataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let k = if rng.random::<f64>() < params.weights[0] { 0 } else { 1 };
            let z: f64 = StandardNormal.sample(&mut rng);
            vec![params.means[k] + params.stddevs[k] * z]
        })
        .collect();
    Ok(Dataset {
        samples,
        labels: None,
        generator: Generator::Mixture {
            params: *params,
            n,
            seed,
        },
    })
}

/// `n` equally spaced points on `[lo, hi]`, both ends included.
pub fn gen_test_grid(lo: f64, hi: f64, n: usize) -> Result<Dataset> {
    if !(lo < hi) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs lo < hi and n >= 2, got [{lo}, {hi}] with n = {n}"
        )));
    }
    let samples = (0..n)
        .map(|i| {
            if i == n - 1 {
                vec![hi]
            } else {
                vec![lo + (hi - lo) * i as f64 / (n - 1) as f64]
            }
        })
        .collect();
    Ok(Dataset {
        samples,
        labels: None,
        generator: Generator::Grid { lo, hi, n },
    })
}

fn check_two_class(n: usize, noise: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise must be nonnegative, got {noise}")));
    }
    Ok(())
}

/// `n` evenly spaced values on `[0, end]` (inclusive) or `[0, end)`.
fn angles(n: usize, end: f64, inclusive: bool) -> impl Iterator<Item = f64> {
    let steps = if inclusive { n.saturating_sub(1).max(1) } else { n };
    (0..n).map(move |i| end * i as f64 / steps as f64)
}

/// Shuffles points and labels together, then adds isotropic Gaussian noise.
fn finish(mut points: Vec<(Vec<f64>, usize)>, noise: f64, rng: &mut ChaCha8Rng, generator: Generator) -> Dataset {
    points.shuffle(rng);
    for (p, _) in &mut points {
        for v in p.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += noise * z;
        }
    }
    let (samples, labels) = points.into_iter().unzip();
    Dataset {
        samples,
        labels: Some(labels),
        generator,
    }
}

/// Two interleaving half circles: class 0 is the upper unit arc around the
/// origin, class 1 the lower unit arc around `(1, 0.5)`.
pub fn gen_moons(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_two_class(n, noise)?;
    let n_outer = n / 2;
    let n_inner = n - n_outer;
    let mut points = Vec::with_capacity(n);
    points.extend(angles(n_outer, PI, true).map(|t| (vec![t.cos(), t.sin()], 0)));
    points.extend(angles(n_inner, PI, true).map(|t| (vec![1.0 - t.cos(), 0.5 - t.sin()], 1)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(finish(points, noise, &mut rng, Generator::Moons { n, noise, seed }))
}

/// Two concentric circles: class 0 of radius 1, class 1 of radius `factor`.
pub fn gen_circles(n: usize, noise: f64, factor: f64, seed: u64) -> Result<Dataset> {
    check_two_class(n, noise)?;
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::InvalidParameter(format!("factor must lie in (0, 1), got {factor}")));
    }
    let n_outer = n / 2;
    let n_inner = n - n_outer;
    let mut points = Vec::with_capacity(n);
    points.extend(angles(n_outer, TAU, false).map(|t| (vec![t.cos(), t.sin()], 0)));
    points.extend(angles(n_inner, TAU, false).map(|t| (vec![factor * t.cos(), factor * t.sin()], 1)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(finish(
        points,
        noise,
        &mut rng,
        Generator::Circles {
            n,
            noise,
            factor,
            seed,
        },
    ))
}

/// Seeded shuffle, then the first `train_count` samples become the
/// training set.
pub fn train_test_split(dataset: &Dataset, train_count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if train_count > dataset.len() {
        return Err(Error::InvalidParameter(format!(
            "train count {train_count} exceeds dataset size {}",
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = order.split_at(train_count);
    Ok((dataset.subset(train), dataset.subset(test)))
}
