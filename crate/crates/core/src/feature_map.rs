//! Feature maps from raw samples to unit-norm single-qudit states.
//!
//! Two maps are provided:
//!
//! * [`RffMap`]: `d` random Fourier features `cos(w_i·x + b_i)` with
//!   `w_i ~ N(0, 2γ I)` and `b_i ~ U[0, 2π)`, normalized to unit length.
//!   The unnormalized features approximate the Gaussian kernel
//!   `exp(-γ‖x - y‖²)` through `(2/d) z(x)·z(y)`.
//! * [`SoftmaxMap`]: amplitudes `√p_i` where `p` is the softmax of
//!   `-β‖x - a_i‖²` over a fixed set of anchors `a_i`.
//!
//! Both are pure functions of their parameters; [`RffMap`] regenerates its
//! weights bit-exactly from `(seed, γ, dims)` using ChaCha8.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sim::QuditState;

/// Norm below which a random Fourier feature vector is considered degenerate.
pub const MIN_FEATURE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RffParams {
    pub input_dim: usize,
    pub output_dim: usize,
    pub gamma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RffMap {
    params: RffParams,
    /// Row `i` is `w_i`.
    weights: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl RffMap {
    pub fn new(params: RffParams) -> Result<Self> {
        if params.input_dim == 0 {
            return Err(Error::InvalidParameter("RFF input dimension must be positive".into()));
        }
        if params.output_dim < 2 {
            return Err(Error::InvalidDimension(params.output_dim));
        }
        if !(params.gamma > 0.0 && params.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "RFF bandwidth must be positive, got {}",
                params.gamma
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let normal = Normal::new(0.0, (2.0 * params.gamma).sqrt())
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let weights = (0..params.output_dim)
            .map(|_| (0..params.input_dim).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let offsets = (0..params.output_dim).map(|_| rng.random::<f64>() * TAU).collect();
        Ok(RffMap {
            params,
            weights,
            offsets,
        })
    }

    pub fn params(&self) -> &RffParams {
        &self.params
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Unnormalized features `cos(w_i·x + b_i)`.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.params.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.params.input_dim,
                found: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, b)| (dot(w, x) + b).cos())
            .collect())
    }

    pub fn map(&self, x: &[f64]) -> Result<QuditState> {
        let z = self.features(x)?;
        let norm = dot(&z, &z).sqrt();
        if !(norm >= MIN_FEATURE_NORM) {
            return Err(Error::ZeroFeatureVector { norm });
        }
        let amps: Vec<f64> = z.iter().map(|v| v / norm).collect();
        QuditState::from_real(&amps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxMap {
    anchors: Vec<Vec<f64>>,
    beta: f64,
}

impl SoftmaxMap {
    pub fn new(anchors: Vec<Vec<f64>>, beta: f64) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::InvalidDimension(anchors.len()));
        }
        let dim = anchors[0].len();
        if dim == 0 {
            return Err(Error::Empty("anchor coordinates"));
        }
        if let Some(bad) = anchors.iter().find(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        for (i, a) in anchors.iter().enumerate() {
            if anchors[..i].contains(a) {
                return Err(Error::InvalidParameter(format!("duplicate anchor {a:?}")));
            }
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        Ok(SoftmaxMap { anchors, beta })
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn input_dim(&self) -> usize {
        self.anchors[0].len()
    }

    /// Softmax probabilities `p_i`, computed with max-subtraction.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let logits: Vec<f64> = self.anchors.iter().map(|a| -self.beta * sq_dist(a, x)).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / total).collect())
    }

    pub fn map(&self, x: &[f64]) -> Result<QuditState> {
        let amps: Vec<f64> = self.probabilities(x)?.into_iter().map(f64::sqrt).collect();
        QuditState::from_real(&amps)
    }
}

/// Either feature map, as stored in a trained model.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    Rff(RffMap),
    Softmax(SoftmaxMap),
}

impl FeatureMap {
    pub fn map(&self, x: &[f64]) -> Result<QuditState> {
        match self {
            FeatureMap::Rff(m) => m.map(x),
            FeatureMap::Softmax(m) => m.map(x),
        }
    }

    /// Dimension of the produced state.
    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::Rff(m) => m.params.output_dim,
            FeatureMap::Softmax(m) => m.anchors.len(),
        }
    }

    /// Number of raw input coordinates.
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::Rff(m) => m.params.input_dim,
            FeatureMap::Softmax(m) => m.input_dim(),
        }
    }
}

impl From<RffMap> for FeatureMap {
    fn from(m: RffMap) -> Self {
        FeatureMap::Rff(m)
    }
}

impl From<SoftmaxMap> for FeatureMap {
    fn from(m: SoftmaxMap) -> Self {
        FeatureMap::Softmax(m)
    }
}

/// Regular grid of anchors, first axis slowest. An axis with count 1
/// contributes its interval midpoint.
pub fn make_anchor_grid(bounds: &[(f64, f64)], counts: &[usize]) -> Result<Vec<Vec<f64>>> {
    if bounds.is_empty() {
        return Err(Error::Empty("anchor grid bounds"));
    }
    if counts.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            found: counts.len(),
        });
    }
    let mut axes = Vec::with_capacity(bounds.len());
    for (&(lo, hi), &n) in bounds.iter().zip(counts) {
        if n == 0 {
            return Err(Error::InvalidParameter("anchor count per axis must be positive".into()));
        }
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        let axis: Vec<f64> = if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .collect()
        };
        axes.push(axis);
    }
    let mut grid = vec![Vec::new()];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    Ok(grid)
}

/// Per-axis `(min, max)` over a sample set.
pub fn bounding_box(samples: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let first = samples.first().ok_or(Error::Empty("samples"))?;
    let mut bounds: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
    for s in samples {
        if s.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                found: s.len(),
            });
        }
        for (b, &v) in bounds.iter_mut().zip(s) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    Ok(bounds)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rff(d: usize, input: usize) -> RffMap {
        RffMap::new(RffParams {
            input_dim: input,
            output_dim: d,
            gamma: 1.0,
            seed: 42,
        })
        .unwrap()
    }

    #[test]
    fn rff_output_is_unit_norm_with_requested_dim() {
        let m = rff(18, 1);
        let s = m.map(&[0.3]).unwrap();
        assert_eq!(s.dims(), &[18]);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!(s.amplitudes().iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn rff_regenerates_bit_exactly() {
        let a = rff(9, 2);
        let b = rff(9, 2);
        assert_eq!(a, b);
        let other = RffMap::new(RffParams { seed: 43, ..*a.params() }).unwrap();
        assert_ne!(a.weights(), other.weights());
        assert!(a.offsets().iter().all(|&b| (0.0..TAU).contains(&b)));
    }

    #[test]
    fn rff_rejects_bad_input() {
        let m = rff(4, 2);
        assert!(matches!(m.map(&[1.0]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
        let bad = RffParams {
            input_dim: 1,
            output_dim: 4,
            gamma: 0.0,
            seed: 0,
        };
        assert!(RffMap::new(bad).is_err());
    }

    #[test]
    fn softmax_peaks_at_anchor() {
        let anchors = make_anchor_grid(&[(0.0, 2.0), (0.0, 2.0)], &[3, 3]).unwrap();
        let m = SoftmaxMap::new(anchors.clone(), 100.0).unwrap();
        for (k, a) in anchors.iter().enumerate() {
            let s = m.map(a).unwrap();
            assert_eq!(s.dims(), &[9]);
            assert!(s.amplitudes()[k].re > 0.99);
        }
    }

    #[test]
    fn softmax_rejects_bad_params() {
        assert!(SoftmaxMap::new(vec![vec![0.0], vec![0.0]], 1.0).is_err());
        assert!(SoftmaxMap::new(vec![vec![0.0], vec![1.0]], -1.0).is_err());
        assert!(SoftmaxMap::new(vec![vec![0.0], vec![1.0, 2.0]], 1.0).is_err());
        let m = SoftmaxMap::new(vec![vec![0.0], vec![1.0]], 1.0).unwrap();
        assert!(m.map(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn unit_grid() {
        let g = make_anchor_grid(&[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[1], vec![0.0, 0.5]);
        assert_eq!(g[4], vec![0.5, 0.5]);
        assert_eq!(g[8], vec![1.0, 1.0]);
    }

    #[test]
    fn single_cell_grid_is_midpoint() {
        let g = make_anchor_grid(&[(0.0, 1.0), (-2.0, 2.0)], &[1, 1]).unwrap();
        assert_eq!(g, vec![vec![0.5, 0.0]]);
    }

    #[test]
    fn grid_errors() {
        assert!(make_anchor_grid(&[], &[]).is_err());
        assert!(make_anchor_grid(&[(1.0, 0.0)], &[2]).is_err());
        assert!(make_anchor_grid(&[(0.0, 1.0)], &[0]).is_err());
        assert!(make_anchor_grid(&[(0.0, 1.0)], &[2, 2]).is_err());
    }

    #[test]
    fn bounding_box_spans_samples() {
        let b = bounding_box(&[vec![0.0, 5.0], vec![-1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(b, vec![(-1.0, 3.0), (2.0, 5.0)]);
    }
}
