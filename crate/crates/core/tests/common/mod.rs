#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use qudit_qmc::density::{ClassDensity, DensityMatrix, DensityModel};
use qudit_qmc::feature_map::{FeatureMap, SoftmaxMap};
use qudit_qmc::linalg::{CMatrix, Unitary};
use qudit_qmc::sim::QuditState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_amplitudes(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..len).map(|_| gaussian_complex(rng)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, dims: &[usize]) -> QuditState {
    let len = dims.iter().product();
    QuditState::from_amplitudes(dims, random_amplitudes(rng, len)).unwrap()
}

/// Haar-ish unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> Unitary {
    let m = CMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    Unitary::new(m.qr().q()).unwrap()
}

/// Mixture of `rank` random pure states with random weights.
pub fn random_density(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> DensityMatrix {
    let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(d, d);
    for w in weights {
        let v = nalgebra::DVector::from_vec(random_amplitudes(rng, d));
        m += (&v * v.adjoint()) * Complex64::new(w / total, 0.0);
    }
    // exact hermiticity
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(m).unwrap()
}

/// Softmax map used only to fix the state dimension of hand-built models.
pub fn placeholder_map(d: usize) -> FeatureMap {
    SoftmaxMap::new((0..d).map(|i| vec![i as f64]).collect(), 1.0).unwrap().into()
}

pub fn random_priors(rng: &mut ChaCha8Rng, classes: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..classes).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // land the sum on 1 within one ulp
    let rest: f64 = p[1..].iter().sum();
    p[0] = 1.0 - rest;
    p
}

pub fn random_model(rng: &mut ChaCha8Rng, d: usize, classes: usize) -> DensityModel {
    let priors = random_priors(rng, classes);
    let parts = priors
        .iter()
        .map(|&p| {
            let rank = rng.random_range(1..=d);
            ClassDensity::train(random_density(rng, d, rank), p, 1).unwrap()
        })
        .collect();
    DensityModel::from_parts(placeholder_map(d), parts).unwrap()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn projector(d: usize, k: usize) -> CMatrix {
    let mut p = CMatrix::zeros(d, d);
    p[(k, k)] = Complex64::new(1.0, 0.0);
    p
}

pub fn as_vector(s: &QuditState) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(s.amplitudes())
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn identity(d: usize) -> DMatrix<Complex64> {
    CMatrix::identity(d, d)
}
