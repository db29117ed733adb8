mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use qudit_qmc::datasets::{gen_moons, train_test_split};
use qudit_qmc::density::{build_density_matrix, fit, spectral_decompose, synthesize_u_lambda, DensityMatrix};
use qudit_qmc::experiment::softmax_model;
use qudit_qmc::linalg::{max_abs_diff, unitarity_deviation, CMatrix};
use qudit_qmc::metrics::ClassificationMetrics;
use qudit_qmc::sim::QuditState;
use qudit_qmc::Error;

fn random_lambda(rng: &mut rand_chacha::ChaCha8Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

#[test]
fn density_matches_naive_double_loop() {
    let mut r = rng(10);
    let d = 9;
    let states: Vec<QuditState> = (0..200).map(|_| random_state(&mut r, &[d])).collect();
    let rho = build_density_matrix(&states, d).unwrap();
    let mut naive = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for s in &states {
        for i in 0..d {
            for j in 0..d {
                naive[i][j] += s.amplitudes()[i] * s.amplitudes()[j].conj() / 200.0;
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            assert!((rho.matrix()[(i, j)] - naive[i][j]).norm() < 1e-12);
        }
    }
    let m = rho.matrix();
    assert!(max_abs_diff(m, &m.adjoint()) < 1e-10);
    assert!((m.trace().re - 1.0).abs() < 1e-10);
    assert!(m.clone().symmetric_eigenvalues().min() > -1e-10);
}

#[test]
fn spectral_reconstruction_random_mixture() {
    let mut r = rng(11);
    for rank in [1, 3, 9] {
        let rho = random_density(&mut r, 9, rank);
        let sd = spectral_decompose(&rho).unwrap();
        assert!(max_abs_diff(&sd.reconstruct(), rho.matrix()) < 1e-9);
        assert!((sd.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(sd.eigenvalues.iter().all(|&l| l >= 0.0));
        // phase convention: first significant component real positive
        let u = sd.eigenvectors.matrix();
        for c in 0..9 {
            let anchor = u.column(c).iter().find(|z| z.norm() > 1e-8).copied().unwrap();
            assert!(anchor.im.abs() < 1e-15 && anchor.re > 0.0);
        }
    }
}

#[test]
fn tiny_negative_eigenvalue_is_clamped() {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new(1.0 + 1e-11, 0.0);
    m[(1, 1)] = Complex64::new(-1e-11, 0.0);
    let rho = DensityMatrix::new(m).unwrap();
    let sd = spectral_decompose(&rho).unwrap();
    assert_eq!(sd.eigenvalues, vec![1.0, 0.0]);
}

#[test]
fn accumulated_negative_mass_is_rejected() {
    // each eigenvalue passes the per-entry PSD tolerance, the total does not
    let d = 18;
    let mut m = CMatrix::zeros(d, d);
    for i in 1..d {
        m[(i, i)] = Complex64::new(-0.9e-10, 0.0);
    }
    m[(0, 0)] = Complex64::new(1.0 + 17.0 * 0.9e-10, 0.0);
    let rho = DensityMatrix::new(m).unwrap();
    assert!(matches!(spectral_decompose(&rho), Err(Error::NegativeSpectrum { .. })));
}

#[test]
fn u_lambda_random_eighteen() {
    let mut r = rng(12);
    let lambda = random_lambda(&mut r, 18);
    let u = synthesize_u_lambda(&lambda).unwrap();
    assert!(unitarity_deviation(u.matrix()) < 1e-10);
    let zero = QuditState::basis(&[18], &[0]).unwrap();
    let out = zero.apply_unitary(0, &u).unwrap();
    for (a, l) in out.amplitudes().iter().zip(&lambda) {
        assert!((a - Complex64::new(l.sqrt(), 0.0)).norm() < 1e-12);
    }
}

#[test]
fn u_lambda_thousand_draws_per_dimension() {
    let mut r = rng(13);
    for d in [2, 4, 9, 18] {
        for draw in 0..1000 {
            let mut lambda = random_lambda(&mut r, d);
            if draw % 10 == 0 {
                // sparse spectra, including |λ⟩ close to |0⟩
                for l in lambda.iter_mut().skip(1) {
                    *l *= 1e-9;
                }
                let rest: f64 = lambda[1..].iter().sum();
                lambda[0] = 1.0 - rest;
            }
            let u = synthesize_u_lambda(&lambda).unwrap();
            assert!(unitarity_deviation(u.matrix()) < 1e-10, "d={d} draw={draw}");
            for (row, l) in lambda.iter().enumerate() {
                assert!((u.matrix()[(row, 0)] - Complex64::new(l.sqrt(), 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn quadratic_form_equals_spectral_sum() {
    let mut r = rng(14);
    for d in 2..=18 {
        for _ in 0..10 {
            let rank = r.random_range(1..=d);
            let rho = random_density(&mut r, d, rank);
            let sd = spectral_decompose(&rho).unwrap();
            let psi = random_state(&mut r, &[d]);
            let direct = rho.expectation(&psi).unwrap();
            let spectral = sd.expectation(&psi).unwrap();
            assert!((direct - spectral).abs() < 1e-12, "d={d}: {direct} vs {spectral}");
            assert!((-1e-12..=1.0 + 1e-10).contains(&direct));
        }
    }
}

#[test]
fn fit_is_permutation_invariant() {
    let data = gen_moons(400, 0.1, 21).unwrap();
    let model = softmax_model(&data, &[3, 3], 2.0).unwrap();
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng(22));
    let samples: Vec<Vec<f64>> = order.iter().map(|&i| data.samples[i].clone()).collect();
    let labels: Vec<usize> = order.iter().map(|&i| data.labels.as_ref().unwrap()[i]).collect();
    let shuffled = fit(&samples, &labels, model.feature_map().clone(), 2).unwrap();
    for (a, b) in model.classes().iter().zip(shuffled.classes()) {
        assert!(max_abs_diff(a.density.matrix(), b.density.matrix()) < 1e-12);
        assert!(max_abs_diff(a.spectral.eigenvectors.matrix(), b.spectral.eigenvectors.matrix()) < 1e-9);
        assert_eq!(a.prior, b.prior);
    }
}

#[test]
fn moons_oracle_classifier_beats_chance() {
    let full = gen_moons(2000, 0.1, 1).unwrap();
    let (train, _) = train_test_split(&full, 1340, 2).unwrap();
    let model = softmax_model(&train, &[3, 3], 2.0).unwrap();
    assert_eq!((model.num_classes(), model.dim()), (2, 9));
    let predicted: Vec<usize> = train
        .samples
        .iter()
        .map(|x| {
            let psi = model.embed(x).unwrap();
            let scores: Vec<f64> = (0..2)
                .map(|j| model.classes()[j].prior * model.expectation_oracle(j, &psi).unwrap())
                .collect();
            usize::from(scores[1] > scores[0])
        })
        .collect();
    let acc = ClassificationMetrics::compute(train.labels.as_ref().unwrap(), &predicted).unwrap().accuracy;
    assert!(acc > 0.6, "train accuracy {acc}");
}

#[test]
fn fitted_models_satisfy_density_invariants() {
    let data = gen_moons(300, 0.2, 5).unwrap();
    let model = softmax_model(&data, &[3, 3], 4.0).unwrap();
    assert!((model.priors().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for c in model.classes() {
        let m = c.density.matrix();
        assert!(max_abs_diff(m, &m.adjoint()) < 1e-10);
        assert!((m.trace().re - 1.0).abs() < 1e-10);
        assert!(max_abs_diff(&c.spectral.reconstruct(), m) < 1e-9);
        assert!((c.spectral.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reconstruction_holds(d in 2usize..=12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rank = r.random_range(1..=d);
        let rho = random_density(&mut r, d, rank);
        let sd = spectral_decompose(&rho).unwrap();
        prop_assert!(max_abs_diff(&sd.reconstruct(), rho.matrix()) < 1e-9);
    }
}
