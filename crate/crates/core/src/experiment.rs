//! End-to-end experiments: density estimation of a 1-D Gaussian mixture and
//! binary classification of moons / circles, with the hyperparameter grid
//! searches used to pick the RFF bandwidth and the softmax temperature.

use crate::datasets::{gen_circles, gen_gaussian_mixture_1d, gen_moons, gen_test_grid, train_test_split, Dataset, MixtureParams};
use crate::density::{fit, fit_density, DensityModel};
use crate::error::{Error, Result};
use crate::feature_map::{bounding_box, make_anchor_grid, RffMap, RffParams, SoftmaxMap};
use crate::metrics::{normalized_mae, pearson, ClassificationMetrics};
use crate::qmc::{predict_batch, Prediction, Readout};

/// Bandwidths tried for the RFF map.
pub const GAMMA_GRID: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
/// Inverse temperatures tried for the softmax map.
pub const BETA_GRID: [f64; 7] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct DensityConfig {
    pub mixture: MixtureParams,
    pub train_count: usize,
    pub data_seed: u64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_count: usize,
    pub dim: usize,
    pub rff_seed: u64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            mixture: MixtureParams::default(),
            train_count: 1000,
            data_seed: 7,
            grid_lo: -3.5,
            grid_hi: 3.5,
            grid_count: 1000,
            dim: 18,
            rff_seed: 11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityReport {
    pub gamma: f64,
    pub grid: Vec<f64>,
    pub densities: Vec<f64>,
    pub pdf: Vec<f64>,
    pub correlation: f64,
    pub mae: f64,
    pub model: DensityModel,
}

/// Fits the RFF density model at bandwidth `gamma` and evaluates it on the
/// test grid through the prediction circuit.
pub fn run_density(config: &DensityConfig, gamma: f64) -> Result<DensityReport> {
    let train = gen_gaussian_mixture_1d(config.train_count, &config.mixture, config.data_seed)?;
    let grid = gen_test_grid(config.grid_lo, config.grid_hi, config.grid_count)?;
    let map = RffMap::new(RffParams {
        input_dim: 1,
        output_dim: config.dim,
        gamma,
        seed: config.rff_seed,
    })?;
    let model = fit_density(&train.samples, map.into())?;
    let densities: Vec<f64> = predict_batch(&model, &grid.samples, Readout::Exact)?
        .iter()
        .map(|p| p.density().expect("single-class model"))
        .collect();
    let xs: Vec<f64> = grid.samples.iter().map(|x| x[0]).collect();
    let pdf: Vec<f64> = xs.iter().map(|&x| config.mixture.pdf(x)).collect();
    Ok(DensityReport {
        gamma,
        correlation: pearson(&densities, &pdf)?,
        mae: normalized_mae(&xs, &densities, &pdf)?,
        grid: xs,
        densities,
        pdf,
        model,
    })
}

/// Runs every bandwidth in `gammas` and keeps the one with the highest
/// correlation to the analytic pdf (earliest on ties).
pub fn select_gamma(config: &DensityConfig, gammas: &[f64]) -> Result<DensityReport> {
    let mut best: Option<DensityReport> = None;
    for &g in gammas {
        let report = run_density(config, g)?;
        if best.as_ref().is_none_or(|b| report.correlation > b.correlation) {
            best = Some(report);
        }
    }
    best.ok_or(Error::Empty("bandwidth grid"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassificationData {
    Moons { noise: f64 },
    Circles { noise: f64, factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationConfig {
    pub data: ClassificationData,
    pub n: usize,
    pub train_count: usize,
    pub data_seed: u64,
    pub split_seed: u64,
    pub grid_counts: [usize; 2],
}

impl ClassificationConfig {
    pub fn moons() -> Self {
        ClassificationConfig {
            data: ClassificationData::Moons { noise: 0.1 },
            n: 2000,
            train_count: 1340,
            data_seed: 1,
            split_seed: 2,
            grid_counts: [3, 3],
        }
    }

    pub fn circles() -> Self {
        ClassificationConfig {
            data: ClassificationData::Circles { noise: 0.1, factor: 0.5 },
            ..Self::moons()
        }
    }

    pub fn generate(&self) -> Result<(Dataset, Dataset)> {
        let full = match self.data {
            ClassificationData::Moons { noise } => gen_moons(self.n, noise, self.data_seed)?,
            ClassificationData::Circles { noise, factor } => gen_circles(self.n, noise, factor, self.data_seed)?,
        };
        train_test_split(&full, self.train_count, self.split_seed)
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub beta: f64,
    pub train: ClassificationMetrics,
    pub test: ClassificationMetrics,
    pub test_predictions: Vec<Prediction>,
    pub model: DensityModel,
}

fn labels_of(predictions: &[Prediction]) -> Vec<usize> {
    predictions
        .iter()
        .map(|p| p.class().expect("multi-class model").label)
        .collect()
}

/// Softmax map over a grid of anchors spanning the training data.
pub fn softmax_model(train: &Dataset, grid_counts: &[usize], beta: f64) -> Result<DensityModel> {
    let labels = train.labels.as_ref().ok_or(Error::Empty("training labels"))?;
    let anchors = make_anchor_grid(&bounding_box(&train.samples)?, grid_counts)?;
    let map = SoftmaxMap::new(anchors, beta)?;
    fit(&train.samples, labels, map.into(), train.num_classes())
}

/// Fits and evaluates the classifier at inverse temperature `beta`.
pub fn run_classification(config: &ClassificationConfig, beta: f64) -> Result<ClassificationReport> {
    let (train, test) = config.generate()?;
    let model = softmax_model(&train, &config.grid_counts, beta)?;
    let train_pred = predict_batch(&model, &train.samples, Readout::Exact)?;
    let test_predictions = predict_batch(&model, &test.samples, Readout::Exact)?;
    let truth = |d: &Dataset| d.labels.clone().ok_or(Error::Empty("labels"));
    Ok(ClassificationReport {
        beta,
        train: ClassificationMetrics::compute(&truth(&train)?, &labels_of(&train_pred))?,
        test: ClassificationMetrics::compute(&truth(&test)?, &labels_of(&test_predictions))?,
        test_predictions,
        model,
    })
}

/// Picks the inverse temperature with the best training accuracy (earliest
/// on ties); the test split is never consulted.
pub fn select_beta(config: &ClassificationConfig, betas: &[f64]) -> Result<ClassificationReport> {
    let mut best: Option<ClassificationReport> = None;
    for &b in betas {
        let report = run_classification(config, b)?;
        if best.as_ref().is_none_or(|r| report.train.accuracy > r.train.accuracy) {
            best = Some(report);
        }
    }
    best.ok_or(Error::Empty("temperature grid"))
}
