//! Classical training: per-class density matrices, their spectral
//! decompositions, priors, and the unitaries that load eigenvalues into
//! amplitudes.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;
use crate::linalg::{max_abs_diff, CMatrix, Unitary, ONE, ZERO};
use crate::sim::QuditState;

/// Tolerance on hermiticity, trace and positivity of a density matrix.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Total negative eigenvalue mass that may be clamped away as rounding noise.
pub const CLAMP_THRESHOLD: f64 = 1e-9;
/// Magnitude above which an eigenvector component may anchor its phase.
pub const PHASE_ANCHOR_MIN: f64 = 1e-8;
/// Tolerance on the sum of class priors.
pub const PRIOR_TOLERANCE: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Wraps `matrix` after checking every density-matrix invariant.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if !(herm < DENSITY_TOLERANCE) {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let trace = matrix.trace();
        if !((trace.re - 1.0).abs() <= DENSITY_TOLERANCE && trace.im.abs() <= DENSITY_TOLERANCE) {
            return Err(Error::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let min = matrix.clone().symmetric_eigenvalues().min();
        if !(min > -DENSITY_TOLERANCE) {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(matrix))
    }

    /// `(1/N) Σ |ψ_i⟩⟨ψ_i|` over single-wire states of dimension `dim`.
    pub fn from_states<'a>(states: impl IntoIterator<Item = &'a QuditState>, dim: usize) -> Result<Self> {
        let mut acc = CMatrix::zeros(dim, dim);
        let mut n = 0usize;
        for s in states {
            if s.dims() != [dim] {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            let a = s.amplitudes();
            for c in 0..dim {
                let ac = a[c].conj();
                for r in 0..dim {
                    acc[(r, c)] += a[r] * ac;
                }
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::Empty("training states"));
        }
        acc /= Complex64::new(n as f64, 0.0);
        DensityMatrix::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `⟨ψ|ρ|ψ⟩` by a dense matrix-vector product.
    pub fn expectation(&self, psi: &QuditState) -> Result<f64> {
        if psi.dims() != [self.dim()] {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let a = psi.amplitudes();
        let mut total = ZERO;
        for r in 0..self.dim() {
            let mut row = ZERO;
            for c in 0..self.dim() {
                row += self.0[(r, c)] * a[c];
            }
            total += a[r].conj() * row;
        }
        Ok(total.re)
    }
}

/// Free-function form of [`DensityMatrix::from_states`].
pub fn build_density_matrix(states: &[QuditState], dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::from_states(states, dim)
}

/// `ρ = U Λ U†` with eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Unitary,
    pub eigenvalues: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U Λ U†`.
    pub fn reconstruct(&self) -> CMatrix {
        let u = self.eigenvectors.matrix();
        let mut scaled = u.clone();
        for (c, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(c).scale_mut(l);
        }
        scaled * u.adjoint()
    }

    /// `Σ_i λ_i |⟨i|U†|ψ⟩|²`.
    pub fn expectation(&self, psi: &QuditState) -> Result<f64> {
        if psi.dims() != [self.dim()] {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let u = self.eigenvectors.matrix();
        let a = psi.amplitudes();
        Ok(self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let overlap: Complex64 = (0..self.dim()).map(|k| u[(k, i)].conj() * a[k]).sum();
                l * overlap.norm_sqr()
            })
            .sum())
    }
}

/// Hermitian eigendecomposition with deterministic ordering and phases.
///
/// Eigenvalues are sorted descending (equal values keep solver order),
/// negative values are clamped to zero and the spectrum is renormalized to
/// sum 1. The first component of magnitude above [`PHASE_ANCHOR_MIN`] in
/// each eigenvector is made real and positive.
pub fn spectral_decompose(rho: &DensityMatrix) -> Result<SpectralDecomposition> {
    let d = rho.dim();
    let eig = rho.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let raw: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let shift: f64 = raw.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    if shift >= CLAMP_THRESHOLD {
        return Err(Error::NegativeSpectrum { shift });
    }
    let clamped: Vec<f64> = raw.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let eigenvalues = clamped.into_iter().map(|l| l / total).collect();

    let mut vectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let phase = col
            .iter()
            .find(|c| c.norm() > PHASE_ANCHOR_MIN)
            .map(|c| c.conj() / c.norm())
            .unwrap_or(ONE);
        for r in 0..d {
            vectors[(r, dst)] = col[r] * phase;
        }
    }
    Ok(SpectralDecomposition {
        eigenvectors: Unitary::new(vectors)?,
        eigenvalues,
    })
}

/// A unitary whose first column is `(√λ_0, …, √λ_{d-1})`.
///
/// Built as the Householder reflection `I - 2vv†/⟨v,v⟩` with `v = |λ⟩ - |0⟩`;
/// `v_0` is evaluated as `-(Σ_{i>0} λ_i)/(1 + √λ_0)` to avoid cancellation
/// near `|λ⟩ = |0⟩`, where the identity is returned.
pub fn synthesize_u_lambda(eigenvalues: &[f64]) -> Result<Unitary> {
    let d = eigenvalues.len();
    if d == 0 {
        return Err(Error::Empty("eigenvalues"));
    }
    if let Some(&l) = eigenvalues.iter().find(|&&l| !(l >= -1e-12)) {
        return Err(Error::InvalidParameter(format!("negative eigenvalue {l}")));
    }
    let sum: f64 = eigenvalues.iter().sum();
    if !((sum - 1.0).abs() <= DENSITY_TOLERANCE) {
        return Err(Error::InvalidParameter(format!("eigenvalues sum to {sum}, not 1")));
    }
    let roots: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let norm = roots.iter().map(|r| r * r).sum::<f64>().sqrt();
    let target: Vec<f64> = roots.iter().map(|r| r / norm).collect();

    let tail: f64 = target[1..].iter().map(|t| t * t).sum();
    if tail == 0.0 {
        return Ok(Unitary::identity(d));
    }
    let mut v = target.clone();
    v[0] = -tail / (1.0 + target[0]);
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut m = CMatrix::identity(d, d);
    for c in 0..d {
        for r in 0..d {
            m[(r, c)] -= Complex64::new(2.0 * v[r] * v[c] / vv, 0.0);
        }
    }
    Unitary::new(m)
}

/// Trained artifacts of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDensity {
    pub density: DensityMatrix,
    pub spectral: SpectralDecomposition,
    pub u_lambda: Unitary,
    pub prior: f64,
    pub count: usize,
}

impl ClassDensity {
    /// Decomposes `density` and synthesizes its eigenvalue loader.
    pub fn train(density: DensityMatrix, prior: f64, count: usize) -> Result<Self> {
        let spectral = spectral_decompose(&density)?;
        let u_lambda = synthesize_u_lambda(&spectral.eigenvalues)?;
        Ok(ClassDensity {
            density,
            spectral,
            u_lambda,
            prior,
            count,
        })
    }
}

/// One trained density per class, all over the same feature map.
///
/// Density estimation is the single-class case with prior 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    feature_map: FeatureMap,
    classes: Vec<ClassDensity>,
}

impl DensityModel {
    /// Assembles a model from trained parts, checking dimensions and priors.
    pub fn from_parts(feature_map: FeatureMap, classes: Vec<ClassDensity>) -> Result<Self> {
        let d = feature_map.dim();
        if classes.is_empty() {
            return Err(Error::Empty("classes"));
        }
        if classes.len() > d {
            return Err(Error::TooManyClasses {
                classes: classes.len(),
                dim: d,
            });
        }
        for c in &classes {
            for found in [c.density.dim(), c.spectral.dim(), c.u_lambda.dim()] {
                if found != d {
                    return Err(Error::DimensionMismatch { expected: d, found });
                }
            }
            if !(c.prior >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative prior {}", c.prior)));
            }
        }
        let total: f64 = classes.iter().map(|c| c.prior).sum();
        if !((total - 1.0).abs() <= PRIOR_TOLERANCE) {
            return Err(Error::InvalidParameter(format!("priors sum to {total}")));
        }
        Ok(DensityModel { feature_map, classes })
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.feature_map
    }

    pub fn classes(&self) -> &[ClassDensity] {
        &self.classes
    }

    /// Qudit dimension `d`.
    pub fn dim(&self) -> usize {
        self.feature_map.dim()
    }

    /// Class count `D`.
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.prior).collect()
    }

    /// Exact `⟨ψ|ρ_j|ψ⟩`.
    pub fn expectation_oracle(&self, class: usize, psi: &QuditState) -> Result<f64> {
        let c = self.classes.get(class).ok_or(Error::LabelOutOfRange {
            label: class,
            classes: self.classes.len(),
        })?;
        c.density.expectation(psi)
    }

    /// Maps a raw sample through the model's feature map.
    pub fn embed(&self, x: &[f64]) -> Result<QuditState> {
        self.feature_map.map(x)
    }
}

/// Trains one density matrix per class from labelled raw samples.
pub fn fit(samples: &[Vec<f64>], labels: &[usize], feature_map: FeatureMap, num_classes: usize) -> Result<DensityModel> {
    if samples.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            found: labels.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::Empty("training samples"));
    }
    if num_classes == 0 {
        return Err(Error::InvalidParameter("class count must be positive".into()));
    }
    let d = feature_map.dim();
    if num_classes > d {
        return Err(Error::TooManyClasses {
            classes: num_classes,
            dim: d,
        });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::LabelOutOfRange {
            label,
            classes: num_classes,
        });
    }
    let states: Vec<QuditState> = samples
        .par_iter()
        .map(|x| feature_map.map(x))
        .collect::<Result<_>>()?;

    let n = samples.len();
    let classes = (0..num_classes)
        .into_par_iter()
        .map(|j| {
            let members: Vec<&QuditState> = states.iter().zip(labels).filter(|(_, &l)| l == j).map(|(s, _)| s).collect();
            if members.is_empty() {
                return Err(Error::EmptyClass(j));
            }
            let density = DensityMatrix::from_states(members.iter().copied(), d)?;
            ClassDensity::train(density, members.len() as f64 / n as f64, members.len())
        })
        .collect::<Result<Vec<_>>>()?;
    DensityModel::from_parts(feature_map, classes)
}

/// Single-class fit for density estimation.
pub fn fit_density(samples: &[Vec<f64>], feature_map: FeatureMap) -> Result<DensityModel> {
    fit(samples, &vec![0; samples.len()], feature_map, 1)
}
