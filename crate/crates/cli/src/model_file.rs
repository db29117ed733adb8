//! Versioned JSON model file. Every float is stored as a hex-float string
//! so that a saved model reloads bit for bit.

use std::path::Path;

use num_complex::Complex64;
use qudit_qmc::density::{ClassDensity, DensityMatrix, DensityModel, SpectralDecomposition};
use qudit_qmc::feature_map::{FeatureMap, RffMap, RffParams, SoftmaxMap};
use qudit_qmc::linalg::{max_abs_diff, CMatrix, Unitary};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::hexfloat::Hex;

pub const FORMAT_NAME: &str = "qudit-qmc-model";
pub const FORMAT_VERSION: u32 = 1;

/// Tolerance for the consistency checks run on load.
pub const LOAD_TOLERANCE: f64 = 1e-9;

type HexMatrix = Vec<Vec<[Hex; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    Rff {
        input_dim: usize,
        output_dim: usize,
        gamma: Hex,
        seed: u64,
    },
    Softmax {
        beta: Hex,
        anchors: Vec<Vec<Hex>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub prior: Hex,
    pub count: usize,
    pub eigenvalues: Vec<Hex>,
    pub eigenvectors: HexMatrix,
    pub u_lambda: HexMatrix,
    pub density: HexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub num_classes: usize,
    pub feature_map: MapSpec,
    pub classes: Vec<ClassRecord>,
}

fn encode_matrix(m: &CMatrix) -> HexMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [Hex(m[(r, c)].re), Hex(m[(r, c)].im)]).collect())
        .collect()
}

fn decode_matrix(rows: &HexMatrix, dim: usize, what: &str) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::input(format!("{what}: expected a {dim}x{dim} matrix")));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re.0, im.0)
    }))
}

impl ModelFile {
    pub fn from_model(model: &DensityModel) -> Self {
        let feature_map = match model.feature_map() {
            FeatureMap::Rff(m) => {
                let p = m.params();
                MapSpec::Rff {
                    input_dim: p.input_dim,
                    output_dim: p.output_dim,
                    gamma: Hex(p.gamma),
                    seed: p.seed,
                }
            }
            FeatureMap::Softmax(m) => MapSpec::Softmax {
                beta: Hex(m.beta()),
                anchors: m.anchors().iter().map(|a| a.iter().map(|&v| Hex(v)).collect()).collect(),
            },
        };
        let classes = model
            .classes()
            .iter()
            .map(|c| ClassRecord {
                prior: Hex(c.prior),
                count: c.count,
                eigenvalues: c.spectral.eigenvalues.iter().map(|&v| Hex(v)).collect(),
                eigenvectors: encode_matrix(c.spectral.eigenvectors.matrix()),
                u_lambda: encode_matrix(c.u_lambda.matrix()),
                density: encode_matrix(c.density.matrix()),
            })
            .collect();
        ModelFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            dim: model.dim(),
            num_classes: model.num_classes(),
            feature_map,
            classes,
        }
    }

    /// Rebuilds the model, regenerating random features from their seed and
    /// re-checking every invariant.
    pub fn to_model(&self) -> Result<DensityModel> {
        if self.format != FORMAT_NAME {
            return Err(CliError::input(format!("not a model file (format {:?})", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(CliError::input(format!("unsupported model version {}", self.version)));
        }
        if self.classes.len() != self.num_classes {
            return Err(CliError::input(format!(
                "header declares {} classes, file holds {}",
                self.num_classes,
                self.classes.len()
            )));
        }
        let map: FeatureMap = match &self.feature_map {
            MapSpec::Rff {
                input_dim,
                output_dim,
                gamma,
                seed,
            } => RffMap::new(RffParams {
                input_dim: *input_dim,
                output_dim: *output_dim,
                gamma: gamma.0,
                seed: *seed,
            })?
            .into(),
            MapSpec::Softmax { beta, anchors } => {
                let anchors = anchors.iter().map(|a| a.iter().map(|h| h.0).collect()).collect();
                SoftmaxMap::new(anchors, beta.0)?.into()
            }
        };
        let d = self.dim;
        if map.dim() != d {
            return Err(CliError::input(format!(
                "feature map produces dimension {}, model declares {d}",
                map.dim()
            )));
        }
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(j, rec)| decode_class(rec, d, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityModel::from_parts(map, classes)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn decode_class(rec: &ClassRecord, d: usize, j: usize) -> Result<ClassDensity> {
    let density = DensityMatrix::new(decode_matrix(&rec.density, d, "density")?)?;
    let eigenvectors = Unitary::new(decode_matrix(&rec.eigenvectors, d, "eigenvectors")?)?;
    let u_lambda = Unitary::new(decode_matrix(&rec.u_lambda, d, "u_lambda")?)?;
    let eigenvalues: Vec<f64> = rec.eigenvalues.iter().map(|h| h.0).collect();
    if eigenvalues.len() != d {
        return Err(CliError::input(format!("class {j}: expected {d} eigenvalues")));
    }
    let numerical = |msg: String| CliError::Numerical(format!("class {j}: {msg}"));
    if let Some(v) = eigenvalues.iter().find(|v| !(**v >= 0.0)) {
        return Err(numerical(format!("eigenvalue {v} is negative")));
    }
    let total: f64 = eigenvalues.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(numerical(format!("eigenvalues sum to {total}")));
    }
    let spectral = SpectralDecomposition {
        eigenvectors,
        eigenvalues,
    };
    let err = max_abs_diff(&spectral.reconstruct(), density.matrix());
    if err > LOAD_TOLERANCE {
        return Err(numerical(format!("decomposition differs from density by {err:e}")));
    }
    let loaded = u_lambda.matrix().column(0);
    let worst = spectral
        .eigenvalues
        .iter()
        .zip(loaded.iter())
        .map(|(l, a)| (a - Complex64::new(l.sqrt(), 0.0)).norm())
        .fold(0.0, f64::max);
    if worst > LOAD_TOLERANCE {
        return Err(numerical(format!("U_lambda does not load the eigenvalues ({worst:e})")));
    }
    Ok(ClassDensity {
        density,
        spectral,
        u_lambda,
        prior: rec.prior.0,
        count: rec.count,
    })
}

pub fn save_model(model: &DensityModel, path: &Path) -> Result<()> {
    ModelFile::from_model(model).save(path)
}

pub fn load_model(path: &Path) -> Result<DensityModel> {
    ModelFile::load(path)?.to_model()
}
