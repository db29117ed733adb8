//! Prediction circuits for density estimation and classification.
//!
//! Density estimation runs on two wires of dimension `d`:
//!
//! ```text
//! wire 0: |ψ⟩ ── U† ──────── X^{-k} ── measure
//! wire 1: |0⟩ ── U_λ ─────── ●k
//! ```
//!
//! and the probability of reading `0` on wire 0 equals `⟨ψ|ρ|ψ⟩`.
//! Classification adds a class wire holding `|π⟩ = Σ √π_j |j⟩`; class `j`
//! is rotated into the control position `|1⟩` before its controlled
//! `U_j†` / `U_{λ_j}` pair, and the joint probability of `(j, 0)` on wires
//! 0 and 1 equals `π_j ⟨ψ|ρ_j|ψ⟩`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::linalg::Unitary;
use crate::sim::{Circuit, Gate, QuditState, WireInit};

/// Joint probabilities below this are treated as zero when classifying.
pub const DEGENERATE_THRESHOLD: f64 = 1e-300;

/// How measurement outcomes are read off the final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// Exact marginal probabilities.
    #[default]
    Exact,
    /// Relative frequencies over `shots` seeded samples.
    Shots { shots: usize, seed: u64 },
}

/// Outcome of classifying one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPrediction {
    /// `P_{j0} = π_j ⟨ψ|ρ_j|ψ⟩`.
    pub joint: Vec<f64>,
    /// `P_j = P_{j0} / Σ_k P_{k0}`.
    pub posterior: Vec<f64>,
    /// `argmax_j P_{j0}`, smallest index on ties.
    pub label: usize,
}

impl ClassPrediction {
    /// Normalizes joint probabilities into posteriors and picks the label.
    pub fn from_joint(joint: Vec<f64>) -> Result<Self> {
        if joint.is_empty() {
            return Err(Error::Empty("class probabilities"));
        }
        if joint.iter().all(|&p| p < DEGENERATE_THRESHOLD) {
            return Err(Error::DegenerateSample);
        }
        let total: f64 = joint.iter().sum();
        let posterior = joint.iter().map(|p| p / total).collect();
        let mut label = 0;
        for (j, &p) in joint.iter().enumerate() {
            if p > joint[label] {
                label = j;
            }
        }
        Ok(ClassPrediction {
            joint,
            posterior,
            label,
        })
    }
}

/// Result for one sample: a density for single-class models, a class
/// prediction otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Density(f64),
    Class(ClassPrediction),
}

impl Prediction {
    pub fn density(&self) -> Option<f64> {
        match self {
            Prediction::Density(p) => Some(*p),
            Prediction::Class(_) => None,
        }
    }

    pub fn class(&self) -> Option<&ClassPrediction> {
        match self {
            Prediction::Density(_) => None,
            Prediction::Class(c) => Some(c),
        }
    }
}

fn check_psi(model: &DensityModel, psi: &QuditState) -> Result<()> {
    if psi.dims() != [model.dim()] {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: psi.len(),
        });
    }
    Ok(())
}

/// `U†` on wire 0, `U_λ` on wire 1, then `(X^{-1})^k` controlled by wire 1
/// on wire 0.
pub fn build_dmkde_circuit(model: &DensityModel) -> Result<Circuit> {
    if model.num_classes() != 1 {
        return Err(Error::InvalidParameter(format!(
            "density estimation needs a single-class model, got {} classes",
            model.num_classes()
        )));
    }
    let d = model.dim();
    let class = &model.classes()[0];
    let mut circuit = Circuit::new(&[d, d])?;
    circuit
        .push(Gate::unitary(0, class.spectral.eigenvectors.adjoint()))?
        .push(Gate::unitary(1, class.u_lambda.clone()))?
        .push(Gate::generalized_controlled_power(1, 0, Unitary::shift(d, -1))?)?;
    Ok(circuit)
}

/// Three-wire classification circuit; see the module docs.
pub fn build_dmkdc_circuit(model: &DensityModel) -> Result<Circuit> {
    let d = model.dim();
    let num_classes = model.num_classes();
    if num_classes > d {
        return Err(Error::TooManyClasses {
            classes: num_classes,
            dim: d,
        });
    }
    let mut circuit = Circuit::new(&[d, d, d])?;
    // class 0 moves into the control position |1⟩
    circuit.push(Gate::shift(0, 1))?;
    let mut accumulated: i64 = 1;
    for (j, class) in model.classes().iter().enumerate() {
        if j > 0 {
            circuit.push(Gate::shift(0, -1))?;
            accumulated -= 1;
        }
        circuit
            .push(Gate::controlled(0, 1, class.spectral.eigenvectors.adjoint())?)?
            .push(Gate::controlled(0, 2, class.u_lambda.clone())?)?;
    }
    // undo the net rotation so class j sits on |j⟩ again (X^{D-2})
    circuit
        .push(Gate::shift(0, -accumulated))?
        .push(Gate::generalized_controlled_power(2, 1, Unitary::shift(d, -1))?)?;
    Ok(circuit)
}

/// `|ψ⟩ ⊗ |0⟩`.
pub fn dmkde_initial_state(model: &DensityModel, psi: &QuditState) -> Result<QuditState> {
    check_psi(model, psi)?;
    let d = model.dim();
    QuditState::init_register(&[d, d], &[psi.into(), 0.into()])
}

/// `|π⟩ ⊗ |ψ⟩ ⊗ |0⟩`; class basis states `j ≥ D` get zero amplitude.
pub fn dmkdc_initial_state(model: &DensityModel, psi: &QuditState) -> Result<QuditState> {
    check_psi(model, psi)?;
    let d = model.dim();
    let mut pi = vec![Complex64::new(0.0, 0.0); d];
    for (slot, prior) in pi.iter_mut().zip(model.priors()) {
        *slot = Complex64::new(prior.sqrt(), 0.0);
    }
    QuditState::init_register(&[d, d, d], &[WireInit::State(pi), psi.into(), 0.into()])
}

/// Circuits built once per model, reusable across samples and threads.
#[derive(Debug, Clone)]
pub struct Predictor<'m> {
    model: &'m DensityModel,
    circuit: Circuit,
    readout: Readout,
}

impl<'m> Predictor<'m> {
    /// Uses the two-wire density circuit for single-class models and the
    /// three-wire classifier otherwise.
    pub fn new(model: &'m DensityModel, readout: Readout) -> Result<Self> {
        let circuit = if model.num_classes() == 1 {
            build_dmkde_circuit(model)?
        } else {
            build_dmkdc_circuit(model)?
        };
        Self::check_readout(readout)?;
        Ok(Predictor {
            model,
            circuit,
            readout,
        })
    }

    /// Always uses the three-wire classification circuit.
    pub fn classifier(model: &'m DensityModel, readout: Readout) -> Result<Self> {
        Self::check_readout(readout)?;
        Ok(Predictor {
            model,
            circuit: build_dmkdc_circuit(model)?,
            readout,
        })
    }

    fn check_readout(readout: Readout) -> Result<()> {
        match readout {
            Readout::Shots { shots: 0, .. } => Err(Error::InvalidParameter("shots must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn is_density_circuit(&self) -> bool {
        self.circuit.num_wires() == 2
    }

    /// Probabilities of `(wire0 = j, wire1 = 0)` for `j < D` (classifier), or
    /// of `wire0 = 0` (density circuit), under the configured readout.
    fn read(&self, state: &QuditState, sample_index: u64) -> Result<Vec<f64>> {
        let d = self.model.dim();
        let (wires, classes): (&[usize], usize) = if self.is_density_circuit() {
            (&[0], 1)
        } else {
            (&[0, 1], self.model.num_classes())
        };
        match self.readout {
            Readout::Exact => {
                let probs = state.marginal(wires)?;
                // outcome (j, 0) flattens to j·d; the density outcome is 0
                Ok((0..classes).map(|j| probs[j * d]).collect())
            }
            Readout::Shots { shots, seed } => {
                let counts = state.sample_measurement(wires, shots, seed.wrapping_add(sample_index))?;
                Ok((0..classes)
                    .map(|j| {
                        let key = if self.is_density_circuit() { vec![0] } else { vec![j, 0] };
                        counts.get(&key).copied().unwrap_or(0) as f64 / shots as f64
                    })
                    .collect())
            }
        }
    }

    /// Runs the circuit on `psi`. `sample_index` offsets the shot seed.
    pub fn predict_state(&self, psi: &QuditState, sample_index: u64) -> Result<Prediction> {
        if self.is_density_circuit() {
            let out = self.circuit.run(&dmkde_initial_state(self.model, psi)?)?;
            Ok(Prediction::Density(self.read(&out, sample_index)?[0]))
        } else {
            let out = self.circuit.run(&dmkdc_initial_state(self.model, psi)?)?;
            Ok(Prediction::Class(ClassPrediction::from_joint(self.read(&out, sample_index)?)?))
        }
    }

    /// Feature map followed by [`Predictor::predict_state`].
    pub fn predict(&self, x: &[f64], sample_index: u64) -> Result<Prediction> {
        self.predict_state(&self.model.embed(x)?, sample_index)
    }

    /// Per-sample results in input order, computed in parallel.
    pub fn predict_each(&self, samples: &[Vec<f64>]) -> Vec<Result<Prediction>> {
        samples
            .par_iter()
            .enumerate()
            .map(|(i, x)| self.predict(x, i as u64))
            .collect()
    }
}

/// Density `⟨ψ|ρ|ψ⟩` read from the two-wire circuit.
pub fn dmkde_predict(model: &DensityModel, psi: &QuditState) -> Result<f64> {
    let circuit = build_dmkde_circuit(model)?;
    let out = circuit.run(&dmkde_initial_state(model, psi)?)?;
    Ok(out.marginal(&[0])?[0])
}

/// Class probabilities read from the three-wire circuit.
pub fn dmkdc_predict(model: &DensityModel, psi: &QuditState) -> Result<ClassPrediction> {
    match Predictor::classifier(model, Readout::Exact)?.predict_state(psi, 0)? {
        Prediction::Class(c) => Ok(c),
        Prediction::Density(_) => unreachable!("classifier circuit has three wires"),
    }
}

/// Maps and predicts every sample, preserving order.
pub fn predict_batch(model: &DensityModel, samples: &[Vec<f64>], readout: Readout) -> Result<Vec<Prediction>> {
    Predictor::new(model, readout)?.predict_each(samples).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{build_density_matrix, ClassDensity, DensityMatrix};
    use crate::feature_map::SoftmaxMap;
    use crate::linalg::CMatrix;
    use crate::sim::Gate;

    fn map(d: usize) -> crate::feature_map::FeatureMap {
        SoftmaxMap::new((0..d).map(|i| vec![i as f64]).collect(), 1.0).unwrap().into()
    }

    fn model_from(densities: Vec<DensityMatrix>, priors: &[f64]) -> DensityModel {
        let d = densities[0].dim();
        let classes = densities
            .into_iter()
            .zip(priors)
            .map(|(rho, &p)| ClassDensity::train(rho, p, 1).unwrap())
            .collect();
        DensityModel::from_parts(map(d), classes).unwrap()
    }

    fn basis(d: usize, i: usize) -> QuditState {
        QuditState::basis(&[d], &[i]).unwrap()
    }

    #[test]
    fn dmkde_circuit_shape() {
        let rho = build_density_matrix(&[basis(4, 1)], 4).unwrap();
        let c = build_dmkde_circuit(&model_from(vec![rho], &[1.0])).unwrap();
        assert_eq!(c.len(), 3);
        assert!(matches!(c.gates()[0], Gate::Unitary { wire: 0, .. }));
        assert!(matches!(c.gates()[1], Gate::Unitary { wire: 1, .. }));
        assert!(matches!(
            c.gates()[2],
            Gate::GeneralizedControlledPower { control: 1, target: 0, .. }
        ));
    }

    #[test]
    fn maximally_mixed_qubit_gives_half() {
        let rho = build_density_matrix(&[basis(2, 0), basis(2, 1)], 2).unwrap();
        let m = model_from(vec![rho], &[1.0]);
        for psi in [basis(2, 0), QuditState::from_real(&[0.6, 0.8]).unwrap()] {
            assert!((dmkde_predict(&m, &psi).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_extremes() {
        let phi = QuditState::from_real(&[0.5, -0.5, 0.5, 0.5]).unwrap();
        let m = model_from(vec![build_density_matrix(&[phi.clone()], 4).unwrap()], &[1.0]);
        assert!((dmkde_predict(&m, &phi).unwrap() - 1.0).abs() < 1e-10);
        let m = model_from(vec![build_density_matrix(&[basis(4, 0)], 4).unwrap()], &[1.0]);
        assert!(dmkde_predict(&m, &basis(4, 1)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn dmkde_rejects_multiclass_and_bad_psi() {
        let rho = build_density_matrix(&[basis(3, 0)], 3).unwrap();
        let m = model_from(vec![rho.clone(), rho], &[0.5, 0.5]);
        assert!(build_dmkde_circuit(&m).is_err());
        let single = model_from(vec![build_density_matrix(&[basis(3, 0)], 3).unwrap()], &[1.0]);
        assert!(matches!(
            dmkde_predict(&single, &basis(2, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_class_circuit_layout() {
        let rho = build_density_matrix(&[basis(9, 0)], 9).unwrap();
        let m = model_from(vec![rho.clone(), rho], &[0.5, 0.5]);
        let c = build_dmkdc_circuit(&m).unwrap();
        // X, CU†, CUλ, X^-1, CU†, CUλ, restore, generalized
        assert_eq!(c.len(), 8);
        assert!(matches!(c.gates()[0], Gate::ShiftPower { wire: 0, power: 1 }));
        assert!(matches!(c.gates()[3], Gate::ShiftPower { wire: 0, power: -1 }));
        assert!(matches!(c.gates()[6], Gate::ShiftPower { wire: 0, power: 0 }));
        assert!(matches!(
            c.gates()[7],
            Gate::GeneralizedControlledPower { control: 2, target: 1, .. }
        ));
    }

    #[test]
    fn restore_shift_is_d_minus_two() {
        let rho = build_density_matrix(&[basis(5, 0)], 5).unwrap();
        for classes in 1..=5 {
            let priors = vec![1.0 / classes as f64; classes];
            let m = model_from(vec![rho.clone(); classes], &priors);
            let c = build_dmkdc_circuit(&m).unwrap();
            let restore = &c.gates()[c.len() - 2];
            assert!(matches!(restore, Gate::ShiftPower { wire: 0, power } if *power == classes as i64 - 2));
        }
    }

    #[test]
    fn zero_prior_class_never_wins() {
        let a = build_density_matrix(&[basis(3, 0)], 3).unwrap();
        let b = build_density_matrix(&[basis(3, 1)], 3).unwrap();
        let m = model_from(vec![a, b], &[1.0, 0.0]);
        for psi in [basis(3, 0), QuditState::from_real(&[0.1, 0.99f64.sqrt(), 0.0]).unwrap()] {
            let p = dmkdc_predict(&m, &psi).unwrap();
            assert_eq!(p.label, 0);
            assert_eq!(p.joint[1], 0.0);
        }
    }

    #[test]
    fn identical_densities_follow_priors() {
        let rho = build_density_matrix(&[basis(3, 0), basis(3, 2)], 3).unwrap();
        let m = model_from(vec![rho.clone(), rho.clone(), rho], &[0.2, 0.5, 0.3]);
        let p = dmkdc_predict(&m, &QuditState::from_real(&[0.6, 0.0, 0.8]).unwrap()).unwrap();
        assert_eq!(p.label, 1);
        for (post, prior) in p.posterior.iter().zip([0.2, 0.5, 0.3]) {
            assert!((post - prior).abs() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_sample_is_degenerate() {
        let a = build_density_matrix(&[basis(3, 0)], 3).unwrap();
        let b = build_density_matrix(&[basis(3, 1)], 3).unwrap();
        let m = model_from(vec![a, b], &[0.5, 0.5]);
        assert!(matches!(dmkdc_predict(&m, &basis(3, 2)), Err(Error::DegenerateSample)));
    }

    #[test]
    fn ties_pick_smallest_label() {
        let p = ClassPrediction::from_joint(vec![0.1, 0.3, 0.3]).unwrap();
        assert_eq!(p.label, 1);
        assert!(ClassPrediction::from_joint(vec![]).is_err());
    }

    #[test]
    fn empty_batch() {
        let rho = build_density_matrix(&[basis(3, 0)], 3).unwrap();
        let m = model_from(vec![rho], &[1.0]);
        assert!(predict_batch(&m, &[], Readout::Exact).unwrap().is_empty());
        assert!(Predictor::new(&m, Readout::Shots { shots: 0, seed: 0 }).is_err());
    }

    #[test]
    fn too_many_classes_rejected_by_builder() {
        let rho = DensityMatrix::new(CMatrix::identity(2, 2) / Complex64::new(2.0, 0.0)).unwrap();
        let classes = vec![ClassDensity::train(rho, 1.0 / 3.0, 1).unwrap(); 3];
        assert!(DensityModel::from_parts(map(2), classes).is_err());
    }
}
