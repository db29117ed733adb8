use super::gate::Gate;
use super::state::QuditState;
use crate::error::{Error, Result};

/// Final-state norm deviation tolerated by [`Circuit::run`].
pub const RUN_NORM_TOLERANCE: f64 = 1e-10;

/// An ordered gate list over a register of fixed dimensions.
#[derive(Debug, Clone)]
pub struct Circuit {
    dims: Vec<usize>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Empty("register dimensions"));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Circuit {
            dims: dims.to_vec(),
            gates: Vec::new(),
        })
    }

    /// Appends a gate after checking it against the register.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(&self.dims)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_wires(&self) -> usize {
        self.dims.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Runs all gates in order on a copy of `initial`.
    pub fn run(&self, initial: &QuditState) -> Result<QuditState> {
        self.run_prefix(initial, self.gates.len())
    }

    /// Runs only the first `count` gates.
    pub fn run_prefix(&self, initial: &QuditState, count: usize) -> Result<QuditState> {
        if initial.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.iter().product(),
                found: initial.len(),
            });
        }
        let mut state = initial.clone();
        for gate in &self.gates[..count.min(self.gates.len())] {
            gate.apply_in_place(&mut state)?;
        }
        let norm = state.norm();
        if (norm - 1.0).abs() > RUN_NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Unitary;

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(&[3, 2]).unwrap();
        let s = QuditState::basis(&[3, 2], &[2, 1]).unwrap();
        assert_eq!(c.run(&s).unwrap(), s);
    }

    #[test]
    fn inverse_shift_pair() {
        let mut c = Circuit::new(&[4]).unwrap();
        c.push(Gate::shift(0, 1)).unwrap().push(Gate::shift(0, -1)).unwrap();
        let s = QuditState::from_real(&[0.5, 0.5, -0.5, 0.5]).unwrap();
        assert_eq!(c.run(&s).unwrap(), s);
    }

    #[test]
    fn push_validates_against_register() {
        let mut c = Circuit::new(&[3, 3]).unwrap();
        assert!(matches!(c.push(Gate::shift(2, 1)), Err(Error::WireOutOfRange { .. })));
        assert!(matches!(
            c.push(Gate::unitary(0, Unitary::identity(2))),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(c.is_empty());
    }

    #[test]
    fn run_rejects_other_register() {
        let c = Circuit::new(&[3, 3]).unwrap();
        let s = QuditState::basis(&[3, 2], &[0, 0]).unwrap();
        assert!(c.run(&s).is_err());
    }
}
