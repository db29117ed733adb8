use std::sync::OnceLock;

use num_complex::Complex64;

use super::state::QuditState;
use crate::error::{Error, Result};
use crate::linalg::{shift_index, CMatrix, Unitary, ZERO};

/// Basis value of the control wire that triggers a [`Gate::ControlledUnitary`].
pub const CONTROL_TRIGGER: usize = 1;

/// A gate acting on one or two wires of a register.
#[derive(Debug, Clone)]
pub enum Gate {
    /// `X^power`: `|i⟩ → |i + power mod d⟩`.
    ShiftPower { wire: usize, power: i64 },
    /// Arbitrary single-wire unitary.
    Unitary { wire: usize, matrix: Unitary },
    /// Applies `matrix` to `target` when `control` is in `|1⟩`.
    ControlledUnitary {
        control: usize,
        target: usize,
        matrix: Unitary,
    },
    /// Applies `base^k` to `target` when `control` is in `|k⟩`.
    GeneralizedControlledPower {
        control: usize,
        target: usize,
        base: Unitary,
        powers: PowerCache,
    },
}

/// Lazily computed `base^0 … base^{d-1}` for the control dimension `d` first
/// seen; other control dimensions fall back to recomputation.
#[derive(Debug, Clone, Default)]
pub struct PowerCache(OnceLock<(usize, Vec<CMatrix>)>);

impl PowerCache {
    fn with_powers<R>(&self, base: &Unitary, count: usize, f: impl FnOnce(&[CMatrix]) -> R) -> R {
        let (cached_count, powers) = self.0.get_or_init(|| (count, base.powers(count)));
        if *cached_count == count {
            f(powers)
        } else {
            f(&base.powers(count))
        }
    }
}

fn distinct(control: usize, target: usize) -> Result<()> {
    if control == target {
        Err(Error::CoincidentWires(control))
    } else {
        Ok(())
    }
}

impl Gate {
    pub fn shift(wire: usize, power: i64) -> Gate {
        Gate::ShiftPower { wire, power }
    }

    pub fn unitary(wire: usize, matrix: Unitary) -> Gate {
        Gate::Unitary { wire, matrix }
    }

    pub fn controlled(control: usize, target: usize, matrix: Unitary) -> Result<Gate> {
        distinct(control, target)?;
        Ok(Gate::ControlledUnitary {
            control,
            target,
            matrix,
        })
    }

    pub fn generalized_controlled_power(control: usize, target: usize, base: Unitary) -> Result<Gate> {
        distinct(control, target)?;
        Ok(Gate::GeneralizedControlledPower {
            control,
            target,
            base,
            powers: PowerCache::default(),
        })
    }

    /// Wires the gate touches, control first.
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::ShiftPower { wire, .. } | Gate::Unitary { wire, .. } => vec![*wire],
            Gate::ControlledUnitary { control, target, .. }
            | Gate::GeneralizedControlledPower { control, target, .. } => vec![*control, *target],
        }
    }

    /// Checks wire ranges and matrix sizes against register dimensions.
    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        for &w in &self.wires() {
            if w >= dims.len() {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    wires: dims.len(),
                });
            }
        }
        let (wire, matrix) = match self {
            Gate::ShiftPower { .. } => return Ok(()),
            Gate::Unitary { wire, matrix } => (*wire, matrix),
            Gate::ControlledUnitary { control, target, matrix } => {
                distinct(*control, *target)?;
                (*target, matrix)
            }
            Gate::GeneralizedControlledPower {
                control, target, base, ..
            } => {
                distinct(*control, *target)?;
                (*target, base)
            }
        };
        if matrix.dim() != dims[wire] {
            return Err(Error::DimensionMismatch {
                expected: dims[wire],
                found: matrix.dim(),
            });
        }
        Ok(())
    }

    /// Applies the gate to `state` in place.
    pub fn apply_in_place(&self, state: &mut QuditState) -> Result<()> {
        self.validate(state.dims())?;
        match self {
            Gate::ShiftPower { wire, power } => shift_in_place(state, *wire, *power),
            Gate::Unitary { wire, matrix } => {
                let m = matrix.matrix();
                for_each_fiber(state, *wire, None, |_| Some(m));
            }
            Gate::ControlledUnitary {
                control,
                target,
                matrix,
            } => {
                let m = matrix.matrix();
                for_each_fiber(state, *target, Some(*control), |k| {
                    (k == CONTROL_TRIGGER).then_some(m)
                });
            }
            Gate::GeneralizedControlledPower {
                control,
                target,
                base,
                powers,
            } => {
                let count = state.dims()[*control];
                powers.with_powers(base, count, |p| {
                    // k = 0 is the identity
                    for_each_fiber(state, *target, Some(*control), |k| (k > 0).then(|| &p[k]));
                });
            }
        }
        Ok(())
    }
}

fn shift_in_place(state: &mut QuditState, wire: usize, power: i64) {
    let d = state.dims()[wire];
    let stride = state.stride(wire);
    let block = d * stride;
    let old = state.amplitudes().to_vec();
    let amps = state.amplitudes_mut();
    for hi in (0..old.len()).step_by(block) {
        for lo in 0..stride {
            let base = hi + lo;
            for i in 0..d {
                amps[base + shift_index(i, power, d) * stride] = old[base + i * stride];
            }
        }
    }
}

/// Visits every fiber of amplitudes along `target` (all other digits fixed)
/// and replaces it with `M · fiber` when `select` returns a matrix. `select`
/// receives the digit of `control`, or 0 without a control.
fn for_each_fiber<'m>(
    state: &mut QuditState,
    target: usize,
    control: Option<usize>,
    mut select: impl FnMut(usize) -> Option<&'m CMatrix>,
) {
    let d = state.dims()[target];
    let stride = state.stride(target);
    let block = d * stride;
    let control_geometry = control.map(|c| (state.stride(c), state.dims()[c]));
    let len = state.len();
    let amps = state.amplitudes_mut();
    let mut fiber = vec![ZERO; d];
    for hi in (0..len).step_by(block) {
        for lo in 0..stride {
            let base = hi + lo;
            let k = control_geometry.map_or(0, |(s, dc)| (base / s) % dc);
            let Some(m) = select(k) else { continue };
            for (i, f) in fiber.iter_mut().enumerate() {
                *f = amps[base + i * stride];
            }
            for r in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, f) in fiber.iter().enumerate() {
                    acc += m[(r, c)] * f;
                }
                amps[base + r * stride] = acc;
            }
        }
    }
}

impl QuditState {
    /// Returns a copy of the state with `gate` applied.
    pub fn apply(&self, gate: &Gate) -> Result<QuditState> {
        let mut out = self.clone();
        gate.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_shift_power(&self, wire: usize, power: i64) -> Result<QuditState> {
        self.check_wire(wire)?;
        self.apply(&Gate::shift(wire, power))
    }

    pub fn apply_unitary(&self, wire: usize, matrix: &Unitary) -> Result<QuditState> {
        self.apply(&Gate::unitary(wire, matrix.clone()))
    }

    pub fn apply_controlled_unitary(&self, control: usize, target: usize, matrix: &Unitary) -> Result<QuditState> {
        self.apply(&Gate::controlled(control, target, matrix.clone())?)
    }

    pub fn apply_generalized_controlled_power(
        &self,
        control: usize,
        target: usize,
        base: &Unitary,
    ) -> Result<QuditState> {
        self.apply(&Gate::generalized_controlled_power(control, target, base.clone())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn basis(dims: &[usize], idx: &[usize]) -> QuditState {
        QuditState::basis(dims, idx).unwrap()
    }

    #[test]
    fn shift_wraps_around() {
        let s = basis(&[3], &[2]).apply_shift_power(0, 1).unwrap();
        assert_eq!(s, basis(&[3], &[0]));
        let s = basis(&[5], &[0]).apply_shift_power(0, -1).unwrap();
        assert_eq!(s, basis(&[5], &[4]));
    }

    #[test]
    fn shift_rejects_bad_wire() {
        assert!(matches!(
            basis(&[3], &[0]).apply_shift_power(1, 1),
            Err(Error::WireOutOfRange { wire: 1, wires: 1 })
        ));
    }

    #[test]
    fn controlled_unitary_triggers_on_one_only() {
        let x = Unitary::shift(3, 1);
        let s = basis(&[3, 3], &[0, 2]);
        assert_eq!(s.apply_controlled_unitary(0, 1, &x).unwrap(), s);
        let s = basis(&[3, 3], &[1, 0]).apply_controlled_unitary(0, 1, &x).unwrap();
        assert_eq!(s, basis(&[3, 3], &[1, 1]));
        let s = basis(&[3, 3], &[2, 0]).apply_controlled_unitary(0, 1, &x).unwrap();
        assert_eq!(s, basis(&[3, 3], &[2, 0]));
    }

    #[test]
    fn controlled_gates_reject_coincident_wires() {
        let x = Unitary::shift(3, 1);
        let s = basis(&[3, 3], &[0, 0]);
        assert!(matches!(s.apply_controlled_unitary(1, 1, &x), Err(Error::CoincidentWires(1))));
        assert!(matches!(
            s.apply_generalized_controlled_power(0, 0, &x),
            Err(Error::CoincidentWires(0))
        ));
    }

    #[test]
    fn generalized_power_subtracts_control_from_target() {
        let xinv = Unitary::shift(3, -1);
        let s = basis(&[3, 3], &[2, 2]).apply_generalized_controlled_power(0, 1, &xinv).unwrap();
        assert_eq!(s, basis(&[3, 3], &[2, 0]));
        let s = basis(&[4, 4], &[0, 3]).apply_generalized_controlled_power(0, 1, &Unitary::shift(4, -1)).unwrap();
        assert_eq!(s, basis(&[4, 4], &[0, 3]));
    }

    #[test]
    fn unitary_on_single_wire() {
        let s = basis(&[2], &[0]).apply_unitary(0, &Unitary::shift(2, 1)).unwrap();
        assert_eq!(s, basis(&[2], &[1]));
        let s = basis(&[3, 2], &[2, 1]);
        assert_eq!(s.apply_unitary(1, &Unitary::identity(2)).unwrap(), s);
    }

    #[test]
    fn matrix_size_must_match_wire() {
        let s = basis(&[3, 2], &[0, 0]);
        assert!(matches!(
            s.apply_unitary(1, &Unitary::identity(3)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn mixed_dimension_controlled_power() {
        // control dim 3, target dim 4: |2, 1⟩ → |2, 1 - 2 mod 4⟩ = |2, 3⟩
        let s = basis(&[3, 4], &[2, 1])
            .apply_generalized_controlled_power(0, 1, &Unitary::shift(4, -1))
            .unwrap();
        assert_eq!(s.amplitudes()[2 * 4 + 3], ONE);
    }
}
