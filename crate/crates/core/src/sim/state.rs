use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ONE, ZERO};

/// Deviation from unit norm tolerated when accepting an explicit state.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Pure state of a register of qudits.
///
/// Amplitudes are stored in mixed-radix order with the leftmost wire as the
/// most significant digit, so `|a⟩ ⊗ |b⟩` on dims `[d0, d1]` puts the
/// amplitude of `|a b⟩` at index `a * d1 + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

/// Initial content of one wire.
#[derive(Debug, Clone, PartialEq)]
pub enum WireInit {
    Basis(usize),
    State(Vec<Complex64>),
}

impl From<usize> for WireInit {
    fn from(index: usize) -> Self {
        WireInit::Basis(index)
    }
}

impl From<&QuditState> for WireInit {
    fn from(state: &QuditState) -> Self {
        WireInit::State(state.amplitudes.clone())
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Empty("register dimensions"));
    }
    match dims.iter().find(|&&d| d < 2) {
        Some(&d) => Err(Error::InvalidDimension(d)),
        None => Ok(()),
    }
}

fn l2_norm(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

impl QuditState {
    /// Computational basis state `|indices[0] indices[1] …⟩`.
    pub fn basis(dims: &[usize], indices: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        if indices.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: indices.len(),
            });
        }
        let mut global = 0;
        for (&i, &d) in indices.iter().zip(dims) {
            if i >= d {
                return Err(Error::BasisOutOfRange { index: i, dim: d });
            }
            global = global * d + i;
        }
        let len = dims.iter().product();
        let mut amplitudes = vec![ZERO; len];
        amplitudes[global] = ONE;
        Ok(QuditState {
            dims: dims.to_vec(),
            amplitudes,
        })
    }

    /// State from explicit amplitudes. The norm must be within
    /// [`NORM_TOLERANCE`] of one; the stored vector is rescaled to unit norm.
    pub fn from_amplitudes(dims: &[usize], amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dims(dims)?;
        let len: usize = dims.iter().product();
        if amplitudes.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: amplitudes.len(),
            });
        }
        let norm = l2_norm(&amplitudes);
        if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::NotNormalized { norm });
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(QuditState {
            dims: dims.to_vec(),
            amplitudes,
        })
    }

    /// Single-wire state.
    pub fn single(amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = amplitudes.len();
        Self::from_amplitudes(&[d], amplitudes)
    }

    /// Single-wire state from real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::single(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Tensor product of per-wire initial states, leftmost wire first.
    pub fn init_register(dims: &[usize], initial: &[WireInit]) -> Result<Self> {
        check_dims(dims)?;
        if initial.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: initial.len(),
            });
        }
        let mut acc: Option<QuditState> = None;
        for (&d, init) in dims.iter().zip(initial) {
            let wire = match init {
                WireInit::Basis(i) => QuditState::basis(&[d], &[*i])?,
                WireInit::State(amps) => {
                    if amps.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: amps.len(),
                        });
                    }
                    QuditState::from_amplitudes(&[d], amps.clone())?
                }
            };
            acc = Some(match acc {
                None => wire,
                Some(prev) => prev.tensor(&wire),
            });
        }
        Ok(acc.expect("dims checked non-empty"))
    }

    /// `self ⊗ other`, with `self`'s wires to the left.
    pub fn tensor(&self, other: &QuditState) -> QuditState {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        QuditState { dims, amplitudes }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_wires(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuditState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The same state multiplied by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> QuditState {
        let phase = Complex64::from_polar(1.0, theta);
        QuditState {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    /// Distance between the index of `|…i…⟩` and `|…i+1…⟩` on `wire`.
    pub fn stride(&self, wire: usize) -> usize {
        self.dims[wire + 1..].iter().product()
    }

    /// Basis index of `wire` within global index `index`.
    pub fn digit(&self, index: usize, wire: usize) -> usize {
        (index / self.stride(wire)) % self.dims[wire]
    }

    pub(crate) fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.dims.len() {
            Err(Error::WireOutOfRange {
                wire,
                wires: self.dims.len(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Amplitudes without any normalization check. Only for linear-algebra
    /// tests that need unnormalized combinations.
    #[doc(hidden)]
    pub fn from_raw_parts(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amplitudes.len());
        QuditState { dims, amplitudes }
    }
}
