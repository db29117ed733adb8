//! Dense complex matrices and validated unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest tolerated `max |U†U - I|` entry for a matrix to count as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Max-abs entry of `M†M - I`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let mut worst = 0.0_f64;
    for c in 0..gram.ncols() {
        for r in 0..gram.nrows() {
            let expected = if r == c { ONE } else { ZERO };
            worst = worst.max((gram[(r, c)] - expected).norm());
        }
    }
    worst
}

/// Max-abs entry of `a - b`; `f64::INFINITY` if the shapes differ.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A square matrix checked to be unitary at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::Empty("unitary matrix"));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation < UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Unitary(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Unitary(CMatrix::identity(dim, dim))
    }

    /// The permutation matrix of `X^power`, mapping `|i⟩` to `|i + power mod dim⟩`.
    pub fn shift(dim: usize, power: i64) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(shift_index(i, power, dim), i)] = ONE;
        }
        Unitary(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }

    /// `U^0, U^1, …, U^{count-1}` by repeated multiplication.
    pub fn powers(&self, count: usize) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(CMatrix::identity(self.dim(), self.dim()));
        for k in 1..count {
            let next = &self.0 * &out[k - 1];
            out.push(next);
        }
        out
    }
}

/// `(index + power) mod dim` for any signed power.
pub fn shift_index(index: usize, power: i64, dim: usize) -> usize {
    let d = dim as i64;
    ((index as i64 + power).rem_euclid(d)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matrix_moves_basis_states() {
        let x = Unitary::shift(3, 1);
        assert_eq!(x.matrix()[(0, 2)], ONE);
        assert_eq!(x.matrix()[(1, 0)], ONE);
        let xm = Unitary::shift(5, -1);
        assert_eq!(xm.matrix()[(4, 0)], ONE);
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 0)] = Complex64::new(1.0 + 1e-6, 0.0);
        assert!(matches!(Unitary::new(m), Err(Error::NotUnitary { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(Unitary::new(rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn powers_of_shift_cycle() {
        let x = Unitary::shift(4, 1);
        let p = x.powers(5);
        assert_eq!(p[0], CMatrix::identity(4, 4));
        assert_eq!(p[4], CMatrix::identity(4, 4));
        assert_eq!(p[3], Unitary::shift(4, 3).into_matrix());
    }
}
