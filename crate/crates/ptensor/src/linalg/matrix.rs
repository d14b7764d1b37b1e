//! Dense complex matrices in row-major order.
//!
//! This is the universal carrier for states, Choi operators, unitaries and
//! POVM elements. Everything is square or rectangular dense storage with
//! `Complex<f64>` entries; dimensions are capped at [`DIM_CAP`] so that a
//! runaway tensor product fails loudly instead of thrashing.

use crate::error::{Error, Result, DIM_CAP};
use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        let show = self.rows.min(8);
        for i in 0..show {
            let mut line = String::new();
            for j in 0..self.cols.min(8) {
                let z = self.get(i, j);
                line.push_str(&format!("{:+.3}{:+.3}i  ", z.re, z.im));
            }
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from nested arrays of (re, im) pairs; handy in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, z) in row.iter().enumerate() {
                m.set(i, j, *z);
            }
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Column vector |i⟩ of the computational basis.
    pub fn basis_ket(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m.set(i, 0, Complex64::ONE);
        m
    }

    /// Rank-1 projector |i⟩⟨i|.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.set(i, i, Complex64::ONE);
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        // i-k-j order keeps the inner loop contiguous on both operands.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                let orow = k * other.cols;
                let drow = i * other.cols;
                for j in 0..other.cols {
                    out.data[drow + j] += a * other.data[orow + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose A†.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A_ij - B_ij|
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_dist(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm()
    }

    /// ‖A − A†‖_max
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { dev, tol });
        }
        Ok(())
    }

    /// (A + A†)/2, used to scrub roundoff before spectral operations.
    pub fn hermitize(&self) -> Self {
        self.add(&self.dagger()).scale_re(0.5)
    }

    /// ‖U U† − 1‖_max
    pub fn unitarity_deviation(&self) -> f64 {
        self.matmul(&self.dagger())
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimMismatch("unitary must be square".into()));
        }
        let dev = self.unitarity_deviation();
        if dev > tol {
            return Err(Error::NotUnitary { dev, tol });
        }
        Ok(())
    }

    /// Kronecker product; dimensions multiply.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        if rows.max(cols) > DIM_CAP {
            return Err(Error::DimOverflow { dim: rows.max(cols), cap: DIM_CAP });
        }
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == Complex64::ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let drow = (i * other.rows + k) * cols + j * other.cols;
                    let srow = k * other.cols;
                    for l in 0..other.cols {
                        out.data[drow + l] = a * other.data[srow + l];
                    }
                }
            }
        }
        Ok(out)
    }

    /// tr(A B)
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut s = Complex64::ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                s += self.get(i, k) * other.get(k, i);
            }
        }
        s
    }

    /// Hilbert–Schmidt inner product ⟨A, B⟩ = tr(A† B).
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |v⟩⟨w| for column vectors v, w.
    pub fn outer(v: &Self, w: &Self) -> Self {
        assert_eq!(v.cols, 1);
        assert_eq!(w.cols, 1);
        Self::from_fn(v.rows, w.rows, |i, j| v.get(i, 0) * w.get(j, 0).conj())
    }

    /// Checks finite entries; NaN and Inf are construction bugs.
    pub fn check_finite(&self) -> Result<()> {
        for z in &self.data {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::DimMismatch("non-finite matrix entry".into()));
            }
        }
        Ok(())
    }
}

/// Common fixed operators.
pub mod ops {
    use super::ComplexMatrix;
    use num_complex::Complex64;

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 1, Complex64::new(0.0, -1.0));
        m.set(1, 0, Complex64::new(0.0, 1.0));
        m
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// Maximally mixed state 1/d.
    pub fn maximally_mixed(dim: usize) -> ComplexMatrix {
        ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64)
    }

    /// Unnormalized maximally entangled operator Ψ = Σ_{xy} |xx⟩⟨yy| on d⊗d.
    pub fn unnormalized_max_entangled(dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim * dim, dim * dim);
        for x in 0..dim {
            for y in 0..dim {
                m.set(x * dim + x, y * dim + y, Complex64::ONE);
            }
        }
        m
    }

    /// Swap unitary on d⊗d.
    pub fn swap(dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim * dim, dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                m.set(a * dim + b, b * dim + a, Complex64::ONE);
            }
        }
        m
    }

    /// The four unnormalized Bell vectors |00⟩±|11⟩, |01⟩±|10⟩ as columns,
    /// indexed to match the Pauli family {I, X, Y-like, Z-like} order used by
    /// the controlled-Pauli scenario: 0 ↦ |00⟩+|11⟩, 1 ↦ |01⟩+|10⟩,
    /// 2 ↦ |01⟩−|10⟩, 3 ↦ |00⟩−|11⟩.
    pub fn unnormalized_bell_ket(k: usize) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(4, 1);
        match k {
            0 => {
                v.set(0, 0, Complex64::ONE);
                v.set(3, 0, Complex64::ONE);
            }
            1 => {
                v.set(1, 0, Complex64::ONE);
                v.set(2, 0, Complex64::ONE);
            }
            2 => {
                v.set(1, 0, Complex64::ONE);
                v.set(2, 0, -Complex64::ONE);
            }
            3 => {
                v.set(0, 0, Complex64::ONE);
                v.set(3, 0, -Complex64::ONE);
            }
            _ => panic!("bell index out of range"),
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::ops::*;
    use super::*;

    #[test]
    fn kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = i2.kron(&i2).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_bit_flip_both_legs() {
        let xx = pauli_x().kron(&pauli_x()).unwrap();
        let ket00 = ComplexMatrix::basis_ket(4, 0);
        let out = xx.matmul(&ket00);
        assert_eq!(out, ComplexMatrix::basis_ket(4, 3));
    }

    #[test]
    fn swap_acts_as_swap() {
        let s = swap(2);
        // |01⟩ -> |10⟩
        let out = s.matmul(&ComplexMatrix::basis_ket(4, 1));
        assert_eq!(out, ComplexMatrix::basis_ket(4, 2));
        s.check_unitary(1e-14).unwrap();
    }

    #[test]
    fn dagger_and_trace() {
        let y = pauli_y();
        assert_eq!(y.dagger(), y);
        assert!(y.trace().norm() < 1e-15);
        assert!((y.frobenius_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kron_overflow_guard() {
        let big = ComplexMatrix::identity(128);
        let err = big.kron(&ComplexMatrix::identity(64)).unwrap_err();
        assert!(matches!(err, Error::DimOverflow { .. }));
    }

    #[test]
    fn max_entangled_trace() {
        let psi = unnormalized_max_entangled(2);
        assert!((psi.trace().re - 2.0).abs() < 1e-15);
        psi.check_hermitian(1e-15).unwrap();
    }
}
