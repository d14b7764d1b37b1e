//! Hermitian spectral decomposition, bridged to nalgebra.

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Eigendecomposition A = V diag(λ) V† of a Hermitian matrix. Eigenvalues
/// are returned in ascending order, eigenvectors as the columns of a unitary.
///
/// Fails if ‖A − A†‖_max exceeds `tol`; the matrix is symmetrized before the
/// solve so roundoff-level deviations do not leak into the spectrum.
pub fn herm_eig(a: &ComplexMatrix, tol: f64) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::DimMismatch("eigendecomposition needs a square matrix".into()));
    }
    a.check_hermitian(tol)?;
    let h = a.hermitize();
    let n = h.rows();
    let m = DMatrix::from_fn(n, n, |i, j| h.get(i, j));
    let se = m.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| se.eigenvalues[x].partial_cmp(&se.eigenvalues[y]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, se.eigenvectors[(row, k)]);
        }
    }
    Ok((eigenvalues, vectors))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    Ok(herm_eig(a, tol)?.0[0])
}

/// PSD check with an absolute eigenvalue tolerance on the trace-normalized
/// operator (zero-trace operators are checked unnormalized).
pub fn check_psd(a: &ComplexMatrix, tol: f64) -> Result<()> {
    let (eigs, _) = herm_eig(a, tol.max(1e-8))?;
    let tr: f64 = eigs.iter().sum();
    let scale = if tr.abs() > 1e-12 { tr.abs() } else { 1.0 };
    let min = eigs[0] / scale;
    if min < -tol {
        return Err(Error::NotPsd { min_eig: min, tol });
    }
    Ok(())
}

/// A^{-1/2} for a positive definite Hermitian matrix.
pub fn inv_sqrt(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let (eigs, v) = herm_eig(a, tol)?;
    if eigs[0] <= 0.0 {
        return Err(Error::NotPsd { min_eig: eigs[0], tol });
    }
    let d = ComplexMatrix::diag(&eigs.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
    Ok(v.matmul(&d).matmul(&v.dagger()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ops;
    use crate::linalg::random;
    use rand::SeedableRng;

    #[test]
    fn pauli_z_spectrum() {
        let (eigs, v) = herm_eig(&ops::pauli_z(), 1e-12).unwrap();
        assert!((eigs[0] + 1.0).abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
        assert!(v.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let (eigs, _) = herm_eig(&ComplexMatrix::identity(5), 1e-12).unwrap();
        assert!(eigs.iter().all(|l| (l - 1.0).abs() < 1e-13));
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
        let a = random::random_hermitian(6, &mut rng);
        let (eigs, v) = herm_eig(&a, 1e-10).unwrap();
        let rec = v.matmul(&ComplexMatrix::diag(&eigs)).matmul(&v.dagger());
        let denom = a.frobenius_norm().max(1.0);
        assert!(rec.frobenius_dist(&a) / denom < 1e-10);
        assert!(v.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 1, num_complex::Complex64::ONE);
        assert!(herm_eig(&m, 1e-10).is_err());
    }
}
