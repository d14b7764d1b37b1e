//! Von Neumann entropy and mutual information, in bits.
//!
//! Entropies are always computed on the trace-normalized operator; this is
//! the convention that makes the uniform four-branch superposition read
//! exactly 2 bits.

use super::eig::herm_eig;
use super::labeled::LabeledOperator;
use super::matrix::ComplexMatrix;
use super::spaces::SpaceLabel;
use crate::error::{Error, Result};

/// Default absolute tolerance on eigenvalues of trace-normalized operators.
/// Double-precision spectral noise stays well below this for dims ≤ 256.
pub const PSD_TOL: f64 = 1e-9;

/// S(A / tr A) = −Σ λ̂ log₂ λ̂ with 0·log 0 = 0. Eigenvalues of the
/// normalized operator in [−tol, 0] are clamped to zero; anything below
/// −tol is a genuine PSD violation and rejected.
pub fn von_neumann_entropy(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    let (eigs, _) = herm_eig(a, tol.max(1e-8))?;
    let tr: f64 = eigs.iter().sum();
    if tr <= 0.0 {
        return Err(Error::NotPsd { min_eig: eigs[0], tol });
    }
    let mut s = 0.0;
    for l in &eigs {
        let p = l / tr;
        if p < -tol {
            return Err(Error::NotPsd { min_eig: p, tol });
        }
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s)
}

/// Mutual information I(A:B) = S(A) + S(B) − S(AB) between two leg groups of
/// a joint operator (trace-normalized internally). Clamped at zero from
/// below; values more negative than −1e-9 indicate a non-PSD joint.
pub fn mutual_information(
    joint: &LabeledOperator,
    group_a: &[SpaceLabel],
    group_b: &[SpaceLabel],
    tol: f64,
) -> Result<f64> {
    let sa = von_neumann_entropy(&joint.partial_trace(group_b)?.mat, tol)?;
    let sb = von_neumann_entropy(&joint.partial_trace(group_a)?.mat, tol)?;
    let sab = von_neumann_entropy(&joint.mat, tol)?;
    let mi = sa + sb - sab;
    if mi < -1e-7 {
        return Err(Error::NotPsd { min_eig: mi, tol });
    }
    Ok(mi.max(0.0))
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ops;
    use crate::linalg::random;
    use crate::linalg::spaces::SpaceList;
    use rand::SeedableRng;

    #[test]
    fn maximally_mixed_qubit_is_one_bit() {
        let s = von_neumann_entropy(&ops::maximally_mixed(2), PSD_TOL).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_projector_is_zero() {
        let s = von_neumann_entropy(&ComplexMatrix::basis_projector(4, 2), PSD_TOL).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn normalization_is_internal() {
        // 2·I₄ normalizes to I₄/4: two bits
        let s = von_neumann_entropy(&ComplexMatrix::identity(4).scale_re(2.0), PSD_TOL).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_operator() {
        let m = ComplexMatrix::diag(&[1.0, -0.5]);
        assert!(von_neumann_entropy(&m, PSD_TOL).is_err());
    }

    #[test]
    fn entropy_additive_on_products() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let a = random::random_density(3, &mut rng);
        let b = random::random_density(4, &mut rng);
        let sa = von_neumann_entropy(&a, PSD_TOL).unwrap();
        let sb = von_neumann_entropy(&b, PSD_TOL).unwrap();
        let sab = von_neumann_entropy(&a.kron(&b).unwrap(), PSD_TOL).unwrap();
        assert!((sab - sa - sb).abs() < 1e-9);
    }

    #[test]
    fn bell_pair_mutual_information_two_bits() {
        let psi = ops::unnormalized_max_entangled(2).scale_re(0.5);
        let a = SpaceLabel::input(2, 2);
        let b = SpaceLabel::input(1, 2);
        let joint = LabeledOperator::new(
            psi,
            SpaceList::new(vec![a.clone(), b.clone()]).unwrap(),
        )
        .unwrap();
        let mi = mutual_information(&joint, &[a], &[b], PSD_TOL).unwrap();
        assert!((mi - 2.0).abs() < 1e-10);
    }

    #[test]
    fn classical_correlated_pair_one_bit() {
        let m = ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
        let a = SpaceLabel::input(2, 2);
        let b = SpaceLabel::input(1, 2);
        let joint =
            LabeledOperator::new(m, SpaceList::new(vec![a.clone(), b.clone()]).unwrap()).unwrap();
        let mi = mutual_information(&joint, &[a], &[b], PSD_TOL).unwrap();
        // Shannon oracle on the diagonal: H(1/2,1/2)+H(1/2,1/2)-H(1/2,1/2)=1
        assert!((mi - 1.0).abs() < 1e-12);
    }
}
