//! Canonical qubit SIC family from the tetrahedron Bloch vectors.
//!
//! The four pure states point along (1,1,1), (1,−1,−1), (−1,1,−1), (−1,−1,1)
//! normalized; halving them gives the symmetric informationally complete
//! POVM. The Gram matrix of this family is maximally symmetric, which keeps
//! the dual-set inversion well conditioned.

use super::matrix::{ops, ComplexMatrix};

const TETRAHEDRON: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Pure state with the given Bloch vector scaled by `radius` (radius 1 is a
/// pure tetrahedron state, smaller values mix toward 1/2).
pub fn bloch_state(n: &[f64; 3], radius: f64) -> ComplexMatrix {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let r = radius / norm;
    ComplexMatrix::identity(2)
        .add(&ops::pauli_x().scale_re(r * n[0]))
        .add(&ops::pauli_y().scale_re(r * n[1]))
        .add(&ops::pauli_z().scale_re(r * n[2]))
        .scale_re(0.5)
}

/// The four pure tetrahedron states (an IC preparation set).
pub fn sic_states() -> Vec<ComplexMatrix> {
    TETRAHEDRON.iter().map(|t| bloch_state(t, 1.0)).collect()
}

/// Tetrahedron states shrunk to Bloch radius `r`; still IC for r > 0.
pub fn mixed_sic_states(r: f64) -> Vec<ComplexMatrix> {
    TETRAHEDRON.iter().map(|t| bloch_state(t, r)).collect()
}

/// The SIC POVM: half of each tetrahedron projector; sums to the identity.
pub fn sic_povm() -> Vec<ComplexMatrix> {
    sic_states().into_iter().map(|p| p.scale_re(0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn povm_completeness() {
        let mut sum = ComplexMatrix::zeros(2, 2);
        for e in sic_povm() {
            sum = sum.add(&e);
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn states_are_pure_and_symmetric() {
        let st = sic_states();
        for s in &st {
            assert!((s.trace().re - 1.0).abs() < 1e-14);
            assert!(s.matmul(s).max_abs_diff(s) < 1e-13);
        }
        // pairwise overlap 1/3
        for i in 0..4 {
            for j in 0..4 {
                let ov = st[i].trace_product(&st[j]).re;
                let want = if i == j { 1.0 } else { 1.0 / 3.0 };
                assert!((ov - want).abs() < 1e-12);
            }
        }
    }
}
