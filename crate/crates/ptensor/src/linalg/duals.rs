//! Dual sets via Gram-matrix inversion restricted to the span.
//!
//! Given a linearly independent family of Hermitian operators {O_x}, the
//! dual set {Δ_y} satisfies tr(O_x Δ_y) = δ_xy with every Δ_y inside
//! span{O_x}. The complement basis spans the Hilbert–Schmidt orthogonal
//! complement of that span inside the real vector space of Hermitian
//! operators and is returned orthonormal (hence self-dual). Together the two
//! families give the exact split used by the finite-Markov-order structure
//! theorem.

use super::eig::herm_eig;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Gram condition number above which the family is treated as linearly
/// dependent.
pub const GRAM_COND_MAX: f64 = 1e12;

pub struct DualSet {
    pub duals: Vec<ComplexMatrix>,
    pub complement_basis: Vec<ComplexMatrix>,
}

/// Orthonormal (Hilbert–Schmidt) basis of the real vector space of d×d
/// Hermitian matrices: diagonal units, symmetric and antisymmetric pairs.
pub fn hermitian_basis(dim: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        basis.push(ComplexMatrix::basis_projector(dim, i));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            let mut sym = ComplexMatrix::zeros(dim, dim);
            sym.set(i, j, Complex64::new(inv_sqrt2, 0.0));
            sym.set(j, i, Complex64::new(inv_sqrt2, 0.0));
            basis.push(sym);
            let mut asym = ComplexMatrix::zeros(dim, dim);
            asym.set(i, j, Complex64::new(0.0, -inv_sqrt2));
            asym.set(j, i, Complex64::new(0.0, inv_sqrt2));
            basis.push(asym);
        }
    }
    basis
}

/// Real coordinates of a Hermitian operator in the `hermitian_basis` frame.
fn coords(a: &ComplexMatrix, basis: &[ComplexMatrix]) -> Vec<f64> {
    basis.iter().map(|e| e.hs_inner(a).re).collect()
}

fn from_coords(c: &[f64], basis: &[ComplexMatrix], dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (x, e) in c.iter().zip(basis) {
        if *x != 0.0 {
            m = m.add(&e.scale_re(*x));
        }
    }
    m
}

/// Rank of the span of a Hermitian family, counted with an absolute
/// eigenvalue cutoff on the Gram matrix relative to its largest eigenvalue.
pub fn span_rank(ops: &[ComplexMatrix], tol: f64) -> Result<usize> {
    if ops.is_empty() {
        return Ok(0);
    }
    let gram = gram_matrix(ops);
    let (eigs, _) = herm_eig(&gram, 1e-8)?;
    let max = eigs.last().copied().unwrap_or(0.0).max(0.0);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(eigs.iter().filter(|&&l| l > tol.max(1e-12) * max).count())
}

fn gram_matrix(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let c = ops.len();
    let mut g = ComplexMatrix::zeros(c, c);
    for x in 0..c {
        for y in 0..c {
            // Hermitian pair: tr(O_x O_y) is real
            g.set(x, y, Complex64::new(ops[x].trace_product(&ops[y]).re, 0.0));
        }
    }
    g
}

/// Duals within span(ops) plus an orthonormal basis of the complement.
pub fn dual_set(ops: &[ComplexMatrix], tol: f64) -> Result<DualSet> {
    if ops.is_empty() {
        return Err(Error::LinearDependence { cond: f64::INFINITY, max: GRAM_COND_MAX });
    }
    let dim = ops[0].rows();
    for o in ops {
        if o.rows() != dim || o.cols() != dim {
            return Err(Error::DimMismatch("dual_set operators must share a dimension".into()));
        }
        o.check_hermitian(tol.max(1e-9))?;
    }
    let c = ops.len();
    let gram = gram_matrix(ops);
    let (eigs, v) = herm_eig(&gram, 1e-10)?;
    let max = eigs.last().copied().unwrap_or(0.0);
    let min = eigs[0];
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(min > 0.0) || cond > GRAM_COND_MAX {
        return Err(Error::LinearDependence { cond, max: GRAM_COND_MAX });
    }
    // G^{-1} through the spectral factorization just computed
    let dinv = ComplexMatrix::diag(&eigs.iter().map(|l| 1.0 / l).collect::<Vec<_>>());
    let ginv = v.matmul(&dinv).matmul(&v.dagger());

    let mut duals = Vec::with_capacity(c);
    for y in 0..c {
        let mut d = ComplexMatrix::zeros(dim, dim);
        for (x, op) in ops.iter().enumerate() {
            d = d.add(&op.scale(ginv.get(y, x)));
        }
        duals.push(d.hermitize());
    }

    // complement: project the full Hermitian basis off span(ops), then
    // Gram-Schmidt the survivors
    let basis = hermitian_basis(dim);
    let op_coords: Vec<Vec<f64>> = ops.iter().map(|o| coords(o, &basis)).collect();
    let mut ortho_span: Vec<Vec<f64>> = Vec::new();
    for oc in &op_coords {
        ortho_span.push(gram_schmidt_step(oc, &ortho_span));
    }
    ortho_span.retain(|v| norm(v) > 1e-12);

    let mut complement: Vec<ComplexMatrix> = Vec::new();
    let mut comp_coords: Vec<Vec<f64>> = Vec::new();
    for e in &basis {
        if complement.len() == dim * dim - c {
            break;
        }
        let ec = coords(e, &basis);
        let mut resid = gram_schmidt_step(&ec, &ortho_span);
        resid = gram_schmidt_step(&resid, &comp_coords);
        let n = norm(&resid);
        if n > 1e-7 {
            for x in resid.iter_mut() {
                *x /= n;
            }
            complement.push(from_coords(&resid, &basis, dim));
            comp_coords.push(resid);
        }
    }
    if complement.len() != dim * dim - c {
        return Err(Error::LinearDependence { cond, max: GRAM_COND_MAX });
    }
    Ok(DualSet { duals, complement_basis: complement })
}

fn gram_schmidt_step(v: &[f64], onb: &[Vec<f64>]) -> Vec<f64> {
    let mut out = v.to_vec();
    for b in onb {
        let nb = norm(b);
        if nb < 1e-15 {
            continue;
        }
        let proj: f64 = out.iter().zip(b).map(|(a, c)| a * c).sum::<f64>() / (nb * nb);
        for (o, c) in out.iter_mut().zip(b) {
            *o -= proj * c;
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ops::{pauli_x, pauli_y, pauli_z};
    use crate::linalg::sic;

    fn pairing_residual(ops: &[ComplexMatrix], duals: &[ComplexMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for (x, o) in ops.iter().enumerate() {
            for (y, d) in duals.iter().enumerate() {
                let want = if x == y { 1.0 } else { 0.0 };
                let got = o.trace_product(d);
                worst = worst.max((got.re - want).abs().max(got.im.abs()));
            }
        }
        worst
    }

    #[test]
    fn pauli_basis_self_dual_up_to_half() {
        let fam = vec![ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
        let ds = dual_set(&fam, 1e-10).unwrap();
        assert!(ds.complement_basis.is_empty());
        for (o, d) in fam.iter().zip(&ds.duals) {
            assert!(d.max_abs_diff(&o.scale_re(0.5)) < 1e-12);
        }
        assert!(pairing_residual(&fam, &ds.duals) < 1e-12);
    }

    #[test]
    fn projector_pair_self_dual_with_pauli_complement() {
        let fam = vec![
            ComplexMatrix::basis_projector(2, 0),
            ComplexMatrix::basis_projector(2, 1),
        ];
        let ds = dual_set(&fam, 1e-10).unwrap();
        assert!(pairing_residual(&fam, &ds.duals) < 1e-12);
        for (o, d) in fam.iter().zip(&ds.duals) {
            assert!(d.max_abs_diff(o) < 1e-12);
        }
        assert_eq!(ds.complement_basis.len(), 2);
        // complement spans {σx, σy}: every element orthogonal to the family
        for c in &ds.complement_basis {
            for o in &fam {
                assert!(o.trace_product(c).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sic_povm_full_delta_table() {
        let fam = sic::sic_povm();
        let ds = dual_set(&fam, 1e-10).unwrap();
        assert!(pairing_residual(&fam, &ds.duals) < 1e-10);
        assert!(ds.complement_basis.is_empty());
    }

    #[test]
    fn dependent_family_rejected() {
        let fam = vec![pauli_x(), pauli_x().scale_re(2.0)];
        assert!(matches!(
            dual_set(&fam, 1e-10),
            Err(Error::LinearDependence { .. })
        ));
    }

    #[test]
    fn span_rank_counts() {
        let fam = vec![ComplexMatrix::identity(2), pauli_x()];
        assert_eq!(span_rank(&fam, 1e-10).unwrap(), 2);
        let fam2 = vec![pauli_x(), pauli_x()];
        assert_eq!(span_rank(&fam2, 1e-10).unwrap(), 1);
    }
}
