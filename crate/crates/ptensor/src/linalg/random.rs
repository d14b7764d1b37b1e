//! Seeded random operator factories. Everything funnels through a ChaCha
//! stream cipher so seeded runs are reproducible across platforms.

use super::eig::inv_sqrt;
use super::matrix::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SeededRng = rand_chacha::ChaCha12Rng;

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m.set(i, j, Complex64::new(re, im));
        }
    }
    m
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    // modified Gram-Schmidt on columns
    let mut q = g;
    let mut phases = vec![Complex64::ONE; dim];
    for c in 0..dim {
        for prev in 0..c {
            let mut ip = Complex64::ZERO;
            for r in 0..dim {
                ip += q.get(r, prev).conj() * q.get(r, c);
            }
            for r in 0..dim {
                let v = q.get(r, c) - ip * q.get(r, prev);
                q.set(r, c, v);
            }
        }
        let mut nrm = 0.0;
        for r in 0..dim {
            nrm += q.get(r, c).norm_sqr();
        }
        let nrm = nrm.sqrt();
        for r in 0..dim {
            let v = q.get(r, c) / nrm;
            q.set(r, c, v);
        }
        // fix the phase with the R diagonal sign convention
        let d = q.get(c, c);
        if d.norm() > 1e-15 {
            phases[c] = d / d.norm();
        }
    }
    for c in 0..dim {
        let ph = phases[c].conj();
        for r in 0..dim {
            let v = q.get(r, c) * ph;
            q.set(r, c, v);
        }
    }
    q
}

/// Full-rank random density matrix G G† / tr.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let p = g.matmul(&g.dagger());
    let tr = p.trace().re;
    p.scale_re(1.0 / tr)
}

/// Random pure state as a column vector.
pub fn random_ket(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, 1, rng);
    let n = g.frobenius_norm();
    g.scale_re(1.0 / n)
}

/// Random Hermitian matrix (GUE-style, unnormalized).
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    g.add(&g.dagger()).scale_re(0.5)
}

/// Random CPTP map as a Kraus list: Ginibre draws whitened so that
/// Σ K†K = 1 exactly (up to roundoff).
pub fn random_cptp_kraus(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    rng: &mut impl Rng,
) -> Vec<ComplexMatrix> {
    let raw: Vec<ComplexMatrix> = (0..n_kraus).map(|_| ginibre(dim_out, dim_in, rng)).collect();
    let mut s = ComplexMatrix::zeros(dim_in, dim_in);
    for k in &raw {
        s = s.add(&k.dagger().matmul(k));
    }
    let w = inv_sqrt(&s, 1e-9).expect("Gram of Ginibre draws is positive definite");
    raw.into_iter().map(|k| k.matmul(&w)).collect()
}

/// Random POVM with `n` full-rank elements summing to the identity.
pub fn random_povm(dim: usize, n: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let raw: Vec<ComplexMatrix> = (0..n)
        .map(|_| {
            let g = ginibre(dim, dim, rng);
            g.matmul(&g.dagger())
        })
        .collect();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for a in &raw {
        s = s.add(a);
    }
    let w = inv_sqrt(&s, 1e-9).expect("sum of Wishart draws is positive definite");
    raw.into_iter()
        .map(|a| w.matmul(&a).matmul(&w).hermitize())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = SeededRng::seed_from_u64(1);
        for dim in [2, 3, 5] {
            let u = haar_unitary(dim, &mut rng);
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn cptp_kraus_trace_preserving() {
        let mut rng = SeededRng::seed_from_u64(2);
        let ks = random_cptp_kraus(3, 2, 4, &mut rng);
        let mut s = ComplexMatrix::zeros(3, 3);
        for k in &ks {
            s = s.add(&k.dagger().matmul(k));
        }
        assert!(s.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn povm_sums_to_identity() {
        let mut rng = SeededRng::seed_from_u64(3);
        let es = random_povm(2, 5, &mut rng);
        let mut s = ComplexMatrix::zeros(2, 2);
        for e in &es {
            s = s.add(e);
        }
        assert!(s.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = random_density(4, &mut SeededRng::seed_from_u64(99));
        let b = random_density(4, &mut SeededRng::seed_from_u64(99));
        assert_eq!(a, b);
    }
}
