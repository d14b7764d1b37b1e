//! Multi-leg operators: a dense matrix plus the ordered list of tensor
//! factors it lives on. All leg bookkeeping (partial traces, reorderings,
//! local operator application, instrument contraction) happens here.

use super::matrix::ComplexMatrix;
use super::spaces::{SpaceLabel, SpaceList};
use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, PartialEq, Debug)]
pub struct LabeledOperator {
    pub mat: ComplexMatrix,
    pub spaces: SpaceList,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over `dims` restricted to the factor
/// positions `positions`, using the full-operator strides.
fn offsets(dims: &[usize], full_strides: &[usize], positions: &[usize]) -> Vec<usize> {
    let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let total: usize = sub_dims.iter().product();
    let mut out = Vec::with_capacity(total.max(1));
    for mut idx in 0..total.max(1) {
        let mut off = 0usize;
        for k in (0..positions.len()).rev() {
            let d = sub_dims[k];
            off += (idx % d) * full_strides[positions[k]];
            idx /= d;
        }
        out.push(off);
    }
    out
}

impl LabeledOperator {
    pub fn new(mat: ComplexMatrix, spaces: SpaceList) -> Result<Self> {
        if !mat.is_square() || mat.rows() != spaces.total_dim() {
            return Err(Error::DimMismatch(format!(
                "matrix dim {} does not match space list dim {}",
                mat.rows(),
                spaces.total_dim()
            )));
        }
        Ok(Self { mat, spaces })
    }

    /// Scalar (zero-leg) operator.
    pub fn scalar(value: Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(1, 1);
        m.set(0, 0, value);
        Self { mat: m, spaces: SpaceList::empty() }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Tensor product; labels concatenate.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mat = self.mat.kron(&other.mat)?;
        let mut labels = self.spaces.labels().to_vec();
        labels.extend_from_slice(other.spaces.labels());
        Ok(Self { mat, spaces: SpaceList::new(labels)? })
    }

    /// Trace out the given legs. Kept legs preserve their relative order.
    pub fn partial_trace(&self, remove: &[SpaceLabel]) -> Result<Self> {
        let dims = self.spaces.dims();
        let st = strides(&dims);
        let mut rm_pos: Vec<usize> = Vec::with_capacity(remove.len());
        for l in remove {
            let p = self.spaces.index_of(l)?;
            if rm_pos.contains(&p) {
                return Err(Error::UnknownLabel(format!("leg {l} listed twice")));
            }
            rm_pos.push(p);
        }
        rm_pos.sort_unstable();
        let keep_pos: Vec<usize> =
            (0..dims.len()).filter(|p| !rm_pos.contains(p)).collect();

        let keep_off = offsets(&dims, &st, &keep_pos);
        let rm_off = offsets(&dims, &st, &rm_pos);
        let dk = keep_off.len();
        let full = self.dim();

        let mut out = ComplexMatrix::zeros(dk, dk);
        for (i, &ro) in keep_off.iter().enumerate() {
            for (j, &co) in keep_off.iter().enumerate() {
                let mut s = Complex64::ZERO;
                for &d in &rm_off {
                    s += self.mat.data()[(ro + d) * full + (co + d)];
                }
                out.set(i, j, s);
            }
        }
        let labels: Vec<SpaceLabel> = keep_pos
            .iter()
            .map(|&p| self.spaces.labels()[p].clone())
            .collect();
        Ok(Self { mat: out, spaces: SpaceList::new(labels)? })
    }

    /// Marginal on `keep`, returned with legs in exactly the requested order.
    pub fn marginal(&self, keep: &[SpaceLabel]) -> Result<Self> {
        let remove: Vec<SpaceLabel> = self
            .spaces
            .labels()
            .iter()
            .filter(|l| !keep.iter().any(|k| k.key() == l.key()))
            .cloned()
            .collect();
        self.partial_trace(&remove)?.permute(keep)
    }

    /// Reorder the tensor factors. `new_order` must be a permutation of the
    /// current labels; the operator is unitarily relabeled.
    pub fn permute(&self, new_order: &[SpaceLabel]) -> Result<Self> {
        if new_order.len() != self.spaces.len() {
            return Err(Error::NotAPermutation);
        }
        let mut perm = Vec::with_capacity(new_order.len());
        for l in new_order {
            let p = self.spaces.index_of(l).map_err(|_| Error::NotAPermutation)?;
            if perm.contains(&p) {
                return Err(Error::NotAPermutation);
            }
            perm.push(p);
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let dims = self.spaces.dims();
        let st = strides(&dims);
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let d = self.dim();

        // map from new flat index to old flat index
        let mut map = vec![0usize; d];
        for (n, slot) in map.iter_mut().enumerate() {
            let mut idx = n;
            let mut off = 0usize;
            for k in (0..new_dims.len()).rev() {
                off += (idx % new_dims[k]) * st[perm[k]];
                idx /= new_dims[k];
            }
            *slot = off;
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            let src_row = map[i] * d;
            let dst_row = i * d;
            for j in 0..d {
                out.data_mut()[dst_row + j] = self.mat.data()[src_row + map[j]];
            }
        }
        let labels: Vec<SpaceLabel> = perm
            .iter()
            .map(|&p| self.spaces.labels()[p].clone())
            .collect();
        Ok(Self { mat: out, spaces: SpaceList::new(labels)? })
    }

    /// Reorder to the canonical latest-first order.
    pub fn canonicalize(&self) -> Result<Self> {
        self.permute(&self.spaces.canonical())
    }

    /// Apply Σ_k K ρ K† where the Kraus operators act on `targets` (in the
    /// given order) and identity elsewhere. Kraus operators must be square.
    /// Leg order of the result matches `self`.
    pub fn apply_kraus(&self, kraus: &[ComplexMatrix], targets: &[SpaceLabel]) -> Result<Self> {
        let t: usize = targets.iter().map(|l| l.dim).product();
        for k in kraus {
            if k.rows() != t || k.cols() != t {
                return Err(Error::DimMismatch(format!(
                    "Kraus operator {}x{} does not match target dim {}",
                    k.rows(),
                    k.cols(),
                    t
                )));
            }
        }
        let fronted = self.permute_targets_front(targets)?;
        let d = fronted.dim();
        let r = d / t;
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in kraus {
            // left: tmp = (K ⊗ 1) ρ
            let mut tmp = ComplexMatrix::zeros(d, d);
            for a in 0..t {
                for s in 0..t {
                    let c = k.get(a, s);
                    if c == Complex64::ZERO {
                        continue;
                    }
                    for rr in 0..r {
                        let dst = (a * r + rr) * d;
                        let src = (s * r + rr) * d;
                        for col in 0..d {
                            tmp.data_mut()[dst + col] += c * fronted.mat.data()[src + col];
                        }
                    }
                }
            }
            // right: acc += tmp (K† ⊗ 1)
            for b in 0..t {
                for s in 0..t {
                    let c = k.get(b, s).conj();
                    if c == Complex64::ZERO {
                        continue;
                    }
                    for rr in 0..r {
                        let dst_col = b * r + rr;
                        let src_col = s * r + rr;
                        for row in 0..d {
                            let v = tmp.data()[row * d + src_col] * c;
                            acc.data_mut()[row * d + dst_col] += v;
                        }
                    }
                }
            }
        }
        let out = Self { mat: acc, spaces: fronted.spaces.clone() };
        out.permute(self.spaces.labels())
    }

    /// Apply a unitary on `targets`.
    pub fn apply_unitary(&self, u: &ComplexMatrix, targets: &[SpaceLabel]) -> Result<Self> {
        self.apply_kraus(std::slice::from_ref(u), targets)
    }

    /// tr_T[(O_T ⊗ 1) ρ]: contract an operator sitting on `targets` against
    /// this one and remove those legs. This is the Born-rule pairing used for
    /// instrument application.
    pub fn contract(&self, op: &ComplexMatrix, targets: &[SpaceLabel]) -> Result<Self> {
        let t: usize = targets.iter().map(|l| l.dim).product();
        if op.rows() != t || op.cols() != t {
            return Err(Error::DimMismatch(format!(
                "contraction operator {}x{} does not match target dim {}",
                op.rows(),
                op.cols(),
                t
            )));
        }
        let fronted = self.permute_targets_front(targets)?;
        let d = fronted.dim();
        let r = d / t;
        let mut out = ComplexMatrix::zeros(r, r);
        for tt in 0..t {
            for ss in 0..t {
                let c = op.get(tt, ss);
                if c == Complex64::ZERO {
                    continue;
                }
                for rr in 0..r {
                    let src_row = (ss * r + rr) * d + tt * r;
                    let dst_row = rr * r;
                    for rc in 0..r {
                        out.data_mut()[dst_row + rc] += c * fronted.mat.data()[src_row + rc];
                    }
                }
            }
        }
        let labels: Vec<SpaceLabel> = fronted.spaces.labels()[targets.len()..].to_vec();
        Self::new(out, SpaceList::new(labels)?)
    }

    fn permute_targets_front(&self, targets: &[SpaceLabel]) -> Result<Self> {
        let mut order: Vec<SpaceLabel> = Vec::with_capacity(self.spaces.len());
        for l in targets {
            let p = self.spaces.index_of(l)?;
            order.push(self.spaces.labels()[p].clone());
        }
        for l in self.spaces.labels() {
            if !targets.iter().any(|t| t.key() == l.key()) {
                order.push(l.clone());
            }
        }
        if order.len() != self.spaces.len() {
            return Err(Error::UnknownLabel("duplicate contraction target".into()));
        }
        self.permute(&order)
    }

    /// Rename a leg in place (dimension must be unchanged).
    pub fn relabel(&self, old: &SpaceLabel, new: SpaceLabel) -> Result<Self> {
        let pos = self.spaces.index_of(old)?;
        if self.spaces.labels()[pos].dim != new.dim {
            return Err(Error::DimMismatch(format!(
                "relabel {old} -> {new} changes the dimension"
            )));
        }
        let mut labels = self.spaces.labels().to_vec();
        labels[pos] = new;
        Ok(Self { mat: self.mat.clone(), spaces: SpaceList::new(labels)? })
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { mat: self.mat.scale_re(s), spaces: self.spaces.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let aligned = other.permute(self.spaces.labels())?;
        Ok(Self { mat: self.mat.add(&aligned.mat), spaces: self.spaces.clone() })
    }

    /// Frobenius distance after aligning leg orders.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let aligned = other.permute(self.spaces.labels())?;
        Ok(self.mat.frobenius_dist(&aligned.mat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ops;
    use crate::linalg::random;
    use rand::SeedableRng;

    fn lbl(t: u32, leg: &str, dim: usize) -> SpaceLabel {
        match leg {
            "i" => SpaceLabel::input(t, dim),
            "o" => SpaceLabel::output(t, dim),
            _ => unreachable!(),
        }
    }

    #[test]
    fn trace_of_partial_trace_preserved() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let a = random::random_density(8, &mut rng);
        let op = LabeledOperator::new(
            a,
            SpaceList::new(vec![lbl(3, "i", 2), lbl(2, "i", 2), lbl(1, "i", 2)]).unwrap(),
        )
        .unwrap();
        let red = op.partial_trace(&[lbl(2, "i", 2)]).unwrap();
        assert!((red.trace() - op.trace()).norm() < 1e-12);
        assert_eq!(red.dim(), 4);
    }

    #[test]
    fn bell_marginal_is_identity() {
        let psi = ops::unnormalized_max_entangled(2);
        let op = LabeledOperator::new(
            psi,
            SpaceList::new(vec![lbl(1, "i", 2), lbl(1, "o", 2)]).unwrap(),
        )
        .unwrap();
        let red = op.partial_trace(&[lbl(1, "o", 2)]).unwrap();
        assert!(red.mat.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn product_state_partial_trace() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let ra = random::random_density(2, &mut rng);
        let rb = random::random_density(3, &mut rng);
        let op = LabeledOperator::new(
            ra.kron(&rb).unwrap(),
            SpaceList::new(vec![lbl(2, "i", 2), lbl(1, "i", 3)]).unwrap(),
        )
        .unwrap();
        let red = op.partial_trace(&[lbl(2, "i", 2)]).unwrap();
        assert!(red.mat.max_abs_diff(&rb) < 1e-14);
    }

    /// Index-sum oracle for tracing the middle factor of a 3-qubit operator.
    #[test]
    fn middle_trace_matches_index_oracle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        let a = random::random_density(8, &mut rng);
        let op = LabeledOperator::new(
            a.clone(),
            SpaceList::new(vec![lbl(3, "i", 2), lbl(2, "i", 2), lbl(1, "i", 2)]).unwrap(),
        )
        .unwrap();
        let red = op.partial_trace(&[lbl(2, "i", 2)]).unwrap();
        let mut oracle = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        let mut s = Complex64::ZERO;
                        for m in 0..2 {
                            s += a.get(i * 4 + m * 2 + k, j * 4 + m * 2 + l);
                        }
                        oracle.set(i * 2 + k, j * 2 + l, s);
                    }
                }
            }
        }
        assert!(red.mat.max_abs_diff(&oracle) < 1e-14);
    }

    #[test]
    fn permute_identity_and_swap() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let ra = random::random_density(2, &mut rng);
        let rb = random::random_density(2, &mut rng);
        let op = LabeledOperator::new(
            ra.kron(&rb).unwrap(),
            SpaceList::new(vec![lbl(2, "i", 2), lbl(1, "i", 2)]).unwrap(),
        )
        .unwrap();
        let same = op.permute(&[lbl(2, "i", 2), lbl(1, "i", 2)]).unwrap();
        assert_eq!(same.mat, op.mat);
        let swapped = op.permute(&[lbl(1, "i", 2), lbl(2, "i", 2)]).unwrap();
        assert!(swapped.mat.max_abs_diff(&rb.kron(&ra).unwrap()) < 1e-14);
    }

    #[test]
    fn three_cycle_and_inverse_compose_to_identity() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let a = random::random_density(8, &mut rng);
        let l1 = lbl(3, "i", 2);
        let l2 = lbl(2, "i", 2);
        let l3 = lbl(1, "i", 2);
        let op = LabeledOperator::new(
            a,
            SpaceList::new(vec![l1.clone(), l2.clone(), l3.clone()]).unwrap(),
        )
        .unwrap();
        let cycled = op.permute(&[l2.clone(), l3.clone(), l1.clone()]).unwrap();
        let back = cycled.permute(&[l1, l2, l3]).unwrap();
        assert!(back.mat.max_abs_diff(&op.mat) < 1e-15);
    }

    #[test]
    fn non_permutation_rejected() {
        let op = LabeledOperator::new(
            ComplexMatrix::identity(4),
            SpaceList::new(vec![lbl(2, "i", 2), lbl(1, "i", 2)]).unwrap(),
        )
        .unwrap();
        assert!(op.permute(&[lbl(2, "i", 2), lbl(2, "i", 2)]).is_err());
        assert!(op.permute(&[lbl(2, "i", 2)]).is_err());
    }

    #[test]
    fn local_unitary_matches_global() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let rho = random::random_density(8, &mut rng);
        let u = random::haar_unitary(2, &mut rng);
        let labels = vec![lbl(3, "i", 2), lbl(2, "i", 2), lbl(1, "i", 2)];
        let op = LabeledOperator::new(rho.clone(), SpaceList::new(labels.clone()).unwrap())
            .unwrap();
        let local = op.apply_unitary(&u, &[lbl(2, "i", 2)]).unwrap();
        let big = ComplexMatrix::identity(2)
            .kron(&u)
            .unwrap()
            .kron(&ComplexMatrix::identity(2))
            .unwrap();
        let global = big.matmul(&rho).matmul(&big.dagger());
        assert!(local.mat.max_abs_diff(&global) < 1e-13);
        assert_eq!(local.spaces.labels(), op.spaces.labels());
    }

    #[test]
    fn contract_matches_kron_trace() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        let rho = random::random_density(8, &mut rng);
        let o = random::random_hermitian(2, &mut rng);
        let labels = vec![lbl(3, "i", 2), lbl(2, "i", 2), lbl(1, "i", 2)];
        let op = LabeledOperator::new(rho.clone(), SpaceList::new(labels).unwrap()).unwrap();
        let got = op.contract(&o, &[lbl(2, "i", 2)]).unwrap();
        // oracle: build 1 ⊗ O ⊗ 1, multiply, trace middle leg
        let big = ComplexMatrix::identity(2)
            .kron(&o)
            .unwrap()
            .kron(&ComplexMatrix::identity(2))
            .unwrap();
        let prod = LabeledOperator::new(
            big.matmul(&rho),
            SpaceList::new(vec![lbl(3, "i", 2), lbl(2, "i", 2), lbl(1, "i", 2)]).unwrap(),
        )
        .unwrap();
        let oracle = prod.partial_trace(&[lbl(2, "i", 2)]).unwrap();
        assert!(got.mat.max_abs_diff(&oracle.mat) < 1e-13);
    }
}
