//! Quantum and classical conditional mutual information, block-decomposed
//! processes with vanishing quantum CMI, and the projector instrument that
//! blocks their history.

use crate::error::{Error, Result};
use crate::instruments::InstrumentSequence;
use crate::linalg::entropy::{von_neumann_entropy, PSD_TOL};
use crate::linalg::{check_psd, ComplexMatrix, LabeledOperator, SpaceList};
use crate::process::{check_causality, Partition, ProcessTensor};

pub mod classical;

/// Quantum conditional mutual information
/// I(F:H|M) = S(FM) + S(MH) − S(FMH) − S(M) in bits, computed on the
/// trace-normalized operator. Strong subadditivity keeps it nonnegative;
/// values below −1e-8 are rejected as numerical corruption, small negatives
/// are clamped to zero.
pub fn qcmi(op: &LabeledOperator, part: &Partition, tol: f64) -> Result<f64> {
    let norm = op.scale_re(1.0 / op.trace().re);
    let s_fm = von_neumann_entropy(&norm.partial_trace(&part.history)?.mat, tol)?;
    let s_mh = von_neumann_entropy(&norm.partial_trace(&part.future)?.mat, tol)?;
    let s_all = von_neumann_entropy(&norm.mat, tol)?;
    let mut rm = part.future.clone();
    rm.extend(part.history.clone());
    let s_m = von_neumann_entropy(&norm.partial_trace(&rm)?.mat, tol)?;
    let v = s_fm + s_mh - s_all - s_m;
    if v < -1e-8 {
        return Err(Error::NotPsd { min_eig: v, tol });
    }
    Ok(v.max(0.0))
}

/// One orthogonal block of a vanishing-QCMI decomposition: the memory space
/// factors as M^L ⊗ M^R inside the range of `isometry`, the future couples
/// only to M^L and the history only to M^R.
#[derive(Clone, Debug)]
pub struct Block {
    pub probability: f64,
    /// Operator on (future legs) ⊗ M^L, future factors first.
    pub left: ComplexMatrix,
    pub dim_left: usize,
    /// Operator on M^R ⊗ (history legs), M^R first.
    pub right: ComplexMatrix,
    pub dim_right: usize,
    /// Isometry from M^L ⊗ M^R into the physical memory space; columns
    /// orthonormal, ranges of distinct blocks mutually orthogonal.
    pub isometry: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub future: SpaceList,
    pub memory: SpaceList,
    pub history: SpaceList,
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn validate(&self) -> Result<()> {
        let d_m = self.memory.total_dim();
        let d_f = self.future.total_dim();
        let d_h = self.history.total_dim();
        let mut prob_sum = 0.0;
        let mut range_dim = 0usize;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.probability < -1e-12 {
                return Err(Error::InvalidParameter(format!("block {i}: negative weight")));
            }
            prob_sum += b.probability;
            if b.left.rows() != d_f * b.dim_left || b.right.rows() != b.dim_right * d_h {
                return Err(Error::DimMismatch(format!("block {i}: factor dimensions")));
            }
            check_psd(&b.left, PSD_TOL)?;
            check_psd(&b.right, PSD_TOL)?;
            let dlr = b.dim_left * b.dim_right;
            if b.isometry.rows() != d_m || b.isometry.cols() != dlr {
                return Err(Error::DimMismatch(format!("block {i}: isometry shape")));
            }
            let vv = b.isometry.dagger().matmul(&b.isometry);
            if vv.max_abs_diff(&ComplexMatrix::identity(dlr)) > 1e-10 {
                return Err(Error::NotUnitary { dev: 0.0, tol: 1e-10 });
            }
            range_dim += dlr;
            for other in &self.blocks[..i] {
                if other.isometry.dagger().matmul(&b.isometry).max_abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "block {i} range overlaps an earlier block"
                    )));
                }
            }
        }
        if (prob_sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "block probabilities sum to {prob_sum}"
            )));
        }
        if range_dim != d_m {
            return Err(Error::DimMismatch(format!(
                "block ranges span dim {range_dim}, memory dim is {d_m}"
            )));
        }
        Ok(())
    }

    /// Subspace projectors Π^(m) = V_m V_m† on the memory space.
    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.blocks
            .iter()
            .map(|b| b.isometry.matmul(&b.isometry.dagger()).hermitize())
            .collect()
    }
}

/// Assemble Υ = Σ_m P(m) (1⊗V_m⊗1)(left_m ⊗ right_m)(1⊗V_m⊗1)† on the legs
/// (future, memory, history), validate causality, and return it as a process
/// tensor. Any vanishing-QCMI process has this form; the construction makes
/// qcmi = 0 by design and the causality check is the only nontrivial gate.
pub fn build_vanishing_qcmi(bd: &BlockDecomposition, tol: f64) -> Result<ProcessTensor> {
    bd.validate()?;
    let d_f = bd.future.total_dim();
    let d_h = bd.history.total_dim();
    let i_f = ComplexMatrix::identity(d_f);
    let i_h = ComplexMatrix::identity(d_h);
    let mut labels = bd.future.labels().to_vec();
    labels.extend(bd.memory.labels().iter().cloned());
    labels.extend(bd.history.labels().iter().cloned());
    let spaces = SpaceList::new(labels)?;

    let mut acc: Option<ComplexMatrix> = None;
    for b in &bd.blocks {
        let x = b.left.kron(&b.right)?;
        let w = i_f.kron(&b.isometry)?.kron(&i_h)?;
        let term = w.matmul(&x).matmul(&w.dagger()).scale_re(b.probability);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    let mat = acc.ok_or_else(|| Error::InvalidParameter("no blocks".into()))?;
    let pt = ProcessTensor::new_unchecked(LabeledOperator::new(mat.hermitize(), spaces)?)?;
    let report = check_causality(&pt, tol.max(1e-8))?;
    if !report.pass {
        let worst = report
            .levels
            .iter()
            .filter(|l| !l.pass)
            .max_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap());
        return Err(Error::CausalityViolation {
            level: worst.map(|l| l.level).unwrap_or(1),
            residual: worst.map(|l| l.residual).unwrap_or(report.trace_residual),
        });
    }
    Ok(pt)
}

/// History-blocking instrument for a block decomposition: the subspace
/// projectors {Π^(m)} on the memory legs, scaled by the inverse product of
/// the memory's output-leg dimensions so the sum is a valid deterministic
/// tester (for all-input memory blocks the elements are the bare
/// projectors). The scaling does not affect any product verdict.
pub fn projector_blocking_instrument(bd: &BlockDecomposition) -> Result<InstrumentSequence> {
    let d_out = bd.memory.output_dim_product();
    let elements = bd
        .projectors()
        .into_iter()
        .map(|p| LabeledOperator::new(p.scale_re(1.0 / d_out), bd.memory.clone()))
        .collect::<Result<Vec<_>>>()?;
    let labels = (0..bd.blocks.len()).map(|m| format!("block{m}")).collect();
    InstrumentSequence::new(elements, labels)
}

/// Seeded vanishing-QCMI instance on the trivial-output three-step family:
/// Υ = ρ_{3^i 2^i 1^i} ⊗ 1_{2^o 1^o} where the middle input leg splits into
/// the given (dim M^L, dim M^R) orthogonal blocks with random factors. This
/// family is causal for any block content, which makes it the generator for
/// the vanishing-QCMI acceptance sweep.
pub fn random_block_decomposition(seed: u64, splits: &[(usize, usize)]) -> BlockDecomposition {
    use crate::linalg::random::{self, SeededRng};
    use crate::linalg::SpaceLabel;
    use rand::{Rng, SeedableRng};
    let mut rng = SeededRng::seed_from_u64(seed);
    let d_m: usize = splits.iter().map(|(l, r)| l * r).sum();
    let future =
        SpaceList::new(vec![SpaceLabel::input(3, 2), SpaceLabel::output(2, 2)]).unwrap();
    let memory = SpaceList::new(vec![SpaceLabel::input(2, d_m)]).unwrap();
    let history =
        SpaceList::new(vec![SpaceLabel::output(1, 2), SpaceLabel::input(1, 2)]).unwrap();
    let u = random::haar_unitary(d_m, &mut rng);
    let mut col = 0usize;
    let mut blocks = Vec::new();
    let mut probs: Vec<f64> = (0..splits.len()).map(|_| rng.random::<f64>() + 0.1).collect();
    let tot: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= tot);
    for (&(dl, dr), p) in splits.iter().zip(probs) {
        let iso = ComplexMatrix::from_fn(d_m, dl * dr, |i, j| u.get(i, col + j));
        col += dl * dr;
        // left factor ρ_{3^i, L} ⊗ 1_{2^o} reordered to (3^i, 2^o, L)
        let lf = random::random_density(2 * dl, &mut rng);
        let left = LabeledOperator::new(
            lf.kron(&ComplexMatrix::identity(2)).unwrap(),
            SpaceList::new(vec![
                SpaceLabel::input(3, 2),
                SpaceLabel::ancillary(0, dl, "L"),
                SpaceLabel::output(2, 2),
            ])
            .unwrap(),
        )
        .unwrap()
        .permute(&[
            SpaceLabel::input(3, 2),
            SpaceLabel::output(2, 2),
            SpaceLabel::ancillary(0, dl, "L"),
        ])
        .unwrap()
        .mat;
        // right factor ρ_{R, 1^i} ⊗ 1_{1^o} reordered to (R, 1^o, 1^i)
        let rh = random::random_density(dr * 2, &mut rng);
        let right = LabeledOperator::new(
            rh.kron(&ComplexMatrix::identity(2)).unwrap(),
            SpaceList::new(vec![
                SpaceLabel::ancillary(0, dr, "R"),
                SpaceLabel::input(1, 2),
                SpaceLabel::output(1, 2),
            ])
            .unwrap(),
        )
        .unwrap()
        .permute(&[
            SpaceLabel::ancillary(0, dr, "R"),
            SpaceLabel::output(1, 2),
            SpaceLabel::input(1, 2),
        ])
        .unwrap()
        .mat;
        blocks.push(Block { probability: p, left, dim_left: dl, right, dim_right: dr, isometry: iso });
    }
    BlockDecomposition { future, memory, history, blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{self, SeededRng};
    use crate::linalg::{Leg, SpaceLabel};
    use crate::markov;
    use rand::SeedableRng;

    fn random_blocks(seed: u64, splits: &[(usize, usize)]) -> BlockDecomposition {
        random_block_decomposition(seed, splits)
    }

    #[test]
    fn built_process_has_zero_qcmi_and_is_blocked() {
        for (seed, splits) in [(1u64, vec![(1, 1), (1, 1)]), (2, vec![(2, 1), (1, 2)])] {
            let bd = random_blocks(seed, &splits);
            let pt = build_vanishing_qcmi(&bd, 1e-8).unwrap();
            let part = Partition::around_memory(pt.spaces(), bd.memory.labels()).unwrap();
            let v = qcmi(pt.op(), &part, PSD_TOL).unwrap();
            assert!(v < 1e-8, "qcmi {v}");
            let seq = projector_blocking_instrument(&bd).unwrap();
            let rep =
                markov::has_markov_order(&pt, &seq, &part, markov::MI_TOL, markov::DIST_TOL)
                    .unwrap();
            assert!(rep.verdict, "{rep:?}");
        }
    }

    #[test]
    fn single_block_trivial_left_is_product() {
        let bd = random_blocks(3, &[(1, 2)]);
        let pt = build_vanishing_qcmi(&bd, 1e-8).unwrap();
        let part = Partition::around_memory(pt.spaces(), bd.memory.labels()).unwrap();
        assert!(qcmi(pt.op(), &part, PSD_TOL).unwrap() < 1e-9);
    }

    #[test]
    fn rotated_projectors_generically_fail_to_block() {
        let bd = random_blocks(5, &[(2, 1), (1, 2)]);
        let pt = build_vanishing_qcmi(&bd, 1e-8).unwrap();
        let part = Partition::around_memory(pt.spaces(), bd.memory.labels()).unwrap();
        // rotate the projectors by a seeded non-commuting unitary
        let mut rng = SeededRng::seed_from_u64(99);
        let w = random::haar_unitary(bd.memory.total_dim(), &mut rng);
        let rotated: Vec<LabeledOperator> = bd
            .projectors()
            .into_iter()
            .map(|p| {
                LabeledOperator::new(
                    w.matmul(&p).matmul(&w.dagger()).hermitize(),
                    bd.memory.clone(),
                )
                .unwrap()
            })
            .collect();
        let labels = (0..rotated.len()).map(|m| format!("r{m}")).collect();
        let seq = InstrumentSequence::new(rotated, labels).unwrap();
        let rep =
            markov::has_markov_order(&pt, &seq, &part, markov::MI_TOL, markov::DIST_TOL).unwrap();
        assert!(!rep.verdict);
    }

    #[test]
    fn qcmi_matches_block_entropy_mixture() {
        // two orthogonal 1x1 blocks on a qubit memory: classical flag —
        // qcmi must vanish and the flag's Shannon entropy shows up in S(M)
        let bd = random_blocks(7, &[(1, 1), (1, 1)]);
        let pt = build_vanishing_qcmi(&bd, 1e-8).unwrap();
        let part = Partition::around_memory(pt.spaces(), bd.memory.labels()).unwrap();
        assert!(qcmi(pt.op(), &part, PSD_TOL).unwrap() < 1e-9);
        // memory marginal is diagonal in the block basis
        let m = pt.op().marginal(part.memory.as_slice()).unwrap();
        assert!(m.mat.rows() == 2);
    }

    #[test]
    fn strong_subadditivity_on_random_processes() {
        // seeded random three-step dilations: qcmi >= -1e-8 always
        use crate::process::{from_dilation, internal_label, Dilation, DilationOp};
        for seed in 0..10u64 {
            let mut rng = SeededRng::seed_from_u64(1000 + seed);
            let rho = random::random_density(4, &mut rng);
            let initial = LabeledOperator::new(
                rho,
                SpaceList::new(vec![internal_label(2, "S"), internal_label(2, "E")]).unwrap(),
            )
            .unwrap();
            let d = Dilation {
                initial,
                intervals: (0..2)
                    .map(|_| {
                        vec![DilationOp::Unitary {
                            u: random::haar_unitary(4, &mut rng),
                            targets: vec!["S".into(), "E".into()],
                        }]
                    })
                    .collect(),
                feed_out: vec![],
            };
            let pt = from_dilation(&d, 3).unwrap();
            let mem: Vec<SpaceLabel> = pt
                .spaces()
                .labels()
                .iter()
                .filter(|l| l.timestep == 2)
                .cloned()
                .collect();
            let part = Partition::around_memory(pt.spaces(), &mem).unwrap();
            let v = qcmi(pt.op(), &part, PSD_TOL).unwrap();
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn non_causal_blocks_rejected() {
        // a block structure whose assembled operator feeds later information
        // backwards: left factor correlates 3^i with 2^o non-uniformly so
        // the level-3 trace condition fails
        let mut bd = random_blocks(11, &[(1, 1), (1, 1)]);
        let mut rng = SeededRng::seed_from_u64(12);
        for b in &mut bd.blocks {
            b.left = random::random_density(4, &mut rng).scale_re(4.0);
        }
        let err = build_vanishing_qcmi(&bd, 1e-8);
        assert!(matches!(err, Err(Error::CausalityViolation { .. })));
    }

    #[test]
    fn partition_classification() {
        let pt_spaces = SpaceList::new(vec![
            SpaceLabel::input(3, 2),
            SpaceLabel::output(2, 2),
            SpaceLabel::input(2, 4),
            SpaceLabel::output(1, 2),
            SpaceLabel::input(1, 2),
        ])
        .unwrap();
        let part =
            Partition::around_memory(&pt_spaces, &[SpaceLabel::input(2, 4)]).unwrap();
        assert_eq!(part.future.len(), 2);
        assert_eq!(part.history.len(), 2);
        assert!(part.future.iter().all(|l| l.temporal_key()
            > SpaceLabel::input(2, 4).temporal_key()));
        assert!(part.future.iter().any(|l| l.leg == Leg::Output && l.timestep == 2));
    }
}
