//! Instrument-specific Markov order: conditional future/history splits,
//! product testing, Markovianity, and the dual-set structure decomposition
//! with its reconstruction identity.
//!
//! The product test uses both mutual information and the relative Frobenius
//! distance to the marginal product; mutual information alone is flat near
//! product states, distance alone misses normalization drift.

use crate::error::{Error, Result};
use crate::instruments::{is_valid_sequence, InstrumentSequence};
use crate::linalg::entropy::{mutual_information, von_neumann_entropy, PSD_TOL};
use crate::linalg::{ComplexMatrix, LabeledOperator, Leg, SpaceLabel, SpaceList};
use crate::process::{apply_ops, Partition, ProcessTensor};
use serde::Serialize;

/// Default tolerance, in bits, below which a conditional mutual information
/// counts as zero.
pub const MI_TOL: f64 = 1e-7;
/// Default relative Frobenius tolerance for the product-distance test.
pub const DIST_TOL: f64 = 1e-7;
/// Conditional joints with less trace weight than this are vacuously product.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// One conditioned outcome of a history-blocking instrument.
#[derive(Clone, Debug)]
pub struct ConditionalSplit {
    pub label: String,
    /// tr(joint) / Σ_x tr(joint_x); meaningful when the instrument is
    /// deterministic overall.
    pub weight: f64,
    /// tr_M[O^(x) Υ] on the future ⊗ history legs.
    pub joint: LabeledOperator,
    /// Marginal on the future legs (unnormalized; a valid process tensor up
    /// to the outcome weight).
    pub future: LabeledOperator,
    /// Marginal on the history legs (a tester element in general).
    pub history: LabeledOperator,
}

impl ConditionalSplit {
    /// Product reference (future ⊗ history) / tr(joint), aligned to the
    /// joint's leg order.
    pub fn product_reference(&self) -> Result<LabeledOperator> {
        let tr = self.joint.trace().re;
        self.future
            .tensor(&self.history)?
            .scale_re(1.0 / tr)
            .permute(self.joint.spaces.labels())
    }
}

/// Condition a process on every element of an instrument sequence sitting
/// on the partition's memory block.
pub fn condition(
    pt: &ProcessTensor,
    seq: &InstrumentSequence,
    part: &Partition,
) -> Result<Vec<ConditionalSplit>> {
    for l in seq.legs().labels() {
        if !part.memory.iter().any(|m| m.key() == l.key()) {
            return Err(Error::InvalidInstrument(format!(
                "instrument leg {l} is not in the memory block"
            )));
        }
    }
    if seq.legs().len() != part.memory.len() {
        return Err(Error::InvalidInstrument(
            "instrument does not cover the memory block".into(),
        ));
    }
    let mut joints = Vec::with_capacity(seq.len());
    let mut total = 0.0;
    for e in seq.elements() {
        let joint = apply_ops(pt.op(), std::slice::from_ref(e))?;
        total += joint.trace().re;
        joints.push(joint);
    }
    let mut out = Vec::with_capacity(joints.len());
    for (joint, label) in joints.into_iter().zip(seq.outcome_labels()) {
        let tr = joint.trace().re;
        if tr < -1e-9 * total.abs().max(1.0) {
            return Err(Error::NotPsd { min_eig: tr, tol: PSD_TOL });
        }
        let future = joint.marginal(&part.future)?;
        let history = joint.marginal(&part.history)?;
        out.push(ConditionalSplit {
            label: label.clone(),
            weight: if total.abs() > 0.0 { tr / total } else { 0.0 },
            joint,
            future,
            history,
        });
    }
    Ok(out)
}

/// Mutual information between two named leg groups of a joint operator.
pub fn split_mutual_information(
    joint: &LabeledOperator,
    future: &[SpaceLabel],
    history: &[SpaceLabel],
    tol: f64,
) -> Result<f64> {
    mutual_information(joint, future, history, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitStats {
    pub outcome: String,
    pub weight: f64,
    pub mi_bits: f64,
    pub product_distance: f64,
    pub vacuous: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovOrderReport {
    pub splits: Vec<SplitStats>,
    pub verdict: bool,
    pub tol_mi: f64,
    pub tol_dist: f64,
}

impl MarkovOrderReport {
    pub fn max_mi(&self) -> f64 {
        self.splits.iter().map(|s| s.mi_bits).fold(0.0, f64::max)
    }

    pub fn max_distance(&self) -> f64 {
        self.splits.iter().map(|s| s.product_distance).fold(0.0, f64::max)
    }
}

/// Instrument-specific Markov order check: every conditional split must be
/// product between future and history within both tolerances. Degenerate
/// (zero-weight) outcomes are vacuously product and flagged.
pub fn has_markov_order(
    pt: &ProcessTensor,
    seq: &InstrumentSequence,
    part: &Partition,
    tol_mi: f64,
    tol_dist: f64,
) -> Result<MarkovOrderReport> {
    let validity = is_valid_sequence(seq, 1e-9)?;
    if !validity.pass {
        return Err(Error::InvalidInstrument(format!(
            "blocking sequence is not a valid tester (normalization residual {:.2e})",
            validity.normalization_residual
        )));
    }
    let splits = condition(pt, seq, part)?;
    let mut stats = Vec::with_capacity(splits.len());
    let mut verdict = true;
    for s in &splits {
        let tr = s.joint.trace().re;
        if tr.abs() < WEIGHT_FLOOR {
            stats.push(SplitStats {
                outcome: s.label.clone(),
                weight: s.weight,
                mi_bits: 0.0,
                product_distance: 0.0,
                vacuous: true,
            });
            continue;
        }
        let (mi, dist) = if part.future.is_empty() || part.history.is_empty() {
            (0.0, 0.0)
        } else {
            let mi = split_mutual_information(&s.joint, &part.future, &part.history, PSD_TOL)?;
            let prod = s.product_reference()?;
            let dist = s.joint.mat.frobenius_dist(&prod.mat) / s.joint.mat.frobenius_norm();
            (mi, dist)
        };
        if mi > tol_mi || dist > tol_dist {
            verdict = false;
        }
        stats.push(SplitStats {
            outcome: s.label.clone(),
            weight: s.weight,
            mi_bits: mi,
            product_distance: dist,
            vacuous: false,
        });
    }
    Ok(MarkovOrderReport { splits: stats, verdict, tol_mi, tol_dist })
}

/// Markovianity via the marginal-product criterion: Υ is Markovian iff it
/// equals Λ̂_{n,n−1} ⊗ … ⊗ Λ̂_{2,1} ⊗ ρ̂₁ where every factor is the
/// corresponding marginal of Υ normalized to its proper trace. Relative
/// Frobenius distance is compared against `tol`.
pub fn is_markovian(pt: &ProcessTensor, tol: f64) -> Result<(bool, f64)> {
    let spaces = pt.spaces();
    let n = pt.steps();
    let mut factors: Vec<LabeledOperator> = Vec::new();
    for j in (2..=n).rev() {
        let mut legs = spaces.at(j, Leg::Ancillary);
        legs.extend(spaces.at(j, Leg::Input));
        legs.extend(spaces.at(j - 1, Leg::Output));
        if legs.is_empty() {
            continue;
        }
        let marg = pt.op().marginal(&legs)?;
        let d_in: f64 = spaces
            .at(j - 1, Leg::Output)
            .iter()
            .map(|l| l.dim as f64)
            .product();
        let tr = marg.trace().re;
        factors.push(marg.scale_re(d_in / tr));
    }
    let first = spaces.at(1, Leg::Input);
    if !first.is_empty() {
        let marg = pt.op().marginal(&first)?;
        let tr = marg.trace().re;
        factors.push(marg.scale_re(1.0 / tr));
    }
    let mut prod = factors[0].clone();
    for f in &factors[1..] {
        prod = prod.tensor(f)?;
    }
    let aligned = prod.permute(pt.spaces().labels())?;
    let dist = aligned.mat.frobenius_dist(pt.mat()) / pt.mat().frobenius_norm();
    Ok((dist <= tol, dist))
}

/// Assemble Σ_x joint_x ⊗ Δ_x + Σ_y coeff_y ⊗ B_y with the memory operators
/// inserted on `memory_legs` and the result permuted to `target` leg order.
/// With duals from [`crate::linalg::dual_set`] of the blocking family and
/// complement coefficients from [`extract_complement_coefficients`], this
/// reconstructs the original process exactly.
pub fn theorem1_reconstruct(
    first_terms: &[(LabeledOperator, ComplexMatrix)],
    complement_terms: &[(LabeledOperator, ComplexMatrix)],
    memory_legs: &[SpaceLabel],
    target: &SpaceList,
) -> Result<LabeledOperator> {
    let mem_spaces = SpaceList::new(memory_legs.to_vec())?;
    let mut acc: Option<LabeledOperator> = None;
    for (coeff, mem_op) in first_terms.iter().chain(complement_terms) {
        if mem_op.rows() != mem_spaces.total_dim() {
            return Err(Error::DimMismatch(
                "memory operator does not match the memory legs".into(),
            ));
        }
        let mem = LabeledOperator::new(mem_op.clone(), mem_spaces.clone())?;
        let term = coeff.tensor(&mem)?.permute(target.labels())?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidInstrument("no terms to reconstruct from".into()))
}

/// Complement coefficients Ῡ^(y) = tr_M[(B^(y) ⊗ 1) Υ] for the orthonormal
/// complement basis returned by `dual_set` (self-dual, so the same operators
/// extract and carry the coefficients).
pub fn extract_complement_coefficients(
    pt: &ProcessTensor,
    memory_legs: &[SpaceLabel],
    complement_basis: &[ComplexMatrix],
) -> Result<Vec<LabeledOperator>> {
    complement_basis
        .iter()
        .map(|b| pt.op().contract(b, memory_legs))
        .collect()
}

/// Convenience: full round trip. Conditions on the blocking family, extracts
/// complement coefficients and reassembles; returns the reconstruction and
/// its relative error against the original.
pub fn structure_round_trip(
    pt: &ProcessTensor,
    seq: &InstrumentSequence,
    part: &Partition,
) -> Result<(LabeledOperator, f64)> {
    let mats: Vec<ComplexMatrix> = seq.elements().iter().map(|e| e.mat.clone()).collect();
    let ds = crate::linalg::dual_set(&mats, 1e-10)?;
    let memory_legs = seq.legs().labels().to_vec();
    let splits = condition(pt, seq, part)?;
    let first: Vec<(LabeledOperator, ComplexMatrix)> = splits
        .iter()
        .zip(&ds.duals)
        .map(|(s, d)| (s.joint.clone(), d.clone()))
        .collect();
    let coeffs = extract_complement_coefficients(pt, &memory_legs, &ds.complement_basis)?;
    let comp: Vec<(LabeledOperator, ComplexMatrix)> = coeffs
        .into_iter()
        .zip(ds.complement_basis.iter().cloned())
        .collect();
    let rec = theorem1_reconstruct(&first, &comp, &memory_legs, pt.spaces())?;
    let err = rec.mat.frobenius_dist(pt.mat()) / pt.mat().frobenius_norm();
    Ok((rec, err))
}

/// Entropy of a conditioned operator, used by reports.
pub fn split_entropy(op: &LabeledOperator) -> Result<f64> {
    von_neumann_entropy(&op.mat, PSD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::{self, LegFamily};
    use crate::linalg::matrix::ops;
    use crate::linalg::random::{self, SeededRng};
    use crate::linalg::sic;
    use crate::process::{choi_of_map, from_dilation, markovian_product, Dilation, DilationOp};
    use rand::SeedableRng;

    fn random_two_step_process(seed: u64) -> ProcessTensor {
        let mut rng = SeededRng::seed_from_u64(seed);
        let rho = random::random_density(4, &mut rng);
        let initial = crate::linalg::LabeledOperator::new(
            rho,
            SpaceList::new(vec![
                crate::process::internal_label(2, "S"),
                crate::process::internal_label(2, "E"),
            ])
            .unwrap(),
        )
        .unwrap();
        let d = Dilation {
            initial,
            intervals: vec![vec![DilationOp::Unitary {
                u: random::haar_unitary(4, &mut rng),
                targets: vec!["S".into(), "E".into()],
            }]],
            feed_out: vec![],
        };
        from_dilation(&d, 2).unwrap()
    }

    #[test]
    fn markovian_product_passes_is_markovian() {
        let mut rng = SeededRng::seed_from_u64(91);
        let rho = random::random_density(2, &mut rng);
        let maps: Vec<ComplexMatrix> = (0..2)
            .map(|_| choi_of_map(&random::random_cptp_kraus(2, 2, 3, &mut rng), 2, 2).unwrap())
            .collect();
        let pt = markovian_product(&maps, &[(2, 2), (2, 2)], &rho).unwrap();
        let (ok, dist) = is_markovian(&pt, 1e-7).unwrap();
        assert!(ok, "distance {dist}");
    }

    #[test]
    fn generic_dilation_fails_is_markovian() {
        let pt = random_two_step_process(7);
        let (ok, dist) = is_markovian(&pt, 1e-7).unwrap();
        assert!(!ok, "distance {dist} unexpectedly small");
    }

    #[test]
    fn markovian_process_blocked_by_causal_break() {
        let mut rng = SeededRng::seed_from_u64(15);
        let rho = random::random_density(2, &mut rng);
        let maps: Vec<ComplexMatrix> = (0..2)
            .map(|_| choi_of_map(&random::random_cptp_kraus(2, 2, 3, &mut rng), 2, 2).unwrap())
            .collect();
        let pt = markovian_product(&maps, &[(2, 2), (2, 2)], &rho).unwrap();
        let seq = instruments::causal_break(&[
            (SpaceLabel::output(2, 2), LegFamily::Preparations(sic::sic_states())),
            (SpaceLabel::input(2, 2), LegFamily::Povm(sic::sic_povm())),
        ])
        .unwrap();
        let part = Partition::around_memory(
            pt.spaces(),
            &[SpaceLabel::output(2, 2), SpaceLabel::input(2, 2)],
        )
        .unwrap();
        let rep = has_markov_order(&pt, &seq, &part, MI_TOL, DIST_TOL).unwrap();
        assert!(rep.verdict, "{rep:?}");
        // weights sum to one
        let total: f64 = rep.splits.iter().map(|s| s.weight).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn generic_dilation_keeps_history_dependence() {
        let mut rng = SeededRng::seed_from_u64(23);
        let rho = random::random_density(4, &mut rng);
        let initial = crate::linalg::LabeledOperator::new(
            rho,
            SpaceList::new(vec![
                crate::process::internal_label(2, "S"),
                crate::process::internal_label(2, "E"),
            ])
            .unwrap(),
        )
        .unwrap();
        let d = Dilation {
            initial,
            intervals: vec![
                vec![DilationOp::Unitary {
                    u: random::haar_unitary(4, &mut rng),
                    targets: vec!["S".into(), "E".into()],
                }],
                vec![DilationOp::Unitary {
                    u: random::haar_unitary(4, &mut rng),
                    targets: vec!["S".into(), "E".into()],
                }],
            ],
            feed_out: vec![],
        };
        let pt = from_dilation(&d, 3).unwrap();
        let seq = instruments::causal_break(&[
            (SpaceLabel::output(2, 2), LegFamily::Preparations(sic::sic_states())),
            (SpaceLabel::input(2, 2), LegFamily::Povm(sic::sic_povm())),
        ])
        .unwrap();
        let part = Partition::around_memory(
            pt.spaces(),
            &[SpaceLabel::output(2, 2), SpaceLabel::input(2, 2)],
        )
        .unwrap();
        let rep = has_markov_order(&pt, &seq, &part, 1e-3, 1e-3).unwrap();
        assert!(!rep.verdict);
        assert!(rep.max_mi() > 1e-3);
    }

    #[test]
    fn product_joint_has_zero_mi() {
        let mut rng = SeededRng::seed_from_u64(44);
        let a = random::random_density(2, &mut rng);
        let b = random::random_density(2, &mut rng);
        let f = SpaceLabel::input(2, 2);
        let h = SpaceLabel::input(1, 2);
        let joint = crate::linalg::LabeledOperator::new(
            a.kron(&b).unwrap(),
            SpaceList::new(vec![f.clone(), h.clone()]).unwrap(),
        )
        .unwrap();
        let mi = split_mutual_information(&joint, &[f], &[h], PSD_TOL).unwrap();
        assert!(mi < 1e-10);
    }

    #[test]
    fn structure_round_trip_with_ic_blocking() {
        let pt = random_two_step_process(101);
        let seq = instruments::causal_break(&[
            (SpaceLabel::output(1, 2), LegFamily::Preparations(sic::sic_states())),
            (SpaceLabel::input(1, 2), LegFamily::Povm(sic::sic_povm())),
        ])
        .unwrap();
        let part = Partition::around_memory(
            pt.spaces(),
            &[SpaceLabel::output(1, 2), SpaceLabel::input(1, 2)],
        )
        .unwrap();
        let (_, err) = structure_round_trip(&pt, &seq, &part).unwrap();
        assert!(err < 1e-9, "round-trip error {err}");
    }

    #[test]
    fn structure_round_trip_with_trash_and_prepare_complement() {
        let pt = random_two_step_process(103);
        let seq = instruments::trash_and_prepare(&[(1, ops::maximally_mixed(2))]).unwrap();
        let part = Partition::around_memory(
            pt.spaces(),
            &[SpaceLabel::output(1, 2), SpaceLabel::input(1, 2)],
        )
        .unwrap();
        // single blocking element: the complement carries 15 coefficients
        let mats: Vec<ComplexMatrix> = seq.elements().iter().map(|e| e.mat.clone()).collect();
        let ds = crate::linalg::dual_set(&mats, 1e-10).unwrap();
        assert_eq!(ds.complement_basis.len(), 15);
        let (_, err) = structure_round_trip(&pt, &seq, &part).unwrap();
        assert!(err < 1e-9, "round-trip error {err}");
    }

    #[test]
    fn markovian_reconstruction_via_ic_blocking_preserves_product() {
        let mut rng = SeededRng::seed_from_u64(77);
        let rho = random::random_density(2, &mut rng);
        let maps: Vec<ComplexMatrix> = (0..1)
            .map(|_| choi_of_map(&random::random_cptp_kraus(2, 2, 2, &mut rng), 2, 2).unwrap())
            .collect();
        let pt = markovian_product(&maps, &[(2, 2)], &rho).unwrap();
        let seq = instruments::causal_break(&[
            (SpaceLabel::output(1, 2), LegFamily::Preparations(sic::sic_states())),
            (SpaceLabel::input(1, 2), LegFamily::Povm(sic::sic_povm())),
        ])
        .unwrap();
        let part = Partition::around_memory(
            pt.spaces(),
            &[SpaceLabel::output(1, 2), SpaceLabel::input(1, 2)],
        )
        .unwrap();
        let (_, err) = structure_round_trip(&pt, &seq, &part).unwrap();
        assert!(err < 1e-9);
    }
}
