//! History-blocking with a sequence of unitary operations: a process that
//! re-prepares a maximally entangled pair each step, sandwiches the
//! experimenter's slot between a unitary and the inverse of a designated
//! one, and verifies the sandwich with an internal Bell measurement. A
//! counter of consecutive successes triggers an environment reset after ℓ
//! hits, so exactly the designated unitary sequence erases the history.
//!
//! The process tensor is assembled by branch summation over the internal
//! Bell outcomes, with the counter logic resolved per branch path.

use super::ScenarioReport;
use crate::error::{Error, Result};
use crate::instruments::{self, InstrumentSequence};
use crate::linalg::matrix::ops;
use crate::linalg::random::{self, SeededRng};
use crate::linalg::{ComplexMatrix, LabeledOperator, SpaceLabel, SpaceList};
use crate::markov::{self, condition};
use crate::process::{check_causality, choi_of_map, Partition, ProcessTensor};
use rand::SeedableRng;

struct CuttingProcess {
    n: u32,
    ell: usize,
    /// joint unitaries on (E, pair-ancilla, pair-system), one per step
    step_unitaries: Vec<ComplexMatrix>,
    /// designated system unitaries v_j whose inverse the process applies
    designated: Vec<ComplexMatrix>,
}

impl CuttingProcess {
    fn seeded(ell: usize, seed: u64) -> Self {
        let n = (ell + 2) as u32;
        let mut rng = SeededRng::seed_from_u64(seed);
        let step_unitaries = (0..n).map(|_| random::haar_unitary(8, &mut rng)).collect();
        let designated = (0..n).map(|_| random::haar_unitary(2, &mut rng)).collect();
        Self { n, ell, step_unitaries, designated }
    }

    /// Sum the branch Choi states over all internal Bell outcome paths.
    fn process_tensor(&self) -> Result<ProcessTensor> {
        let n = self.n;
        let branches = 4usize.pow(n - 1);
        let mut total: Option<LabeledOperator> = None;
        for path in 0..branches {
            let mut outcome = Vec::with_capacity((n - 1) as usize);
            let mut rem = path;
            for _ in 0..(n - 1) {
                outcome.push(rem % 4);
                rem /= 4;
            }
            let branch = self.branch_operator(&outcome)?;
            total = Some(match total {
                None => branch,
                Some(t) => t.add(&branch)?,
            });
        }
        ProcessTensor::new_unchecked(total.unwrap())
    }

    fn branch_operator(&self, outcome: &[usize]) -> Result<LabeledOperator> {
        let env = crate::process::internal_label(2, "E");
        let pa = crate::process::internal_label(2, "PA");
        let ps = crate::process::internal_label(2, "PS");
        let swap = ops::swap(2);
        let pair_state = ops::unnormalized_max_entangled(2).scale_re(0.5);

        let mut state = LabeledOperator::new(
            ops::maximally_mixed(2),
            SpaceList::new(vec![env.clone()])?,
        )?;
        let mut count = 0usize;
        for j in 1..self.n {
            // fresh maximally entangled pair, joint dynamics, feed-out
            let pair = LabeledOperator::new(
                pair_state.clone(),
                SpaceList::new(vec![pa.clone(), ps.clone()])?,
            )?;
            state = state.tensor(&pair)?;
            state = state.apply_unitary(
                &self.step_unitaries[(j - 1) as usize],
                &[env.clone(), pa.clone(), ps.clone()],
            )?;
            let leg_in = SpaceLabel::input(j, 2);
            let leg_out = SpaceLabel::output(j, 2);
            let choi_pair = LabeledOperator::new(
                ops::unnormalized_max_entangled(2),
                SpaceList::new(vec![leg_in, leg_out])?,
            )?;
            state = state.tensor(&choi_pair)?;
            state = state.apply_unitary(&swap, &[ps.clone(), SpaceLabel::input(j, 2)])?;
            // the process applies the designated inverse, undoes the joint
            // dynamics and Bell-measures the pair
            let vdag = self.designated[(j - 1) as usize].dagger();
            state = state.apply_unitary(&vdag, &[ps.clone()])?;
            state = state.apply_unitary(
                &self.step_unitaries[(j - 1) as usize].dagger(),
                &[env.clone(), pa.clone(), ps.clone()],
            )?;
            let b = outcome[(j - 1) as usize];
            let bv = ops::unnormalized_bell_ket(b).scale_re(0.5_f64.sqrt());
            let proj = ComplexMatrix::outer(&bv, &bv);
            state = state.contract(&proj, &[pa.clone(), ps.clone()])?;
            // consecutive-success counter with environment reset
            if b == 0 {
                count += 1;
            } else {
                count = 0;
            }
            if count == self.ell {
                count = 0;
                state = state.partial_trace(&[env.clone()])?;
                let fresh = LabeledOperator::new(
                    ops::maximally_mixed(2),
                    SpaceList::new(vec![env.clone()])?,
                )?;
                state = state.tensor(&fresh)?;
            }
        }
        // final step: fresh pair and dynamics, system half fed out
        let pair = LabeledOperator::new(
            pair_state.clone(),
            SpaceList::new(vec![pa.clone(), ps.clone()])?,
        )?;
        state = state.tensor(&pair)?;
        state = state.apply_unitary(
            &self.step_unitaries[(self.n - 1) as usize],
            &[env.clone(), pa.clone(), ps.clone()],
        )?;
        state = state.relabel(&ps, SpaceLabel::input(self.n, 2))?;
        state = state.partial_trace(&[env, pa])?;
        Ok(state)
    }

    /// Blocking instrument: the designated unitaries on the memory steps.
    fn blocking_sequence(&self) -> Result<InstrumentSequence> {
        let vs: Vec<(u32, ComplexMatrix)> = (2..self.n)
            .map(|j| (j, self.designated[(j - 1) as usize].clone()))
            .collect();
        instruments::unitary_sequence(&vs)
    }

    /// Same sequence with one unitary replaced by σ_x · v.
    fn wrong_sequence(&self) -> Result<InstrumentSequence> {
        let vs: Vec<(u32, ComplexMatrix)> = (2..self.n)
            .map(|j| {
                let v = self.designated[(j - 1) as usize].clone();
                if j == 2 {
                    (j, ops::pauli_x().matmul(&v))
                } else {
                    (j, v)
                }
            })
            .collect();
        instruments::unitary_sequence(&vs)
    }
}

pub fn run_unitary_blocking(ell: usize, seed: u64) -> Result<ScenarioReport> {
    if !(1..=2).contains(&ell) {
        return Err(Error::InvalidParameter("memory depth must be 1 or 2".into()));
    }
    let mut report = ScenarioReport::new("unitary_blocking", seed);
    report.param("ell", ell as f64);

    let proc = CuttingProcess::seeded(ell, seed);
    let pt = proc.process_tensor()?;
    let causality = check_causality(&pt, 1e-8)?;
    report.check_bool("choi_causality", causality.pass);
    report.check_eq("causality_max_residual", 0.0, causality.max_residual(), 1e-8);

    let seq = proc.blocking_sequence()?;
    let memory = seq.legs().labels().to_vec();
    let part = Partition::around_memory(pt.spaces(), &memory)?;
    let rep = markov::has_markov_order(&pt, &seq, &part, 1e-8, 1e-7)?;
    report.check_bool("correct_sequence_blocks", rep.verdict);
    report.check_eq("correct_sequence_max_mi_bits", 0.0, rep.max_mi(), 1e-8);

    let wrong = proc.wrong_sequence()?;
    let rep_wrong = markov::has_markov_order(&pt, &wrong, &part, 1e-8, 1e-7)?;
    report.check_bool("wrong_sequence_fails", !rep_wrong.verdict);
    report.check_ge("wrong_sequence_mi_bits", 1e-4, rep_wrong.max_mi());

    // structure decomposition: the single blocked term carries the dual
    // pairing coefficient 1/d^ℓ when the conditionals are normalized the
    // standard way (n_F, n_H = products of output dims in F and H)
    let splits = condition(&pt, &seq, &part)?;
    let joint = &splits[0].joint;
    let n_f: f64 = part.future.iter().filter(|l| l.leg == crate::linalg::Leg::Output)
        .map(|l| l.dim as f64)
        .product();
    let n_h: f64 = part.history.iter().filter(|l| l.leg == crate::linalg::Leg::Output)
        .map(|l| l.dim as f64)
        .product();
    let d_ell = 2f64.powi(ell as i32);
    let c_rec = joint.trace().re / (n_f * n_h * d_ell);
    report.check_eq("dual_pairing_coefficient", 1.0 / d_ell, c_rec, 1e-9);
    report.check_eq("blocking_success_probability", 1.0, joint.trace().re / (n_f * n_h), 1e-9);

    // the first structure term in canonical normalization:
    // (1/d^ℓ) Υ'_F ⊗ (⊗_j Choi(v_j)/d) ⊗ Υ_H  ==  joint-split ⊗ Δ_M
    let fut = joint.marginal(&part.future)?;
    let fut_norm = fut.scale_re(n_f / fut.trace().re);
    let hist = joint.marginal(&part.history)?;
    let hist_norm = hist.scale_re(n_h / hist.trace().re);
    let o_m = &seq.elements()[0];
    let v_primes = o_m.scale_re(1.0 / d_ell); // ⊗_j Choi(v_j)/d
    let paper_form = fut_norm
        .tensor(&v_primes)?
        .tensor(&hist_norm)?
        .scale_re(1.0 / d_ell);
    let delta_m = o_m.scale_re(1.0 / (d_ell * d_ell)); // dual inside the span
    let mine = joint.tensor(&delta_m)?;
    let residual = paper_form.permute(mine.spaces.labels())?.mat.frobenius_dist(&mine.mat)
        / mine.mat.frobenius_norm();
    report.check_eq("first_term_structure_residual", 0.0, residual, 1e-9);

    // sanity: the blocking element is a rank-one direction of the operator
    // space, never informationally complete
    let (ic, rank) = instruments::is_informationally_complete(&seq, 1e-9)?;
    report.check_bool("unitary_sequence_not_ic", !ic);
    report.check_eq("unitary_sequence_span_rank", 1.0, rank as f64, 0.0);

    // cross-check the Choi convention: the blocking element equals
    // ⊗ choi_of_map(v_j)
    let mut want: Option<LabeledOperator> = None;
    for j in 2..proc.n {
        let v = &proc.designated[(j - 1) as usize];
        let c = choi_of_map(std::slice::from_ref(v), 2, 2)?;
        let op = LabeledOperator::new(
            c,
            SpaceList::new(vec![SpaceLabel::output(j, 2), SpaceLabel::input(j, 2)])?,
        )?;
        want = Some(match want {
            None => op,
            Some(w) => w.tensor(&op)?,
        });
    }
    let dist = want.unwrap().distance(o_m)?;
    report.check_eq("blocking_element_choi_residual", 0.0, dist, 1e-12);
    Ok(report)
}
