//! Generative collision models with memory.
//!
//! The repeated-interaction model collides the system with each environment
//! ancilla ℓ times in a nested order: during the interval ending at timestep
//! j the system meets ancillas A_{j+ℓ−1} (its first collision) down to A_j
//! (its ℓ-th and final collision, after which the ancilla is discarded).
//! Retired ancillas are traced out eagerly so the live state never exceeds
//! d_S · d_A^ℓ.
//!
//! Two further memory mechanisms feed the infinite-memory witnesses: a swap
//! chain that carries the initial system state through ancilla–ancilla
//! collisions, and an initially correlated environment pair.

use crate::error::{Error, Result};
use crate::linalg::matrix::ops;
use crate::linalg::{ComplexMatrix, LabeledOperator, SpaceLabel, SpaceList};
use crate::process::{internal_label, Dilation, DilationOp};
use num_complex::Complex64;

/// Probing operation applied to the system between intervals.
#[derive(Clone, Debug)]
pub enum StepOp {
    /// CP map Σ_k K ρ K† (general probing; may be trace decreasing).
    Kraus(Vec<ComplexMatrix>),
    /// Discard the system and feed `X` forward: ρ ↦ X ⊗ tr_S ρ. With a
    /// density matrix this is trash-and-prepare; arbitrary operators are
    /// allowed so the reduced memory map can be probed on a matrix basis.
    ReplaceWith(ComplexMatrix),
    /// Measure the effect (POVM element) and feed a fresh state forward:
    /// ρ ↦ prep ⊗ tr_S[(effect ⊗ 1) ρ].
    MeasurePrepare { effect: ComplexMatrix, prep: ComplexMatrix },
}

/// Repeated system–ancilla interaction model with nested collision order.
#[derive(Clone, Debug)]
pub struct NestedCollisionModel {
    pub sys_dim: usize,
    pub anc_dim: usize,
    /// Memory depth: collisions per ancilla.
    pub ell: usize,
    /// Number of timesteps.
    pub n: u32,
    /// Initial ancilla states τ^{A_x}, x = 1..n+ℓ−1.
    pub anc_states: Vec<ComplexMatrix>,
    /// unitaries[j−1][o] acts on (S, A_{j+o}) during interval j, o = 0..ℓ−1.
    /// Application order inside the interval is o = ℓ−1 (newest) first.
    pub unitaries: Vec<Vec<ComplexMatrix>>,
    /// Reverse the collision order inside this interval (newest last); used
    /// to show the nested order is what makes trash-and-prepare block.
    pub flipped_interval: Option<u32>,
}

fn anc_tag(x: usize) -> String {
    format!("A{x}")
}

impl NestedCollisionModel {
    /// Seeded model with Haar-random collisions and maximally mixed ancillas.
    pub fn seeded(sys_dim: usize, anc_dim: usize, ell: usize, n: u32, seed: u64) -> Self {
        use crate::linalg::random::{haar_unitary, SeededRng};
        use rand::SeedableRng;
        let mut rng = SeededRng::seed_from_u64(seed);
        let anc_states = (0..(n as usize + ell - 1))
            .map(|_| ops::maximally_mixed(anc_dim))
            .collect();
        let unitaries = (0..n)
            .map(|_| {
                (0..ell)
                    .map(|_| haar_unitary(sys_dim * anc_dim, &mut rng))
                    .collect()
            })
            .collect();
        Self { sys_dim, anc_dim, ell, n, anc_states, unitaries, flipped_interval: None }
    }

    fn check_dims(&self) -> Result<()> {
        let joint = self.sys_dim * self.anc_dim.pow(self.ell as u32 + 1);
        if joint > crate::error::DIM_CAP {
            return Err(Error::DimOverflow { dim: joint, cap: crate::error::DIM_CAP });
        }
        if self.anc_states.len() < self.n as usize + self.ell - 1 {
            return Err(Error::DimMismatch("not enough ancilla states".into()));
        }
        if self.unitaries.len() < self.n as usize {
            return Err(Error::DimMismatch("not enough interval unitaries".into()));
        }
        for interval in &self.unitaries {
            for u in interval {
                u.check_unitary(1e-10)?;
            }
        }
        Ok(())
    }

    fn sys_label(&self) -> SpaceLabel {
        internal_label(self.sys_dim, "S")
    }

    /// Apply interval j (1-based) to a live state holding the active ancilla
    /// window A_j..A_{j+ℓ−1}.
    fn apply_interval(&self, state: LabeledOperator, j: u32) -> Result<LabeledOperator> {
        let mut s = state;
        let flipped = self.flipped_interval == Some(j);
        let order: Vec<usize> = if flipped {
            (0..self.ell).collect()
        } else {
            (0..self.ell).rev().collect()
        };
        for o in order {
            let x = j as usize + o;
            if x > self.anc_states.len() {
                continue;
            }
            let u = &self.unitaries[(j - 1) as usize][o];
            let targets = [self.sys_label(), internal_label(self.anc_dim, &anc_tag(x))];
            s = s.apply_unitary(u, &targets)?;
        }
        Ok(s)
    }
}

fn apply_step_op(state: LabeledOperator, sys: &SpaceLabel, op: &StepOp) -> Result<LabeledOperator> {
    match op {
        StepOp::Kraus(ks) => state.apply_kraus(ks, std::slice::from_ref(sys)),
        StepOp::ReplaceWith(x) => {
            let env = state.partial_trace(std::slice::from_ref(sys))?;
            let fresh = LabeledOperator::new(x.clone(), SpaceList::new(vec![sys.clone()])?)?;
            fresh.tensor(&env)
        }
        StepOp::MeasurePrepare { effect, prep } => {
            let env = state.contract(effect, std::slice::from_ref(sys))?;
            let fresh = LabeledOperator::new(prep.clone(), SpaceList::new(vec![sys.clone()])?)?;
            fresh.tensor(&env)
        }
    }
}

/// Sequential simulation of the nested model: intervals interleaved with the
/// supplied probing operations (n−1 of them). Returns the final system state
/// and the trajectory of system marginals after each interval.
pub fn simulate(
    m: &NestedCollisionModel,
    rho0: &ComplexMatrix,
    step_ops: &[StepOp],
) -> Result<(ComplexMatrix, Vec<ComplexMatrix>)> {
    m.check_dims()?;
    if step_ops.len() != (m.n - 1) as usize {
        return Err(Error::InvalidParameter(format!(
            "{} probing operations supplied, {} needed",
            step_ops.len(),
            m.n - 1
        )));
    }
    let sys = m.sys_label();
    let mut labels = vec![sys.clone()];
    let mut mat = rho0.clone();
    for x in 1..=m.ell {
        labels.push(internal_label(m.anc_dim, &anc_tag(x)));
        mat = mat.kron(&m.anc_states[x - 1])?;
    }
    let mut state = LabeledOperator::new(mat, SpaceList::new(labels)?)?;
    let mut trajectory = Vec::with_capacity(m.n as usize);
    for j in 1..=m.n {
        state = m.apply_interval(state, j)?;
        // retire A_j, bring in A_{j+ℓ}
        let retired = internal_label(m.anc_dim, &anc_tag(j as usize));
        state = state.partial_trace(&[retired])?;
        let next = j as usize + m.ell;
        if next <= m.anc_states.len() && j < m.n {
            let fresh = LabeledOperator::new(
                m.anc_states[next - 1].clone(),
                SpaceList::new(vec![internal_label(m.anc_dim, &anc_tag(next))])?,
            )?;
            state = state.tensor(&fresh)?;
        }
        trajectory.push(state.marginal(&[sys.clone()])?.mat);
        if j < m.n {
            state = apply_step_op(state, &sys, &step_ops[(j - 1) as usize])?;
        }
    }
    Ok((trajectory.last().unwrap().clone(), trajectory))
}

/// The multilinear map taking the last ℓ preparations to the final system
/// state, extracted by probing with a matrix-unit basis from a fixed
/// (maximally mixed) history.
pub struct ReducedMemoryMap {
    dim: usize,
    ell: usize,
    /// table[flattened basis multi-index] = output state for that basis
    /// combination of preparations (earliest preparation slot first).
    table: Vec<ComplexMatrix>,
}

impl ReducedMemoryMap {
    pub fn eval(&self, sigmas: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if sigmas.len() != self.ell {
            return Err(Error::InvalidParameter(format!(
                "{} preparations supplied, {} needed",
                sigmas.len(),
                self.ell
            )));
        }
        let d = self.dim;
        let units = d * d;
        let mut out = ComplexMatrix::zeros(d, d);
        for (idx, base) in self.table.iter().enumerate() {
            // idx decomposes little-endian over one (u, v) pair per slot
            let mut rem = idx;
            let mut coeff = Complex64::ONE;
            for sigma in sigmas.iter().take(self.ell) {
                let unit = rem % units;
                rem /= units;
                let (u, v) = (unit / d, unit % d);
                coeff *= sigma.get(u, v);
                if coeff == Complex64::ZERO {
                    break;
                }
            }
            if coeff != Complex64::ZERO {
                out = out.add(&base.scale(coeff));
            }
        }
        Ok(out)
    }
}

/// Extract the reduced memory map at the final step: the last ℓ probing
/// slots carry the preparations, earlier slots feed the maximally mixed
/// state. History independence of the result is what the blocking tests
/// establish separately.
pub fn reduced_memory_map(m: &NestedCollisionModel) -> Result<ReducedMemoryMap> {
    let d = m.sys_dim;
    let units = d * d;
    let slots = (m.n - 1) as usize;
    if slots < m.ell {
        return Err(Error::InvalidParameter(
            "need at least ℓ probing slots to extract the memory map".into(),
        ));
    }
    let combos = units.pow(m.ell as u32);
    let mut table = Vec::with_capacity(combos);
    let rho0 = ops::maximally_mixed(d);
    for idx in 0..combos {
        let mut rem = idx;
        let mut step_ops: Vec<StepOp> = Vec::with_capacity(slots);
        for _ in 0..(slots - m.ell) {
            step_ops.push(StepOp::ReplaceWith(ops::maximally_mixed(d)));
        }
        for _ in 0..m.ell {
            let unit = rem % units;
            rem /= units;
            let (u, v) = (unit / d, unit % d);
            let mut e = ComplexMatrix::zeros(d, d);
            e.set(u, v, Complex64::ONE);
            step_ops.push(StepOp::ReplaceWith(e));
        }
        let (out, _) = simulate(m, &rho0, &step_ops)?;
        table.push(out);
    }
    Ok(ReducedMemoryMap { dim: d, ell: m.ell, table })
}

#[derive(Clone, Debug)]
pub struct BlockingReport {
    /// ‖ρ_out(ρ₀) − ρ_out(ρ₀′)‖_F per probed history pair (and per outcome
    /// for measure-and-prepare probes).
    pub dependences: Vec<f64>,
    pub max_dependence: f64,
}

/// History dependence of the final state under a full trash-and-prepare
/// sequence, probed on explicit history pairs.
pub fn trash_and_prepare_dependence(
    m: &NestedCollisionModel,
    preps: &[ComplexMatrix],
    histories: &[(ComplexMatrix, ComplexMatrix)],
) -> Result<BlockingReport> {
    let step_ops: Vec<StepOp> = preps.iter().map(|s| StepOp::ReplaceWith(s.clone())).collect();
    let mut dependences = Vec::new();
    for (a, b) in histories {
        let (out_a, _) = simulate(m, a, &step_ops)?;
        let (out_b, _) = simulate(m, b, &step_ops)?;
        dependences.push(out_a.frobenius_dist(&out_b));
    }
    let max = dependences.iter().cloned().fold(0.0, f64::max);
    Ok(BlockingReport { dependences, max_dependence: max })
}

/// Replace the trash-and-prepare at one step with measure-and-prepare and
/// report the per-outcome history dependence of the normalized conditional
/// final states (the outcome probability itself always tracks the history;
/// what the blocking question asks is whether the conditional future state
/// does). Outcomes with negligible weight for either history are skipped.
pub fn measurement_breaks_blocking(
    m: &NestedCollisionModel,
    preps: &[ComplexMatrix],
    replace_step: usize,
    povm: &[ComplexMatrix],
    histories: &[(ComplexMatrix, ComplexMatrix)],
) -> Result<BlockingReport> {
    if replace_step == 0 || replace_step > preps.len() {
        return Err(Error::InvalidParameter("replace_step out of range".into()));
    }
    let mut dependences = Vec::new();
    for effect in povm {
        let step_ops: Vec<StepOp> = preps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i + 1 == replace_step {
                    StepOp::MeasurePrepare { effect: effect.clone(), prep: s.clone() }
                } else {
                    StepOp::ReplaceWith(s.clone())
                }
            })
            .collect();
        for (a, b) in histories {
            let (out_a, _) = simulate(m, a, &step_ops)?;
            let (out_b, _) = simulate(m, b, &step_ops)?;
            let (wa, wb) = (out_a.trace().re, out_b.trace().re);
            if wa < 1e-12 || wb < 1e-12 {
                continue;
            }
            dependences
                .push(out_a.scale_re(1.0 / wa).frobenius_dist(&out_b.scale_re(1.0 / wb)));
        }
    }
    let max = dependences.iter().cloned().fold(0.0, f64::max);
    Ok(BlockingReport { dependences, max_dependence: max })
}

/// Convert a nested model to a dilation so its process tensor can be built
/// with the swap-in construction. The first interval is absorbed into the
/// initial joint state (the framework feeds the post-interval state out at
/// step 1); later intervals attach, collide with and retire ancillas.
pub fn nested_to_dilation(m: &NestedCollisionModel, rho0: &ComplexMatrix) -> Result<Dilation> {
    m.check_dims()?;
    let mut labels = vec![internal_label(m.sys_dim, "S")];
    let mut mat = rho0.clone();
    for x in 1..=m.ell {
        labels.push(internal_label(m.anc_dim, &anc_tag(x)));
        mat = mat.kron(&m.anc_states[x - 1])?;
    }
    let mut state = LabeledOperator::new(mat, SpaceList::new(labels)?)?;
    state = m.apply_interval(state, 1)?;
    // framework interval j corresponds to model interval j+1
    let mut intervals = Vec::new();
    for j in 1..m.n {
        let model_interval = j + 1;
        let mut steps = Vec::new();
        let newest = model_interval as usize + m.ell - 1;
        if newest <= m.anc_states.len() {
            steps.push(DilationOp::Attach {
                tag: anc_tag(newest),
                state: m.anc_states[newest - 1].clone(),
            });
        }
        for o in (0..m.ell).rev() {
            let x = model_interval as usize + o;
            if x > m.anc_states.len() {
                continue;
            }
            steps.push(DilationOp::Unitary {
                u: m.unitaries[(model_interval - 1) as usize][o].clone(),
                targets: vec!["S".into(), anc_tag(x)],
            });
        }
        steps.push(DilationOp::Discard { tag: anc_tag(model_interval as usize) });
        intervals.push(steps);
    }
    Ok(Dilation { initial: state, intervals, feed_out: vec![] })
}

/// Ancilla–ancilla swap chain: the initial system state is swapped into the
/// environment at the first interval and walked up the chain by
/// ancilla–ancilla swaps, returning to the system at the last interval —
/// untouched by anything done on the system line in between.
#[derive(Clone, Debug)]
pub struct SwapChainModel {
    pub dim: usize,
    pub n: u32,
    pub anc_states: Vec<ComplexMatrix>,
}

/// Simulate the swap chain with probing operations at steps 1..n−1.
pub fn simulate_swap_chain(
    m: &SwapChainModel,
    rho0: &ComplexMatrix,
    step_ops: &[StepOp],
) -> Result<ComplexMatrix> {
    let n = m.n as usize;
    if step_ops.len() != n - 1 {
        return Err(Error::InvalidParameter("one probing operation per step".into()));
    }
    if m.anc_states.len() < n {
        return Err(Error::DimMismatch("need n ancillas".into()));
    }
    if n < 3 {
        return Err(Error::InvalidParameter("swap chain needs n >= 3".into()));
    }
    let sys = internal_label(m.dim, "S");
    let swap = ops::swap(m.dim);
    let lbl = |x: usize| internal_label(m.dim, &anc_tag(x));
    let attach = |state: LabeledOperator, x: usize, st: &ComplexMatrix| -> Result<LabeledOperator> {
        let fresh = LabeledOperator::new(st.clone(), SpaceList::new(vec![lbl(x)])?)?;
        state.tensor(&fresh)
    };
    // interval 1: S ↔ A1, then A1 → A2
    let mut state = LabeledOperator::new(rho0.clone(), SpaceList::new(vec![sys.clone()])?)?;
    state = attach(state, 1, &m.anc_states[0])?;
    state = attach(state, 2, &m.anc_states[1])?;
    state = state.apply_unitary(&swap, &[sys.clone(), lbl(1)])?;
    state = state.apply_unitary(&swap, &[lbl(2), lbl(1)])?;
    state = state.partial_trace(&[lbl(1)])?;
    // intervals 2..n−1 walk the stored state one ancilla further
    for j in 2..n {
        state = apply_step_op(state, &sys, &step_ops[j - 2])?;
        state = attach(state, j + 1, &m.anc_states[j])?;
        state = state.apply_unitary(&swap, &[lbl(j + 1), lbl(j)])?;
        state = state.partial_trace(&[lbl(j)])?;
    }
    // last probing slot, then the stored state swaps back into the system
    state = apply_step_op(state, &sys, &step_ops[n - 2])?;
    state = state.apply_unitary(&swap, &[sys.clone(), lbl(n)])?;
    state = state.partial_trace(&[lbl(n)])?;
    Ok(state.marginal(&[sys])?.mat)
}

#[derive(Clone, Debug)]
pub struct InfiniteMemoryReport {
    pub identity_residuals: Vec<f64>,
    pub infinite: bool,
}

/// Verify that the swap chain hands the initial state back at the final
/// step for every supplied probing sequence.
pub fn infinite_memory_witness_swap_chain(
    m: &SwapChainModel,
    rho0s: &[ComplexMatrix],
    op_sequences: &[Vec<StepOp>],
    tol: f64,
) -> Result<InfiniteMemoryReport> {
    let mut residuals = Vec::new();
    for rho0 in rho0s {
        for seq in op_sequences {
            let out = simulate_swap_chain(m, rho0, seq)?;
            residuals.push(out.frobenius_dist(rho0));
        }
    }
    let infinite = residuals.iter().all(|&r| r < tol);
    Ok(InfiniteMemoryReport { identity_residuals: residuals, infinite })
}

/// Initially correlated environment: ancillas A_1 and A_{n−1} hold a
/// maximally classically correlated pair; S ↔ A_1 at the first interval,
/// S ↔ A_{n−1} at the last, identity in between. Whatever basis state the
/// experimenter finds at the first step comes back at the final step, no
/// matter what happens on the system line in between.
#[derive(Clone, Debug)]
pub struct CorrelatedEnvModel {
    pub dim: usize,
    pub n: u32,
}

/// Conditional final state given the first-step probe and the intermediate
/// probing operations (slots 2..n−1).
pub fn simulate_correlated_env(
    m: &CorrelatedEnvModel,
    rho0: &ComplexMatrix,
    first_probe: &StepOp,
    later_ops: &[StepOp],
) -> Result<ComplexMatrix> {
    let n = m.n as usize;
    if later_ops.len() != n - 2 {
        return Err(Error::InvalidParameter("need n-2 intermediate operations".into()));
    }
    let d = m.dim;
    let sys = internal_label(d, "S");
    let a1 = internal_label(d, "A1");
    let alast = internal_label(d, "Alast");
    // maximally classically correlated pair Σ_x |xx⟩⟨xx| / d
    let mut pair = ComplexMatrix::zeros(d * d, d * d);
    for x in 0..d {
        pair.set(x * d + x, x * d + x, Complex64::new(1.0 / d as f64, 0.0));
    }
    let mat = rho0.kron(&pair)?;
    let mut state = LabeledOperator::new(
        mat,
        SpaceList::new(vec![sys.clone(), a1.clone(), alast.clone()])?,
    )?;
    let swap = ops::swap(d);
    state = state.apply_unitary(&swap, &[sys.clone(), a1.clone()])?;
    state = state.partial_trace(&[a1])?;
    state = apply_step_op(state, &sys, first_probe)?;
    for op in later_ops {
        state = apply_step_op(state, &sys, op)?;
    }
    state = state.apply_unitary(&swap, &[sys.clone(), alast.clone()])?;
    Ok(state.marginal(&[sys])?.mat)
}

/// Witness for the correlated environment: conditioned on finding |x⟩ at the
/// first step, the final state is |x⟩⟨x| again for every probing sequence.
pub fn infinite_memory_witness_correlated(
    m: &CorrelatedEnvModel,
    op_sequences: &[Vec<StepOp>],
    tol: f64,
) -> Result<InfiniteMemoryReport> {
    let d = m.dim;
    let rho0 = ops::maximally_mixed(d);
    let mut residuals = Vec::new();
    for x in 0..d {
        let proj = ComplexMatrix::basis_projector(d, x);
        let first = StepOp::MeasurePrepare { effect: proj.clone(), prep: ops::maximally_mixed(d) };
        for seq in op_sequences {
            let out = simulate_correlated_env(m, &rho0, &first, seq)?;
            let w = out.trace().re;
            if w < 1e-12 {
                continue;
            }
            residuals.push(out.scale_re(1.0 / w).frobenius_dist(&proj));
        }
    }
    let infinite = residuals.iter().all(|&r| r < tol);
    Ok(InfiniteMemoryReport { identity_residuals: residuals, infinite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{self, SeededRng};
    use rand::SeedableRng;

    fn random_histories(seed: u64, dim: usize, count: usize) -> Vec<(ComplexMatrix, ComplexMatrix)> {
        let mut rng = SeededRng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                (
                    random::random_density(dim, &mut rng),
                    random::random_density(dim, &mut rng),
                )
            })
            .collect()
    }

    fn random_preps(seed: u64, dim: usize, count: usize) -> Vec<ComplexMatrix> {
        let mut rng = SeededRng::seed_from_u64(seed);
        (0..count).map(|_| random::random_density(dim, &mut rng)).collect()
    }

    #[test]
    fn identity_collisions_pass_preparation_through() {
        let mut m = NestedCollisionModel::seeded(2, 2, 2, 3, 1);
        for interval in &mut m.unitaries {
            for u in interval {
                *u = ComplexMatrix::identity(4);
            }
        }
        let sigma = random_preps(3, 2, 2);
        let ops_list: Vec<StepOp> =
            sigma.iter().map(|s| StepOp::ReplaceWith(s.clone())).collect();
        let (out, _) = simulate(&m, &ops::maximally_mixed(2), &ops_list).unwrap();
        assert!(out.max_abs_diff(&sigma[1]) < 1e-13);
    }

    #[test]
    fn memoryless_model_depends_only_on_last_preparation() {
        // ℓ = 1: one fresh ancilla per interval
        let m = NestedCollisionModel::seeded(2, 2, 1, 3, 5);
        let p1 = random_preps(7, 2, 2);
        let p2 = vec![random_preps(8, 2, 1)[0].clone(), p1[1].clone()];
        let to_ops = |ps: &[ComplexMatrix]| -> Vec<StepOp> {
            ps.iter().map(|s| StepOp::ReplaceWith(s.clone())).collect()
        };
        let (a, _) = simulate(&m, &ops::maximally_mixed(2), &to_ops(&p1)).unwrap();
        let (b, _) = simulate(&m, &ops::maximally_mixed(2), &to_ops(&p2)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn trash_and_prepare_blocks_history_nested_order() {
        for (ell, seed) in [(1usize, 11u64), (2, 12), (3, 13)] {
            let n = (ell + 1) as u32;
            let m = NestedCollisionModel::seeded(2, 2, ell, n, seed);
            let preps = random_preps(seed + 100, 2, ell);
            let hist = random_histories(seed + 200, 2, 3);
            let rep = trash_and_prepare_dependence(&m, &preps, &hist).unwrap();
            assert!(rep.max_dependence < 1e-10, "ell={ell}: {}", rep.max_dependence);
        }
    }

    #[test]
    fn flipped_order_breaks_blocking() {
        let m = {
            let mut m = NestedCollisionModel::seeded(2, 2, 2, 3, 21);
            m.flipped_interval = Some(2);
            m
        };
        let preps = random_preps(22, 2, 2);
        let hist = random_histories(23, 2, 3);
        let rep = trash_and_prepare_dependence(&m, &preps, &hist).unwrap();
        assert!(rep.max_dependence > 1e-6, "dependence {}", rep.max_dependence);
    }

    #[test]
    fn reduced_memory_map_reproduces_simulation() {
        let m = NestedCollisionModel::seeded(2, 2, 2, 3, 31);
        let map = reduced_memory_map(&m).unwrap();
        let mut rng = SeededRng::seed_from_u64(32);
        for _ in 0..10 {
            let sigmas = vec![
                random::random_density(2, &mut rng),
                random::random_density(2, &mut rng),
            ];
            let rho0 = random::random_density(2, &mut rng);
            let step_ops: Vec<StepOp> =
                sigmas.iter().map(|s| StepOp::ReplaceWith(s.clone())).collect();
            let (direct, _) = simulate(&m, &rho0, &step_ops).unwrap();
            let via_map = map.eval(&sigmas).unwrap();
            assert!(direct.max_abs_diff(&via_map) < 1e-10);
        }
    }

    #[test]
    fn swap_only_collisions_are_history_independent() {
        let mut m = NestedCollisionModel::seeded(2, 2, 2, 3, 41);
        for interval in &mut m.unitaries {
            interval[0] = ops::swap(2);
            interval[1] = ops::swap(2);
        }
        let preps = random_preps(42, 2, 2);
        let step_ops: Vec<StepOp> =
            preps.iter().map(|s| StepOp::ReplaceWith(s.clone())).collect();
        let (out, _) = simulate(&m, &ops::maximally_mixed(2), &step_ops).unwrap();
        let (out2, _) = simulate(&m, &ComplexMatrix::basis_projector(2, 0), &step_ops).unwrap();
        assert!(out.max_abs_diff(&out2) < 1e-12);
    }

    #[test]
    fn measurement_reopens_history_dependence() {
        let m = NestedCollisionModel::seeded(2, 2, 2, 3, 51);
        let preps = random_preps(52, 2, 2);
        let hist = random_histories(53, 2, 3);
        let povm = vec![
            ComplexMatrix::basis_projector(2, 0),
            ComplexMatrix::basis_projector(2, 1),
        ];
        // measure at the last memory slot: the conditioned ancilla that
        // feeds forward carries the history into the future
        let rep = measurement_breaks_blocking(&m, &preps, 2, &povm, &hist).unwrap();
        assert!(rep.max_dependence > 1e-4, "dependence {}", rep.max_dependence);

        // degenerate all-identity model keeps zero dependence
        let mut ident = m.clone();
        for interval in &mut ident.unitaries {
            for u in interval {
                *u = ComplexMatrix::identity(4);
            }
        }
        let rep = measurement_breaks_blocking(&ident, &preps, 2, &povm, &hist).unwrap();
        assert!(rep.max_dependence < 1e-12);
    }

    #[test]
    fn entangled_ancilla_pair_still_blocked_by_trash_and_prepare() {
        // two-step dynamics with an initially entangled ancilla pair: the
        // first ancilla is retired before the preparation goes in, so a
        // single trash-and-prepare still blocks the history
        let mut rng = SeededRng::seed_from_u64(61);
        let u1 = random::haar_unitary(4, &mut rng);
        let u2 = random::haar_unitary(4, &mut rng);
        let bell = {
            let v = ops::unnormalized_bell_ket(0).scale_re(0.5_f64.sqrt());
            ComplexMatrix::outer(&v, &v)
        };
        let sigma = random::random_density(2, &mut rng);
        let mut outs = Vec::new();
        for _ in 0..2 {
            let rho0 = random::random_density(2, &mut rng);
            let sys = internal_label(2, "S");
            let l1 = internal_label(2, "A1");
            let l2 = internal_label(2, "A2");
            let mat = rho0.kron(&bell).unwrap();
            let mut st = LabeledOperator::new(
                mat,
                SpaceList::new(vec![sys.clone(), l1.clone(), l2.clone()]).unwrap(),
            )
            .unwrap();
            st = st.apply_unitary(&u1, &[sys.clone(), l1.clone()]).unwrap();
            st = st.partial_trace(&[l1]).unwrap();
            st = apply_step_op(st, &sys, &StepOp::ReplaceWith(sigma.clone())).unwrap();
            st = st.apply_unitary(&u2, &[sys.clone(), l2.clone()]).unwrap();
            outs.push(st.marginal(&[sys]).unwrap().mat);
        }
        assert!(outs[0].max_abs_diff(&outs[1]) < 1e-12);
    }

    #[test]
    fn swap_chain_returns_initial_state() {
        let m = SwapChainModel {
            dim: 2,
            n: 4,
            anc_states: (0..4).map(|_| ops::maximally_mixed(2)).collect(),
        };
        let mut rng = SeededRng::seed_from_u64(71);
        let rho0s: Vec<ComplexMatrix> =
            (0..3).map(|_| random::random_density(2, &mut rng)).collect();
        let seqs: Vec<Vec<StepOp>> = (0..3)
            .map(|_| {
                (0..3)
                    .map(|_| StepOp::Kraus(random::random_cptp_kraus(2, 2, 2, &mut rng)))
                    .collect()
            })
            .collect();
        let rep = infinite_memory_witness_swap_chain(&m, &rho0s, &seqs, 1e-10).unwrap();
        assert!(rep.infinite, "{:?}", rep.identity_residuals);
    }

    #[test]
    fn correlated_environment_returns_first_outcome() {
        let m = CorrelatedEnvModel { dim: 2, n: 4 };
        let mut rng = SeededRng::seed_from_u64(81);
        let seqs: Vec<Vec<StepOp>> = (0..3)
            .map(|_| {
                (0..2)
                    .map(|_| StepOp::Kraus(random::random_cptp_kraus(2, 2, 2, &mut rng)))
                    .collect()
            })
            .collect();
        let rep = infinite_memory_witness_correlated(&m, &seqs, 1e-10).unwrap();
        assert!(rep.infinite, "{:?}", rep.identity_residuals);
    }

    #[test]
    fn memoryless_model_is_not_an_infinite_memory_witness() {
        let m = NestedCollisionModel::seeded(2, 2, 1, 3, 91);
        let mut rng = SeededRng::seed_from_u64(92);
        let rho0 = random::random_density(2, &mut rng);
        let step_ops: Vec<StepOp> = (0..2)
            .map(|_| StepOp::Kraus(random::random_cptp_kraus(2, 2, 2, &mut rng)))
            .collect();
        let (out, _) = simulate(&m, &rho0, &step_ops).unwrap();
        assert!(out.frobenius_dist(&rho0) > 1e-6);
    }

    #[test]
    fn dilation_route_agrees_with_simulation() {
        let m = NestedCollisionModel::seeded(2, 2, 2, 3, 95);
        let mut rng = SeededRng::seed_from_u64(96);
        let rho0 = random::random_density(2, &mut rng);
        let d = nested_to_dilation(&m, &rho0).unwrap();
        let pt = crate::process::from_dilation(&d, 3).unwrap();
        assert!(crate::process::check_causality(&pt, 1e-8).unwrap().pass);
        for _ in 0..5 {
            let k1 = random::random_cptp_kraus(2, 2, 2, &mut rng);
            let k2 = random::random_cptp_kraus(2, 2, 2, &mut rng);
            let (sim, _) =
                simulate(&m, &rho0, &[StepOp::Kraus(k1.clone()), StepOp::Kraus(k2.clone())])
                    .unwrap();
            let o1 = LabeledOperator::new(
                crate::process::choi_of_map(&k1, 2, 2).unwrap(),
                SpaceList::new(vec![SpaceLabel::output(1, 2), SpaceLabel::input(1, 2)]).unwrap(),
            )
            .unwrap();
            let o2 = LabeledOperator::new(
                crate::process::choi_of_map(&k2, 2, 2).unwrap(),
                SpaceList::new(vec![SpaceLabel::output(2, 2), SpaceLabel::input(2, 2)]).unwrap(),
            )
            .unwrap();
            let via = crate::process::apply_ops(pt.op(), &[o1, o2]).unwrap();
            assert!(via.mat.max_abs_diff(&sim) < 1e-9);
        }
    }
}
