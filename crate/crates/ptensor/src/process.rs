//! Process tensors as labeled Choi operators.
//!
//! A process tensor for an n-step process lives on the legs
//! n^i, n−1^o, n−1^i, …, 1^o, 1^i (latest first), is positive and carries
//! trace equal to the product of output-leg dimensions. Ancillary registers
//! the process feeds out at the final step count as state legs, not output
//! legs, for that normalization.
//!
//! The normative constructor is [`from_dilation`], the swap-in Choi
//! construction from an explicit system–environment model; every output of
//! it agrees with direct sequential simulation on all Born probabilities,
//! and the test suite pins that agreement.

use crate::error::{Error, Result, DIM_CAP};
use crate::linalg::entropy::PSD_TOL;
use crate::linalg::matrix::ops;
use crate::linalg::{check_psd, ComplexMatrix, LabeledOperator, Leg, SpaceLabel, SpaceList};
use num_complex::Complex64;

/// Future / memory / history split of a process's legs at leg granularity.
/// Memory must be temporally contiguous; future legs are strictly later and
/// history legs strictly earlier.
#[derive(Clone, Debug)]
pub struct Partition {
    pub future: Vec<SpaceLabel>,
    pub memory: Vec<SpaceLabel>,
    pub history: Vec<SpaceLabel>,
}

impl Partition {
    /// Split all legs of `spaces` around the given memory block.
    pub fn around_memory(spaces: &SpaceList, memory: &[SpaceLabel]) -> Result<Self> {
        for m in memory {
            spaces.index_of(m)?;
        }
        if !spaces.is_contiguous(memory) {
            return Err(Error::InvalidInstrument(
                "memory block is not temporally contiguous".into(),
            ));
        }
        let lo = memory
            .iter()
            .map(|l| l.temporal_key())
            .min()
            .ok_or_else(|| Error::InvalidInstrument("empty memory block".into()))?;
        let hi = memory.iter().map(|l| l.temporal_key()).max().unwrap();
        let mut future = Vec::new();
        let mut history = Vec::new();
        for l in spaces.labels() {
            if memory.iter().any(|m| m.key() == l.key()) {
                continue;
            }
            if l.temporal_key() > hi {
                future.push(l.clone());
            } else if l.temporal_key() < lo {
                history.push(l.clone());
            } else {
                return Err(Error::InvalidInstrument(format!(
                    "leg {l} interleaves the memory block"
                )));
            }
        }
        Ok(Self { future, memory: memory.to_vec(), history })
    }
}

/// A positive, causally ordered multi-time Choi operator with its legs.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessTensor {
    op: LabeledOperator,
}

impl ProcessTensor {
    /// Validating constructor: Hermitian, PSD and trace = Π dim(output legs)
    /// within tolerance. Leg order is canonicalized.
    pub fn new(op: LabeledOperator, tol: f64) -> Result<Self> {
        op.mat.check_finite()?;
        op.mat.check_hermitian(tol.max(1e-8) * op.mat.max_abs().max(1.0))?;
        check_psd(&op.mat, tol)?;
        let want = op.spaces.output_dim_product();
        let got = op.trace().re;
        if (got - want).abs() > 1e-8 * want.max(1.0) {
            return Err(Error::DimMismatch(format!(
                "process tensor trace {got} does not match output dimension product {want}"
            )));
        }
        Ok(Self { op: op.canonicalize()? })
    }

    /// Skip validation; for internal constructions that are checked by tests.
    pub fn new_unchecked(op: LabeledOperator) -> Result<Self> {
        Ok(Self { op: op.canonicalize()? })
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn spaces(&self) -> &SpaceList {
        &self.op.spaces
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.op.mat
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    pub fn steps(&self) -> u32 {
        self.op.spaces.max_timestep()
    }

    /// Trace-normalized copy of the underlying operator (for entropies).
    pub fn normalized(&self) -> LabeledOperator {
        self.op.scale_re(1.0 / self.trace())
    }
}

/// Choi operator of a CP map given by Kraus operators, in the convention
/// where the stored operator pairs directly with process tensors under
/// tr[(O ⊗ 1) Υ]: O = Σ_k |K̄_k⟩⟩⟨⟨K̄_k| with |A⟩⟩ = Σ_x A|x⟩ ⊗ |x⟩.
/// Leg order of the result is (output, input).
pub fn choi_of_map(kraus: &[ComplexMatrix], in_dim: usize, out_dim: usize) -> Result<ComplexMatrix> {
    if kraus.is_empty() {
        return Err(Error::DimMismatch("empty Kraus list".into()));
    }
    for k in kraus {
        if k.rows() != out_dim || k.cols() != in_dim {
            return Err(Error::DimMismatch(format!(
                "Kraus operator {}x{} does not map dim {} to dim {}",
                k.rows(),
                k.cols(),
                in_dim,
                out_dim
            )));
        }
    }
    let d = out_dim * in_dim;
    let mut choi = ComplexMatrix::zeros(d, d);
    for k in kraus {
        let kc = k.conj();
        // |K̄⟩⟩ with factor order (out, in)
        let mut v = ComplexMatrix::zeros(d, 1);
        for x in 0..in_dim {
            for o in 0..out_dim {
                v.set(o * in_dim + x, 0, kc.get(o, x));
            }
        }
        choi = choi.add(&ComplexMatrix::outer(&v, &v));
    }
    Ok(choi)
}

/// Partial trace of a stored Choi over its output leg; equals Σ K†K, so the
/// identity exactly when the map is trace preserving.
pub fn choi_effect(choi: &ComplexMatrix, in_dim: usize, out_dim: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(in_dim, in_dim);
    for x in 0..in_dim {
        for y in 0..in_dim {
            let mut s = Complex64::ZERO;
            for o in 0..out_dim {
                s += choi.get(o * in_dim + x, o * in_dim + y);
            }
            e.set(x, y, s);
        }
    }
    e
}

pub fn check_cptp_choi(choi: &ComplexMatrix, in_dim: usize, out_dim: usize, tol: f64) -> Result<()> {
    check_psd(choi, tol.max(PSD_TOL))?;
    let eff = choi_effect(choi, in_dim, out_dim);
    let dev = eff.max_abs_diff(&ComplexMatrix::identity(in_dim));
    if dev > tol {
        return Err(Error::NotTracePreserving(dev));
    }
    Ok(())
}

/// One elementary step inside a dilation interval. Targets name factors of
/// the dilation state ("S" is the system).
#[derive(Clone, Debug)]
pub enum DilationOp {
    Unitary { u: ComplexMatrix, targets: Vec<String> },
    /// Deterministic CP map as a Kraus list (branch evolutions may be
    /// trace decreasing; proper dilations should sum to a CPTP map).
    Kraus { ops: Vec<ComplexMatrix>, targets: Vec<String> },
    Attach { tag: String, state: ComplexMatrix },
    Discard { tag: String },
}

/// Explicit system–environment generative model: an initial joint state, a
/// list of per-interval operations and the environment factors the process
/// feeds out alongside the final system.
#[derive(Clone, Debug)]
pub struct Dilation {
    /// Joint state over the system factor (tag "S") and named environment
    /// factors; all legs carried as internal (timestep 0) ancillaries.
    pub initial: LabeledOperator,
    /// intervals[j] holds the uncontrollable dynamics between feed-out j+1
    /// and feed-out j+2.
    pub intervals: Vec<Vec<DilationOp>>,
    /// Environment factor tags handed to the experimenter at the last step.
    pub feed_out: Vec<String>,
}

pub const SYSTEM_TAG: &str = "S";

pub fn internal_label(dim: usize, tag: &str) -> SpaceLabel {
    SpaceLabel::ancillary(0, dim, tag)
}

impl Dilation {
    /// Joint state from a system state and named environment factors.
    pub fn product_initial(
        system: &ComplexMatrix,
        env: &[(&str, ComplexMatrix)],
    ) -> Result<LabeledOperator> {
        let mut mat = system.clone();
        let mut labels = vec![internal_label(system.rows(), SYSTEM_TAG)];
        for (tag, st) in env {
            mat = mat.kron(st)?;
            labels.push(internal_label(st.rows(), tag));
        }
        LabeledOperator::new(mat, SpaceList::new(labels)?)
    }

    pub fn sys_dim(&self) -> usize {
        self.initial
            .spaces
            .labels()
            .iter()
            .find(|l| l.tag.as_deref() == Some(SYSTEM_TAG))
            .map(|l| l.dim)
            .unwrap_or(0)
    }

    /// Structural and physical validation: initial state is a density
    /// matrix, every unitary is unitary within 1e-10, every Kraus list sums
    /// to a trace-preserving map within 1e-10.
    pub fn validate(&self) -> Result<()> {
        self.initial.mat.check_hermitian(1e-9)?;
        check_psd(&self.initial.mat, PSD_TOL)?;
        if (self.initial.trace().re - 1.0).abs() > 1e-8 {
            return Err(Error::NotDensity("initial dilation state is not unit trace".into()));
        }
        for interval in &self.intervals {
            for op in interval {
                match op {
                    DilationOp::Unitary { u, .. } => u.check_unitary(1e-10)?,
                    DilationOp::Kraus { ops, .. } => {
                        let d = ops[0].cols();
                        let mut s = ComplexMatrix::zeros(d, d);
                        for k in ops {
                            s = s.add(&k.dagger().matmul(k));
                        }
                        let dev = s.max_abs_diff(&ComplexMatrix::identity(d));
                        if dev > 1e-10 {
                            return Err(Error::NotTracePreserving(dev));
                        }
                    }
                    DilationOp::Attach { state, .. } => {
                        check_psd(state, PSD_TOL)?;
                    }
                    DilationOp::Discard { .. } => {}
                }
            }
        }
        Ok(())
    }
}

fn resolve_targets(state: &LabeledOperator, tags: &[String]) -> Result<Vec<SpaceLabel>> {
    tags.iter()
        .map(|t| {
            state
                .spaces
                .labels()
                .iter()
                .find(|l| l.timestep == 0 && l.tag.as_deref() == Some(t.as_str()))
                .cloned()
                .ok_or_else(|| Error::UnknownLabel(format!("dilation factor {t}")))
        })
        .collect()
}

fn apply_dilation_op(state: LabeledOperator, op: &DilationOp) -> Result<LabeledOperator> {
    match op {
        DilationOp::Unitary { u, targets } => {
            let t = resolve_targets(&state, targets)?;
            state.apply_unitary(u, &t)
        }
        DilationOp::Kraus { ops, targets } => {
            let t = resolve_targets(&state, targets)?;
            state.apply_kraus(ops, &t)
        }
        DilationOp::Attach { tag, state: fresh } => {
            let lbl = internal_label(fresh.rows(), tag);
            let attached = LabeledOperator::new(fresh.clone(), SpaceList::new(vec![lbl])?)?;
            state.tensor(&attached)
        }
        DilationOp::Discard { tag } => {
            let t = resolve_targets(&state, std::slice::from_ref(tag))?;
            state.partial_trace(&t)
        }
    }
}

/// Evolve a dilation state through one interval's operations.
pub fn run_interval(state: LabeledOperator, interval: &[DilationOp]) -> Result<LabeledOperator> {
    let mut s = state;
    for op in interval {
        s = apply_dilation_op(s, op)?;
    }
    Ok(s)
}

/// Build the process tensor of a dilation over `n` timesteps by the swap-in
/// construction: at each of the first n−1 steps, half of a fresh
/// unnormalized maximally entangled pair is swapped with the system (the
/// swapped-out half becomes the step's input leg, the partner its output
/// leg), then the interval dynamics runs. The final system state is the
/// n-th input leg; `feed_out` environment factors are relabeled as
/// ancillary legs at step n. Remaining environment factors are traced out.
pub fn from_dilation(d: &Dilation, n: u32) -> Result<ProcessTensor> {
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one timestep".into()));
    }
    if d.intervals.len() + 1 < n as usize {
        return Err(Error::InvalidParameter(format!(
            "dilation provides {} intervals, {} needed",
            d.intervals.len(),
            n - 1
        )));
    }
    let ds = d.sys_dim();
    if ds == 0 {
        return Err(Error::UnknownLabel("dilation has no system factor".into()));
    }
    let choi_dim = {
        let fed: usize = d
            .feed_out
            .iter()
            .map(|t| {
                d.initial
                    .spaces
                    .labels()
                    .iter()
                    .find(|l| l.tag.as_deref() == Some(t.as_str()))
                    .map(|l| l.dim)
                    .unwrap_or(1)
            })
            .product();
        ds.pow(2 * n - 1) * fed
    };
    if choi_dim > DIM_CAP {
        return Err(Error::DimOverflow { dim: choi_dim, cap: DIM_CAP });
    }

    let sys = internal_label(ds, SYSTEM_TAG);
    let swap = ops::swap(ds);
    let mut state = d.initial.clone();
    for j in 1..n {
        let a = SpaceLabel::input(j, ds);
        let b = SpaceLabel::output(j, ds);
        let pair = LabeledOperator::new(
            ops::unnormalized_max_entangled(ds),
            SpaceList::new(vec![a.clone(), b])?,
        )?;
        state = state.tensor(&pair)?;
        state = state.apply_unitary(&swap, &[sys.clone(), a])?;
        state = run_interval(state, &d.intervals[(j - 1) as usize])?;
    }
    // final system leg
    state = state.relabel(&sys, SpaceLabel::input(n, ds))?;
    // fed-out ancillary registers
    for tag in &d.feed_out {
        let lbl = resolve_targets(&state, std::slice::from_ref(tag))?;
        state = state.relabel(&lbl[0], SpaceLabel::ancillary(n, lbl[0].dim, tag))?;
    }
    // remaining environment is inaccessible
    let env: Vec<SpaceLabel> = state
        .spaces
        .labels()
        .iter()
        .filter(|l| l.timestep == 0)
        .cloned()
        .collect();
    if !env.is_empty() {
        state = state.partial_trace(&env)?;
    }
    ProcessTensor::new_unchecked(state)
}

/// Direct sequential simulation of a dilation interleaved with probing
/// operations given as Kraus lists on the system. Returns the (possibly
/// subnormalized) joint state of the final system and fed-out registers.
/// This is the independent oracle the Choi construction is checked against.
pub fn simulate_dilation(
    d: &Dilation,
    n: u32,
    step_ops: &[Vec<ComplexMatrix>],
) -> Result<LabeledOperator> {
    if step_ops.len() != (n - 1) as usize {
        return Err(Error::InvalidParameter(format!(
            "{} probing operations supplied, {} needed",
            step_ops.len(),
            n - 1
        )));
    }
    let ds = d.sys_dim();
    let sys = internal_label(ds, SYSTEM_TAG);
    let mut state = d.initial.clone();
    for j in 1..n {
        state = state.apply_kraus(&step_ops[(j - 1) as usize], &[sys.clone()])?;
        state = run_interval(state, &d.intervals[(j - 1) as usize])?;
    }
    let keep: Vec<SpaceLabel> = state
        .spaces
        .labels()
        .iter()
        .filter(|l| {
            l.tag.as_deref() == Some(SYSTEM_TAG)
                || d.feed_out.iter().any(|t| l.tag.as_deref() == Some(t.as_str()))
        })
        .cloned()
        .collect();
    let remove: Vec<SpaceLabel> = state
        .spaces
        .labels()
        .iter()
        .filter(|l| !keep.iter().any(|k| k.key() == l.key()))
        .cloned()
        .collect();
    state.partial_trace(&remove)
}

/// Per-level result of the causality trace hierarchy.
#[derive(Clone, Debug)]
pub struct CausalityLevel {
    pub level: u32,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CausalityReport {
    pub levels: Vec<CausalityLevel>,
    pub trace_residual: f64,
    pub pass: bool,
}

impl CausalityReport {
    pub fn max_residual(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.residual)
            .fold(self.trace_residual, f64::max)
    }
}

/// Verify the hierarchy tr_{j^i}[Υ_{j:1}] = 1_{j−1^o} ⊗ Υ_{j−1:1} for all
/// 1 < j ≤ n, descending. Ancillary legs at a step are traced with the
/// input leg. Residuals are relative Frobenius norms.
pub fn check_causality(pt: &ProcessTensor, tol: f64) -> Result<CausalityReport> {
    let mut cur = pt.op().clone();
    let n = pt.steps();
    let mut levels = Vec::new();
    for j in (2..=n).rev() {
        let mut traced: Vec<SpaceLabel> = cur.spaces.at(j, Leg::Input);
        traced.extend(cur.spaces.at(j, Leg::Ancillary));
        if !traced.is_empty() {
            cur = cur.partial_trace(&traced)?;
        }
        let outs = cur.spaces.at(j - 1, Leg::Output);
        if outs.is_empty() {
            continue;
        }
        let d_out: usize = outs.iter().map(|l| l.dim).product();
        let rest = cur.partial_trace(&outs)?.scale_re(1.0 / d_out as f64);
        let ident = LabeledOperator::new(
            ComplexMatrix::identity(d_out),
            SpaceList::new(outs.clone())?,
        )?;
        let recon = ident.tensor(&rest)?;
        let denom = cur.mat.frobenius_norm().max(1e-12);
        let residual = recon.permute(cur.spaces.labels())?.mat.frobenius_dist(&cur.mat) / denom;
        levels.push(CausalityLevel { level: j, residual, pass: residual <= tol });
        cur = rest;
    }
    let trace_residual = (cur.trace().re - 1.0).abs();
    let pass = levels.iter().all(|l| l.pass) && trace_residual <= tol.max(1e-8);
    Ok(CausalityReport { levels, trace_residual, pass })
}

/// Contract operation Choi states against a process tensor:
/// tr_targets[(O₁ ⊗ O₂ ⊗ … ⊗ 1_rest) Υ]. Target legs must be disjoint.
/// The consumed legs disappear from the result.
pub fn apply_ops(pt: &LabeledOperator, opers: &[LabeledOperator]) -> Result<LabeledOperator> {
    let mut seen: Vec<SpaceLabel> = Vec::new();
    for o in opers {
        for l in o.spaces.labels() {
            if seen.iter().any(|s| s.key() == l.key()) {
                return Err(Error::InvalidInstrument(format!(
                    "operation legs overlap on {l}"
                )));
            }
            seen.push(l.clone());
        }
    }
    let mut cur = pt.clone();
    for o in opers {
        cur = cur.contract(&o.mat, o.spaces.labels())?;
    }
    Ok(cur)
}

/// Born probability: apply operations consuming every leg and return the
/// remaining scalar.
pub fn born_probability(pt: &ProcessTensor, opers: &[LabeledOperator]) -> Result<f64> {
    let out = apply_ops(pt.op(), opers)?;
    if out.dim() != 1 {
        return Err(Error::InvalidInstrument(
            "operation sequence does not consume all legs".into(),
        ));
    }
    Ok(out.mat.get(0, 0).re)
}

/// Markovian process tensor Υ = Λ_{n,n−1} ⊗ … ⊗ Λ_{2,1} ⊗ ρ₁ from a list of
/// CPTP step maps given as stored Choi operators with legs (output, input);
/// maps[j] sends step j+1's output leg to step j+2's input leg.
pub fn markovian_product(
    maps: &[ComplexMatrix],
    step_dims: &[(usize, usize)],
    rho1: &ComplexMatrix,
) -> Result<ProcessTensor> {
    if maps.len() != step_dims.len() {
        return Err(Error::DimMismatch("one (in, out) dim pair per map".into()));
    }
    check_psd(rho1, PSD_TOL)?;
    if (rho1.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::NotDensity("initial state trace".into()));
    }
    let mut acc = LabeledOperator::new(
        rho1.clone(),
        SpaceList::new(vec![SpaceLabel::input(1, rho1.rows())])?,
    )?;
    for (j, (choi, &(din, dout))) in maps.iter().zip(step_dims).enumerate() {
        check_cptp_choi(choi, din, dout, 1e-8)
            .map_err(|_| Error::InvalidInstrument(format!("step map {j} is not CPTP")))?;
        let step = j as u32 + 1;
        // process-side factor is the un-transposed Choi on (k+1^i, k^o)
        let factor = LabeledOperator::new(
            choi.transpose(),
            SpaceList::new(vec![
                SpaceLabel::input(step + 1, dout),
                SpaceLabel::output(step, din),
            ])?,
        )?;
        acc = factor.tensor(&acc)?;
    }
    ProcessTensor::new_unchecked(acc)
}

/// Unitary dilation of a CPTP Kraus list: returns (U, env_dim) with
/// U acting on system ⊗ env such that tr_env[U (ρ ⊗ |0⟩⟨0|) U†] = Σ KρK†.
pub fn stinespring_unitary(kraus: &[ComplexMatrix]) -> Result<(ComplexMatrix, usize)> {
    let dout = kraus[0].rows();
    let din = kraus[0].cols();
    if dout != din {
        return Err(Error::DimMismatch(
            "stinespring helper expects square Kraus operators".into(),
        ));
    }
    let m = kraus.len();
    let d = din * m;
    let mut u = ComplexMatrix::zeros(d, d);
    // columns for inputs |i⟩ ⊗ |0⟩
    for i in 0..din {
        for (k, kr) in kraus.iter().enumerate() {
            for o in 0..dout {
                u.set(o * m + k, i * m, kr.get(o, i));
            }
        }
    }
    // complete remaining columns by Gram-Schmidt over the standard basis
    let mut filled: Vec<usize> = (0..din).map(|i| i * m).collect();
    let mut next_basis = 0usize;
    for col in 0..d {
        if filled.contains(&col) {
            continue;
        }
        loop {
            if next_basis >= d {
                return Err(Error::DimMismatch("stinespring completion failed".into()));
            }
            let mut v = ComplexMatrix::basis_ket(d, next_basis);
            next_basis += 1;
            for &fc in &filled {
                let mut ip = Complex64::ZERO;
                for r in 0..d {
                    ip += u.get(r, fc).conj() * v.get(r, 0);
                }
                for r in 0..d {
                    let nv = v.get(r, 0) - ip * u.get(r, fc);
                    v.set(r, 0, nv);
                }
            }
            let n = v.frobenius_norm();
            if n > 1e-7 {
                for r in 0..d {
                    u.set(r, col, v.get(r, 0) / n);
                }
                filled.push(col);
                break;
            }
        }
    }
    u.check_unitary(1e-9)?;
    Ok((u, m))
}
