//! Controlled-Pauli superposition process: a four-level register coherently
//! controls which Pauli map is applied between every pair of timesteps and
//! is handed out with the final state. The Bell-pair instrument blocks the
//! history with product splits weighted by the amplitude moduli squared,
//! while the quantum conditional mutual information equals the Shannon
//! entropy of those weights. Discarding the register instead produces the
//! block-diagonal vanishing-QCMI mixture.

use super::ScenarioReport;
use crate::cmi::{self, qcmi, Block, BlockDecomposition};
use crate::error::{Error, Result};
use crate::instruments::{self, InstrumentSequence};
use crate::linalg::entropy::{shannon_entropy, PSD_TOL};
use crate::linalg::matrix::ops;
use crate::linalg::{ComplexMatrix, LabeledOperator, SpaceLabel, SpaceList};
use crate::markov;
use crate::process::{
    check_causality, from_dilation, Dilation, DilationOp, Partition,
    ProcessTensor,
};
use num_complex::Complex64;

fn pauli(b: usize) -> ComplexMatrix {
    match b {
        0 => ComplexMatrix::identity(2),
        1 => ops::pauli_x(),
        2 => {
            // antisymmetric Bell link; Kraus σ_x σ_z (the phase of σ_y is
            // irrelevant for the process)
            ops::pauli_x().matmul(&ops::pauli_z())
        }
        3 => ops::pauli_z(),
        _ => unreachable!(),
    }
}

/// Unnormalized chain-link vector (V_b ⊗ 1) Σ_x |xx⟩ for the b-th Pauli;
/// the explicit map phases keep the direct and dilation routes bit-compatible.
fn pauli_link(b: usize) -> ComplexMatrix {
    let v = pauli(b);
    let mut link = ComplexMatrix::zeros(4, 1);
    for r in 0..2 {
        for x in 0..2 {
            link.set(r * 2 + x, 0, v.get(r, x));
        }
    }
    link
}

/// Pure process vector on legs (A, n^i, n−1^o, n−1^i, …, 2^i, 1^o): the
/// register state |b⟩ tensored with a chain of unnormalized Bell links for
/// the b-th Pauli, summed with amplitudes c_b.
pub fn build_pauli_process(amps: &[f64; 4], n: u32) -> Result<ProcessTensor> {
    let mut vec: Option<ComplexMatrix> = None;
    for (b, &c) in amps.iter().enumerate() {
        let mut v = ComplexMatrix::basis_ket(4, b);
        for _ in 2..=n {
            v = v.kron(&pauli_link(b))?;
        }
        let v = v.scale_re(c);
        vec = Some(match vec {
            None => v,
            Some(acc) => acc.add(&v),
        });
    }
    let v = vec.unwrap();
    let mut labels = vec![SpaceLabel::ancillary(n, 4, "A")];
    for j in (2..=n).rev() {
        labels.push(SpaceLabel::input(j, 2));
        labels.push(SpaceLabel::output(j - 1, 2));
    }
    let op = LabeledOperator::new(ComplexMatrix::outer(&v, &v), SpaceList::new(labels)?)?;
    ProcessTensor::new_unchecked(op)
}

/// Dilation route: register in superposition controls which Pauli acts on
/// the system at every interval; the register is fed out at the end. The
/// framework adds an (uncorrelated) initial system leg, traced off for the
/// comparison.
fn build_via_dilation(amps: &[f64; 4], n: u32) -> Result<ProcessTensor> {
    let mut tau = ComplexMatrix::zeros(4, 1);
    for (b, &c) in amps.iter().enumerate() {
        tau.set(b, 0, Complex64::new(c, 0.0));
    }
    let tau = ComplexMatrix::outer(&tau, &tau);
    let rho0 = ComplexMatrix::basis_projector(2, 0);
    // controlled Pauli on (A, S)
    let mut ctrl = ComplexMatrix::zeros(8, 8);
    for b in 0..4 {
        let p = pauli(b);
        for r in 0..2 {
            for c in 0..2 {
                ctrl.set(b * 2 + r, b * 2 + c, p.get(r, c));
            }
        }
    }
    let initial = Dilation::product_initial(&rho0, &[("A", tau)])?;
    let intervals = (1..n)
        .map(|_| {
            vec![DilationOp::Unitary { u: ctrl.clone(), targets: vec!["A".into(), "S".into()] }]
        })
        .collect();
    let dil = Dilation { initial, intervals, feed_out: vec!["A".into()] };
    from_dilation(&dil, n)
}

/// Discarded-register mixture as a block decomposition over the memory
/// block (k^i, k−1^o): one one-dimensional block per Bell direction.
fn discarded_blocks(amps: &[f64; 4], n: u32) -> Result<BlockDecomposition> {
    assert!(n >= 4);
    let future = SpaceList::new(vec![SpaceLabel::input(n, 2), SpaceLabel::output(n - 1, 2)])?;
    let memory = SpaceList::new(vec![
        SpaceLabel::input(n - 1, 2),
        SpaceLabel::output(n - 2, 2),
    ])?;
    let mut hist_labels = Vec::new();
    for j in (2..=(n - 2)).rev() {
        hist_labels.push(SpaceLabel::input(j, 2));
        hist_labels.push(SpaceLabel::output(j - 1, 2));
    }
    let history = SpaceList::new(hist_labels)?;
    let d_h = history.total_dim();
    let mut blocks = Vec::new();
    for (b, &c) in amps.iter().enumerate() {
        let bell = pauli_link(b);
        let proj = ComplexMatrix::outer(&bell, &bell);
        // history chain for branch b
        let mut hist_op = ComplexMatrix::identity(1);
        for _ in 0..(history.len() / 2) {
            hist_op = hist_op.kron(&proj)?;
        }
        debug_assert_eq!(hist_op.rows(), d_h);
        blocks.push(Block {
            probability: c * c,
            // future factor scaled by the memory block's in-block trace
            left: proj.scale_re(2.0),
            dim_left: 1,
            right: hist_op,
            dim_right: 1,
            isometry: bell.scale_re(0.5_f64.sqrt()),
        });
    }
    Ok(BlockDecomposition { future, memory, history, blocks })
}

pub fn run_pauli_superposition(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    n: u32,
) -> Result<ScenarioReport> {
    let amps = [alpha, beta, gamma, delta];
    let norm: f64 = amps.iter().map(|c| c * c).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "amplitudes must be normalized, got Σ|c|² = {norm}"
        )));
    }
    if !(3..=4).contains(&n) {
        return Err(Error::InvalidParameter("need 3 or 4 timesteps".into()));
    }
    let mut report = ScenarioReport::new("pauli_superposition", 0);
    report.param("alpha", alpha);
    report.param("beta", beta);
    report.param("gamma", gamma);
    report.param("delta", delta);
    report.param("n", n as f64);
    let weights: Vec<f64> = amps.iter().map(|c| c * c).collect();

    let pt = build_pauli_process(&amps, n)?;
    report.check_eq(
        "trace_is_output_dim_product",
        2f64.powi((n - 1) as i32),
        pt.trace(),
        1e-10,
    );
    let causality = check_causality(&pt, 1e-8)?;
    report.check_bool("choi_causality", causality.pass);

    // dilation route with a dummy initial system state appended at step 1
    let pt_dil = build_via_dilation(&amps, n)?;
    let reduced = pt_dil.op().partial_trace(&[SpaceLabel::input(1, 2)])?;
    let dist = reduced.permute(pt.spaces().labels())?.mat.frobenius_dist(pt.mat());
    report.check_eq("dilation_route_distance", 0.0, dist, 1e-9);

    // memory block: final system leg and the preparation feeding it
    let memory = vec![SpaceLabel::input(n, 2), SpaceLabel::output(n - 1, 2)];
    let part = Partition::around_memory(pt.spaces(), &memory)?;

    let q = qcmi(pt.op(), &part, PSD_TOL)?;
    report.check_eq("qcmi_bits", shannon_entropy(&weights), q, 1e-9);

    // Bell instrument: four product splits with the amplitude weights
    let seq = instruments::bell_instrument(n)?;
    let rep = markov::has_markov_order(&pt, &seq, &part, 1e-8, 1e-9)?;
    report.check_bool("bell_splits_product", rep.verdict);
    report.check_eq("bell_splits_max_mi_bits", 0.0, rep.max_mi(), 1e-8);
    let mut weight_err: f64 = 0.0;
    for (s, w) in rep.splits.iter().zip(&weights) {
        weight_err = weight_err.max((s.weight - w).abs());
    }
    report.check_eq("bell_split_weights_residual", 0.0, weight_err, 1e-9);

    // exact split form: outcome b leaves |c_b|² |b⟩⟨b| ⊗ (Bell chain)
    let splits = markov::condition(&pt, &seq, &part)?;
    let mut form_err: f64 = 0.0;
    for (b, s) in splits.iter().enumerate() {
        let link = pauli_link(b);
        let proj = ComplexMatrix::outer(&link, &link);
        let mut expected = ComplexMatrix::basis_projector(4, b).scale_re(weights[b]);
        for _ in 0..((part.history.len()) / 2) {
            expected = expected.kron(&proj)?;
        }
        let mut order = part.future.clone();
        order.extend(part.history.clone());
        let aligned = s.joint.permute(&order)?;
        form_err = form_err.max(aligned.mat.max_abs_diff(&expected));
    }
    report.check_eq("bell_splits_exact_form_residual", 0.0, form_err, 1e-9);

    // incoherent probing (maximally mixed feed, averaged measurement)
    // leaves the classically correlated mixture behind
    let incoherent = InstrumentSequence::new(
        vec![LabeledOperator::new(
            ComplexMatrix::identity(4).scale_re(0.5),
            SpaceList::new(memory.clone())?,
        )?],
        vec!["averaged".into()],
    )?;
    let rep_inc = markov::has_markov_order(&pt, &incoherent, &part, 1e-8, 1e-9)?;
    report.check_eq(
        "incoherent_mixture_mi_bits",
        shannon_entropy(&weights),
        rep_inc.max_mi(),
        1e-9,
    );
    let coherent_branches = weights.iter().filter(|w| **w > 1e-12).count();
    if coherent_branches > 1 {
        report.check_bool("incoherent_mixture_correlated", !rep_inc.verdict);
    }

    // the process is not Markovian unless a single branch survives
    let (markovian, mdist) = markov::is_markovian(&pt, 1e-7)?;
    if coherent_branches > 1 {
        report.check_bool("not_markovian", !markovian);
    } else {
        report.check_bool("single_branch_markovian", markovian);
    }
    report.note("markovian_distance", serde_json::json!(mdist));

    // discarding the register produces a vanishing-QCMI block mixture
    let n_disc = n.max(4);
    let bd = discarded_blocks(&amps, n_disc)?;
    let pt_disc = cmi::build_vanishing_qcmi(&bd, 1e-8)?;
    // direct mixture for comparison
    let direct = {
        let mut acc: Option<LabeledOperator> = None;
        for (b, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let bell = pauli_link(b);
            let proj = ComplexMatrix::outer(&bell, &bell);
            let mut mat = ComplexMatrix::identity(1);
            for _ in 2..=n_disc {
                mat = mat.kron(&proj)?;
            }
            let mut labels = Vec::new();
            for j in (2..=n_disc).rev() {
                labels.push(SpaceLabel::input(j, 2));
                labels.push(SpaceLabel::output(j - 1, 2));
            }
            let term =
                LabeledOperator::new(mat.scale_re(*w), SpaceList::new(labels)?)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        acc.unwrap()
    };
    let disc_dist = pt_disc.op().distance(&direct)?;
    report.check_eq("discarded_mixture_residual", 0.0, disc_dist, 1e-12);
    let part_disc = Partition::around_memory(pt_disc.spaces(), bd.memory.labels())?;
    let q_disc = qcmi(pt_disc.op(), &part_disc, PSD_TOL)?;
    report.check_eq("discarded_qcmi_bits", 0.0, q_disc, 1e-8);
    let proj_seq = cmi::projector_blocking_instrument(&bd)?;
    let rep_disc =
        markov::has_markov_order(&pt_disc, &proj_seq, &part_disc, 1e-8, 1e-7)?;
    report.check_bool("discarded_blocked_by_projectors", rep_disc.verdict);
    Ok(report)
}
