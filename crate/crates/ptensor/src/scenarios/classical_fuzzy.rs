//! Classical Markov order under fuzzy measurement: a three-state chain that
//! is Markovian when observed sharply looks non-Markovian once two outcomes
//! merge (with the conditional on a run of merged outcomes alternating
//! between 0 and p), and a three-bit parity table that is correlated through
//! the middle bit sharply but uncorrelated on average. Both tables are also
//! embedded as diagonal process tensors and cross-checked against the
//! quantum-side machinery.

use super::ScenarioReport;
use crate::cmi::classical::{
    classical_cmi, classical_markov_order, classical_process_tensor, sharp_statistics,
    ClassicalProcess,
};
use crate::cmi::qcmi;
use crate::error::{Error, Result};
use crate::linalg::entropy::PSD_TOL;
use crate::linalg::SpaceLabel;
use crate::process::{check_causality, Partition};

/// Three-state chain a → b → c → {a with prob p, b with prob 1−p}.
fn cyclic_chain(p: f64, n: usize) -> Result<ClassicalProcess> {
    let transition = vec![
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![p, 1.0 - p, 0.0],
    ];
    ClassicalProcess::from_markov_chain(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], &transition, n)
}

/// Three-bit table: middle bit 0 means the outer bits agree, 1 means they
/// disagree, all four consistent patterns equally likely.
fn parity_table() -> Result<ClassicalProcess> {
    let mut probs = vec![0.0; 8];
    for (x3, x2, x1) in [(0usize, 0usize, 0usize), (1, 0, 1), (0, 1, 1), (1, 1, 0)] {
        probs[x1 + 2 * x2 + 4 * x3] = 0.25;
    }
    ClassicalProcess::new(vec![2, 2, 2], probs)
}

pub fn run_classical_fuzzy(p: f64) -> Result<ScenarioReport> {
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidParameter("p must lie in (0, 1)".into()));
    }
    let mut report = ScenarioReport::new("classical_fuzzy", 0);
    report.param("p", p);

    // sharp chain is Markov order 1
    let chain = cyclic_chain(p, 4)?;
    report.check_bool("chain_sharp_markov_order_1", classical_markov_order(&chain, 1));

    // merge b and c into d: conditionals on a run of d's alternate 0 / p
    let fuzzy4 = chain
        .coarse_grain(1, &[0, 1, 1], 2)?
        .coarse_grain(2, &[0, 1, 1], 2)?
        .coarse_grain(3, &[0, 1, 1], 2)?
        .coarse_grain(4, &[0, 1, 1], 2)?;
    let c_j1 = fuzzy4
        .conditional(4, 0, &[(3, 1), (2, 0)])
        .ok_or_else(|| Error::InvalidTable("conditioning event has no weight".into()))?;
    report.check_eq("fuzzy_conditional_one_merged_step", 0.0, c_j1, 1e-12);
    let c_j2 = fuzzy4
        .conditional(4, 0, &[(3, 1), (2, 1), (1, 0)])
        .ok_or_else(|| Error::InvalidTable("conditioning event has no weight".into()))?;
    report.check_eq("fuzzy_conditional_two_merged_steps", p, c_j2, 1e-12);
    report.check_bool("fuzzy_chain_not_markovian", !classical_markov_order(&fuzzy4, 1));

    // three-bit table: sharp middle measurement shows one bit of
    // conditional correlation, the merged measurement none
    let bits = parity_table()?;
    let sharp_cmi = classical_cmi(&bits, &[3], &[2], &[1]);
    report.check_eq("parity_sharp_cmi_bits", 1.0, sharp_cmi, 1e-12);
    let merged = bits.coarse_grain(2, &[0, 0], 1)?;
    let coarse_mi = classical_cmi(&merged, &[3], &[2], &[1]);
    report.check_eq("parity_coarse_mi_bits", 0.0, coarse_mi, 1e-12);
    report.check_bool("parity_not_markovian_sharp", !classical_markov_order(&bits, 1));

    // diagonal embeddings reproduce the tables and their information
    // quantities on the quantum side
    let chain3 = cyclic_chain(p, 3)?;
    let pt_chain = classical_process_tensor(&chain3)?;
    report.check_bool("chain_embedding_causal", check_causality(&pt_chain, 1e-10)?.pass);
    let mut stat_err: f64 = 0.0;
    for idx in 0..27usize {
        let outcome = vec![idx % 3, (idx / 3) % 3, idx / 9];
        let got = sharp_statistics(&pt_chain, &chain3, &outcome)?;
        stat_err = stat_err.max((got - chain3.prob(&outcome)).abs());
    }
    report.check_eq("chain_embedding_statistics_residual", 0.0, stat_err, 1e-12);
    let mem_chain: Vec<SpaceLabel> = pt_chain
        .spaces()
        .labels()
        .iter()
        .filter(|l| l.timestep == 2)
        .cloned()
        .collect();
    let part_chain = Partition::around_memory(pt_chain.spaces(), &mem_chain)?;
    let q_chain = qcmi(pt_chain.op(), &part_chain, PSD_TOL)?;
    let c_chain = classical_cmi(&chain3, &[3], &[2], &[1]);
    report.check_eq("chain_embedding_qcmi_vs_classical", c_chain, q_chain, 1e-9);
    report.check_eq("chain_classical_cmi_bits", 0.0, c_chain, 1e-12);

    let pt_bits = classical_process_tensor(&bits)?;
    report.check_bool("parity_embedding_causal", check_causality(&pt_bits, 1e-10)?.pass);
    let mem_bits: Vec<SpaceLabel> = pt_bits
        .spaces()
        .labels()
        .iter()
        .filter(|l| l.timestep == 2)
        .cloned()
        .collect();
    let part_bits = Partition::around_memory(pt_bits.spaces(), &mem_bits)?;
    let q_bits = qcmi(pt_bits.op(), &part_bits, PSD_TOL)?;
    report.check_eq("parity_embedding_qcmi_bits", 1.0, q_bits, 1e-9);

    let mut stat_err_bits: f64 = 0.0;
    for idx in 0..8usize {
        let outcome = vec![idx & 1, (idx >> 1) & 1, (idx >> 2) & 1];
        let got = sharp_statistics(&pt_bits, &bits, &outcome)?;
        stat_err_bits = stat_err_bits.max((got - bits.prob(&outcome)).abs());
    }
    report.check_eq("parity_embedding_statistics_residual", 0.0, stat_err_bits, 1e-12);

    // perturbed coin: order-1 factorization passes and embeds faithfully
    let coin = ClassicalProcess::from_markov_chain(
        &[0.5, 0.5],
        &[vec![p.max(1.0 - p), p.min(1.0 - p)], vec![p.min(1.0 - p), p.max(1.0 - p)]],
        3,
    )?;
    report.check_bool("coin_markov_order_1", classical_markov_order(&coin, 1));
    let pt_coin = classical_process_tensor(&coin)?;
    let mut coin_err: f64 = 0.0;
    for idx in 0..8usize {
        let outcome = vec![idx & 1, (idx >> 1) & 1, (idx >> 2) & 1];
        let got = sharp_statistics(&pt_coin, &coin, &outcome)?;
        coin_err = coin_err.max((got - coin.prob(&outcome)).abs());
    }
    report.check_eq("coin_embedding_statistics_residual", 0.0, coin_err, 1e-12);
    Ok(report)
}
