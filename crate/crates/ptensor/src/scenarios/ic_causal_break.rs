//! History-blocking with an informationally complete causal-break sequence.
//!
//! A tripartite state couples a hidden register Y to dual operators on the
//! step-2 measurement leg and to step-1 output states; a final CPTP map
//! expands its three inputs on dual frames and emits one of 64 distinct
//! target states. Every causal-break outcome then leaves the future in a
//! product with the history, while the process itself carries nonzero
//! quantum conditional mutual information (the converse of the
//! vanishing-QCMI sufficiency fails).
//!
//! The free mixedness parameters are found by bisection; the paper-level
//! claim is that all positivity constraints can be met simultaneously.

use super::ScenarioReport;
use crate::cmi::qcmi;
use crate::error::{Error, Result};
use crate::instruments::{self, LegFamily};
use crate::linalg::entropy::PSD_TOL;
use crate::linalg::random::{self, SeededRng};
use crate::linalg::{
    dual_set, herm_eig, min_eigenvalue, sic, ComplexMatrix, LabeledOperator, SpaceLabel,
    SpaceList,
};
use crate::markov::{self, condition};
use crate::process::{
    apply_ops, check_causality, from_dilation, internal_label, Dilation, DilationOp, Partition,
    ProcessTensor,
};
use rand::{Rng, SeedableRng};

/// Bloch radius of the hidden-register states; must stay below 1/3 for the
/// tripartite state to admit any positive completion.
const Y_RADIUS: f64 = 0.3;

struct Construction {
    prob_y: [f64; 4],
    rho_y: Vec<ComplexMatrix>,
    rho_1: Vec<ComplexMatrix>,
    /// 64 future targets indexed by (x + 4y + 16z).
    rho_3: Vec<ComplexMatrix>,
    sigma_1: Vec<ComplexMatrix>,
    sigma_2: Vec<ComplexMatrix>,
    povm_2: Vec<ComplexMatrix>,
    duals_povm_2: Vec<ComplexMatrix>,
    duals_sigma_1: Vec<ComplexMatrix>,
    duals_sigma_2: Vec<ComplexMatrix>,
    duals_y: Vec<ComplexMatrix>,
    eps_history: f64,
    eps_future: f64,
}

fn random_bloch_states(rng: &mut SeededRng, count: usize, radius: f64) -> Vec<ComplexMatrix> {
    (0..count)
        .map(|_| {
            let mut v = [0.0f64; 3];
            loop {
                for x in v.iter_mut() {
                    *x = rng.random::<f64>() * 2.0 - 1.0;
                }
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n > 1e-3 && n <= 1.0 {
                    for x in v.iter_mut() {
                        *x /= n;
                    }
                    break;
                }
            }
            sic::bloch_state(&v, radius)
        })
        .collect()
}

/// Largest scale in (0, 1] for which `builder(scale)` stays PSD with margin,
/// found by bisection; the construction then runs at half that scale.
fn bisect_psd(builder: impl Fn(f64) -> ComplexMatrix) -> Result<f64> {
    let psd_at = |s: f64| -> Result<bool> {
        let m = builder(s);
        Ok(min_eigenvalue(&m, 1e-8 * m.max_abs().max(1.0))? >= 1e-10)
    };
    if !psd_at(0.0)? {
        return Err(Error::NotPsd { min_eig: -1.0, tol: PSD_TOL });
    }
    if psd_at(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if psd_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

impl Construction {
    fn build(seed: u64) -> Result<Self> {
        let mut rng = SeededRng::seed_from_u64(seed);
        let sigma_1 = sic::sic_states();
        let sigma_2 = sic::sic_states();
        let povm_2 = sic::sic_povm();
        let rho_y = sic::mixed_sic_states(Y_RADIUS);
        let duals_povm_2 = dual_set(&povm_2, 1e-10)?.duals;
        let duals_sigma_1 = dual_set(&sigma_1, 1e-10)?.duals;
        let duals_sigma_2 = dual_set(&sigma_2, 1e-10)?.duals;
        let duals_y = dual_set(&rho_y, 1e-10)?.duals;
        let prob_y = [0.25; 4];

        // history side: ρ_{Y 2^i 1^i} must be positive; bisect the step-1
        // state mixedness
        let dirs_1 = random_bloch_states(&mut rng, 4, 1.0);
        let history_state = |eps: f64| -> ComplexMatrix {
            let mut acc = ComplexMatrix::zeros(8, 8);
            for y in 0..4 {
                let rho1 = ComplexMatrix::identity(2)
                    .scale_re(0.5)
                    .scale_re(1.0 - eps)
                    .add(&dirs_1[y].scale_re(eps));
                let term = rho_y[y]
                    .kron(&duals_povm_2[y])
                    .unwrap()
                    .kron(&rho1)
                    .unwrap()
                    .scale_re(prob_y[y]);
                acc = acc.add(&term);
            }
            acc.hermitize()
        };
        let eps_history = 0.9 * bisect_psd(history_state)?;
        let rho_1: Vec<ComplexMatrix> = dirs_1
            .iter()
            .map(|d| {
                ComplexMatrix::identity(2)
                    .scale_re(0.5)
                    .scale_re(1.0 - eps_history)
                    .add(&d.scale_re(eps_history))
            })
            .collect();

        // future side: the expansion map must be completely positive. The
        // 64 target states share a strong per-y tetrahedron component
        // (summing the x and z dual frames keeps that perturbation tame, so
        // positivity admits a sizable amplitude) plus a small seeded jitter
        // that keeps all targets distinct.
        let tetra = sic::sic_states();
        let jitter = random_bloch_states(&mut rng, 64, 1.0);
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        let dir_3 = move |idx: usize, y: usize, eps: f64| -> ComplexMatrix {
            let main = tetra[y].sub(&half).scale_re(0.9 * eps);
            let jit = jitter[idx].sub(&half).scale_re(0.1 * eps);
            half.add(&main).add(&jit)
        };
        let future_choi = |eps: f64| -> ComplexMatrix {
            let mut acc = ComplexMatrix::zeros(16, 16);
            for z in 0..4 {
                for y in 0..4 {
                    for x in 0..4 {
                        let idx = x + 4 * y + 16 * z;
                        let rho3 = dir_3(idx, y, eps);
                        let din = duals_y[y]
                            .kron(&duals_sigma_2[z])
                            .unwrap()
                            .kron(&duals_sigma_1[x])
                            .unwrap()
                            .conj();
                        acc = acc.add(&rho3.kron(&din).unwrap());
                    }
                }
            }
            acc.hermitize()
        };
        let eps_future = 0.9 * bisect_psd(future_choi)?;
        let rho_3: Vec<ComplexMatrix> = (0..64)
            .map(|idx| {
                let y = (idx / 4) % 4;
                dir_3(idx, y, eps_future)
            })
            .collect();
        Ok(Self {
            prob_y,
            rho_y,
            rho_1,
            rho_3,
            sigma_1,
            sigma_2,
            povm_2,
            duals_povm_2,
            duals_sigma_1,
            duals_sigma_2,
            duals_y,
            eps_history,
            eps_future,
        })
    }

    fn history_state_matrix(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(8, 8);
        for y in 0..4 {
            let term = self.rho_y[y]
                .kron(&self.duals_povm_2[y])
                .unwrap()
                .kron(&self.rho_1[y])
                .unwrap()
                .scale_re(self.prob_y[y]);
            acc = acc.add(&term);
        }
        acc.hermitize()
    }

    fn future_choi_matrix(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(16, 16);
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    let idx = x + 4 * y + 16 * z;
                    let din = self.duals_y[y]
                        .kron(&self.duals_sigma_2[z])
                        .unwrap()
                        .kron(&self.duals_sigma_1[x])
                        .unwrap()
                        .conj();
                    acc = acc.add(&self.rho_3[idx].kron(&din).unwrap());
                }
            }
        }
        acc.hermitize()
    }

    /// Direct assembly on legs (3^i, 2^o, 2^i, 1^o, 1^i). Output legs carry
    /// the transposed dual frames so elements pair against the prepared
    /// states without extra transposes.
    fn direct_process_tensor(&self) -> Result<ProcessTensor> {
        let spaces = SpaceList::new(vec![
            SpaceLabel::input(3, 2),
            SpaceLabel::output(2, 2),
            SpaceLabel::input(2, 2),
            SpaceLabel::output(1, 2),
            SpaceLabel::input(1, 2),
        ])?;
        let mut acc = ComplexMatrix::zeros(32, 32);
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    let idx = x + 4 * y + 16 * z;
                    let term = self.rho_3[idx]
                        .kron(&self.duals_sigma_2[z].transpose())?
                        .kron(&self.duals_povm_2[y])?
                        .kron(&self.duals_sigma_1[x].transpose())?
                        .kron(&self.rho_1[y])?
                        .scale_re(self.prob_y[y]);
                    acc = acc.add(&term);
                }
            }
        }
        ProcessTensor::new(LabeledOperator::new(acc.hermitize(), spaces)?, PSD_TOL)
    }

    /// Dilation route: the tripartite state feeds out its step-1 marginal,
    /// a swap exchanges the fed-back state with the stored step-2 marginal,
    /// and the expansion map (as a padded Kraus list) produces the final
    /// output.
    fn dilation_process_tensor(&self) -> Result<ProcessTensor> {
        // Kraus operators of the expansion map from its Choi spectrum
        let choi = self.future_choi_matrix();
        let (eigs, vecs) = herm_eig(&choi, 1e-9)?;
        let mut kraus: Vec<ComplexMatrix> = Vec::new();
        for (k, lam) in eigs.iter().enumerate() {
            if *lam < 1e-12 {
                continue;
            }
            let mut km = ComplexMatrix::zeros(2, 8);
            for o in 0..2 {
                for i in 0..8 {
                    km.set(o, i, vecs.get(o * 8 + i, k) * lam.sqrt());
                }
            }
            kraus.push(km);
        }
        // pad to square on (Y, S, s2): output lands in the system factor,
        // Y and s2 are reset to |0⟩
        let embed = {
            let e_y = ComplexMatrix::basis_ket(2, 0);
            let e_s2 = ComplexMatrix::basis_ket(2, 0);
            e_y.kron(&ComplexMatrix::identity(2))?.kron(&e_s2)?
        };
        // the map's input order is (Y, 2^o, 1^o) = factors (Y, S, s2) at
        // application time
        let padded: Vec<ComplexMatrix> = kraus.iter().map(|k| embed.matmul(k)).collect();

        // initial joint state on (S = step-1 output, Y, s2 = step-2 output)
        let hist = self.history_state_matrix(); // on (Y, s2, S)
        let initial = LabeledOperator::new(
            hist,
            SpaceList::new(vec![
                internal_label(2, "Y"),
                internal_label(2, "s2"),
                internal_label(2, "S"),
            ])?,
        )?;
        let dil = Dilation {
            initial,
            intervals: vec![
                vec![DilationOp::Unitary {
                    u: crate::linalg::ops::swap(2),
                    targets: vec!["S".into(), "s2".into()],
                }],
                vec![DilationOp::Kraus {
                    ops: padded,
                    targets: vec!["Y".into(), "S".into(), "s2".into()],
                }],
            ],
            feed_out: vec![],
        };
        from_dilation(&dil, 3)
    }
}

pub fn run_ic_causal_break(seed: u64) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new("ic_causal_break", seed);
    let c = Construction::build(seed)?;
    report.param("eps_history", c.eps_history);
    report.param("eps_future", c.eps_future);
    report.param("y_radius", Y_RADIUS);

    // positivity certificates for both building blocks
    let hist = c.history_state_matrix();
    let hist_min = min_eigenvalue(&hist, 1e-9)?;
    report.check_ge("tripartite_state_min_eig", 0.0, hist_min);
    let choi = c.future_choi_matrix();
    let choi_min = min_eigenvalue(&choi, 1e-9)?;
    report.check_ge("expansion_map_min_eig", 0.0, choi_min);
    // dual frames sum to the identity, so the map is trace preserving
    let mut dual_sum = ComplexMatrix::zeros(8, 8);
    for z in 0..4 {
        for y in 0..4 {
            for x in 0..4 {
                dual_sum = dual_sum.add(
                    &c.duals_y[y]
                        .kron(&c.duals_sigma_2[z])?
                        .kron(&c.duals_sigma_1[x])?,
                );
            }
        }
    }
    report.check_eq(
        "dual_frames_sum_to_identity",
        0.0,
        dual_sum.max_abs_diff(&ComplexMatrix::identity(8)),
        1e-10,
    );

    let pt = c.direct_process_tensor()?;
    let causality = check_causality(&pt, 1e-8)?;
    report.check_bool("choi_causality", causality.pass);

    // dilation cross-check
    let pt_dil = c.dilation_process_tensor()?;
    let dist = pt.op().distance(pt_dil.op())? / pt.mat().frobenius_norm();
    report.check_eq("dilation_route_distance", 0.0, dist, 1e-9);

    // the IC causal break: preparations at 1^o and 2^o, POVM at 2^i
    let seq = instruments::causal_break(&[
        (SpaceLabel::output(2, 2), LegFamily::Preparations(c.sigma_2.clone())),
        (SpaceLabel::input(2, 2), LegFamily::Povm(c.povm_2.clone())),
        (SpaceLabel::output(1, 2), LegFamily::Preparations(c.sigma_1.clone())),
    ])?;
    report.check_eq("causal_break_element_count", 64.0, seq.len() as f64, 0.0);
    let (ic, rank) = instruments::is_informationally_complete(&seq, 1e-9)?;
    report.check_bool("causal_break_ic", ic);
    report.check_eq("causal_break_rank", 64.0, rank as f64, 0.0);

    let memory = seq.legs().labels().to_vec();
    let part = Partition::around_memory(pt.spaces(), &memory)?;
    let rep = markov::has_markov_order(&pt, &seq, &part, 1e-8, 1e-9)?;
    report.check_bool("all_splits_product", rep.verdict);
    report.check_eq("splits_max_product_distance", 0.0, rep.max_distance(), 1e-9);
    report.check_eq("splits_max_mi_bits", 0.0, rep.max_mi(), 1e-8);

    // exact split form: outcome (z, y, x) leaves P(y) ρ₃^{xyz} ⊗ ρ₁^{y}
    // (scaled by the uniform preparation randomization 1/16)
    let splits = condition(&pt, &seq, &part)?;
    let mut worst: f64 = 0.0;
    for (i, s) in splits.iter().enumerate() {
        // element order: cartesian over (2^o, 2^i, 1^o) with the last leg
        // fastest
        let x = i % 4;
        let y = (i / 4) % 4;
        let z = i / 16;
        let idx = x + 4 * y + 16 * z;
        let expected = c.rho_3[idx]
            .kron(&c.rho_1[y])?
            .scale_re(c.prob_y[y] / 16.0);
        let aligned = s
            .joint
            .permute(&[SpaceLabel::input(3, 2), SpaceLabel::input(1, 2)])?;
        worst = worst.max(aligned.mat.max_abs_diff(&expected));
        let _ = z;
    }
    report.check_eq("splits_exact_form_residual", 0.0, worst, 1e-9);

    // coarse-graining preparations keeps the splits product
    let groups: Vec<Vec<usize>> = (0..32).map(|g| vec![2 * g, 2 * g + 1]).collect();
    let coarse = seq.coarse_grain(&groups)?;
    let rep_coarse = markov::has_markov_order(&pt, &coarse, &part, 1e-8, 1e-9)?;
    report.check_bool("coarse_grained_still_product", rep_coarse.verdict);

    // a non-dual measurement generically correlates future and history
    let alt = instruments::causal_break(&[
        (SpaceLabel::output(2, 2), LegFamily::Preparations(c.sigma_2.clone())),
        (
            SpaceLabel::input(2, 2),
            LegFamily::Povm(vec![
                ComplexMatrix::basis_projector(2, 0),
                ComplexMatrix::basis_projector(2, 1),
            ]),
        ),
        (SpaceLabel::output(1, 2), LegFamily::Preparations(c.sigma_1.clone())),
    ])?;
    let rep_alt = markov::has_markov_order(&pt, &alt, &part, 1e-8, 1e-9)?;
    report.check_bool("alternative_instrument_correlates", !rep_alt.verdict);
    report.check_ge("alternative_instrument_max_mi", 1e-4, rep_alt.max_mi());

    // converse failure: finite order w.r.t. the causal break, yet the
    // quantum conditional mutual information does not vanish
    let q = qcmi(pt.op(), &part, PSD_TOL)?;
    report.check_ge("qcmi_bits", 1e-3, q);

    // the structure reconstruction over the IC family is exact
    let (_, err) = markov::structure_round_trip(&pt, &seq, &part)?;
    report.check_eq("corollary_reconstruction_error", 0.0, err, 1e-9);

    // sanity: a random sandbox state reproduces the Born pairing between
    // the two construction routes on a handful of probe sequences
    let mut rng = SeededRng::seed_from_u64(seed ^ 0xfeed);
    let mut born_worst: f64 = 0.0;
    for _ in 0..5 {
        let opers = random_probe(&mut rng)?;
        let p_direct = apply_ops(pt.op(), &opers)?.mat.get(0, 0).re;
        let p_dil = apply_ops(pt_dil.op(), &opers)?.mat.get(0, 0).re;
        born_worst = born_worst.max((p_direct - p_dil).abs());
    }
    report.check_eq("born_rule_route_agreement", 0.0, born_worst, 1e-9);
    Ok(report)
}

fn random_probe(rng: &mut SeededRng) -> Result<Vec<LabeledOperator>> {
    let mut ops_list = Vec::new();
    for (step, legs) in [
        (1u32, vec![SpaceLabel::output(1, 2), SpaceLabel::input(1, 2)]),
        (2, vec![SpaceLabel::output(2, 2), SpaceLabel::input(2, 2)]),
    ] {
        let ks = vec![random::ginibre(2, 2, rng).scale_re(0.5)];
        let choi = crate::process::choi_of_map(&ks, 2, 2)?;
        ops_list.push(LabeledOperator::new(choi, SpaceList::new(legs)?)?);
        let _ = step;
    }
    // final measurement effect
    let e = {
        let g = random::ginibre(2, 2, rng);
        let m = g.matmul(&g.dagger());
        m.scale_re(1.0 / m.trace().re)
    };
    ops_list.push(LabeledOperator::new(
        e,
        SpaceList::new(vec![SpaceLabel::input(3, 2)])?,
    )?);
    Ok(ops_list)
}
