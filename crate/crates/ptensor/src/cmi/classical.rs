//! Classical stochastic processes: joint outcome tables, Shannon CMI,
//! Markov-order factorization checks, coarse-graining, and the diagonal
//! process-tensor embedding that reproduces sharp measurement statistics.

use crate::error::{Error, Result};
use crate::linalg::entropy::shannon_entropy;
use crate::linalg::{ComplexMatrix, LabeledOperator, SpaceLabel, SpaceList};
use crate::process::ProcessTensor;
use num_complex::Complex64;
use std::io::Read;

/// Joint probability table over outcome tuples (x_n, …, x_1). Outcomes are
/// flattened little-endian: step 1 is the fastest-varying index.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalProcess {
    /// sizes[j] is the alphabet size of step j+1.
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl ClassicalProcess {
    pub fn new(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let total: usize = sizes.iter().product();
        if probs.len() != total {
            return Err(Error::InvalidTable(format!(
                "expected {total} entries, got {}",
                probs.len()
            )));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if p < -1e-15 || !p.is_finite() {
                return Err(Error::InvalidTable("negative or non-finite entry".into()));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTable(format!("entries sum to {sum}")));
        }
        Ok(Self { sizes, probs })
    }

    pub fn n_steps(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn flat(&self, outcome: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (x, s) in outcome.iter().zip(&self.sizes) {
            idx += x * stride;
            stride *= s;
        }
        idx
    }

    /// outcome[j] is the value of step j+1.
    pub fn prob(&self, outcome: &[usize]) -> f64 {
        self.probs[self.flat(outcome)]
    }

    fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        self.sizes
            .iter()
            .map(|s| {
                let x = idx % s;
                idx /= s;
                x
            })
            .collect()
    }

    /// Marginal distribution over a subset of steps (1-based), flattened
    /// little-endian in the order given.
    pub fn marginal(&self, steps: &[usize]) -> Vec<f64> {
        let dims: Vec<usize> = steps.iter().map(|&s| self.sizes[s - 1]).collect();
        let total: usize = dims.iter().product();
        let mut out = vec![0.0; total.max(1)];
        for (i, &p) in self.probs.iter().enumerate() {
            let full = self.unflatten(i);
            let mut idx = 0;
            let mut stride = 1;
            for (&s, d) in steps.iter().zip(&dims) {
                idx += full[s - 1] * stride;
                stride *= d;
            }
            out[idx] += p;
        }
        out
    }

    /// Homogeneous Markov chain: P(x_{k} = b | x_{k-1} = a) = transition[a][b].
    pub fn from_markov_chain(
        initial: &[f64],
        transition: &[Vec<f64>],
        n_steps: usize,
    ) -> Result<Self> {
        let a = initial.len();
        let sizes = vec![a; n_steps];
        let total = a.pow(n_steps as u32);
        let mut probs = vec![0.0; total];
        for idx in 0..total {
            let mut rem = idx;
            let mut outcome = Vec::with_capacity(n_steps);
            for _ in 0..n_steps {
                outcome.push(rem % a);
                rem /= a;
            }
            let mut p = initial[outcome[0]];
            for w in outcome.windows(2) {
                p *= transition[w[0]][w[1]];
            }
            probs[idx] = p;
        }
        Self::new(sizes, probs)
    }

    /// Coarse-grain one step (1-based) through an outcome mapping
    /// old value → new value.
    pub fn coarse_grain(&self, step: usize, mapping: &[usize], new_size: usize) -> Result<Self> {
        if mapping.len() != self.sizes[step - 1] {
            return Err(Error::InvalidTable("mapping length".into()));
        }
        let mut sizes = self.sizes.clone();
        sizes[step - 1] = new_size;
        let total: usize = sizes.iter().product();
        let mut probs = vec![0.0; total];
        let target = Self { sizes: sizes.clone(), probs: vec![0.0; total] };
        for (i, &p) in self.probs.iter().enumerate() {
            let mut outcome = self.unflatten(i);
            outcome[step - 1] = mapping[outcome[step - 1]];
            probs[target.flat(&outcome)] += p;
        }
        Self::new(sizes, probs)
    }

    /// Conditional P(x_k = v | x_{k-1} = c_{k-1}, …, x_{k-j} = c_{k-j}),
    /// None when the conditioning event has no weight.
    pub fn conditional(&self, k: usize, v: usize, given: &[(usize, usize)]) -> Option<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            let outcome = self.unflatten(i);
            if given.iter().all(|&(step, val)| outcome[step - 1] == val) {
                den += p;
                if outcome[k - 1] == v {
                    num += p;
                }
            }
        }
        if den <= 1e-14 {
            None
        } else {
            Some(num / den)
        }
    }
}

/// Shannon conditional mutual information I(F:H|M) in bits over step groups.
pub fn classical_cmi(
    p: &ClassicalProcess,
    future: &[usize],
    memory: &[usize],
    history: &[usize],
) -> f64 {
    let mut fm: Vec<usize> = future.to_vec();
    fm.extend_from_slice(memory);
    let mut mh: Vec<usize> = memory.to_vec();
    mh.extend_from_slice(history);
    let mut fmh = fm.clone();
    fmh.extend_from_slice(history);
    shannon_entropy(&p.marginal(&fm)) + shannon_entropy(&p.marginal(&mh))
        - shannon_entropy(&p.marginal(&fmh))
        - shannon_entropy(&p.marginal(memory))
}

/// Markov-order check: the conditional of each step on its full history must
/// equal the conditional on the most recent `ell` steps, within 1e-10.
/// Conditionals on zero-probability events are vacuously satisfied.
pub fn classical_markov_order(p: &ClassicalProcess, ell: usize) -> bool {
    let n = p.n_steps();
    for k in (ell + 1)..=n {
        // enumerate all assignments of steps 1..k
        let dims: Vec<usize> = (1..=k).map(|s| p.sizes[s - 1]).collect();
        let total: usize = dims.iter().product();
        for idx in 0..total {
            let mut rem = idx;
            let vals: Vec<usize> = dims
                .iter()
                .map(|d| {
                    let v = rem % d;
                    rem /= d;
                    v
                })
                .collect();
            let full: Vec<(usize, usize)> =
                (1..k).map(|s| (s, vals[s - 1])).collect();
            let recent: Vec<(usize, usize)> =
                ((k - ell)..k).map(|s| (s, vals[s - 1])).collect();
            let c_full = p.conditional(k, vals[k - 1], &full);
            let c_recent = p.conditional(k, vals[k - 1], &recent);
            match (c_full, c_recent) {
                (Some(a), Some(b)) => {
                    if (a - b).abs() > 1e-10 {
                        return false;
                    }
                }
                _ => continue,
            }
        }
    }
    true
}

/// Diagonal process-tensor embedding: Υ = Σ_x P(x) |x⟩⟨x| on the input legs
/// tensored with identities on the output legs. Sharp projective probing
/// reproduces the table exactly; the embedding is causal by construction.
pub fn classical_process_tensor(p: &ClassicalProcess) -> Result<ProcessTensor> {
    let n = p.n_steps();
    let mut labels = Vec::new();
    for j in (1..=n).rev() {
        labels.push(SpaceLabel::input(j as u32, p.sizes[j - 1]));
        if j > 1 {
            labels.push(SpaceLabel::output((j - 1) as u32, p.sizes[j - 2]));
        }
    }
    // canonical order is n^i, n-1^o, n-1^i, …, 1^o, 1^i; reorder into
    // construction order below
    let spaces = SpaceList::new(labels)?;
    let dims = spaces.dims();
    let total = spaces.total_dim();
    let mut mat = ComplexMatrix::zeros(total, total);
    for g in 0..total {
        // decompose g over the leg dims (leftmost factor most significant)
        let mut rem = g;
        let mut comps = vec![0usize; dims.len()];
        for (slot, d) in dims.iter().enumerate().rev() {
            comps[slot] = rem % d;
            rem /= d;
        }
        let mut outcome = vec![0usize; n];
        for (slot, l) in spaces.labels().iter().enumerate() {
            if l.leg == crate::linalg::Leg::Input {
                outcome[(l.timestep - 1) as usize] = comps[slot];
            }
        }
        mat.set(g, g, Complex64::new(p.prob(&outcome), 0.0));
    }
    ProcessTensor::new(LabeledOperator::new(mat, spaces)?, 1e-9)
}

/// Probability of observing a sharp outcome tuple when probing the diagonal
/// embedding with projective measure-and-reprepare operations at steps
/// 1..n−1 and a projective measurement at step n.
pub fn sharp_statistics(pt: &ProcessTensor, p: &ClassicalProcess, outcome: &[usize]) -> Result<f64> {
    let n = p.n_steps();
    let mut opers = Vec::new();
    for j in 1..=n {
        let d = p.sizes[j - 1];
        let proj = ComplexMatrix::basis_projector(d, outcome[j - 1]);
        if j < n {
            let mat = proj.kron(&proj)?;
            opers.push(LabeledOperator::new(
                mat,
                SpaceList::new(vec![
                    SpaceLabel::output(j as u32, d),
                    SpaceLabel::input(j as u32, d),
                ])?,
            )?);
        } else {
            opers.push(LabeledOperator::new(
                proj,
                SpaceList::new(vec![SpaceLabel::input(j as u32, d)])?,
            )?);
        }
    }
    crate::process::born_probability(pt, &opers)
}

/// Load a table from CSV with columns x1,…,xn,probability.
pub fn load_csv<R: Read>(reader: R, sizes: Vec<usize>) -> Result<ClassicalProcess> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let n = sizes.len();
    let total: usize = sizes.iter().product();
    let mut probs = vec![0.0; total];
    for record in rdr.records() {
        let record = record.map_err(|e| Error::InvalidTable(e.to_string()))?;
        if record.len() != n + 1 {
            return Err(Error::InvalidTable(format!(
                "expected {} columns, got {}",
                n + 1,
                record.len()
            )));
        }
        let mut outcome = Vec::with_capacity(n);
        for f in record.iter().take(n) {
            outcome.push(
                f.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidTable(e.to_string()))?,
            );
        }
        let p: f64 = record[n]
            .trim()
            .parse()
            .map_err(|e: std::num::ParseFloatError| Error::InvalidTable(e.to_string()))?;
        let tmp = ClassicalProcess { sizes: sizes.clone(), probs: vec![] };
        probs[tmp.flat(&outcome)] += p;
    }
    ClassicalProcess::new(sizes, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perturbed_coin(p: f64, n: usize) -> ClassicalProcess {
        ClassicalProcess::from_markov_chain(
            &[0.5, 0.5],
            &[vec![p, 1.0 - p], vec![1.0 - p, p]],
            n,
        )
        .unwrap()
    }

    #[test]
    fn coin_is_markov_order_one() {
        let c = perturbed_coin(0.8, 4);
        assert!(classical_markov_order(&c, 1));
        // CMI through a single middle step vanishes
        let v = classical_cmi(&c, &[3, 4], &[2], &[1]);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn three_bit_parity_table() {
        // P(000)=P(101)=P(011)=P(110)=1/4 over (x3,x2,x1): outcome vector
        // is (x1,x2,x3) in step order
        let mut probs = vec![0.0; 8];
        let tbl = ClassicalProcess { sizes: vec![2, 2, 2], probs: vec![] };
        for (x3, x2, x1) in [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 0)] {
            probs[tbl.flat(&[x1, x2, x3])] = 0.25;
        }
        let p = ClassicalProcess::new(vec![2, 2, 2], probs).unwrap();
        // sharp CMI through the middle bit is 1 bit
        let v = classical_cmi(&p, &[3], &[2], &[1]);
        assert!((v - 1.0).abs() < 1e-12);
        // coarse-graining the middle bit removes all correlation
        let fuzzy = p.coarse_grain(2, &[0, 0], 1).unwrap();
        let mi = classical_cmi(&fuzzy, &[3], &[2], &[1]);
        assert!(mi.abs() < 1e-12);
        assert!(!classical_markov_order(&p, 1));
    }

    #[test]
    fn embedding_reproduces_sharp_statistics() {
        let c = perturbed_coin(0.7, 3);
        let pt = classical_process_tensor(&c).unwrap();
        let rep = crate::process::check_causality(&pt, 1e-10).unwrap();
        assert!(rep.pass);
        for idx in 0..8usize {
            let outcome = vec![idx & 1, (idx >> 1) & 1, (idx >> 2) & 1];
            let got = sharp_statistics(&pt, &c, &outcome).unwrap();
            assert!((got - c.prob(&outcome)).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_qcmi_matches_classical_cmi() {
        let mut probs = vec![0.0; 8];
        let tbl = ClassicalProcess { sizes: vec![2, 2, 2], probs: vec![] };
        for (x3, x2, x1) in [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 0)] {
            probs[tbl.flat(&[x1, x2, x3])] = 0.25;
        }
        let p = ClassicalProcess::new(vec![2, 2, 2], probs).unwrap();
        let pt = classical_process_tensor(&p).unwrap();
        let mem: Vec<SpaceLabel> = pt
            .spaces()
            .labels()
            .iter()
            .filter(|l| l.timestep == 2)
            .cloned()
            .collect();
        let part = crate::process::Partition::around_memory(pt.spaces(), &mem).unwrap();
        let q = crate::cmi::qcmi(pt.op(), &part, 1e-9).unwrap();
        let c = classical_cmi(&p, &[3], &[2], &[1]);
        assert!((q - c).abs() < 1e-9, "quantum {q} vs classical {c}");
    }

    #[test]
    fn csv_round_trip() {
        let csv_text = "x1,x2,probability\n0,0,0.5\n1,1,0.5\n";
        let p = load_csv(csv_text.as_bytes(), vec![2, 2]).unwrap();
        assert!((p.prob(&[0, 0]) - 0.5).abs() < 1e-15);
        assert!((p.prob(&[1, 0])).abs() < 1e-15);
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(ClassicalProcess::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(ClassicalProcess::new(vec![2], vec![1.2, -0.2]).is_err());
    }
}
