//! Serialization: process tensors as JSON documents with base64-packed
//! entries (bit-exact round trip), and JSON instrument descriptors used by
//! the CLI.

use crate::error::{Error, Result};
use crate::instruments::{self, InstrumentSequence, LegFamily};
use crate::linalg::{sic, ComplexMatrix, LabeledOperator, SpaceLabel, SpaceList};
use crate::process::ProcessTensor;
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct OperatorDoc {
    spaces: Vec<SpaceLabel>,
    /// Little-endian f64 pairs (re, im) in row-major order, base64 encoded.
    entries: String,
}

fn encode_entries(mat: &ComplexMatrix) -> String {
    let mut bytes = Vec::with_capacity(mat.data().len() * 16);
    for z in mat.data() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    B64.encode(bytes)
}

fn decode_entries(s: &str, dim: usize) -> Result<ComplexMatrix> {
    let bytes = B64
        .decode(s)
        .map_err(|e| Error::Serialization(format!("base64: {e}")))?;
    if bytes.len() != dim * dim * 16 {
        return Err(Error::Serialization(format!(
            "expected {} bytes of entries, got {}",
            dim * dim * 16,
            bytes.len()
        )));
    }
    let mut mat = ComplexMatrix::zeros(dim, dim);
    for (k, chunk) in bytes.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        mat.data_mut()[k] = Complex64::new(re, im);
    }
    Ok(mat)
}

pub fn operator_to_json(op: &LabeledOperator) -> String {
    let doc = OperatorDoc {
        spaces: op.spaces.labels().to_vec(),
        entries: encode_entries(&op.mat),
    };
    serde_json::to_string_pretty(&doc).expect("operator serialization cannot fail")
}

pub fn operator_from_json(text: &str) -> Result<LabeledOperator> {
    let doc: OperatorDoc =
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
    let spaces = SpaceList::new(doc.spaces)?;
    let mat = decode_entries(&doc.entries, spaces.total_dim())?;
    LabeledOperator::new(mat, spaces)
}

pub fn process_tensor_to_json(pt: &ProcessTensor) -> String {
    operator_to_json(pt.op())
}

/// Parse without validation; callers decide which checks to run.
pub fn process_tensor_from_json(text: &str) -> Result<ProcessTensor> {
    ProcessTensor::new_unchecked(operator_from_json(text)?)
}

/// Instrument descriptors consumed by the CLI: a kind plus the timesteps it
/// acts on. All descriptors are qubit-sized except the qutrit projector
/// pair.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstrumentDescriptor {
    /// Bell-pair instrument on (k^i, k−1^o).
    Bell { measure_step: u32 },
    /// SIC causal break: tetrahedron preparations on each prep step's output
    /// leg, SIC POVM on each measure step's input leg.
    CausalBreakSic {
        #[serde(default)]
        prep_steps: Vec<u32>,
        #[serde(default)]
        measure_steps: Vec<u32>,
    },
    /// Deterministic maximally mixed trash-and-prepare on the given steps.
    TrashPrepareMixed { steps: Vec<u32> },
    /// Qutrit projector pair {1 − |2⟩⟨2|, |2⟩⟨2|} on one input leg.
    FuzzyQutrit { step: u32 },
    /// Sharp qutrit instrument: the four SIC effects embedded in the
    /// {|0⟩,|1⟩} subspace plus |2⟩⟨2|.
    SharpQutrit { step: u32 },
}

pub fn instrument_from_descriptor(d: &InstrumentDescriptor) -> Result<InstrumentSequence> {
    match d {
        InstrumentDescriptor::Bell { measure_step } => instruments::bell_instrument(*measure_step),
        InstrumentDescriptor::CausalBreakSic { prep_steps, measure_steps } => {
            let mut legs: Vec<(SpaceLabel, LegFamily)> = Vec::new();
            for s in prep_steps {
                legs.push((SpaceLabel::output(*s, 2), LegFamily::Preparations(sic::sic_states())));
            }
            for s in measure_steps {
                legs.push((SpaceLabel::input(*s, 2), LegFamily::Povm(sic::sic_povm())));
            }
            // latest-first for a stable element layout
            legs.sort_by(|a, b| b.0.temporal_key().cmp(&a.0.temporal_key()));
            instruments::causal_break(&legs)
        }
        InstrumentDescriptor::TrashPrepareMixed { steps } => {
            let preps: Vec<(u32, ComplexMatrix)> = steps
                .iter()
                .map(|s| (*s, crate::linalg::ops::maximally_mixed(2)))
                .collect();
            instruments::trash_and_prepare(&preps)
        }
        InstrumentDescriptor::FuzzyQutrit { step } => {
            let mut p1 = ComplexMatrix::identity(3);
            p1.set(2, 2, Complex64::ZERO);
            let p2 = ComplexMatrix::basis_projector(3, 2);
            instruments::fuzzy_projector_instrument(&[p1, p2], SpaceLabel::input(*step, 3))
        }
        InstrumentDescriptor::SharpQutrit { step } => {
            let legs = SpaceList::new(vec![SpaceLabel::input(*step, 3)])?;
            let mut elements = Vec::new();
            let mut labels = Vec::new();
            for (i, e) in sic::sic_povm().into_iter().enumerate() {
                let mut emb = ComplexMatrix::zeros(3, 3);
                for r in 0..2 {
                    for c in 0..2 {
                        emb.set(r, c, e.get(r, c));
                    }
                }
                elements.push(LabeledOperator::new(emb, legs.clone())?);
                labels.push(format!("sic{i}"));
            }
            elements.push(LabeledOperator::new(ComplexMatrix::basis_projector(3, 2), legs)?);
            labels.push("third".into());
            InstrumentSequence::new(elements, labels)
        }
    }
}

pub fn instrument_from_json(text: &str) -> Result<InstrumentSequence> {
    let d: InstrumentDescriptor =
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
    instrument_from_descriptor(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{self, SeededRng};
    use rand::SeedableRng;

    #[test]
    fn bit_exact_round_trip() {
        let mut rng = SeededRng::seed_from_u64(7);
        let mat = random::random_density(8, &mut rng).scale_re(4.0);
        let op = LabeledOperator::new(
            mat,
            SpaceList::new(vec![
                SpaceLabel::input(2, 2),
                SpaceLabel::output(1, 2),
                SpaceLabel::input(1, 2),
            ])
            .unwrap(),
        )
        .unwrap();
        let text = operator_to_json(&op);
        let back = operator_from_json(&text).unwrap();
        assert_eq!(back.spaces, op.spaces);
        // bit-exact: every f64 identical
        for (a, b) in op.mat.data().iter().zip(back.mat.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // and the serialization is stable
        assert_eq!(text, operator_to_json(&back));
    }

    #[test]
    fn rejects_wrong_length() {
        let doc = r#"{"spaces":[{"timestep":1,"leg":"input","dim":2}],"entries":"AAAA"}"#;
        assert!(operator_from_json(doc).is_err());
    }

    #[test]
    fn instrument_descriptors_build() {
        let bell = instrument_from_json(r#"{"kind":"bell","measure_step":3}"#).unwrap();
        assert_eq!(bell.len(), 4);
        let cb = instrument_from_json(
            r#"{"kind":"causal_break_sic","prep_steps":[1],"measure_steps":[1]}"#,
        )
        .unwrap();
        assert_eq!(cb.len(), 16);
        let fz = instrument_from_json(r#"{"kind":"fuzzy_qutrit","step":2}"#).unwrap();
        assert_eq!(fz.len(), 2);
        let sharp = instrument_from_json(r#"{"kind":"sharp_qutrit","step":2}"#).unwrap();
        assert_eq!(sharp.len(), 5);
        assert!(instruments::is_valid_sequence(&sharp, 1e-9).unwrap().pass);
    }
}
