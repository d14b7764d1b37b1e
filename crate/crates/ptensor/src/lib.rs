//! Process tensors, probing instrument sequences and quantum Markov order
//! at desk scale.
//!
//! A discrete-time open quantum process is stored as its many-body Choi
//! state: a positive operator on the tensor product of per-timestep input
//! and output legs, normalized so that tr Υ equals the product of the
//! output-leg dimensions. The crate provides
//!
//! - dense labeled linear algebra ([`linalg`]),
//! - process-tensor construction from system–environment dilations and
//!   causality validation ([`process`]),
//! - instrument sequences (trash-and-prepare, causal breaks, unitary
//!   sequences, Bell and projector instruments) with validity and
//!   informational-completeness tests ([`instruments`]),
//! - conditional future/history splits and instrument-specific Markov
//!   order checks, plus the dual-set structure decomposition and its
//!   reconstruction ([`markov`]),
//! - quantum and classical conditional mutual information and the
//!   block-decomposed processes with vanishing QCMI ([`cmi`]),
//! - generative collision models with memory ([`collision`]),
//! - self-verifying worked scenarios consumed by the CLI and the
//!   acceptance suite ([`scenarios`]).

pub mod cmi;
pub mod collision;
pub mod error;
pub mod instruments;
pub mod io;
pub mod linalg;
pub mod markov;
pub mod process;
pub mod scenarios;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, LabeledOperator, Leg, SpaceLabel, SpaceList};
pub use process::ProcessTensor;
