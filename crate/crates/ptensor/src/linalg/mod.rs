//! Dense complex linear algebra with labeled tensor legs: Kronecker
//! products, partial traces, subsystem permutations, Hermitian
//! eigendecomposition, entropies and dual-set construction.

pub mod duals;
pub mod eig;
pub mod entropy;
pub mod labeled;
pub mod matrix;
pub mod random;
pub mod sic;
pub mod spaces;

pub use duals::{dual_set, span_rank, DualSet};
pub use eig::{check_psd, herm_eig, min_eigenvalue};
pub use entropy::{mutual_information, shannon_entropy, von_neumann_entropy, PSD_TOL};
pub use labeled::LabeledOperator;
pub use matrix::{ops, ComplexMatrix};
pub use random::SeededRng;
pub use spaces::{Leg, SpaceLabel, SpaceList};
