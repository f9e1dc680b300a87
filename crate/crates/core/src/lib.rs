//! Exact verification engine for two-generator subalgebras of finite block
//! matrix products.
//!
//! Given a finite list of dimensions `n` with multiplicities `a_n`, the crate
//! builds the product of `a_n` copies of `M_n(F)` over an exact field
//! (arbitrary-precision rationals or a prime field), constructs the two
//! distinguished generators `e` and `sigma`, and then
//!
//! * computes a linear basis of the subalgebra they generate ([`closure`]),
//! * constructs per-component separators and full matrix-unit families with
//!   membership certificates ([`witness`]),
//! * and independently verifies the simple-module census: `a_n` pairwise
//!   non-isomorphic simple modules of dimension `n` and nothing else in the
//!   truncation ([`census`]).
//!
//! The `simcensus` binary wires these into a batch pipeline with a JSON
//! report; see [`pipeline`].

pub mod census;
pub mod closure;
pub mod matrix;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod witness;

pub use census::CensusReport;
pub use closure::{generate, Membership, SubalgebraBasis};
pub use matrix::{DenseMatrix, LinalgError};
pub use model::{build_generators, BlockElement, ComponentKey, FlatVector, SupportSpec};
pub use scalar::{FieldConfig, Scalar};
pub use witness::{LeadingFactor, WitnessLedger};
