//! Random Sidon-type sequences of polynomials over a finite field `F_q`.
//!
//! Polynomials are addressed by their index `N = Σ n_i q^i`; the digits `n_i`
//! name the coefficients through a fixed identification of `F_q` with
//! `{0, …, q−1}`.

pub mod counts;
pub mod error;
pub mod experiments;
pub mod field;
pub mod format;
pub mod pairing;
pub mod prob;
pub mod report;
pub mod sampler;
pub mod validate;

pub use counts::{CountKind, RepresentationTable, SequenceSample};
pub use error::{Error, Result};
pub use field::{make_field, Degree, FieldSpec};
pub use report::ExperimentReport;
