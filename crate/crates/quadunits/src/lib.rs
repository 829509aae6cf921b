//! Exact computation with sums of units in real quadratic fields
//! `Q(sqrt(d))`.
//!
//! The crate provides:
//!
//! - [`quadfield`] - exact ring arithmetic in `O_L`, fundamental units by
//!   continued fractions, and integer-only real comparisons;
//! - [`unit_equation`] - enumeration of non-degenerate solutions of
//!   `v_1 + ... + v_T = 1` with stability certificates, exceptional
//!   coefficient sets limit and the exceptional-field test;
//! - [`trace_sums`] - the trace-sum counting function, vanishing-subsum
//!   tests and empirical gap-constant estimates;
//! - [`sums_of_units`] - the value sets of integers expressible as sums of
//!   exactly / at most `k` units, representation classes, the constructive
//!   reduction to trace form and the non-uniqueness counter;
//! - [`asymptotics`] - predicted counting functions and comparison reports;
//! - [`local_solubility`] - solubility of the unit-sum equation over the
//!   `p`-adic completions, with residue-ring verification.
//!
//! See the crate `examples/` directory for one runnable walk-through per
//! capability, and the `quadunits` binary for a scriptable front end.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod local_solubility;
pub mod quadfield;
mod realarith;
pub mod sums_of_units;
pub mod trace_sums;
pub mod unit_equation;

pub use error::{Error, Result};
pub use quadfield::{make_field, FieldDescriptor, QuadInt, TwoSplitting, UnitExponent};
pub use unit_equation::{BoundConfig, StabilityCertificate, UnitTuple};
