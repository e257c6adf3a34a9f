//! Simple automatic structures: automata, regular relations, automatic presentations with a
//! counting first-order evaluator, growth classification, s-cells, semilinear sets and
//! equivalence structures.

pub mod automata;
pub mod cells;
pub mod cli;
pub mod count;
pub mod eqstruct;
pub mod error;
pub mod formula;
pub mod growth;
pub mod poly;
pub mod presentation;
pub mod relations;
pub mod semilinear;

pub use error::{Error, Result};
