//! Independent reference implementations for the test suites: a naive
//! move generator with its own board and FEN handling, a forward minimax
//! oracle, and a reader for the binary table format.
//!
//! Nothing here depends on the main crate.

pub mod board;
pub mod ctb;
pub mod fen;
pub mod movegen;
pub mod oracle;
pub mod suite;

pub use board::{State, Variant};
