//! Combinatorial machinery for words in free groups and one-relator complexes:
//! primitivity rank and w-subgroups, Stallings folding and fiber products,
//! stackings of immersed loops, adjunction spaces with their fiberwise
//! filtrations, and one-relator pushouts of 2-complexes.
//!
//! Everything is exact: integer Euler characteristics and Betti numbers,
//! exhaustive searches with explicit witnesses, no floating point.

pub mod adjunction;
pub mod fuzz;
pub mod graph;
pub mod prank;
pub mod stacking;
pub mod twocomplex;
pub mod whitehead;
pub mod words;

use thiserror::Error;

/// Crate-wide error type. The variants map one-to-one onto the CLI exit
/// codes: input 2, budget 3, hypothesis 4, falsified 5.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Unparseable or ill-formed input (unknown letter, bad cell id, ...).
    #[error("malformed input: {0}")]
    Input(String),
    /// Precondition of an operation violated (e.g. a divisible word where an
    /// indivisible one is required).
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured search budget was exhausted before completion.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A stated hypothesis of a theorem fails on this instance, so the
    /// conclusion is not asserted.
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),
    /// An inequality or invariant asserted by the theory failed on a concrete
    /// instance. Loudest failure class: if this fires, either the instance
    /// construction or the implementation is wrong.
    #[error("invariant falsified: {0}")]
    Falsified(String),
}

pub type Result<T> = std::result::Result<T, Error>;
