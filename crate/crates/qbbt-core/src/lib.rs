//! Black-box statistical checking of quantum programs.
//!
//! This crate implements the full checking stack:
//!
//! - [`qnum`] — complex dense linear algebra sized for few-qubit work
//!   (matrices, state vectors, density operators, standard gates).
//! - [`circuit`] — a small quantum-program IR (gates, measurement, reset,
//!   classical control) with composition, inversion, unitary extraction and a
//!   JSON interchange format.
//! - [`sim`] — two execution semantics for the same IR: sampled statevector
//!   shots driven by a counter-based RNG, and the exact density-operator
//!   channel of a program.
//! - [`states`] — input-state preparation circuits: Pauli-basis product
//!   states, computational basis states, and two-state superpositions.
//! - [`swaptest`] — the sampled swap-test primitive estimating
//!   `tr(rho1 rho2)` from ancilla statistics, plus its early-exit
//!   "is the overlap 1" variant.
//! - [`params`] — sample-size calculator: minimum swap-test rounds needed for
//!   prescribed error rates, with the analytic budget bracket.
//! - [`checkers`] — the five black-box checking algorithms (equivalence /
//!   identity / unitarity, original and purity-optimized variants).
//! - [`oracle`] — exact density-operator oracle: overlaps, the equivalence
//!   E-parameter, exact equivalence over all Pauli product inputs, and exact
//!   unitarity decided by two independent routes (orthogonality-preservation
//!   and Choi-rank) that cross-validate each other.
//! - [`bench`] — the 63-entry mutation benchmark (12 original programs plus
//!   frozen gate- and measurement-mutants), oracle-verified at build time.
//!
//! Every randomized component is deterministic given its seed: the RNG is
//! counter-based and split per test point and per shot, so results are
//! reproducible and independent of execution order or thread count.

pub mod bench;
pub mod checkers;
pub mod circuit;
mod error;
pub mod oracle;
pub mod params;
pub mod qnum;
pub mod sim;
pub mod states;
pub mod swaptest;

pub use error::{Error, Result};
