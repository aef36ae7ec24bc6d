//! Numerical simulator for randomized eigenpath-traversal solvers of the
//! quantum linear systems problem.
//!
//! The crate prepares `|x⟩ ∝ A⁻¹|b⟩` by walking the zero-energy eigenstate of
//! a parametrized Hamiltonian family, evolving each slice for a random time.
//! Two variants are provided: one tracking the ground state of
//! `H(s) = A(s) P⊥ A(s)` and one tracking a middle-of-spectrum state of the
//! gap-amplified family `H'(s)`.

// `!(x > 0.0)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod hamiltonian;
pub mod instance;
pub mod linalg;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};
