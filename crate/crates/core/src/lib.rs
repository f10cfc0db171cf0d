//! Two-prover zero-knowledge interactive proofs for Subset Sum and 3SAT built
//! on the relativistic commitment `w = a*b + c`, together with the finite
//! game tools used to analyse their soundness.
//!
//! This crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in the `zkmip` crate.

#![no_std]

extern crate alloc;

pub mod adversary;
pub mod commitment;
pub mod field;
pub mod games;
pub mod protocol;
pub mod session;
pub mod subset_sum;
pub mod three_sat;
pub mod wire;
pub mod zk_sim;

pub use field::{choose_prime, Field, FieldElement, FieldError};
pub use protocol::{Challenge, Extraction, Rejection, Verdict};
