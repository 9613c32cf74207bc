//! Verifiable bounds on the sparsity level up to which a sensing matrix
//! guarantees exact `l1`-recovery.
//!
//! A `k x n` matrix `A` is *s-good* when every `s`-sparse signal `w` is the
//! unique minimizer of `||x||_1` subject to `Ax = Aw`. Deciding this exactly is
//! hard; this crate computes cheap certificates on both sides:
//!
//! * [`bounds`]: lower bounds on the largest good `s` from mutual incoherence,
//!   the per-column `alpha_1` programs and the full `alpha_s` program;
//! * [`lower`]: upper bounds on the largest good `s` via sequential convex
//!   approximation, which produces explicit kernel vectors;
//! * [`recovery`]: `l1`-recovery, error bounds for imperfect recovery and
//!   weighted-`l1` scaling;
//! * [`oracle`]: exhaustive ground truth for tiny instances;
//! * [`gen`]: seeded generators for the usual benchmark families.
//!
//! Everything is built on the dense interior-point engine in [`lp`].
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled; `std` adds thread-parallel evaluation of independent programs.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod gen;
pub mod lower;
pub mod lp;
pub mod oracle;
pub mod recovery;
pub mod residual;
pub mod types;

mod math;
mod par;

pub use error::{Error, Result};
pub use types::{
    argmax_over_ps, hard_threshold, mutual_incoherence, norm_s1, Beta, ObservationNorm, PsVertex,
    SensingMatrix, SparseSignal,
};

/// Default absolute tolerance for algebraic identities on unit-normalized data.
pub const DEFAULT_TOL: f64 = 1e-9;
