//! Simulation and analysis toolkit for fixed-budget best-arm identification
//! with Bernoulli outcomes ("policy choice" in the adaptive-experiment
//! literature).
//!
//! The crate covers four pieces of machinery that are usually studied
//! together but rarely shipped together:
//!
//! - [`model`] / [`posterior`] / [`allocate`]: batched Beta-Bernoulli
//!   experiments — problem instances, sufficient statistics, conjugate
//!   belief updates, and wave-level allocation rules (exploration
//!   sampling, Thompson proportions, uniform).
//! - [`ldp`]: large-deviations machinery — Bernoulli KL rates, the
//!   pairwise rate function, the optimal-allocation program for the decay
//!   exponent Γ* (with the best arm's share pinned at 1/2), problem
//!   complexity H(θ), and the fixed-budget lower-bound calculators built
//!   on the Carpentier–Locatelli hard instances.
//! - [`dp`]: exact finite-horizon dynamic programming over sufficient
//!   statistics with Beta-Binomial transitions, feasible only at tiny
//!   scale, plus an exhaustive path-enumeration oracle.
//! - [`harness`]: a deterministic Monte Carlo replication engine that
//!   estimates expected policy regret, misidentification probability,
//!   empirical decay exponents, and allocation-share trajectories.
//!
//! Everything is `no_std`-compatible (`alloc` required); all randomness
//! flows through explicit counter-based streams ([`rng`]) so replications
//! are reproducible bit-for-bit regardless of execution order.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod allocate;
pub mod dp;
mod error;
pub mod harness;
pub mod ldp;
pub mod model;
pub mod posterior;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
