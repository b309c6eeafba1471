//! A deterministic laboratory for measuring how genetic-programming effort
//! scales with the density of working solutions.
//!
//! The crate provides several evolvable problem systems behind one
//! [`System`](system::System) trait:
//!
//! * [`linear`] — fixed-length linear programs sorting integer lists on a
//!   small register VM (three statement sets),
//! * [`tree`] — expression trees computing n-bit parity (five statement
//!   sets, optional subroutines),
//! * [`vector`] — data-like genomes: Gaussian, "highest", linear and binary
//!   fitness landscapes plus their twisted (anti-parallel) variants.
//!
//! The [`engine`] runs generational evolution with truncation or tournament
//! selection and reports the median number of generations needed to reach a
//! working genome. The [`density`] module measures the fraction of working
//! genomes in a system's genome space, by Monte Carlo sampling or closed
//! form where one exists. The [`analysis`] module computes the scaling
//! statistics `K = G*sqrt(D)` and `K'(delta) = G*sqrt(D2)/((n+delta)ln(n+delta))`.
//!
//! Every stochastic code path is driven by a seedable generator
//! ([`rng::EvoRng`]) with documented stream splitting, so any run is
//! bit-reproducible at any worker count.

pub mod analysis;
pub mod density;
pub mod engine;
pub mod error;
pub mod linear;
pub mod rng;
pub mod system;
pub mod tree;
pub mod vector;

pub use engine::{evolve, run, EvolutionOutcome, EvolutionParams, RunSummary, SelectionScheme};
pub use error::{Error, Result};
pub use rng::{rng_from_seed, split_seed, EvoRng};
pub use system::System;
