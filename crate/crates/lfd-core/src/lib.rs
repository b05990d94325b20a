//! Exact policy inference from discrete demonstrations.
//!
//! A policy here is a single-state transducer: an unordered set of
//! `(trigger feature-set, action)` transitions, where a transition fires on an
//! environment state whenever its trigger is a subset of the state. The crate
//! provides:
//!
//! - [`model`]: the domain entities (features, actions, states, demonstrations,
//!   transitions, policies) and the decidable predicates over them — triggering,
//!   policy execution, validity, demonstration consistency, policy-policy
//!   consistency modulo a demonstration, derivation distance, and parameter
//!   extraction.
//! - [`solve`]: exact solvers for the batch and incremental inference problems,
//!   as a reference enumerator and an optimized backtracking search that must
//!   agree with it, both returning the canonically least solution.
//! - [`reduce`]: graph machinery, reductions from Dominating Set that generate
//!   provably hard instances, a brute-force dominating-set oracle, and
//!   extraction of dominating sets back out of policy solutions.
//! - [`lattice`]: an intractability-map engine that closes raw (in)tractability
//!   facts over a parameter lattice and renders the resulting grids.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default features
//! enable `std` (wall-clock solver stats) and `parallel` (multi-worker search).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod assignment;

pub mod lattice;
pub mod model;
pub mod reduce;
pub mod sample;
pub mod solve;

pub use model::{
    derivation_distance, merge_positive_singletons, Action, DemoKind, Demonstration,
    DerivationDistance, EnvState, Feature, ModelError, ParameterVector, Policy, ProblemInstance,
    Spaces, Step, Transition, Variant,
};
pub use solve::{solve, solve_min_t, SolveOutcome, SolveStrategy, StrategyKind};
