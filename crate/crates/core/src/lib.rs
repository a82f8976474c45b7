//! Exact arithmetic for sums of reciprocals of integers.
//!
//! The crate computes `R(A) = sum 1/n` over finite sets, splits sets by exact
//! prime-power divisors, searches for subsets with a prescribed reciprocal
//! sum, counts such subsets through an exponential-sum identity, and runs the
//! greedy pruning and sieve constructions that go with them. Every quantity
//! that can be exact is a [`Rational`]; floating point appears only in
//! diagnostics.

pub mod decomposition;
pub mod error;
pub mod filters;
pub mod fourier;
pub mod pomerance;
pub mod pruning;
pub mod rational;
pub mod sieve;
pub mod solver;

pub use decomposition::Decomposition;
pub use error::{Error, Result};
pub use fourier::{arc_classify, cosine_weight, fourier_count, interval_coverage, ArcDiagnostics, IntervalReport};
pub use pomerance::{lambda_lower_curve, pomerance_set, verify_solution_free, PomeranceReport};
pub use pruning::{prune_ppower, prune_to_window, PruneTrace};
pub use rational::{lcm_set, recip_sum, IntSet, Rational};
pub use sieve::{FactorTable, Factorization};
pub use solver::{
    combine_solutions, count_integral, count_subsets, find_subset, lambda_exact, SolverConfig, SolverResult,
    SolverStatus, Strategy,
};
