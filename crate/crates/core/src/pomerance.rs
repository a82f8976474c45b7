//! Solution-free sets built from large prime factors.
//!
//! For `C > 0` the set `{2 <= n <= N : p ln p > C n, p the largest prime of n}`
//! contains no `S` with `R(S) = 1` once `C` is suitably chosen; its reciprocal
//! sum therefore bounds `lambda(N)` from below. The constant is not explicit,
//! so membership is computed for any `C` and solution-freeness is checked by
//! exact search.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{recip_sum, IntSet, Rational};
use crate::sieve::FactorTable;
use crate::solver::{find_subset, SolverConfig, SolverStatus, Strategy};

/// Default node budget for [`verify_solution_free`].
pub const DEFAULT_VERIFY_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PomeranceReport {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub set: IntSet,
    pub recip: Rational,
    pub verified_free: Option<bool>,
    pub verify_budget: u64,
}

impl PomeranceReport {
    /// Runs [`verify_solution_free`] and records the outcome.
    pub fn verify(&mut self, budget: u64) -> Result<bool> {
        self.verify_budget = budget;
        let free = verify_solution_free(&self.set, budget)?;
        self.verified_free = Some(free);
        Ok(free)
    }
}

/// `p ln p > C n` with `p` the largest prime factor of `n`.
pub fn qualifies(n: u64, c: f64, t: &FactorTable) -> Result<bool> {
    let p = t.largest_prime(n)? as f64;
    Ok(p * p.ln() > c * n as f64)
}

fn check_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain(format!("C must be a positive real, got {c}")));
    }
    Ok(())
}

pub fn pomerance_set(n: u64, c: f64, t: &FactorTable) -> Result<PomeranceReport> {
    check_c(c)?;
    if n < 2 {
        return Err(domain(format!("N must be at least 2, got {n}")));
    }
    if n > t.bound() {
        return Err(Error::Range { value: n, bound: t.bound() });
    }
    let mut members = Vec::new();
    for m in 2..=n {
        if qualifies(m, c, t)? {
            members.push(m);
        }
    }
    let set = IntSet::from_sorted_unchecked(members);
    let recip = recip_sum(&set);
    Ok(PomeranceReport { n, c, set, recip, verified_free: None, verify_budget: 0 })
}

/// True when no `S` subset of `a` has `R(S) = 1`, decided by exhaustive
/// branch and bound. Running out of budget is an `Inconclusive` error.
pub fn verify_solution_free(a: &IntSet, budget: u64) -> Result<bool> {
    let cfg = SolverConfig::new(Strategy::DfsBnb, budget, true)?;
    let r = find_subset(a, &Rational::one(), &cfg)?;
    match r.status {
        SolverStatus::Found => Ok(false),
        SolverStatus::ExhaustedNone => Ok(true),
        SolverStatus::BudgetExceeded => Err(Error::Inconclusive { budget }),
    }
}

/// `(N, R(A_N))` for each requested `N`, `A_N` the set at constant `C`.
pub fn lambda_lower_curve(ns: &[u64], c: f64, t: &FactorTable) -> Result<Vec<(u64, Rational)>> {
    ns.iter()
        .map(|&n| {
            if n < 2 {
                check_c(c)?;
                return Ok((n, Rational::zero()));
            }
            Ok((n, pomerance_set(n, c, t)?.recip))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "C")]
    pub c: f64,
    /// Largest `N <= n_max` such that every set up to `N` was verified free.
    pub verified_up_to: u64,
    /// The first `N` whose set contains a solution, if any.
    pub first_solution_at: Option<u64>,
    pub witness: Option<IntSet>,
}

/// For each `C`, grows `N` from 2 and verifies each new set until a solution
/// appears or `n_max` is reached.
pub fn sweep_c(cs: &[f64], n_max: u64, budget: u64, t: &FactorTable) -> Result<Vec<SweepRow>> {
    if n_max > t.bound() {
        return Err(Error::Range { value: n_max, bound: t.bound() });
    }
    let cfg = SolverConfig::new(Strategy::DfsBnb, budget, true)?;
    cs.iter()
        .map(|&c| {
            check_c(c)?;
            let mut members = Vec::new();
            let mut row = SweepRow { c, verified_up_to: 1, first_solution_at: None, witness: None };
            for n in 2..=n_max {
                if qualifies(n, c, t)? {
                    members.push(n);
                    let set = IntSet::from_sorted_unchecked(members.clone());
                    let r = find_subset(&set, &Rational::one(), &cfg)?;
                    match r.status {
                        SolverStatus::Found => {
                            row.first_solution_at = Some(n);
                            row.witness = r.witness;
                            break;
                        }
                        SolverStatus::BudgetExceeded => break,
                        SolverStatus::ExhaustedNone => {}
                    }
                }
                row.verified_up_to = n;
            }
            Ok(row)
        })
        .collect()
}
