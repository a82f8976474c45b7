//! Exact search and counting for subsets `S` of a finite set with `R(S)`
//! equal to a target rational.
//!
//! Every strategy works on integer weights: with `L` a common multiple of the
//! elements and the target denominator, element `n` weighs `L/n` and the
//! target becomes the integer `target * L`. Weights stay in `u128` when the
//! totals fit and switch to `BigUint` otherwise.
//!
//! Three strategies are provided and are expected to agree exactly:
//!
//! - `DfsBnb`: depth-first over elements in ascending order (largest
//!   reciprocal first), include before exclude, cutting any branch whose
//!   remaining suffix sum cannot cover the deficit. Before searching, elements
//!   that cannot occur in any solution are removed by a p-adic argument (see
//!   [`valuation_prune`]).
//! - `MeetMiddle`: enumerate both halves (alternating ranks), join on exact
//!   sums through a hash table.
//! - `ResidueDp`: dynamic programming over reachable partial sums, one layer
//!   per element.

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Rem, Sub};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{lcm_bounded, lcm_set, recip_sum, IntSet, Rational};

/// Largest modulus for residue tables and `ResidueDp` under `Auto`.
pub const DP_MODULUS_MAX: u64 = 10_000_000;
/// Largest set that counting falls back to enumerating when the lcm is too big.
pub const EXHAUSTIVE_MAX_LEN: usize = 24;
/// Largest `N` accepted by [`lambda_exact`].
pub const LAMBDA_MAX_N: u64 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DfsBnb,
    MeetMiddle,
    ResidueDp,
    Auto,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfs_bnb" | "dfs" => Ok(Strategy::DfsBnb),
            "meet_middle" | "mitm" => Ok(Strategy::MeetMiddle),
            "residue_dp" | "dp" => Ok(Strategy::ResidueDp),
            "auto" => Ok(Strategy::Auto),
            _ => Err(Error::Parse(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub strategy: Strategy,
    pub node_budget: u64,
    /// Sequential traversal with the canonical witness. When false, `DfsBnb`
    /// fans subtrees out over the rayon pool; status and counts are unchanged
    /// but the witness may differ.
    pub deterministic: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { strategy: Strategy::Auto, node_budget: 50_000_000, deterministic: true }
    }
}

impl SolverConfig {
    pub fn new(strategy: Strategy, node_budget: u64, deterministic: bool) -> Result<Self> {
        if node_budget == 0 {
            return Err(domain("node budget must be positive"));
        }
        Ok(SolverConfig { strategy, node_budget, deterministic })
    }

    pub fn with_strategy(strategy: Strategy) -> Self {
        SolverConfig { strategy, ..SolverConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Found,
    ExhaustedNone,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverResult {
    pub status: SolverStatus,
    pub witness: Option<IntSet>,
    #[serde(rename = "nodes")]
    pub nodes_explored: u64,
}

impl SolverResult {
    fn none(nodes: u64) -> Self {
        SolverResult { status: SolverStatus::ExhaustedNone, witness: None, nodes_explored: nodes }
    }

    fn budget(nodes: u64) -> Self {
        SolverResult { status: SolverStatus::BudgetExceeded, witness: None, nodes_explored: nodes }
    }

    fn found(witness: IntSet, nodes: u64) -> Self {
        SolverResult { status: SolverStatus::Found, witness: Some(witness), nodes_explored: nodes }
    }
}

/// Outcome of a counting run under a budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountOutcome {
    Exact(u128),
    BudgetExceeded,
}

// ---------------------------------------------------------------------------
// integer weights

pub(crate) trait Weight:
    Clone
    + Ord
    + Hash
    + Debug
    + Zero
    + Send
    + Sync
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Rem<&'a Self, Output = Self>
{
}

impl<T> Weight for T where
    T: Clone
        + Ord
        + Hash
        + Debug
        + Zero
        + Send
        + Sync
        + for<'a> Add<&'a T, Output = T>
        + for<'a> Sub<&'a T, Output = T>
        + for<'a> Rem<&'a T, Output = T>
{
}

/// `weights[i] = L / elems[i]`, `target = target * L`.
enum Scaled {
    Small { weights: Vec<u128>, target: u128 },
    Big { weights: Vec<BigUint>, target: BigUint },
}

/// `None` when no subset can reach the target because its reduced
/// denominator does not divide `lcm(elems)`.
fn scale(elems: &[u64], target: &Rational) -> Option<Scaled> {
    let l = elems.iter().fold(BigUint::one(), |acc, &n| acc.lcm(&BigUint::from(n)));
    let den = target.denom().to_biguint().expect("positive denominator");
    if !(&l % &den).is_zero() {
        return None;
    }
    let num = target.numer().to_biguint().expect("nonnegative target");
    let t = num * (&l / den);
    let weights: Vec<BigUint> = elems.iter().map(|&n| &l / n).collect();
    let total: BigUint = weights.iter().sum::<BigUint>() + &t;
    if total.bits() <= 126 {
        Some(Scaled::Small {
            weights: weights.iter().map(|w| w.to_u128().unwrap()).collect(),
            target: t.to_u128().unwrap(),
        })
    } else {
        Some(Scaled::Big { weights, target: t })
    }
}

macro_rules! with_scaled {
    ($scaled:expr, |$w:ident, $t:ident| $body:expr) => {
        match $scaled {
            Scaled::Small { weights: $w, target: $t } => $body,
            Scaled::Big { weights: $w, target: $t } => $body,
        }
    };
}

fn select(elems: &[u64], idx: &[usize]) -> IntSet {
    IntSet::from_sorted_unchecked(idx.iter().map(|&i| elems[i]).collect())
}

fn check_target(target: &Rational) -> Result<()> {
    if target.is_negative() {
        return Err(domain(format!("target {target} is negative")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// p-adic elimination

fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut r = 0;
            while n.is_multiple_of(d) {
                n /= d;
                r += 1;
            }
            out.push((d, r));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(p));
    e.x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// Whether some nonempty sub-multiset of `units` sums to 0 mod `p`. Gives up
/// (answers true, the conservative side) when the reachable set gets large.
fn has_zero_subset_sum(units: &[u64], p: u64) -> bool {
    const CAP: usize = 1 << 22;
    if units.len() as u64 >= p {
        // Erdos-Ginzburg-Ziv style pigeonhole on prefix sums
        return true;
    }
    let mut reach: HashSet<u64> = HashSet::new();
    for &u in units {
        let mut next: Vec<u64> = reach.iter().map(|&r| (r + u) % p).collect();
        next.push(u % p);
        if next.contains(&0) {
            return true;
        }
        reach.extend(next);
        if reach.len() > CAP {
            return true;
        }
    }
    false
}

/// Removes elements that cannot belong to any `S` with `R(S) = target`.
///
/// Fix a prime `p` and let `a` be the largest `p`-adic valuation among the
/// candidates. If `a` exceeds the valuation of the target's denominator, then
/// in any solution that uses a level-`a` element, the level-`a` elements it
/// uses satisfy `sum (n/p^a)^(-1) = 0 (mod p)`; otherwise `p^a` would survive
/// in the denominator of `R(S)`. A level with no nonempty zero-sum subset is
/// therefore dropped, and the scan repeats until nothing changes.
pub fn valuation_prune(elems: &[u64], target: &Rational) -> Vec<u64> {
    if target.is_zero() {
        return Vec::new();
    }
    let den = target.denom().to_biguint().expect("positive");
    let mut alive: Vec<u64> = elems.to_vec();
    let mut primes: Vec<u64> = elems
        .iter()
        .flat_map(|&n| trial_factor(n).into_iter().map(|(p, _)| p))
        .collect();
    primes.sort_unstable();
    primes.dedup();
    primes.reverse();
    loop {
        let mut changed = false;
        for &p in &primes {
            let b = {
                let mut d = den.clone();
                let bp = BigUint::from(p);
                let mut v = 0u32;
                while (&d % &bp).is_zero() {
                    d /= &bp;
                    v += 1;
                }
                v
            };
            let Some(a) = alive.iter().map(|&n| valuation(n, p)).max() else {
                break;
            };
            if a <= b {
                continue;
            }
            let pa = p.pow(a);
            let units: Vec<u64> = alive
                .iter()
                .filter(|&&n| valuation(n, p) == a)
                .map(|&n| inverse_mod((n / pa) % p, p))
                .collect();
            if !has_zero_subset_sum(&units, p) {
                alive.retain(|&n| valuation(n, p) != a);
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

// ---------------------------------------------------------------------------
// depth-first branch and bound

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Find,
    Count,
}

struct Dfs<'a, W> {
    w: &'a [W],
    suffix: &'a [W],
    mode: Mode,
    budget: u64,
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
    chosen: Vec<usize>,
    witness: Option<Vec<usize>>,
    count: u128,
    exceeded: bool,
}

impl<'a, W: Weight> Dfs<'a, W> {
    fn new(w: &'a [W], suffix: &'a [W], mode: Mode, budget: u64, nodes: &'a AtomicU64, stop: &'a AtomicBool) -> Self {
        Dfs { w, suffix, mode, budget, nodes, stop, chosen: Vec::new(), witness: None, count: 0, exceeded: false }
    }

    /// Returns true when the whole search should halt.
    fn run(&mut self, i: usize, deficit: W) -> bool {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.exceeded = true;
            self.stop.store(true, Ordering::Relaxed);
            return true;
        }
        if self.stop.load(Ordering::Relaxed) {
            return true;
        }
        if deficit.is_zero() {
            self.count += 1;
            if self.mode == Mode::Find {
                self.witness = Some(self.chosen.clone());
                self.stop.store(true, Ordering::Relaxed);
                return true;
            }
            return false;
        }
        if i == self.w.len() || self.suffix[i] < deficit {
            return false;
        }
        if self.w[i] <= deficit {
            self.chosen.push(i);
            let halt = self.run(i + 1, deficit.clone() - &self.w[i]);
            self.chosen.pop();
            if halt {
                return true;
            }
        }
        self.run(i + 1, deficit)
    }
}

fn suffix_sums<W: Weight>(w: &[W]) -> Vec<W> {
    let mut s = vec![W::zero(); w.len() + 1];
    for i in (0..w.len()).rev() {
        s[i] = s[i + 1].clone() + &w[i];
    }
    s
}

struct Search {
    witness: Option<Vec<usize>>,
    count: u128,
    exceeded: bool,
    nodes: u64,
}

fn dfs_sequential<W: Weight>(w: &[W], target: &W, mode: Mode, budget: u64) -> Search {
    let suffix = suffix_sums(w);
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let mut d = Dfs::new(w, &suffix, mode, budget, &nodes, &stop);
    d.run(0, target.clone());
    Search { witness: d.witness, count: d.count, exceeded: d.exceeded, nodes: nodes.into_inner().min(budget) }
}

/// Splits the first levels of the tree into independent subtrees and runs them
/// on the rayon pool.
fn dfs_parallel<W: Weight>(w: &[W], target: &W, mode: Mode, budget: u64) -> Search {
    let suffix = suffix_sums(w);
    let depth = w.len().min(8);
    let mut frontier: Vec<(Vec<usize>, W)> = Vec::new();
    let mut stack = vec![(0usize, Vec::<usize>::new(), target.clone())];
    let mut sequential_hits: u128 = 0;
    let mut first_hit: Option<Vec<usize>> = None;
    while let Some((i, chosen, deficit)) = stack.pop() {
        if deficit.is_zero() {
            sequential_hits += 1;
            first_hit.get_or_insert(chosen);
            continue;
        }
        if i == w.len() || suffix[i] < deficit {
            continue;
        }
        if i == depth {
            frontier.push((chosen, deficit));
            continue;
        }
        // push exclude first so include is explored first
        stack.push((i + 1, chosen.clone(), deficit.clone()));
        if w[i] <= deficit {
            let mut c = chosen;
            c.push(i);
            stack.push((i + 1, c, deficit - &w[i]));
        }
    }
    if mode == Mode::Find && first_hit.is_some() {
        return Search { witness: first_hit, count: 1, exceeded: false, nodes: 1 };
    }
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let results: Vec<(Option<Vec<usize>>, u128, bool)> = frontier
        .par_iter()
        .map(|(prefix, deficit)| {
            let mut d = Dfs::new(w, &suffix, mode, budget, &nodes, &stop);
            d.chosen = prefix.clone();
            d.run(depth, deficit.clone());
            (d.witness, d.count, d.exceeded)
        })
        .collect();
    let exceeded = results.iter().any(|r| r.2);
    let witness = results.iter().find_map(|r| r.0.clone());
    let count = results.iter().map(|r| r.1).sum::<u128>() + sequential_hits;
    let exceeded = exceeded && (mode == Mode::Count || witness.is_none());
    Search { witness, count, exceeded, nodes: nodes.into_inner().min(budget) }
}

fn dfs_search<W: Weight>(w: &[W], target: &W, mode: Mode, cfg: &SolverConfig) -> Search {
    if cfg.deterministic {
        dfs_sequential(w, target, mode, cfg.node_budget)
    } else {
        dfs_parallel(w, target, mode, cfg.node_budget)
    }
}

// ---------------------------------------------------------------------------
// meet in the middle

/// All subset sums `<= cap` of the given indices, with the index bitmask.
fn half_sums<W: Weight>(w: &[W], idx: &[usize], cap: &W, nodes: &mut u64, budget: u64) -> Option<Vec<(W, u64)>> {
    let mut sums: Vec<(W, u64)> = vec![(W::zero(), 0)];
    for (bit, &i) in idx.iter().enumerate() {
        let len = sums.len();
        for k in 0..len {
            let s = sums[k].0.clone() + &w[i];
            if &s <= cap {
                *nodes += 1;
                if *nodes > budget {
                    return None;
                }
                sums.push((s, sums[k].1 | (1 << bit)));
            }
        }
    }
    Some(sums)
}

struct Joined {
    count: u128,
    best: Option<Vec<u64>>,
    exceeded: bool,
    nodes: u64,
}

fn meet_middle<W: Weight>(elems: &[u64], w: &[W], target: &W, want_witness: bool, budget: u64) -> Joined {
    let n = w.len();
    if n > 120 {
        return Joined { count: 0, best: None, exceeded: true, nodes: budget };
    }
    let left: Vec<usize> = (0..n).step_by(2).collect();
    let right: Vec<usize> = (1..n).step_by(2).collect();
    let mut nodes = 0u64;
    let fail = |nodes| Joined { count: 0, best: None, exceeded: true, nodes };
    let Some(ls) = half_sums(w, &left, target, &mut nodes, budget) else {
        return fail(budget);
    };
    let Some(rs) = half_sums(w, &right, target, &mut nodes, budget) else {
        return fail(budget);
    };
    let mut table: HashMap<W, Vec<u64>> = HashMap::with_capacity(rs.len());
    for (s, m) in rs {
        table.entry(s).or_default().push(m);
    }
    let mut count = 0u128;
    let mut best: Option<Vec<u64>> = None;
    for (s, lm) in &ls {
        let need = target.clone() - s;
        if let Some(rms) = table.get(&need) {
            count += rms.len() as u128;
            if want_witness {
                for &rm in rms {
                    nodes += 1;
                    let mut cand: Vec<u64> = (0..left.len())
                        .filter(|b| lm >> b & 1 == 1)
                        .map(|b| elems[left[b]])
                        .chain((0..right.len()).filter(|b| rm >> b & 1 == 1).map(|b| elems[right[b]]))
                        .collect();
                    cand.sort_unstable();
                    if best.as_ref().is_none_or(|b| cand < *b) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    Joined { count, best, exceeded: false, nodes }
}

// ---------------------------------------------------------------------------
// dynamic programming over partial sums

struct Layers<W> {
    /// `layers[i]` maps each sum reachable from elements `i..` to its count.
    layers: Vec<HashMap<W, u128>>,
    nodes: u64,
}

fn dp_layers<W: Weight>(w: &[W], target: &W, budget: u64) -> Option<Layers<W>> {
    let n = w.len();
    let mut layers: Vec<HashMap<W, u128>> = vec![HashMap::new(); n + 1];
    layers[n].insert(W::zero(), 1);
    let mut nodes = 1u64;
    for i in (0..n).rev() {
        let mut next = layers[i + 1].clone();
        for (s, &c) in &layers[i + 1] {
            let t = s.clone() + &w[i];
            if &t <= target {
                *next.entry(t).or_insert(0) += c;
            }
        }
        nodes += next.len() as u64;
        if nodes > budget {
            return None;
        }
        layers[i] = next;
    }
    Some(Layers { layers, nodes })
}

fn dp_witness<W: Weight>(w: &[W], target: &W, l: &Layers<W>) -> Option<Vec<usize>> {
    if !l.layers[0].contains_key(target) {
        return None;
    }
    let mut rem = target.clone();
    let mut chosen = Vec::new();
    for i in 0..w.len() {
        if w[i] <= rem {
            let after = rem.clone() - &w[i];
            if l.layers[i + 1].contains_key(&after) {
                chosen.push(i);
                rem = after;
            }
        }
    }
    debug_assert!(rem.is_zero());
    Some(chosen)
}

// ---------------------------------------------------------------------------
// public operations

fn resolve_auto(elems: &[u64]) -> Strategy {
    if lcm_bounded(elems.iter().copied(), DP_MODULUS_MAX).is_some() {
        Strategy::ResidueDp
    } else {
        Strategy::DfsBnb
    }
}

/// Searches for `S` subset of `a` with `R(S) = target`.
///
/// With `deterministic` set the witness is the lexicographically smallest
/// solution in ascending element order, whichever strategy runs.
pub fn find_subset(a: &IntSet, target: &Rational, cfg: &SolverConfig) -> Result<SolverResult> {
    check_target(target)?;
    if target.is_zero() {
        return Ok(SolverResult::found(IntSet::empty(), 1));
    }
    let strategy = match cfg.strategy {
        Strategy::Auto => resolve_auto(a.as_slice()),
        s => s,
    };
    let elems: Vec<u64> = match strategy {
        Strategy::DfsBnb => valuation_prune(a.as_slice(), target),
        _ => a.as_slice().to_vec(),
    };
    let Some(scaled) = scale(&elems, target) else {
        return Ok(SolverResult::none(1));
    };
    let budget = cfg.node_budget;
    Ok(with_scaled!(&scaled, |w, t| match strategy {
        Strategy::DfsBnb | Strategy::Auto => {
            let s = dfs_search(w, t, Mode::Find, cfg);
            match s.witness {
                Some(idx) => SolverResult::found(select(&elems, &idx), s.nodes),
                None if s.exceeded => SolverResult::budget(s.nodes),
                None => SolverResult::none(s.nodes),
            }
        }
        Strategy::MeetMiddle => {
            let j = meet_middle(&elems, w, t, true, budget);
            match j.best {
                _ if j.exceeded => SolverResult::budget(j.nodes),
                Some(v) => SolverResult::found(IntSet::from_sorted_unchecked(v), j.nodes),
                None => SolverResult::none(j.nodes),
            }
        }
        Strategy::ResidueDp => match dp_layers(w, t, budget) {
            None => SolverResult::budget(budget),
            Some(l) => match dp_witness(w, t, &l) {
                Some(idx) => SolverResult::found(select(&elems, &idx), l.nodes),
                None => SolverResult::none(l.nodes),
            },
        },
    }))
}

/// Counts `S` subset of `a` with `R(S) = target` using one fixed strategy.
pub fn count_subsets_with(a: &IntSet, target: &Rational, cfg: &SolverConfig) -> Result<CountOutcome> {
    check_target(target)?;
    if target.is_zero() {
        return Ok(CountOutcome::Exact(1));
    }
    if a.len() > 127 {
        return Err(Error::Resource("counts are kept in 128 bits; set has more than 127 elements".into()));
    }
    let strategy = match cfg.strategy {
        Strategy::Auto => resolve_auto(a.as_slice()),
        s => s,
    };
    let elems: Vec<u64> = match strategy {
        Strategy::DfsBnb => valuation_prune(a.as_slice(), target),
        _ => a.as_slice().to_vec(),
    };
    let Some(scaled) = scale(&elems, target) else {
        return Ok(CountOutcome::Exact(0));
    };
    let budget = cfg.node_budget;
    Ok(with_scaled!(&scaled, |w, t| match strategy {
        Strategy::DfsBnb | Strategy::Auto => {
            let s = dfs_search(w, t, Mode::Count, cfg);
            if s.exceeded {
                CountOutcome::BudgetExceeded
            } else {
                CountOutcome::Exact(s.count)
            }
        }
        Strategy::MeetMiddle => {
            let j = meet_middle(&elems, w, t, false, budget);
            if j.exceeded {
                CountOutcome::BudgetExceeded
            } else {
                CountOutcome::Exact(j.count)
            }
        }
        Strategy::ResidueDp => match dp_layers(w, t, budget) {
            None => CountOutcome::BudgetExceeded,
            Some(l) => CountOutcome::Exact(l.layers[0].get(t).copied().unwrap_or(0)),
        },
    }))
}

/// Exact number of `S` subset of `a` with `R(S) = target`.
///
/// Uses the partial-sum DP when `lcm(a)` is at most [`DP_MODULUS_MAX`], and
/// meet-in-the-middle when `|a|` is at most [`EXHAUSTIVE_MAX_LEN`].
pub fn count_subsets(a: &IntSet, target: &Rational) -> Result<u128> {
    let strategy = if lcm_bounded(a.iter(), DP_MODULUS_MAX).is_some() {
        Strategy::ResidueDp
    } else if a.len() <= EXHAUSTIVE_MAX_LEN {
        Strategy::MeetMiddle
    } else {
        return Err(Error::Resource(format!(
            "{} elements and lcm above {DP_MODULUS_MAX}: too large to count exactly",
            a.len()
        )));
    };
    let cfg = SolverConfig { strategy, node_budget: u64::MAX, deterministic: true };
    match count_subsets_with(a, target, &cfg)? {
        CountOutcome::Exact(c) => Ok(c),
        CountOutcome::BudgetExceeded => unreachable!("unbounded budget"),
    }
}

/// `F(A)`: the number of `S` subset of `a` (the empty set included) with
/// `k R(S)` an integer.
///
/// With `L = lcm(a)`, `k R(S)` is an integer iff `sum over S of k L/n = 0 (mod L)`,
/// so this counts the residue classes modulo `L` directly.
pub fn count_integral(a: &IntSet, k: u64) -> Result<u128> {
    if k == 0 {
        return Err(domain("k must be positive"));
    }
    if a.len() > 127 {
        return Err(Error::Resource("counts are kept in 128 bits; set has more than 127 elements".into()));
    }
    if let Some(l) = lcm_bounded(a.iter(), DP_MODULUS_MAX) {
        let shifts: Vec<usize> = a.iter().map(|n| ((k % n) * (l / n) % l) as usize).collect();
        return Ok(residue_count(&shifts, l as usize));
    }
    if a.len() > EXHAUSTIVE_MAX_LEN {
        return Err(Error::Resource(format!(
            "{} elements and lcm above {DP_MODULUS_MAX}: too large to count exactly",
            a.len()
        )));
    }
    let l = lcm_set(a);
    let kb = BigUint::from(k);
    let shifts: Vec<BigUint> = a.iter().map(|n| (&kb * (&l / n)) % &l).collect();
    if l.bits() <= 120 {
        let l = l.to_u128().unwrap();
        let shifts: Vec<u128> = shifts.iter().map(|s| s.to_u128().unwrap()).collect();
        Ok(residue_count_mitm(&shifts, &l))
    } else {
        Ok(residue_count_mitm(&shifts, &l))
    }
}

fn residue_count(shifts: &[usize], l: usize) -> u128 {
    let mut cur = vec![0u128; l];
    cur[0] = 1;
    let mut next = vec![0u128; l];
    for &s in shifts {
        if s == 0 {
            cur.iter_mut().for_each(|c| *c *= 2);
            continue;
        }
        for r in 0..l {
            let from = if r >= s { r - s } else { r + l - s };
            next[r] = cur[r] + cur[from];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur[0]
}

fn residue_count_mitm<W: Weight>(shifts: &[W], l: &W) -> u128 {
    let sums = |part: &[W]| -> Vec<W> {
        let mut v = vec![W::zero()];
        for s in part {
            let len = v.len();
            for k in 0..len {
                let t = (v[k].clone() + s) % l;
                v.push(t);
            }
        }
        v
    };
    let (lp, rp) = shifts.split_at(shifts.len() / 2);
    let mut table: HashMap<W, u128> = HashMap::new();
    for r in sums(rp) {
        *table.entry(r).or_insert(0) += 1;
    }
    sums(lp)
        .into_iter()
        .map(|s| {
            let need = if s.is_zero() { W::zero() } else { l.clone() - &s };
            table.get(&need).copied().unwrap_or(0)
        })
        .sum()
}

/// Merges pairwise-disjoint solutions `R(S_i) = 1/d_i`: as soon as some `d`
/// has been seen `d` times, returns the union of those `d` sets (earliest
/// indices first). `None` when no value reaches its multiplicity.
pub fn combine_solutions(parts: &[(IntSet, u64)]) -> Result<Option<IntSet>> {
    for (i, (s, d)) in parts.iter().enumerate() {
        if *d == 0 {
            return Err(domain(format!("part {i}: d must be positive")));
        }
        if recip_sum(s) != Rational::recip_of(*d) {
            return Err(domain(format!("part {i}: R(S) = {} is not 1/{d}", recip_sum(s))));
        }
        for (j, (t, _)) in parts[..i].iter().enumerate() {
            if !s.is_disjoint(t) {
                return Err(domain(format!("part {i}: overlaps part {j}")));
            }
        }
    }
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, (_, d)) in parts.iter().enumerate() {
        let v = seen.entry(*d).or_default();
        v.push(i);
        if v.len() as u64 == *d {
            let union = v.iter().fold(IntSet::empty(), |acc, &j| acc.union(&parts[j].0));
            return Ok(Some(union));
        }
    }
    Ok(None)
}

/// `lambda(N)`: the largest `R(A)` over `A` subset of `{1..N}` containing no
/// `S` with `R(S) = 1`, with one maximizing set.
///
/// `{1}` itself sums to 1, so 1 never belongs to such a set. Branches over
/// `n = 2..N` (include first) keeping the incremental certificate that no
/// subset of the chosen prefix sums to 1; bounded by the current sum plus the
/// harmonic tail. Ties keep the first maximizer found.
pub fn lambda_exact(n: u64) -> Result<(Rational, IntSet)> {
    lambda_exact_with_limit(n, LAMBDA_MAX_N)
}

pub fn lambda_exact_with_limit(n: u64, max_n: u64) -> Result<(Rational, IntSet)> {
    if n > max_n {
        return Err(Error::Resource(format!("lambda search is limited to N <= {max_n}, got {n}")));
    }
    if n < 2 {
        return Ok((Rational::zero(), IntSet::empty()));
    }
    let elems: Vec<u64> = (2..=n).collect();
    let l = lcm_bounded(elems.iter().copied(), u64::MAX >> 8)
        .ok_or_else(|| Error::Resource("lcm(2..N) overflows".into()))? as u128;
    let w: Vec<u128> = elems.iter().map(|&m| l / m as u128).collect();
    let tail = suffix_sums(&w);
    let mut search = LambdaSearch { w: &w, tail: &tail, l, chosen: Vec::new(), best: 0, best_set: Vec::new() };
    search.run(0, 0);
    let value = Rational::new(BigInt::from(search.best), BigInt::from(l))?;
    Ok((value, select(&elems, &search.best_set)))
}

struct LambdaSearch<'a> {
    w: &'a [u128],
    tail: &'a [u128],
    l: u128,
    chosen: Vec<usize>,
    best: u128,
    best_set: Vec<usize>,
}

impl LambdaSearch<'_> {
    fn run(&mut self, i: usize, cur: u128) {
        if cur > self.best {
            self.best = cur;
            self.best_set = self.chosen.clone();
        }
        if i == self.w.len() || cur + self.tail[i] <= self.best {
            return;
        }
        if !self.completes_solution(i) {
            self.chosen.push(i);
            self.run(i + 1, cur + self.w[i]);
            self.chosen.pop();
        }
        self.run(i + 1, cur);
    }

    /// Whether adding element `i` creates a subset summing to 1. The chosen
    /// prefix is solution-free, so any new solution must use element `i`.
    fn completes_solution(&self, i: usize) -> bool {
        let deficit = self.l - self.w[i];
        if deficit == 0 {
            return true;
        }
        let w: Vec<u128> = self.chosen.iter().map(|&j| self.w[j]).collect();
        let s = dfs_sequential(&w, &deficit, Mode::Find, u64::MAX);
        s.witness.is_some()
    }
}
