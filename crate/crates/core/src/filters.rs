//! Arithmetic filters on individual integers, the two sieve-set generators,
//! and exact Mertens-type sums over primes and prime powers.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::rational::{IntSet, Rational};
use crate::sieve::FactorTable;

/// Thresholds for the three per-element conditions: a divisor pair inside
/// `[y, z]`, prime-power smoothness, and a window on `omega(n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterSpec {
    pub smooth_bound: f64,
    pub y: f64,
    pub z: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl FilterSpec {
    pub fn new(smooth_bound: f64, y: f64, z: f64, omega_lo: f64, omega_hi: f64) -> Result<Self> {
        if !(1.0 <= y && y <= z) {
            return Err(domain(format!("need 1 <= y <= z, got y={y}, z={z}")));
        }
        if !(omega_lo <= omega_hi) {
            return Err(domain(format!("empty omega window [{omega_lo}, {omega_hi}]")));
        }
        if !(smooth_bound >= 2.0) {
            return Err(domain(format!("smoothness bound must be at least 2, got {smooth_bound}")));
        }
        Ok(FilterSpec { smooth_bound, y, z, omega_lo, omega_hi })
    }

    /// The asymptotic parameter choices at scale `n`, natural logarithms
    /// throughout. At any practical `n` the divisor window `[1, (ln n)^(1/500)]`
    /// is degenerate; the preset is there to make that visible.
    pub fn preset(n: u64) -> Result<Self> {
        let p = Presets::at(n)?;
        FilterSpec::new(p.smooth_bound.max(2.0), 1.0, p.z_max.max(1.0), p.omega_lo, p.omega_hi)
    }

    pub fn passes(&self, n: u64, t: &FactorTable) -> Result<bool> {
        Ok(passes_smoothness(n, self.smooth_bound, t)?
            && omega_in_range(n, self.omega_lo, self.omega_hi, t)?
            && has_divisor_pair(n, self.y, self.z, t)?)
    }
}

/// Named parameter values as functions of the scale `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Presets {
    pub n: u64,
    pub log_log_n: f64,
    /// `n^(1 - 6/ln ln n)`
    pub smooth_bound: f64,
    /// `n^(1 - 1/ln ln n)`, the lower end of the working range
    pub range_lo: f64,
    /// `(ln n)^(1/500)`
    pub z_max: f64,
    /// `0.99 ln ln n`
    pub omega_lo: f64,
    /// `2 ln ln n`
    pub omega_hi: f64,
    /// `(ln n)^(-1/100)`, the per-q floor used when pruning
    pub prune_floor: f64,
    /// `(ln n)^(-1/200)`
    pub mass_slack: f64,
}

impl Presets {
    pub fn at(n: u64) -> Result<Self> {
        if n < 16 {
            return Err(domain("presets need n >= 16 so that ln ln n > 1"));
        }
        let ln = (n as f64).ln();
        let lln = ln.ln();
        let nf = n as f64;
        Ok(Presets {
            n,
            log_log_n: lln,
            smooth_bound: nf.powf(1.0 - 6.0 / lln),
            range_lo: nf.powf(1.0 - 1.0 / lln),
            z_max: ln.powf(1.0 / 500.0),
            omega_lo: 0.99 * lln,
            omega_hi: 2.0 * lln,
            prune_floor: ln.powf(-1.0 / 100.0),
            mass_slack: ln.powf(-1.0 / 200.0),
        })
    }
}

/// Every exact prime power of `n` is at most `bound`.
pub fn passes_smoothness(n: u64, bound: f64, t: &FactorTable) -> Result<bool> {
    Ok(t.factorize(n)?.prime_powers().all(|q| q as f64 <= bound))
}

/// Divisors of `n` not exceeding `cap`, ascending.
fn divisors_up_to(n: u64, cap: u64, t: &FactorTable) -> Result<Vec<u64>> {
    if n <= t.bound() && n >= 2 {
        let mut divs = vec![1u64];
        for &(p, r) in t.factorize(n)?.pairs() {
            let len = divs.len();
            for i in 0..len {
                let mut d = divs[i];
                for _ in 0..r {
                    d = match d.checked_mul(p) {
                        Some(d) if d <= cap => d,
                        _ => break,
                    };
                    divs.push(d);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    } else {
        Ok((1..=cap.min(n)).filter(|d| n.is_multiple_of(*d)).collect())
    }
}

/// There are divisors `d1, d2` of `n` with `y <= d1` and `4 d1 <= d2 <= z`.
pub fn has_divisor_pair(n: u64, y: f64, z: f64, t: &FactorTable) -> Result<bool> {
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    if z < 1.0 {
        return Ok(false);
    }
    let cap = if z >= u64::MAX as f64 { u64::MAX } else { z.floor() as u64 };
    let divs = divisors_up_to(n, cap, t)?;
    let Some(&d1) = divs.iter().find(|&&d| d as f64 >= y) else {
        return Ok(false);
    };
    let largest = *divs.last().expect("1 always divides n");
    Ok(largest as f64 >= 4.0 * d1 as f64)
}

/// `lo <= omega(n) <= hi`.
pub fn omega_in_range(n: u64, lo: f64, hi: f64, t: &FactorTable) -> Result<bool> {
    let w = t.omega(n)? as f64;
    Ok(lo <= w && w <= hi)
}

fn check_range(lo: u64, hi: u64, t: &FactorTable) -> Result<()> {
    if lo < 1 || lo > hi {
        return Err(domain(format!("empty or invalid range [{lo}, {hi}]")));
    }
    if hi > t.bound() {
        return Err(Error::Range { value: hi, bound: t.bound() });
    }
    Ok(())
}

/// Integers in `[lo, hi]` with no prime factor in the closed interval `[y, z]`.
pub fn sieve_survivors(lo: u64, hi: u64, y: f64, z: f64, t: &FactorTable) -> Result<IntSet> {
    check_range(lo, hi, t)?;
    let mut alive = vec![true; (hi - lo + 1) as usize];
    let pmin = y.max(2.0).ceil() as u64;
    let pmax = if z >= hi as f64 { hi } else { z.floor().max(0.0) as u64 };
    for p in t.primes_between(pmin, pmax) {
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m <= hi {
            alive[(m - lo) as usize] = false;
            m += p;
        }
    }
    let v = alive
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| lo + i as u64)
        .collect();
    Ok(IntSet::from_sorted_unchecked(v))
}

/// Integers in `[1, hi]` divisible by two distinct primes `p1, p2` in `[y, z]`
/// with `4 p1 < p2`.
pub fn two_prime_pair_set(hi: u64, y: f64, z: f64, t: &FactorTable) -> Result<IntSet> {
    check_range(1, hi, t)?;
    let mut out = Vec::new();
    for n in 2..=hi {
        let mut lo_p: Option<u64> = None;
        let mut hi_p = 0;
        for &(p, _) in t.factorize(n)?.pairs() {
            let pf = p as f64;
            if pf >= y && pf <= z {
                lo_p.get_or_insert(p);
                hi_p = p;
            }
        }
        if matches!(lo_p, Some(p1) if 4 * p1 < hi_p) {
            out.push(n);
        }
    }
    Ok(IntSet::from_sorted_unchecked(out))
}

/// Sums `a_i / b_i` with pairwise coprime denominators, each term already in
/// lowest terms. The result `sum / prod(b_i)` is then in lowest terms as well.
fn sum_coprime_terms(terms: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
    match terms.len() {
        0 => (BigInt::zero(), BigInt::one()),
        1 => terms[0].clone(),
        n => {
            let (l, r) = terms.split_at(n / 2);
            let (a, b) = sum_coprime_terms(l);
            let (c, d) = sum_coprime_terms(r);
            (a * &d + c * &b, b * d)
        }
    }
}

fn product_tree(xs: &[BigInt]) -> BigInt {
    match xs.len() {
        0 => BigInt::one(),
        1 => xs[0].clone(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            product_tree(l) * product_tree(r)
        }
    }
}

fn check_x(x: u64, t: &FactorTable) -> Result<()> {
    if x > t.bound() {
        return Err(Error::Range { value: x, bound: t.bound() });
    }
    Ok(())
}

/// Exact `sum over prime powers q <= X of 1/q`.
///
/// Per prime, `1/p + ... + 1/p^k = (1 + p + ... + p^(k-1)) / p^k` with a
/// numerator prime to `p`, so the per-prime terms have coprime denominators
/// and the tree sum needs no gcd.
pub fn mertens_q_sum(x: u64, t: &FactorTable) -> Result<Rational> {
    check_x(x, t)?;
    let terms: Vec<(BigInt, BigInt)> = t
        .primes()
        .take_while(|&p| p <= x)
        .map(|p| {
            let mut pk = p;
            let mut num = 1u64;
            while pk <= x / p {
                num = num * p + 1;
                pk *= p;
            }
            (BigInt::from(num), BigInt::from(pk))
        })
        .collect();
    let (num, den) = sum_coprime_terms(&terms);
    Ok(Rational::from_reduced_parts(num, den))
}

/// Exact `prod over primes p <= X of (1 - 1/p)^(-1) = prod p/(p-1)`.
///
/// Every prime factor of `p - 1` is below `p`, so the reduced form is read off
/// an exponent vector over the primes up to `X`.
pub fn mertens_product(x: u64, t: &FactorTable) -> Result<Rational> {
    check_x(x, t)?;
    let primes: Vec<u64> = t.primes().take_while(|&p| p <= x).collect();
    let mut exps: Vec<i64> = vec![1; primes.len()];
    for &p in &primes {
        if p == 2 {
            continue;
        }
        for &(r, e) in t.factorize(p - 1)?.pairs() {
            let idx = primes.binary_search(&r).expect("factor of p-1 is a smaller prime");
            exps[idx] -= e as i64;
        }
    }
    let mut num_f = Vec::new();
    let mut den_f = Vec::new();
    for (&p, &e) in primes.iter().zip(&exps) {
        let pe = num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize);
        if e > 0 {
            num_f.push(pe);
        } else if e < 0 {
            den_f.push(pe);
        }
    }
    Ok(Rational::from_reduced_parts(product_tree(&num_f), product_tree(&den_f)))
}

/// Survivor density of the `[y, z]` sieve on `[n, 2n)`.
#[derive(Clone, Debug, Serialize)]
pub struct SieveDensityReport {
    #[serde(rename = "X_count")]
    pub x_count: u64,
    /// `ln y / ln z`
    pub bound: f64,
    /// `x_count / n`
    pub ratio: f64,
    /// `ratio / bound`, the constant the sieve bound needs at this scale
    pub k: f64,
}

pub fn sieve_density(n: u64, y: f64, z: f64, t: &FactorTable) -> Result<SieveDensityReport> {
    if !(y > 1.0 && z > y) {
        return Err(domain("density check needs 1 < y < z"));
    }
    let survivors = sieve_survivors(n, 2 * n - 1, y, z, t)?;
    let x_count = survivors.len() as u64;
    let bound = y.ln() / z.ln();
    let ratio = x_count as f64 / n as f64;
    Ok(SieveDensityReport { x_count, bound, ratio, k: ratio / bound })
}

/// One row of the prime-power Mertens comparison.
#[derive(Clone, Debug, Serialize)]
pub struct DriftRow {
    pub x: u64,
    pub q_sum: f64,
    pub log_log_x: f64,
    pub drift: f64,
    pub tolerance: f64,
    pub within: bool,
}

/// Fits the constant `c` in `sum_{q<=X} 1/q ~ ln ln X + c` at `fit_x`, then
/// reports `|sum - ln ln X - c|` against `1/ln X` at each of `xs`.
pub fn mertens_drift(xs: &[u64], fit_x: u64, t: &FactorTable) -> Result<(f64, Vec<DriftRow>)> {
    let sum_f = |x: u64| -> Result<f64> { Ok(mertens_q_sum(x, t)?.to_f64()) };
    let c_hat = sum_f(fit_x)? - (fit_x as f64).ln().ln();
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        if x < 3 {
            return Err(domain("drift is undefined for X < 3"));
        }
        let q_sum = sum_f(x)?;
        let lnx = (x as f64).ln();
        let drift = (q_sum - lnx.ln() - c_hat).abs();
        let tolerance = 1.0 / lnx;
        rows.push(DriftRow { x, q_sum, log_log_x: lnx.ln(), drift, tolerance, within: drift <= tolerance });
    }
    Ok((c_hat, rows))
}
