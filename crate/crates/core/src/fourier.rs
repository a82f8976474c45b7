//! Counting `F(A) = #{S subset of A : k R(S) in Z}` through the orthogonality
//! identity
//!
//! ```text
//! F(A) = (1/L) * sum_{-L/2 < h <= L/2} prod_{n in A} (1 + e(kh/n)),   L = lcm(A)
//! ```
//!
//! together with the arc decomposition of the `h`-sum and the interval
//! diagnostics used to bound the minor arcs.
//!
//! All phases `kh/n` are reduced modulo `n` in integer arithmetic before any
//! floating-point work, so the argument error does not grow with `h`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{domain, Error, Result};
use crate::rational::{lcm_bounded, IntSet};
use crate::sieve::FactorTable;

/// Default upper bound on `lcm(A)` for the `h`-sum.
pub const DEFAULT_LCM_BOUND: u64 = 1_000_000;
/// `|value - rounded|` above this is reported as numerical instability.
pub const ROUNDING_TOLERANCE: f64 = 0.25;
/// Per-`h` weights kept in [`ArcDiagnostics::weights`].
pub const WEIGHT_CAP: usize = 10_000;

const CHUNK: i64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCount {
    pub value: f64,
    pub imag: f64,
    pub rounded: u128,
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn merge(&mut self, other: Kahan) {
        self.add(other.sum);
        self.add(-other.c);
    }
}

/// `e(j/n)` for `j = 0..n` per distinct modulus.
struct PhaseTables {
    elems: Vec<u64>,
    k_mod: Vec<u64>,
    tables: Vec<Vec<(f64, f64)>>,
}

impl PhaseTables {
    fn new(a: &IntSet, k: u64) -> Self {
        let elems: Vec<u64> = a.iter().collect();
        let k_mod = elems.iter().map(|&n| k % n).collect();
        let tables = elems
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|j| {
                        let th = 2.0 * PI * j as f64 / n as f64;
                        (th.cos(), th.sin())
                    })
                    .collect()
            })
            .collect();
        PhaseTables { elems, k_mod, tables }
    }

    /// `prod_{n} (1 + e(kh/n))`.
    fn product(&self, h: i64) -> (f64, f64) {
        let (mut re, mut im) = (1.0f64, 0.0f64);
        for (i, &n) in self.elems.iter().enumerate() {
            let j = residue(self.k_mod[i], h, n);
            let (c, s) = self.tables[i][j as usize];
            let (a, b) = (1.0 + c, s);
            let nr = re * a - im * b;
            im = re * b + im * a;
            re = nr;
        }
        (re, im)
    }
}

/// `k h mod n` in `[0, n)`.
fn residue(k_mod: u64, h: i64, n: u64) -> u64 {
    let hm = (h as i128).rem_euclid(n as i128) as u128;
    ((k_mod as u128 * hm) % n as u128) as u64
}

/// The representative `h_n` of `kh mod n` with `|h_n| <= n/2`.
pub fn centred_residue(n: u64, k: u64, h: i64) -> i64 {
    let r = residue(k % n, h, n) as i64;
    if 2 * r > n as i64 {
        r - n as i64
    } else {
        r
    }
}

fn checked_lcm(a: &IntSet, bound: u64) -> Result<u64> {
    lcm_bounded(a.iter(), bound).ok_or_else(|| {
        Error::Resource(format!("lcm of the set exceeds the bound {bound} for the exponential sum"))
    })
}

/// `h` ranges over `(-L/2, L/2]`.
fn h_range(l: u64) -> (i64, i64) {
    let l = l as i64;
    (-((l - 1) / 2), l / 2)
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(domain("k must be positive"));
    }
    Ok(())
}

/// Evaluates `F(A)` by the orthogonality identity with the default lcm bound.
pub fn fourier_count(a: &IntSet, k: u64) -> Result<FourierCount> {
    fourier_count_with_bound(a, k, DEFAULT_LCM_BOUND)
}

pub fn fourier_count_with_bound(a: &IntSet, k: u64, lcm_bound: u64) -> Result<FourierCount> {
    check_k(k)?;
    let l = checked_lcm(a, lcm_bound)?;
    let tables = PhaseTables::new(a, k);
    let (lo, hi) = h_range(l);
    // fixed chunk boundaries keep the summation order independent of the pool
    let chunks: Vec<(Kahan, Kahan)> = (0..=((hi - lo) / CHUNK))
        .into_par_iter()
        .map(|c| {
            let (mut re, mut im) = (Kahan::default(), Kahan::default());
            let start = lo + c * CHUNK;
            for h in start..=(start + CHUNK - 1).min(hi) {
                let (r, i) = tables.product(h);
                re.add(r);
                im.add(i);
            }
            (re, im)
        })
        .collect();
    let (mut re, mut im) = (Kahan::default(), Kahan::default());
    for (r, i) in chunks {
        re.merge(r);
        im.merge(i);
    }
    let value = re.sum / l as f64;
    let imag = im.sum / l as f64;
    let rounded = value.round();
    let distance = (value - rounded).abs();
    if !value.is_finite() || distance > ROUNDING_TOLERANCE || rounded < 0.0 {
        return Err(Error::NumericalInstability { value: value.to_string(), distance: distance.to_string() });
    }
    Ok(FourierCount { value, imag, rounded: rounded as u128 })
}

/// `C(B;h) = prod_{n in B} |cos(pi k h / n)|`.
pub fn cosine_weight(b: &IntSet, k: u64, h: i64) -> f64 {
    b.iter()
        .map(|n| (PI * centred_residue(n, k, h) as f64 / n as f64).cos().abs())
        .product()
}

/// `exp(-sum_{n in B} h_n^2 / n^2)`, an upper bound for [`cosine_weight`].
pub fn weight_bound(b: &IntSet, k: u64, h: i64) -> f64 {
    let s: f64 = b
        .iter()
        .map(|n| {
            let x = centred_residue(n, k, h) as f64 / n as f64;
            x * x
        })
        .sum();
    (-s).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcDiagnostics {
    #[serde(rename = "L")]
    pub l: u64,
    pub k: u64,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub major_hs: Vec<i64>,
    pub minor_hs: Vec<i64>,
    /// `C(A;h)` for the first [`WEIGHT_CAP`] nonzero `h` in increasing `|h|`.
    pub weights: BTreeMap<i64, f64>,
    pub weights_truncated: bool,
    pub minor_weight_sum: f64,
    pub minor_weight_max: f64,
    /// The quantity that must stay below 1/4 for the minor arcs to be negligible.
    pub minor_within_quarter: bool,
    /// `2^|A| / L`, the `h = 0` term.
    pub zero_term: f64,
    /// `(1/L) sum_{h major} Re prod (1 + e(kh/n))`.
    pub major_contribution: f64,
    pub minor_contribution: f64,
    pub fourier_value: f64,
    pub rounded: u128,
}

/// Splits the nonzero `h` in `(-L/2, L/2]` into major arcs
/// `{h : |h - tL/k| <= K/(2k) for some integer t}` and the rest, and evaluates
/// each part of the orthogonality sum.
pub fn arc_classify(a: &IntSet, k: u64, big_k: f64) -> Result<ArcDiagnostics> {
    arc_classify_with_bound(a, k, big_k, DEFAULT_LCM_BOUND)
}

pub fn arc_classify_with_bound(a: &IntSet, k: u64, big_k: f64, lcm_bound: u64) -> Result<ArcDiagnostics> {
    check_k(k)?;
    if !big_k.is_finite() || big_k < 0.0 {
        return Err(domain(format!("K must be a finite nonnegative real, got {big_k}")));
    }
    let l = checked_lcm(a, lcm_bound)?;
    let tables = PhaseTables::new(a, k);
    let (lo, hi) = h_range(l);
    let lw = l as u128;
    let mut major_hs = Vec::new();
    let mut minor_hs = Vec::new();
    let (mut major, mut minor, mut total) = (Kahan::default(), Kahan::default(), Kahan::default());
    let (mut wsum, mut wmax) = (Kahan::default(), 0.0f64);
    for h in lo..=hi {
        let (re, _) = tables.product(h);
        total.add(re);
        if h == 0 {
            continue;
        }
        // distance from kh to the nearest multiple of L, i.e. |h - tL/k| * k
        let d = ((k as u128) * ((h as i128).rem_euclid(lw as i128) as u128)) % lw;
        let dist = d.min(lw - d);
        if 2.0 * dist as f64 <= big_k {
            major_hs.push(h);
            major.add(re);
        } else {
            minor_hs.push(h);
            minor.add(re);
            let w = cosine_weight(a, k, h);
            wsum.add(w);
            wmax = wmax.max(w);
        }
    }
    let mut order: Vec<i64> = (lo..=hi).filter(|&h| h != 0).collect();
    order.sort_by_key(|h| (h.unsigned_abs(), *h));
    let weights: BTreeMap<i64, f64> = order.iter().take(WEIGHT_CAP).map(|&h| (h, cosine_weight(a, k, h))).collect();
    let lf = l as f64;
    let fourier_value = total.sum / lf;
    let rounded = fourier_value.round();
    let distance = (fourier_value - rounded).abs();
    if distance > ROUNDING_TOLERANCE || rounded < 0.0 {
        return Err(Error::NumericalInstability {
            value: fourier_value.to_string(),
            distance: distance.to_string(),
        });
    }
    Ok(ArcDiagnostics {
        l,
        k,
        big_k,
        major_hs,
        minor_hs,
        weights_truncated: order.len() > WEIGHT_CAP,
        weights,
        minor_weight_sum: wsum.sum,
        minor_weight_max: wmax,
        minor_within_quarter: wsum.sum <= 0.25,
        zero_term: 2f64.powi(a.len() as i32) / lf,
        major_contribution: major.sum / lf,
        minor_contribution: minor.sum / lf,
        fourier_value,
        rounded: rounded as u128,
    })
}

/// The integer interval of `len` elements centred at `c`:
/// `{c - floor(len/2), ..., c + ceil(len/2) - 1}`, returned as `(start, len)`.
pub fn centred_interval(c: i64, len: u64) -> (i64, u64) {
    (c - (len / 2) as i64, len)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub interval: (i64, u64),
    pub nondividing_count: u64,
    #[serde(rename = "D_I")]
    pub d_i: IntSet,
    pub common_x: Option<i64>,
}

/// Whether some element of `{start, ..., start + len - 1}` is a multiple of `n`.
pub fn interval_has_multiple(start: i64, len: u64, n: u64) -> bool {
    let first = (start as i128).div_euclid(n as i128) * n as i128;
    let first = if first < start as i128 { first + n as i128 } else { first };
    first < start as i128 + len as i128
}

/// Divisibility diagnostics for `I = {start, ..., start + len - 1}`:
/// how many `n` in `A` have no multiple in `I`, the set `D_I` of prime powers
/// `q` with `#{n in A_q : no multiple of n in I} < eta M / q`, and the least
/// `x` in `I` divisible by every `q` in `D_I`.
pub fn interval_coverage(
    a: &IntSet,
    interval: (i64, u64),
    eta: f64,
    m: f64,
    t: &FactorTable,
) -> Result<IntervalReport> {
    let (start, len) = interval;
    if len == 0 {
        return Err(domain("interval must be nonempty"));
    }
    if !(eta.is_finite() && m.is_finite()) {
        return Err(domain("eta and M must be finite"));
    }
    let dec = Decomposition::new(a, t)?;
    let misses = |n: u64| !interval_has_multiple(start, len, n);
    let nondividing_count = a.iter().filter(|&n| misses(n)).count() as u64;
    let d_i = dec.qset.filter(|q| {
        let c = dec.part(q).iter().filter(|&n| misses(n)).count();
        (c as f64) * (q as f64) < eta * m
    });
    let l = d_i.iter().fold(BigUint::one(), |acc, q| acc.lcm(&BigUint::from(q)));
    let common_x = l.to_u64().and_then(|l| {
        let first = (start as i128).div_euclid(l as i128) * l as i128;
        let first = if first < start as i128 { first + l as i128 } else { first };
        (first < start as i128 + len as i128).then_some(first as i64)
    });
    Ok(IntervalReport { interval, nondividing_count, d_i, common_x })
}
