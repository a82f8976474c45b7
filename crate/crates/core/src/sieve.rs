//! Smallest-prime-factor table and the factorization queries built on it.

use crate::error::{domain, Error, Result};
use crate::rational::IntSet;

/// Largest bound [`FactorTable::build`] accepts without an explicit budget
/// (about 800 MB of `u32`s).
pub const DEFAULT_MAX_BOUND: u64 = 200_000_000;

/// `spf[n]` is the smallest prime factor of `n` for `2 <= n <= bound`.
#[derive(Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl std::fmt::Debug for FactorTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactorTable")
            .field("bound", &self.bound())
            .field("primes", &self.primes.len())
            .finish()
    }
}

/// `(p, r)` pairs with `p` prime, `r >= 1`, primes strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn product(&self) -> u64 {
        self.0.iter().map(|&(p, r)| p.pow(r)).product()
    }

    /// The exact prime powers `p^r || n`, in order of increasing prime.
    pub fn prime_powers(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, r)| p.pow(r))
    }

    pub fn largest_prime(&self) -> u64 {
        self.0.last().map(|&(p, _)| p).unwrap_or(1)
    }

    pub fn num_distinct(&self) -> usize {
        self.0.len()
    }
}

impl FactorTable {
    pub fn build(bound: u64) -> Result<Self> {
        Self::build_with_budget(bound, DEFAULT_MAX_BOUND)
    }

    /// Linear sieve: every composite is crossed out exactly once, by its
    /// smallest prime factor.
    pub fn build_with_budget(bound: u64, max_bound: u64) -> Result<Self> {
        if bound < 2 {
            return Err(domain(format!("sieve bound must be at least 2, got {bound}")));
        }
        if bound > max_bound || bound > u32::MAX as u64 {
            return Err(Error::Resource(format!(
                "factor table up to {bound} exceeds the budget of {}",
                max_bound.min(u32::MAX as u64)
            )));
        }
        let n = bound as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(FactorTable { spf, primes })
    }

    pub fn bound(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Primes up to the bound, ascending.
    pub fn primes(&self) -> impl DoubleEndedIterator<Item = u64> + '_ {
        self.primes.iter().map(|&p| p as u64)
    }

    /// Primes in `[lo, hi]`.
    pub fn primes_between(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let start = self.primes.partition_point(|&p| (p as u64) < lo);
        self.primes[start..].iter().map(|&p| p as u64).take_while(move |&p| p <= hi)
    }

    fn check(&self, n: u64) -> Result<()> {
        if n < 2 {
            return Err(domain(format!("{n} has no prime factorization")));
        }
        if n > self.bound() {
            return Err(Error::Range { value: n, bound: self.bound() });
        }
        Ok(())
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n < 2 {
            return Ok(false);
        }
        Ok(self.smallest_prime_factor(n)? == n)
    }

    /// `Some((p, r))` when `q = p^r` with `r >= 1`.
    pub fn prime_power(&self, q: u64) -> Result<Option<(u64, u32)>> {
        if q < 2 {
            return Ok(None);
        }
        let f = self.factorize(q)?;
        Ok(match f.pairs() {
            [(p, r)] => Some((*p, *r)),
            _ => None,
        })
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check(n)?;
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut r = 0;
            while m.is_multiple_of(p) {
                m /= p;
                r += 1;
            }
            pairs.push((p as u64, r));
        }
        Ok(Factorization(pairs))
    }

    /// Number of distinct prime factors.
    pub fn omega(&self, n: u64) -> Result<u32> {
        Ok(self.factorize(n)?.num_distinct() as u32)
    }

    /// `{p^r : p^r || n}`.
    pub fn exact_prime_powers(&self, n: u64) -> Result<IntSet> {
        let f = self.factorize(n)?;
        IntSet::new(f.prime_powers())
    }

    pub fn largest_prime(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.largest_prime())
    }
}
