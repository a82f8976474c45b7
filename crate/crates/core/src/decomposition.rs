//! Prime-power decomposition of a set of integers.
//!
//! For a prime power `q`, `A_q` holds the elements `n` of `A` with `q || n`
//! (`q` divides `n` and `gcd(q, n/q) = 1`). `Q_A` is the set of prime powers
//! with nonempty `A_q`, and `R(A;q) = sum over A_q of q/n` measures how much
//! of `R(A)` sits at scale `q`.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::rational::{recip_sum, tree_sum, IntSet, Rational};
use crate::sieve::FactorTable;

/// `A` together with all of its nonempty `A_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub base: IntSet,
    pub parts: BTreeMap<u64, IntSet>,
    pub qset: IntSet,
}

impl Decomposition {
    /// Builds the map from the exact prime powers of each element. Elements
    /// must be at least 2.
    pub fn new(a: &IntSet, t: &FactorTable) -> Result<Self> {
        let mut parts: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for n in a.iter() {
            if n < 2 {
                return Err(domain("1 has no exact prime-power divisors"));
            }
            for q in t.factorize(n)?.prime_powers() {
                parts.entry(q).or_default().push(n);
            }
        }
        let qset = IntSet::from_sorted_unchecked(parts.keys().copied().collect());
        let parts = parts
            .into_iter()
            .map(|(q, v)| (q, IntSet::from_sorted_unchecked(v)))
            .collect();
        Ok(Decomposition { base: a.clone(), parts, qset })
    }

    /// `A_q`; empty when `q` is not in `Q_A`.
    pub fn part(&self, q: u64) -> IntSet {
        self.parts.get(&q).cloned().unwrap_or_default()
    }

    /// `R(A;q)`.
    pub fn rec_sum_q(&self, q: u64) -> Rational {
        match self.parts.get(&q) {
            Some(part) => scaled_sum(part, q),
            None => Rational::zero(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("decomposition serializes")
    }
}

fn scaled_sum(part: &IntSet, q: u64) -> Rational {
    recip_sum(part) * Rational::from(q)
}

fn is_exact_divisor(q: u64, n: u64) -> bool {
    n.is_multiple_of(q) && q.gcd(&(n / q)) == 1
}

/// Prime-power test that falls back to trial division past the table.
fn require_prime_power(q: u64, t: &FactorTable) -> Result<()> {
    let ok = if q <= t.bound() {
        t.prime_power(q)?.is_some()
    } else {
        trial_prime_power(q)
    };
    if ok {
        Ok(())
    } else {
        Err(domain(format!("{q} is not a prime power")))
    }
}

fn trial_prime_power(mut q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            while q.is_multiple_of(d) {
                q /= d;
            }
            return q == 1;
        }
        d += 1;
    }
    true
}

/// `A_q = {n in A : q | n, gcd(q, n/q) = 1}`.
pub fn subset_aq(a: &IntSet, q: u64, t: &FactorTable) -> Result<IntSet> {
    require_prime_power(q, t)?;
    Ok(a.filter(|n| is_exact_divisor(q, n)))
}

/// `Q_A`, the union of the exact prime powers of the elements.
pub fn ppowers_in_set(a: &IntSet, t: &FactorTable) -> Result<IntSet> {
    Ok(Decomposition::new(a, t)?.qset)
}

/// `R(A;q) = sum over n in A_q of q/n`.
pub fn rec_sum_q(a: &IntSet, q: u64, t: &FactorTable) -> Result<Rational> {
    let part = subset_aq(a, q, t)?;
    Ok(scaled_sum(&part, q))
}

/// Strips from `n/q` every exact prime power `p^r <= y` and returns what is
/// left. The result `d` satisfies `qd || n` and every exact prime power of `d`
/// exceeds `y`.
pub fn smooth_cofactor(n: u64, q: u64, y: f64, t: &FactorTable) -> Result<u64> {
    if !(y >= 1.0) {
        return Err(domain(format!("y must be at least 1, got {y}")));
    }
    require_prime_power(q, t)?;
    if !is_exact_divisor(q, n) {
        return Err(domain(format!("{q} is not an exact divisor of {n}")));
    }
    if n > t.bound() {
        return Err(Error::Range { value: n, bound: t.bound() });
    }
    let m = n / q;
    if m == 1 {
        return Ok(1);
    }
    Ok(t.factorize(m)?.prime_powers().filter(|&pr| pr as f64 > y).product())
}

/// Sum of `1/q` over all prime powers `q` dividing `gcd(n1, n2)`.
pub fn gcd_ppower_recip_sum(n1: u64, n2: u64, t: &FactorTable) -> Result<Rational> {
    if n1 == 0 || n2 == 0 {
        return Err(domain("arguments must be positive"));
    }
    let g = n1.gcd(&n2);
    if g == 1 {
        return Ok(Rational::zero());
    }
    let mut terms = Vec::new();
    for &(p, r) in t.factorize(g)?.pairs() {
        let mut pj = 1u64;
        for _ in 0..r {
            pj *= p;
            terms.push(Rational::recip_of(pj));
        }
    }
    Ok(tree_sum(&terms))
}

/// `sum over q in Q_A of 1/q`.
pub fn qsum_check(a: &IntSet, t: &FactorTable) -> Result<Rational> {
    Ok(recip_sum(&ppowers_in_set(a, t)?))
}

/// Both sides of the lower bound `sum_{q in Q_A} 1/q >= (1 - 2 eps) e^{-1} ln ln N`.
/// At desk scale the inequality can fail for legitimate inputs, so this
/// only reports.
#[derive(Clone, Debug, Serialize)]
pub struct QSumReport {
    pub qsum: Rational,
    pub qsum_f64: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn qsum_report(a: &IntSet, n: u64, eps: f64, t: &FactorTable) -> Result<QSumReport> {
    let qsum = qsum_check(a, t)?;
    let bound = (1.0 - 2.0 * eps) * (-1.0f64).exp() * (n as f64).ln().ln();
    let qsum_f64 = qsum.to_f64();
    Ok(QSumReport { holds: qsum_f64 >= bound, qsum, qsum_f64, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> IntSet {
        IntSet::new(v.iter().copied()).unwrap()
    }

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn table() -> FactorTable {
        FactorTable::build(10_000).unwrap()
    }

    #[test]
    fn aq_examples() {
        let t = table();
        assert_eq!(subset_aq(&set(&[4, 8, 12]), 4, &t).unwrap(), set(&[4, 12]));
        assert_eq!(subset_aq(&set(&[2, 6, 4]), 2, &t).unwrap(), set(&[2, 6]));
        assert_eq!(subset_aq(&set(&[3, 5]), 7, &t).unwrap(), IntSet::empty());
        assert!(matches!(subset_aq(&set(&[3]), 6, &t), Err(Error::Domain(_))));
        assert!(matches!(subset_aq(&set(&[3]), 1, &t), Err(Error::Domain(_))));
        // beyond the table: 10007 is prime
        assert!(subset_aq(&set(&[3]), 10_007, &t).unwrap().is_empty());
    }

    #[test]
    fn qa_examples() {
        let t = table();
        assert_eq!(ppowers_in_set(&set(&[12, 18]), &t).unwrap(), set(&[2, 3, 4, 9]));
        assert_eq!(ppowers_in_set(&IntSet::empty(), &t).unwrap(), IntSet::empty());
        assert_eq!(ppowers_in_set(&set(&[8]), &t).unwrap(), set(&[8]));
        assert!(matches!(ppowers_in_set(&set(&[1, 6]), &t), Err(Error::Domain(_))));
    }

    #[test]
    fn raq_examples() {
        let t = table();
        assert_eq!(rec_sum_q(&set(&[12, 36]), 4, &t).unwrap(), q("4/9"));
        assert_eq!(rec_sum_q(&set(&[4]), 4, &t).unwrap(), q("1/1"));
        assert_eq!(rec_sum_q(&set(&[3, 5]), 7, &t).unwrap(), q("0/1"));
        let d = Decomposition::new(&set(&[12, 36]), &t).unwrap();
        assert_eq!(d.rec_sum_q(4), q("4/9"));
        assert_eq!(d.rec_sum_q(5), Rational::zero());
    }

    #[test]
    fn cofactor_examples() {
        let t = table();
        assert_eq!(smooth_cofactor(360, 8, 4.0, &t).unwrap(), 45);
        assert_eq!(smooth_cofactor(360, 8, 5.0, &t).unwrap(), 9);
        assert_eq!(smooth_cofactor(360, 8, 100.0, &t).unwrap(), 1);
        assert!(smooth_cofactor(360, 4, 1.0, &t).is_err());
        assert!(smooth_cofactor(360, 7, 1.0, &t).is_err());
        assert!(smooth_cofactor(360, 8, 0.5, &t).is_err());
    }

    #[test]
    fn gcd_sum_examples() {
        let t = table();
        assert_eq!(gcd_ppower_recip_sum(12, 18, &t).unwrap(), q("5/6"));
        assert_eq!(gcd_ppower_recip_sum(7, 9, &t).unwrap(), q("0/1"));
        assert_eq!(gcd_ppower_recip_sum(8, 8, &t).unwrap(), q("7/8"));
    }

    #[test]
    fn qsum_examples() {
        let t = table();
        assert_eq!(qsum_check(&set(&[12, 18]), &t).unwrap(), q("43/36"));
        assert_eq!(qsum_check(&set(&[8]), &t).unwrap(), q("1/8"));
        assert_eq!(qsum_check(&IntSet::empty(), &t).unwrap(), q("0/1"));
        let r = qsum_report(&set(&[12, 18]), 100, 0.1, &t).unwrap();
        assert!(r.holds);
        assert!((r.bound - 0.8 / std::f64::consts::E * (100f64).ln().ln()).abs() < 1e-12);
    }

    #[test]
    fn decomposition_invariants() {
        let t = table();
        let a = set(&[6, 12, 18, 30, 45, 360, 1001]);
        let d = Decomposition::new(&a, &t).unwrap();
        for &q in d.qset.as_slice() {
            assert!(t.prime_power(q).unwrap().is_some());
            assert!(!d.part(q).is_empty());
            assert_eq!(d.part(q), subset_aq(&a, q, &t).unwrap());
        }
        for n in a.iter() {
            let qs: Vec<u64> = d.qset.iter().filter(|&q| d.part(q).contains(n)).collect();
            assert_eq!(qs, t.exact_prime_powers(n).unwrap().into_vec());
        }
        let json = d.to_json();
        assert_eq!(json["parts"]["4"], serde_json::json!([12]));
        assert_eq!(json["parts"]["8"], serde_json::json!([360]));
        assert_eq!(json["qset"][0], serde_json::json!(2));
    }

    #[test]
    fn cofactor_exhaustive() {
        let t = table();
        for n in 2..=10_000u64 {
            for q in t.exact_prime_powers(n).unwrap().iter() {
                let m = n / q;
                for y in [1.0, 2.0, 5.0, 10.0, 100.0] {
                    let d = smooth_cofactor(n, q, y, &t).unwrap();
                    let qd = q * d;
                    assert_eq!(n % qd, 0);
                    assert_eq!(qd.gcd(&(n / qd)), 1, "n={n} q={q} y={y}");
                    if d > 1 {
                        assert!(t.exact_prime_powers(d).unwrap().iter().all(|pr| pr as f64 > y));
                    }
                    let stripped: u64 = if m == 1 {
                        1
                    } else {
                        t.factorize(m).unwrap().prime_powers().filter(|&pr| pr as f64 <= y).product()
                    };
                    assert_eq!(stripped * d, m);
                    // q*d exceeds (n/q) divided by the stripped part
                    assert!(qd > m / stripped);
                }
            }
        }
    }

    mod props {
        use super::*;
        use crate::sieve::FactorTable;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        fn shared() -> &'static FactorTable {
            static T: OnceLock<FactorTable> = OnceLock::new();
            T.get_or_init(|| FactorTable::build(100_000).unwrap())
        }

        proptest! {
            #[test]
            fn double_counting(v in proptest::collection::btree_set(2u64..100_000, 0..25)) {
                let t = shared();
                let a = IntSet::new(v).unwrap();
                let d = Decomposition::new(&a, t).unwrap();
                let lhs: Rational = d.qset.iter()
                    .map(|q| d.rec_sum_q(q) * Rational::recip_of(q))
                    .sum();
                let rhs: Rational = a.iter()
                    .map(|n| Rational::from(t.omega(n).unwrap() as u64) * Rational::recip_of(n))
                    .sum();
                prop_assert_eq!(lhs, rhs);
                let parts: usize = d.parts.values().map(|p| p.len()).sum();
                let omegas: u32 = a.iter().map(|n| t.omega(n).unwrap()).sum();
                prop_assert_eq!(parts as u32, omegas);
            }
        }
    }
}
