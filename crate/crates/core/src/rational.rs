//! Exact rationals, finite sets of positive integers, and the reciprocal sum
//! functional `R(A) = sum over n in A of 1/n`.
//!
//! [`Rational`] wraps [`num_rational::BigRational`], which keeps every value
//! reduced with a positive denominator. Display and serde both use the
//! `"num/den"` form, including integers (`1/1`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Arbitrary-precision reduced fraction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `num/den`, reduced. Fails on a zero denominator.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(domain("zero denominator"));
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// `1/n` for a positive integer.
    pub fn recip_of(n: u64) -> Self {
        assert!(n > 0, "reciprocal of zero");
        Rational(BigRational::new_raw(BigInt::one(), BigInt::from(n)))
    }

    /// Builds `num/den` without a gcd pass. The caller guarantees the pair is
    /// already coprime and `den > 0`.
    pub(crate) fn from_reduced_parts(num: BigInt, den: BigInt) -> Self {
        debug_assert!(den.is_positive());
        debug_assert!(num.gcd(&den).is_one() || num.is_zero() && den.is_one());
        Rational(BigRational::new_raw(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(domain("reciprocal of zero"));
        }
        Ok(Rational(self.0.recip()))
    }

    /// Nearest double; exact enough for diagnostics, never used in comparisons
    /// that decide membership.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Rational)
            .ok_or_else(|| domain(format!("{x} is not a finite number")))
    }

    /// Re-reduces the stored pair. Always a no-op on values built through the
    /// public constructors.
    pub fn reduced(&self) -> Self {
        Rational(BigRational::new(self.numer().clone(), self.denom().clone()))
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p/q`, a bare integer `p`, or a decimal such as `0.25`
    /// (read exactly in base ten).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int: BigInt = if int.is_empty() || int == "-" || int == "+" {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| bad())?
            };
            let frac_digits: BigInt = frac.parse().map_err(|_| bad())?;
            let scale = num_traits::pow(BigInt::from(10u32), frac.len());
            let mag = int.abs() * &scale + frac_digits;
            let num = if negative { -mag } else { mag };
            return Ok(Rational(BigRational::new(num, scale)));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_integer(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    /// Panics on division by zero, like the integer types.
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        let terms: Vec<Rational> = iter.collect();
        tree_sum(&terms)
    }
}

/// Pairwise summation; keeps intermediate denominators balanced so that long
/// sums cost roughly one big multiplication per level instead of per term.
pub fn tree_sum(terms: &[Rational]) -> Rational {
    match terms.len() {
        0 => Rational::zero(),
        1 => terms[0].clone(),
        n => {
            let (l, r) = terms.split_at(n / 2);
            tree_sum(l) + tree_sum(r)
        }
    }
}

/// Finite set of positive integers, sorted ascending without duplicates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IntSet(Vec<u64>);

impl IntSet {
    pub fn empty() -> Self {
        IntSet(Vec::new())
    }

    /// Sorts and deduplicates. Rejects 0.
    pub fn new(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = elements.into_iter().collect();
        if v.contains(&0) {
            return Err(domain("0 is not allowed in a set of positive integers"));
        }
        v.sort_unstable();
        v.dedup();
        Ok(IntSet(v))
    }

    /// Caller guarantees the input is strictly increasing and free of 0.
    pub(crate) fn from_sorted_unchecked(v: Vec<u64>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(v.first().is_none_or(|&x| x > 0));
        IntSet(v)
    }

    pub fn range(lo: u64, hi: u64) -> Result<Self> {
        IntSet::new(lo..=hi)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn is_disjoint(&self, other: &IntSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &IntSet) -> IntSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        IntSet(v)
    }

    pub fn difference(&self, other: &IntSet) -> IntSet {
        IntSet(self.iter().filter(|&n| !other.contains(n)).collect())
    }

    pub fn without(&self, n: u64) -> IntSet {
        IntSet(self.iter().filter(|&m| m != n).collect())
    }

    pub fn filter(&self, mut keep: impl FnMut(u64) -> bool) -> IntSet {
        IntSet(self.iter().filter(|&n| keep(n)).collect())
    }

    /// Newline-delimited decimal integers. Blank lines and `#` comments are
    /// skipped.
    pub fn parse_lines(text: &str) -> Result<Self> {
        let mut v = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let n: u64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: not a positive integer: {line:?}", lineno + 1)))?;
            v.push(n);
        }
        IntSet::new(v).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Accepts either a JSON array or newline-delimited integers.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            let v: Vec<u64> =
                serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad JSON set: {e}")))?;
            IntSet::new(v).map_err(|e| Error::Parse(e.to_string()))
        } else {
            IntSet::parse_lines(text)
        }
    }

    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for n in self.iter() {
            s.push_str(&n.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl Serialize for IntSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u64>::deserialize(deserializer)?;
        IntSet::new(v).map_err(serde::de::Error::custom)
    }
}

impl<'a> IntoIterator for &'a IntSet {
    type Item = u64;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, u64>>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// `R(A)`: the exact sum of reciprocals.
pub fn recip_sum(a: &IntSet) -> Rational {
    let terms: Vec<Rational> = a.iter().map(Rational::recip_of).collect();
    tree_sum(&terms)
}

/// Least common multiple of the elements; 1 for the empty set.
pub fn lcm_set(a: &IntSet) -> BigUint {
    a.iter().fold(BigUint::one(), |acc, n| acc.lcm(&BigUint::from(n)))
}

/// `lcm_set` when it fits in a `u64` and does not exceed `cap`.
pub fn lcm_bounded(a: impl IntoIterator<Item = u64>, cap: u64) -> Option<u64> {
    let mut l: u64 = 1;
    for n in a {
        let g = l.gcd(&n);
        l = (l / g).checked_mul(n)?;
        if l > cap {
            return None;
        }
    }
    Some(l)
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

    #[test]
    fn recip_sum_examples() {
        assert_eq!(recip_sum(&set(&[2, 3, 6])), q("1/1"));
        assert_eq!(recip_sum(&IntSet::empty()), q("0/1"));
        assert_eq!(recip_sum(&set(&[2, 3, 4, 5])), q("77/60"));
        assert_eq!(recip_sum(&set(&[2, 3, 6])).to_string(), "1/1");
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_set(&set(&[2, 3, 6])), BigUint::from(6u32));
        assert_eq!(lcm_set(&IntSet::empty()), BigUint::one());
        // pairwise: lcm(4,6)=12, lcm(12,10)=60
        assert_eq!(lcm_set(&set(&[4, 6, 10])), BigUint::from(60u32));
        assert_eq!(lcm_bounded([4, 6, 10], 59), None);
        assert_eq!(lcm_bounded([4, 6, 10], 60), Some(60));
    }

    #[test]
    fn intset_rejects_zero_and_sorts() {
        assert!(IntSet::new([3, 0]).is_err());
        assert_eq!(set(&[5, 1, 5, 3]).as_slice(), &[1, 3, 5]);
    }

    #[test]
    fn parsing() {
        assert_eq!(q("6/4"), q("3/2"));
        assert_eq!(q("-2/-4").to_string(), "1/2");
        assert_eq!(q("7"), Rational::from(7u64));
        assert_eq!(q("0.25"), q("1/4"));
        assert_eq!(q("-1.5"), q("-3/2"));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert_eq!(IntSet::parse("2\n3\n\n6 # c\n").unwrap(), set(&[2, 3, 6]));
        assert_eq!(IntSet::parse("[6, 2, 3]").unwrap(), set(&[2, 3, 6]));
        assert!(IntSet::parse("2\nx\n").is_err());
        assert!(IntSet::parse("[0]").is_err());
    }

    #[test]
    fn serde_forms() {
        let r = q("77/60");
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"77/60\"");
        let back: Rational = serde_json::from_str("\"77/60\"").unwrap();
        assert_eq!(back, r);
        let s = set(&[2, 3, 6]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,3,6]");
        assert_eq!(IntSet::parse_lines(&s.to_lines()).unwrap(), s);
    }

    #[test]
    fn set_ops() {
        let a = set(&[2, 4, 6]);
        let b = set(&[3, 5]);
        assert!(a.is_disjoint(&b));
        assert!(!a.is_disjoint(&set(&[6])));
        assert_eq!(a.union(&b), set(&[2, 3, 4, 5, 6]));
        assert_eq!(a.difference(&set(&[4])), set(&[2, 6]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_set() -> impl Strategy<Value = IntSet> {
            proptest::collection::btree_set(1u64..500, 0..20).prop_map(|s| IntSet::new(s).unwrap())
        }

        proptest! {
            #[test]
            fn additive_on_disjoint_union(a in arb_set(), b in arb_set()) {
                let b = b.difference(&a);
                prop_assert_eq!(recip_sum(&a.union(&b)), recip_sum(&a) + recip_sum(&b));
            }

            #[test]
            fn times_lcm_is_integer(a in arb_set()) {
                let l = Rational::from_integer(BigInt::from(lcm_set(&a)));
                prop_assert!((recip_sum(&a) * l).is_integer());
            }

            #[test]
            fn reduction_idempotent(n in -10_000i64..10_000, d in 1i64..10_000) {
                let r = Rational::new(n, d).unwrap();
                prop_assert_eq!(r.reduced(), r.clone());
                let again = r.reduced();
                prop_assert_eq!(again.numer(), r.numer());
                prop_assert_eq!(again.denom(), r.denom());
            }

            #[test]
            fn display_roundtrip(n in -10_000i64..10_000, d in 1i64..10_000) {
                let r = Rational::new(n, d).unwrap();
                prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
            }
        }
    }
}
