//! Greedy pruning that enforces a floor on every `R(B;q)` and trims `R(B)` into
//! a window `[alpha - 1/M, alpha)`.
//!
//! Choices the procedures leave open are fixed for reproducibility: the
//! smallest failing prime power is removed first, and the window trimmer
//! always removes the smallest admissible element.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{domain, Error, Result};
use crate::rational::{recip_sum, tree_sum, IntSet, Rational};
use crate::sieve::FactorTable;

/// Audit log of a pruning run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneTrace {
    /// Prime powers whose whole `A_q` was dropped, in removal order.
    pub removed_qs: Vec<u64>,
    /// Every removed element, in removal order.
    pub removed_elements: Vec<u64>,
    /// Elements removed one at a time by the window trimmer.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub window_removals: Vec<u64>,
    #[serde(rename = "final")]
    pub final_set: IntSet,
    pub r_initial: Rational,
    pub r_final: Rational,
}

impl PruneTrace {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serializes")
    }
}

fn check_theta(theta: &Rational) -> Result<()> {
    if theta.is_negative() {
        return Err(domain(format!("theta = {theta} is negative")));
    }
    Ok(())
}

fn check_elements(a: &IntSet) -> Result<()> {
    if a.min().is_some_and(|m| m < 2) {
        return Err(domain("elements must be at least 2"));
    }
    Ok(())
}

/// The smallest `q` in `Q_D` with `R(D;q) < theta`.
fn first_failing(d: &Decomposition, theta: &Rational) -> Option<u64> {
    d.qset.iter().find(|&q| &d.rec_sum_q(q) < theta)
}

/// Repeatedly drops `(A_i)_q` for the smallest prime power `q` with
/// `R(A_i;q) < theta` until no such `q` remains.
///
/// Each `q` is removed at most once: after its part is gone no remaining
/// element has `q` as an exact divisor. The loss at a step is
/// `R(A_i;q)/q < theta/q`, so `R(B) >= R(A) - theta * sum_{q in Q_A} 1/q`
/// (strict as soon as anything is removed).
pub fn prune_ppower(a: &IntSet, theta: &Rational, t: &FactorTable) -> Result<PruneTrace> {
    check_theta(theta)?;
    check_elements(a)?;
    let r_initial = recip_sum(a);
    let mut mass = QMass::new(a, t)?;
    let (removed_qs, removed_elements) = mass.cascade(theta);
    let final_set = a.filter(|n| mass.contains(n));
    let r_final = recip_sum(&final_set);
    Ok(PruneTrace { removed_qs, removed_elements, window_removals: Vec::new(), final_set, r_initial, r_final })
}

/// `R(D;q)` for every `q` in `Q_D`, updated as elements leave `D`.
#[derive(Clone)]
struct QMass {
    factors: BTreeMap<u64, Vec<u64>>,
    members: BTreeMap<u64, BTreeSet<u64>>,
    mass: BTreeMap<u64, Rational>,
}

impl QMass {
    fn new(a: &IntSet, t: &FactorTable) -> Result<Self> {
        let mut factors = BTreeMap::new();
        let mut members: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for n in a.iter() {
            let pps: Vec<u64> = t.factorize(n)?.prime_powers().collect();
            for &q in &pps {
                members.entry(q).or_default().insert(n);
            }
            factors.insert(n, pps);
        }
        let mass = members
            .iter()
            .map(|(&q, part)| {
                let terms: Vec<Rational> = part.iter().map(|&n| Rational::new(q, n).unwrap()).collect();
                (q, tree_sum(&terms))
            })
            .collect();
        Ok(QMass { factors, members, mass })
    }

    fn contains(&self, n: u64) -> bool {
        self.factors.contains_key(&n)
    }

    fn first_below(&self, theta: &Rational) -> Option<u64> {
        self.mass.iter().find(|(_, m)| *m < theta).map(|(&q, _)| q)
    }

    fn remove(&mut self, n: u64) {
        let Some(pps) = self.factors.remove(&n) else {
            return;
        };
        for q in pps {
            let part = self.members.get_mut(&q).expect("indexed");
            part.remove(&n);
            if part.is_empty() {
                self.members.remove(&q);
                self.mass.remove(&q);
            } else {
                let m = self.mass.get_mut(&q).expect("indexed");
                *m = &*m - &Rational::new(q, n).unwrap();
            }
        }
    }

    /// The removal loop of [`prune_ppower`]; returns the removed prime powers
    /// and elements in order.
    fn cascade(&mut self, theta: &Rational) -> (Vec<u64>, Vec<u64>) {
        let mut qs = Vec::new();
        let mut elems = Vec::new();
        while let Some(q) = self.first_below(theta) {
            qs.push(q);
            elems.extend(self.remove_part(q));
        }
        (qs, elems)
    }

    fn min_element(&self) -> Option<u64> {
        self.factors.keys().next().copied()
    }

    /// Removes `D_q` and returns its elements in increasing order.
    fn remove_part(&mut self, q: u64) -> Vec<u64> {
        let part: Vec<u64> = self.members.get(&q).map(|s| s.iter().copied().collect()).unwrap_or_default();
        for &n in &part {
            self.remove(n);
        }
        part
    }
}

/// `theta * sum_{q in Q_A} 1/q`, the most [`prune_ppower`] can remove.
pub fn prune_loss_bound(a: &IntSet, theta: &Rational, t: &FactorTable) -> Result<Rational> {
    let d = Decomposition::new(a, t)?;
    let terms: Vec<Rational> = d.qset.iter().map(Rational::recip_of).collect();
    Ok(theta * &tree_sum(&terms))
}

/// Whether `R(B;q) >= theta` for every `q` in `Q_B`.
pub fn floor_holds(b: &IntSet, theta: &Rational, t: &FactorTable) -> Result<bool> {
    let d = Decomposition::new(b, t)?;
    Ok(first_failing(&d, theta).is_none())
}

/// Trims `A` to some `B` with `R(B)` in `[alpha - 1/M, alpha)` while keeping
/// `R(B;q) >= theta` for all `q` in `Q_B`.
///
/// First prunes `A` at level `2 theta`. Then, while `R(D) >= alpha`, takes
/// `B' = prune_ppower(D, 2 theta)` and removes the smallest element `x` of
/// `B'` from `D`. For `q` exactly dividing `x`,
/// `R(D \ {x}; q) >= R(B'; q) - q/x >= 2 theta - q/M >= theta`, so the floor
/// survives every step; this is re-checked at runtime. Every element is at
/// least `M`, so each step lowers `R` by at most `1/M` and the loop stops
/// inside the window.
///
/// Preconditions: `R(A) >= alpha`, every element in `[M, t.bound()]`, and,
/// when `theta > 0`, every `q` in `Q_A` at most `M theta`. With `theta = 0`
/// there is no floor to protect and the procedure is a plain window trimmer.
pub fn prune_to_window(
    a: &IntSet,
    alpha: &Rational,
    theta: &Rational,
    m: u64,
    t: &FactorTable,
) -> Result<PruneTrace> {
    check_theta(theta)?;
    if m == 0 {
        return Err(domain("M must be positive"));
    }
    let r_initial = recip_sum(a);
    if &r_initial < alpha {
        return Err(domain(format!("R(A) = {r_initial} is below alpha = {alpha}")));
    }
    if let Some(lo) = a.min().filter(|&lo| lo < m) {
        return Err(domain(format!("element {lo} is below M = {m}")));
    }
    if let Some(hi) = a.max().filter(|&hi| hi > t.bound()) {
        return Err(Error::Range { value: hi, bound: t.bound() });
    }
    let dec = Decomposition::new(a, t)?;
    if !theta.is_zero() {
        let cap = theta * &Rational::from(m);
        if let Some(q) = dec.qset.iter().find(|&q| Rational::from(q) > cap) {
            return Err(domain(format!("prime power {q} exceeds M * theta = {cap}")));
        }
    }
    let two_theta = theta * &Rational::from(2u64);
    let first = prune_ppower(a, &two_theta, t)?;
    let mut removed_elements = first.removed_elements.clone();
    let mut window_removals = Vec::new();
    let mut d = first.final_set.clone();
    let mut r = first.r_final.clone();
    if &r < alpha {
        return Err(Error::Infeasible(format!(
            "pruning at 2 theta leaves R = {r} below alpha = {alpha}; R(A) needs more headroom"
        )));
    }
    let mut floor = QMass::new(&d, t)?;
    while &r >= alpha {
        let mut b = floor.clone();
        b.cascade(&two_theta);
        let Some(x) = b.min_element() else {
            return Err(Error::Infeasible(format!(
                "R(D) = {r} >= alpha but pruning D at 2 theta leaves nothing to remove"
            )));
        };
        d = d.without(x);
        r = &r - &Rational::recip_of(x);
        removed_elements.push(x);
        window_removals.push(x);
        floor.remove(x);
        if let Some(q) = floor.first_below(theta) {
            return Err(Error::Infeasible(format!(
                "removing {x} dropped R(D;{q}) = {} below theta = {theta}",
                floor.mass[&q]
            )));
        }
    }
    debug_assert_eq!(r, recip_sum(&d));
    Ok(PruneTrace {
        removed_qs: first.removed_qs,
        removed_elements,
        window_removals,
        final_set: d,
        r_initial,
        r_final: r,
    })
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
        FactorTable::build(20_000).unwrap()
    }

    #[test]
    fn ppower_examples() {
        let t = table();
        let tr = prune_ppower(&set(&[2, 3]), &q("2/5"), &t).unwrap();
        assert_eq!(tr.final_set, set(&[2, 3]));
        assert!(tr.removed_qs.is_empty());
        let tr = prune_ppower(&set(&[100]), &q("3/10"), &t).unwrap();
        assert_eq!(tr.final_set, IntSet::empty());
        assert_eq!(tr.removed_qs, vec![4]);
        assert_eq!(tr.removed_elements, vec![100]);
        let tr = prune_ppower(&set(&[4, 8]), &q("1/2"), &t).unwrap();
        assert_eq!(tr.final_set, set(&[4, 8]));
        assert!(prune_ppower(&set(&[4]), &q("-1"), &t).is_err());
    }

    #[test]
    fn ppower_cascade() {
        let t = table();
        // R(A;3) = 3/6 + 3/15 = 7/10; R(A;5) = 5/15 = 1/3 < 1/2 drops 15,
        // then R(A;3) = 1/2 stays
        let tr = prune_ppower(&set(&[2, 6, 15]), &q("1/2"), &t).unwrap();
        assert_eq!(tr.removed_qs, vec![5]);
        assert_eq!(tr.final_set, set(&[2, 6]));
        assert!(floor_holds(&tr.final_set, &q("1/2"), &t).unwrap());
    }

    #[test]
    fn window_examples() {
        let t = table();
        let tr = prune_to_window(&set(&[4, 6]), &q("1/3"), &q("0"), 4, &t).unwrap();
        assert_eq!(tr.final_set, set(&[6]));
        assert_eq!(tr.r_final, q("1/6"));
        assert_eq!(tr.window_removals, vec![4]);
        assert!(matches!(prune_to_window(&set(&[2, 3, 6]), &q("2"), &q("0"), 2, &t), Err(Error::Domain(_))));
        let tr = prune_to_window(&set(&[4, 5, 6, 20]), &q("1/2"), &q("0"), 4, &t).unwrap();
        assert_eq!(tr.r_initial, q("2/3"));
        assert_eq!(tr.final_set, set(&[5, 6, 20]));
        assert_eq!(tr.r_final, q("5/12"));
    }

    #[test]
    fn window_preconditions() {
        let t = table();
        // element below M
        assert!(matches!(prune_to_window(&set(&[3, 8]), &q("1/10"), &q("0"), 4, &t), Err(Error::Domain(_))));
        // q = 9 > M theta = 10 * 1/2
        assert!(matches!(prune_to_window(&set(&[18]), &q("1/100"), &q("1/2"), 10, &t), Err(Error::Domain(_))));
        assert!(matches!(prune_to_window(&set(&[30_000]), &q("0"), &q("0"), 4, &t), Err(Error::Range { .. })));
    }

    #[test]
    fn window_infeasible_is_reported() {
        let t = table();
        // theta = 1/2 on {10, 12}: R(A;2)=2/10, R(A;5)=5/10 fail 2 theta = 1, all pruned
        let err = prune_to_window(&set(&[10, 12]), &q("1/20"), &q("1/2"), 10, &t).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn window_with_floor() {
        let t = table();
        // every exact prime power at most M theta = 40
        let a: IntSet = IntSet::new((200..=10_000).filter(|n| {
            let f = t.factorize(*n).unwrap();
            let small = f.prime_powers().all(|pp| pp <= 40);
            small
        }))
        .unwrap();
        let theta = q("1/5");
        let alpha = q("3/4");
        let tr = prune_to_window(&a, &alpha, &theta, 200, &t).unwrap();
        assert!(!tr.window_removals.is_empty());
        let lo = &alpha - &Rational::recip_of(200);
        assert!(tr.r_final >= lo && tr.r_final < alpha);
        assert_eq!(tr.r_final, recip_sum(&tr.final_set));
        assert!(floor_holds(&tr.final_set, &theta, &t).unwrap());
        assert!(tr.window_removals.iter().all(|&x| x >= 200));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn theta_strategy() -> impl Strategy<Value = Rational> {
            prop_oneof![Just(q("0")), Just(q("1/10")), Just(q("1/2")), Just(q("1"))]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]

            #[test]
            fn ppower_postconditions(v in proptest::collection::btree_set(2u64..10_000, 0..40), theta in theta_strategy()) {
                let t = table();
                let a = IntSet::new(v).unwrap();
                let tr = prune_ppower(&a, &theta, &t).unwrap();
                prop_assert!(floor_holds(&tr.final_set, &theta, &t).unwrap());
                let loss = prune_loss_bound(&a, &theta, &t).unwrap();
                if tr.removed_qs.is_empty() {
                    prop_assert_eq!(&tr.r_final, &tr.r_initial);
                } else {
                    prop_assert!(tr.r_final > &tr.r_initial - &loss);
                }
                let mut qs = tr.removed_qs.clone();
                qs.sort();
                qs.dedup();
                prop_assert_eq!(qs.len(), tr.removed_qs.len());
                let again = prune_ppower(&tr.final_set, &theta, &t).unwrap();
                prop_assert!(again.removed_qs.is_empty());
                prop_assert_eq!(again.final_set, tr.final_set);
            }

            #[test]
            fn window_trimmer(v in proptest::collection::btree_set(20u64..2_000, 1..60), num in 1u64..20) {
                let t = table();
                let a = IntSet::new(v).unwrap();
                let alpha = &recip_sum(&a) * &Rational::new(num, 20).unwrap();
                let tr = prune_to_window(&a, &alpha, &q("0"), 20, &t).unwrap();
                prop_assert!(tr.r_final < alpha);
                prop_assert!(tr.r_final >= &alpha - &Rational::recip_of(20));
            }
        }
    }
}
