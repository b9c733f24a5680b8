//! Decentralization factor, time guarantees, k-best sets and outcome metrics.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{Money, TimePoint};
use crate::market::{Instance, Outcome};

/// Largest number of agents whose costs fit together in the unit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecentralizationFactor(usize);

impl DecentralizationFactor {
    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for DecentralizationFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Exhaustive subset searches refuse instances above this size.
pub const BRUTE_FORCE_CAP: usize = 20;

/// A maximum-cardinality subset under a sum budget is a cheapest prefix, so
/// this is the longest canonical prefix with total cost at most 1.
pub fn decentralization_factor(inst: &Instance) -> DecentralizationFactor {
    DecentralizationFactor(prefix_within_budget(
        inst.agents().iter().map(|a| a.cost.value()),
    ))
}

pub(crate) fn prefix_within_budget<'a>(costs: impl Iterator<Item = &'a BigRational>) -> usize {
    let one = BigRational::one();
    let mut total = BigRational::zero();
    let mut k = 0;
    for c in costs {
        total += c;
        if total > one {
            break;
        }
        k += 1;
    }
    k
}

/// `ceil(alpha * kstar)`, i.e. the smallest admissible set size.
pub fn required_size(kstar: usize, alpha: &BigRational) -> Result<usize> {
    if !alpha.is_positive() || alpha > &BigRational::one() {
        return Err(Error::InvalidAlpha(alpha.to_string()));
    }
    let need = (alpha * BigRational::from_integer(BigInt::from(kstar))).ceil();
    Ok(need.to_integer().try_into().expect("bounded by kstar"))
}

/// Fastest first-solution time among feasible sets of at least
/// `ceil(alpha k*)` agents.
///
/// Agent `i` can lead such a set iff her cost plus the `need - 1` cheapest
/// other costs fits the budget, which makes this linear after sorting.
pub fn time_guarantee(inst: &Instance, alpha: &BigRational) -> Result<TimePoint> {
    let kstar = decentralization_factor(inst).get();
    let need = required_size(kstar, alpha)?;
    time_guarantee_for_size(inst, need)
}

pub(crate) fn time_guarantee_for_size(inst: &Instance, need: usize) -> Result<TimePoint> {
    if need == 0 || need > inst.len() {
        return Err(Error::NoFeasibleSet);
    }
    let one = BigRational::one();
    // Sum of the `need` cheapest, and of the `need - 1` cheapest.
    let head: BigRational = inst.agents()[..need - 1]
        .iter()
        .map(|a| a.cost.value())
        .sum();
    let with_next = &head + inst.cost(need - 1).value();
    let mut best: Option<&TimePoint> = None;
    for (i, a) in inst.agents().iter().enumerate() {
        let others = if i < need - 1 {
            &with_next - a.cost.value()
        } else {
            head.clone()
        };
        if &others + a.cost.value() <= one && best.is_none_or(|b| &a.time < b) {
            best = Some(&a.time);
        }
    }
    best.cloned().ok_or(Error::NoFeasibleSet)
}

/// Literal evaluation of the time guarantee by subset enumeration.
pub fn brute_force_time_guarantee(inst: &Instance, alpha: &BigRational) -> Result<TimePoint> {
    let n = inst.len();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::InstanceTooLarge {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let kstar = decentralization_factor(inst).get();
    let need = required_size(kstar, alpha)?;
    let one = BigRational::one();
    let mut best: Option<TimePoint> = None;
    for mask in 1u32..(1u32 << n) {
        if (mask.count_ones() as usize) < need {
            continue;
        }
        let members = (0..n).filter(|i| mask >> i & 1 == 1);
        let cost: BigRational = members.clone().map(|i| inst.cost(i).value()).sum();
        if cost > one {
            continue;
        }
        let fastest = members.map(|i| inst.time(i)).min().expect("non-empty mask");
        if best.as_ref().is_none_or(|b| fastest < b) {
            best = Some(fastest.clone());
        }
    }
    best.ok_or(Error::NoFeasibleSet)
}

/// The `k - 1` cheapest agents plus the fastest agent affordable beside them.
///
/// Among equally fast candidates the cheapest wins, then the lowest index.
pub fn k_best_set(inst: &Instance, k: usize) -> Result<BTreeSet<usize>> {
    let kstar = decentralization_factor(inst).get();
    if k < 1 || k > kstar {
        return Err(Error::KOutOfRange {
            k,
            min: 1,
            max: kstar,
        });
    }
    let prefix: BigRational = inst.agents()[..k - 1].iter().map(|a| a.cost.value()).sum();
    let budget = BigRational::one() - prefix;
    let extra = (k - 1..inst.len())
        .filter(|&i| inst.cost(i).value() <= &budget)
        .min_by(|&a, &b| {
            inst.time(a)
                .cmp(inst.time(b))
                .then_with(|| inst.cost(a).cmp(inst.cost(b)))
                .then(a.cmp(&b))
        })
        .expect("agent k-1 fits whenever k <= k*");
    let mut set: BTreeSet<usize> = (0..k - 1).collect();
    set.insert(extra);
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMetrics {
    pub participant_count: usize,
    /// `participant_count / k*`.
    pub decentralization_ratio: BigRational,
    pub fastest_time: Option<TimePoint>,
    /// Smallest `beta` on the grid `{1/k*, ..., 1}` with `fastest_time <= t*_beta`.
    pub efficiency_class: Option<BigRational>,
}

pub fn outcome_metrics(inst: &Instance, outcome: &Outcome) -> OutcomeMetrics {
    let kstar = decentralization_factor(inst).get();
    let count = outcome.participants.len();
    let ratio = BigRational::new(BigInt::from(count), BigInt::from(kstar));
    let efficiency_class = outcome.fastest_time.as_ref().and_then(|fastest| {
        // t*_{j/k*} is non-decreasing in j; take the first grid point that covers.
        (1..=kstar).find_map(|j| {
            let t = time_guarantee_for_size(inst, j).expect("j <= k* is always feasible");
            (fastest <= &t).then(|| BigRational::new(BigInt::from(j), BigInt::from(kstar)))
        })
    });
    OutcomeMetrics {
        participant_count: count,
        decentralization_ratio: ratio,
        fastest_time: outcome.fastest_time.clone(),
        efficiency_class,
    }
}

/// Total cost of a set of agents.
pub fn set_cost(inst: &Instance, set: &BTreeSet<usize>) -> Money {
    set.iter().map(|&i| inst.cost(i)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{make_instance, AgentType};

    fn inst(pairs: &[(&str, &str)], deadline: u64) -> Instance {
        let types = pairs
            .iter()
            .map(|(c, t)| AgentType::new(c.parse().unwrap(), t.parse().unwrap()))
            .collect();
        make_instance(types, TimePoint::integer(deadline)).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn example() -> Instance {
        inst(&[("1", "1/100"), ("1/2", "1"), ("1/2", "1")], 1)
    }

    #[test]
    fn kstar_examples() {
        assert_eq!(decentralization_factor(&example()).get(), 2);
        assert_eq!(decentralization_factor(&inst(&[("0.5", "3")], 3)).get(), 1);
        let four = inst(
            &[("0.2", "9"), ("0.3", "8"), ("0.4", "7"), ("0.5", "6")],
            10,
        );
        assert_eq!(decentralization_factor(&four).get(), 3);
    }

    #[test]
    fn time_guarantee_examples() {
        let e = example();
        assert_eq!(time_guarantee(&e, &q(1, 1)).unwrap(), TimePoint::integer(1));
        assert_eq!(
            time_guarantee(&e, &q(1, 2)).unwrap(),
            TimePoint::ratio(1, 100)
        );
        let three = inst(&[("0.2", "9"), ("0.3", "8"), ("0.6", "2")], 10);
        assert_eq!(
            time_guarantee(&three, &q(1, 1)).unwrap(),
            TimePoint::integer(2)
        );
        for alpha in [q(1, 1), q(1, 2), q(1, 3)] {
            assert_eq!(
                time_guarantee(&e, &alpha).unwrap(),
                brute_force_time_guarantee(&e, &alpha).unwrap()
            );
            assert_eq!(
                time_guarantee(&three, &alpha).unwrap(),
                brute_force_time_guarantee(&three, &alpha).unwrap()
            );
        }
        let single = inst(&[("0.5", "3")], 3);
        assert_eq!(
            brute_force_time_guarantee(&single, &q(1, 1)).unwrap(),
            TimePoint::integer(3)
        );
    }

    #[test]
    fn alpha_is_validated() {
        let e = example();
        assert!(matches!(
            time_guarantee(&e, &q(0, 1)),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            time_guarantee(&e, &q(3, 2)),
            Err(Error::InvalidAlpha(_))
        ));
        // ceil(0.3 * 2) = 1
        assert_eq!(required_size(2, &q(3, 10)).unwrap(), 1);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let pairs: Vec<(String, String)> = (0..21)
            .map(|i| ("1/100".to_string(), format!("{}", 30 - i)))
            .collect();
        let types = pairs
            .iter()
            .map(|(c, t)| AgentType::new(c.parse().unwrap(), t.parse().unwrap()))
            .collect();
        let big = make_instance(types, TimePoint::integer(30)).unwrap();
        assert!(matches!(
            brute_force_time_guarantee(&big, &q(1, 1)),
            Err(Error::InstanceTooLarge { n: 21, .. })
        ));
    }

    #[test]
    fn k_best_set_examples() {
        let three = inst(&[("0.2", "9"), ("0.3", "8"), ("0.6", "2")], 10);
        assert_eq!(k_best_set(&three, 2).unwrap(), BTreeSet::from([0, 2]));
        assert_eq!(k_best_set(&three, 1).unwrap(), BTreeSet::from([2]));
        let four = inst(
            &[("0.2", "9"), ("0.3", "8"), ("0.4", "7"), ("0.5", "6")],
            10,
        );
        assert_eq!(k_best_set(&four, 3).unwrap(), BTreeSet::from([0, 1, 3]));
        assert!(matches!(
            k_best_set(&four, 4),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            k_best_set(&four, 0),
            Err(Error::KOutOfRange { .. })
        ));
    }

    #[test]
    fn metrics_examples() {
        let e = example();
        // Original agents 2 and 3 are the two (1/2, 1) agents: canonical 0 and 1.
        let both = Outcome::from_participants(&e, [0, 1].into(), vec![Money::zero(); 3]).unwrap();
        let m = outcome_metrics(&e, &both);
        assert_eq!(m.decentralization_ratio, q(1, 1));
        assert_eq!(m.fastest_time, Some(TimePoint::integer(1)));
        assert_eq!(m.efficiency_class, Some(q(1, 1)));

        let none = Outcome::from_participants(&e, BTreeSet::new(), vec![Money::zero(); 3]).unwrap();
        let m = outcome_metrics(&e, &none);
        assert_eq!(m.decentralization_ratio, q(0, 1));
        assert_eq!(m.fastest_time, None);
        assert_eq!(m.efficiency_class, None);

        let fast = Outcome::from_participants(&e, [2].into(), vec![Money::zero(); 3]).unwrap();
        let m = outcome_metrics(&e, &fast);
        assert_eq!(m.decentralization_ratio, q(1, 2));
        assert_eq!(m.fastest_time, Some(TimePoint::ratio(1, 100)));
        assert_eq!(m.efficiency_class, Some(q(1, 2)));
    }
}
