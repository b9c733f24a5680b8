//! Pure Nash equilibria of the non-revelation rules.
//!
//! Equilibria are searched over participation sets: members submit at their
//! true time, everyone else abstains. For the fastest-wins, equal and
//! harmonic rules a later submission never ranks better, so delaying cannot
//! pay. The best-set rule infers cost from the submission time, so
//! [`nash_violation`] additionally tries every distinguishable later time for
//! it.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::benchmarks::prefix_within_budget;
use crate::error::{Error, Result};
use crate::exact::{Money, TimePoint};
use crate::market::{Action, ActionProfile, Instance};
use crate::rules::{best_set_selection, harmonic_offset, BucketScheme, RewardRule};

/// Agents that submit (at their true time) in a candidate equilibrium.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ParticipationSet(BTreeSet<usize>);

impl ParticipationSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self(members.into_iter().collect())
    }

    fn from_mask(mask: u32, n: usize) -> Self {
        Self((0..n).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn into_members(self) -> BTreeSet<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn profile(&self, inst: &Instance) -> ActionProfile {
        ActionProfile::participation(inst, &self.0)
    }
}

impl fmt::Display for ParticipationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// A profitable unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deviation {
    /// A member is paid less than her cost and would rather abstain.
    Underpaid {
        agent: usize,
        reward: Money,
        cost: Money,
    },
    /// A non-member would be paid at least her cost by submitting at `at`.
    WouldJoin {
        agent: usize,
        at: TimePoint,
        reward: Money,
        cost: Money,
    },
    /// A member earns strictly more by submitting later, at `to`.
    WouldDelay {
        agent: usize,
        to: TimePoint,
        reward: Money,
        current: Money,
    },
}

impl Deviation {
    pub fn agent(&self) -> usize {
        match self {
            Deviation::Underpaid { agent, .. }
            | Deviation::WouldJoin { agent, .. }
            | Deviation::WouldDelay { agent, .. } => *agent,
        }
    }
}

/// The first profitable deviation from `set`, or `None` if it is a pure Nash
/// equilibrium. Indifferent members stay in; indifferent outsiders join.
pub fn nash_violation(
    rule: &RewardRule,
    inst: &Instance,
    set: &ParticipationSet,
) -> Option<Deviation> {
    let profile = set.profile(inst);
    let rewards = rule.rewards(&profile);
    let scheme = match rule {
        RewardRule::BestSet { scheme, .. } => Some(scheme),
        _ => None,
    };

    for i in set.iter() {
        if &rewards[i] < inst.cost(i) {
            return Some(Deviation::Underpaid {
                agent: i,
                reward: rewards[i].clone(),
                cost: inst.cost(i).clone(),
            });
        }
    }
    for j in (0..inst.len()).filter(|j| !set.contains(*j)) {
        let times = match scheme {
            Some(s) => submission_times(inst, s, j),
            None => vec![inst.time(j).clone()],
        };
        for at in times {
            let r = rule.rewards(&profile.with_action(j, Action::Submit(at.clone())));
            if &r[j] >= inst.cost(j) {
                return Some(Deviation::WouldJoin {
                    agent: j,
                    at,
                    reward: r[j].clone(),
                    cost: inst.cost(j).clone(),
                });
            }
        }
    }
    if let Some(s) = scheme {
        for i in set.iter() {
            for to in submission_times(inst, s, i)
                .into_iter()
                .filter(|t| t != inst.time(i))
            {
                let r = rule.rewards(&profile.with_action(i, Action::Submit(to.clone())));
                if r[i] > rewards[i] {
                    return Some(Deviation::WouldDelay {
                        agent: i,
                        to,
                        reward: r[i].clone(),
                        current: rewards[i].clone(),
                    });
                }
            }
        }
    }
    None
}

pub fn is_pure_nash(rule: &RewardRule, inst: &Instance, set: &ParticipationSet) -> bool {
    nash_violation(rule, inst, set).is_none()
}

/// Times in `[t_agent, T]` that realize every distinguishable position
/// relative to the bucket edges and the other agents' times.
fn submission_times(inst: &Instance, scheme: &BucketScheme, agent: usize) -> Vec<TimePoint> {
    let earliest = inst.time(agent);
    let latest = inst.deadline();
    let mut points: Vec<TimePoint> = scheme
        .buckets()
        .iter()
        .flat_map(|b| [b.t_lo.clone(), b.t_hi.clone()])
        .chain(inst.agents().iter().map(|a| a.time.clone()))
        .chain([earliest.clone(), latest.clone()])
        .filter(|t| t >= earliest && t <= latest)
        .collect();
    points.sort();
    points.dedup();
    let two = BigRational::from_integer(2.into());
    let mids: Vec<TimePoint> = points
        .windows(2)
        .map(|w| TimePoint::new((w[0].value() + w[1].value()) / &two).expect("non-negative"))
        .collect();
    points.extend(mids);
    points.sort();
    points
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    /// Every pure Nash participation set, in bitmask order.
    pub equilibria: Vec<ParticipationSet>,
    /// A smallest equilibrium.
    pub worst: Option<ParticipationSet>,
    pub uniform_size: bool,
}

/// Default cap on the instance size for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Checks all `2^n` participation sets.
pub fn enumerate_equilibria(rule: &RewardRule, inst: &Instance) -> Result<EquilibriumReport> {
    enumerate_equilibria_capped(rule, inst, ENUMERATION_CAP)
}

pub fn enumerate_equilibria_capped(
    rule: &RewardRule,
    inst: &Instance,
    cap: usize,
) -> Result<EquilibriumReport> {
    let n = inst.len();
    if n > cap || n >= 32 {
        return Err(Error::InstanceTooLarge {
            n,
            cap: cap.min(31),
        });
    }
    let equilibria: Vec<ParticipationSet> = (0..(1u32 << n))
        .into_par_iter()
        .map(|mask| ParticipationSet::from_mask(mask, n))
        .filter(|s| is_pure_nash(rule, inst, s))
        .collect();
    let worst = equilibria.iter().min_by_key(|s| s.len()).cloned();
    let uniform_size = equilibria.windows(2).all(|w| w[0].len() == w[1].len());
    Ok(EquilibriumReport {
        equilibria,
        worst,
        uniform_size,
    })
}

/// The cheapest `l` agents, for the largest `l` with `c_l <= 1/l`.
pub fn solve_equal(inst: &Instance) -> ParticipationSet {
    // c_i increases and 1/i decreases, so the condition holds on a prefix.
    let ell = (0..inst.len())
        .take_while(|&i| inst.cost(i).at_most_unit_fraction(i as u64 + 1))
        .count();
    ParticipationSet::new(0..ell)
}

/// Memoized harmonic offsets `m_l`.
#[derive(Default)]
struct Offsets(Vec<usize>);

impl Offsets {
    fn get(&mut self, ell: usize) -> usize {
        while self.0.len() < ell {
            let next = self.0.len() + 1;
            self.0.push(harmonic_offset(next));
        }
        self.0[ell - 1]
    }
}

/// Members kept in rank order: by time, then index.
struct Ranked<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
}

impl<'a> Ranked<'a> {
    fn key(&self, i: usize) -> (&'a TimePoint, usize) {
        (self.inst.time(i), i)
    }

    /// 0-based position `i` takes (or would take) among the members.
    fn position(&self, i: usize) -> usize {
        let k = self.key(i);
        self.order.partition_point(|&j| self.key(j) < k)
    }

    fn insert(&mut self, i: usize) {
        let p = self.position(i);
        self.order.insert(p, i);
    }

    fn remove(&mut self, i: usize) {
        let p = self.position(i);
        debug_assert_eq!(self.order[p], i);
        self.order.remove(p);
    }

    fn contains(&self, i: usize) -> bool {
        let p = self.position(i);
        self.order.get(p) == Some(&i)
    }
}

/// Equilibrium of the harmonic rule, built by adding agents in cost order.
///
/// With an equilibrium `S` for the cheaper agents, the next agent either
/// stays out (`S` still stands), joins (`S + n`), or joins and displaces the
/// costliest member she leaves underpaid (`S + n - i*`).
pub fn solve_harmonic(inst: &Instance) -> ParticipationSet {
    let mut offsets = Offsets::default();
    let mut set = Ranked {
        inst,
        order: vec![0],
    };

    for newcomer in 1..inst.len() {
        let ell = set.order.len();
        let rank = set.position(newcomer) + 1;
        if !inst
            .cost(newcomer)
            .at_most_unit_fraction((offsets.get(ell + 1) + rank - 1) as u64)
        {
            continue;
        }
        set.insert(newcomer);
        let underpaid = underpaid_members(inst, &set, &mut offsets);
        if underpaid.is_empty() && !someone_joins(inst, &set, newcomer + 1, &mut offsets) {
            continue;
        }
        // Costliest underpaid member; ties go to the slowest, then the highest index.
        let displaced = underpaid
            .into_iter()
            .filter(|&i| i != newcomer)
            .max_by(|&a, &b| {
                inst.cost(a)
                    .cmp(inst.cost(b))
                    .then(inst.time(a).cmp(inst.time(b)))
                    .then(a.cmp(&b))
            })
            .expect("a newcomer that wants to join leaves some earlier member underpaid");
        set.remove(displaced);
    }
    ParticipationSet::new(set.order)
}

fn underpaid_members(inst: &Instance, set: &Ranked, offsets: &mut Offsets) -> Vec<usize> {
    let m = offsets.get(set.order.len());
    set.order
        .iter()
        .enumerate()
        .filter(|&(pos, &i)| !inst.cost(i).at_most_unit_fraction((m + pos) as u64))
        .map(|(_, &i)| i)
        .collect()
}

/// Does any non-member among agents `0..upto` want to join?
fn someone_joins(inst: &Instance, set: &Ranked, upto: usize, offsets: &mut Offsets) -> bool {
    let m = offsets.get(set.order.len() + 1);
    (0..upto).any(|j| {
        !set.contains(j)
            && inst
                .cost(j)
                .at_most_unit_fraction((m + set.position(j)) as u64)
    })
}

/// The k-best set under inferred costs when everyone submits: the unique
/// equilibrium of the best-set rule when each agent's cost is the cost of
/// her bucket.
pub fn solve_best_set(
    inst: &Instance,
    scheme: &BucketScheme,
    k: usize,
) -> Result<ParticipationSet> {
    let mut inferred = Vec::with_capacity(inst.len());
    for (i, a) in inst.agents().iter().enumerate() {
        let c = scheme.inferred_cost(&a.time).ok_or_else(|| {
            Error::SchemeMismatch(format!("agent {i}: time {} lies in no bucket", a.time))
        })?;
        if &a.cost > c {
            return Err(Error::SchemeMismatch(format!(
                "agent {i}: cost {} exceeds its bucket's {}",
                a.cost, c
            )));
        }
        inferred.push(c.value().clone());
    }
    inferred.sort();
    let kstar = prefix_within_budget(inferred.iter());
    if k < 2 || k > kstar {
        return Err(Error::KOutOfRange {
            k,
            min: 2,
            max: kstar,
        });
    }
    let everyone = ActionProfile::participation(inst, &(0..inst.len()).collect());
    let picked = best_set_selection(&everyone, scheme, k);
    debug_assert!(picked.iter().map(|(_, c)| c.value()).sum::<BigRational>() <= BigRational::one());
    Ok(ParticipationSet::new(picked.into_iter().map(|(i, _)| i)))
}
