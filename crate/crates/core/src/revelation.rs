//! Bid-based mechanisms: the inverse k-price auction and inverse generalized
//! second price (I-GSP), plus IR and IC auditors.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::benchmarks::prefix_within_budget;
use crate::error::{Error, Result};
use crate::exact::{Money, TimePoint};
use crate::market::Instance;

/// A reported type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bid {
    pub cost: Money,
    pub time: TimePoint,
}

impl Bid {
    pub fn new(cost: Money, time: TimePoint) -> Self {
        Self { cost, time }
    }
}

impl fmt::Display for Bid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.cost, self.time)
    }
}

/// Bids equal to every agent's true type, in the instance's index order.
pub fn truthful_bids(inst: &Instance) -> Vec<Bid> {
    inst.agents()
        .iter()
        .map(|a| Bid::new(a.cost.clone(), a.time.clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionResult {
    pub allocation: Vec<bool>,
    pub rewards: Vec<Money>,
}

impl AuctionResult {
    pub fn nothing(n: usize) -> Self {
        Self {
            allocation: vec![false; n],
            rewards: vec![Money::zero(); n],
        }
    }

    pub fn winners(&self) -> impl Iterator<Item = usize> + '_ {
        self.allocation
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(i, _)| i)
    }

    pub fn winner_count(&self) -> usize {
        self.allocation.iter().filter(|&&x| x).count()
    }

    pub fn total_reward(&self) -> Money {
        self.rewards.iter().sum()
    }

    /// Earliest reported time among the winners.
    pub fn fastest_time<'a>(&self, bids: &'a [Bid]) -> Option<&'a TimePoint> {
        self.winners().map(|i| &bids[i].time).min()
    }
}

/// Indices sorted by cost, then slowest first, then index.
fn canonical_order(bids: &[Bid]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| {
        bids[a]
            .cost
            .cmp(&bids[b].cost)
            .then_with(|| bids[b].time.cmp(&bids[a].time))
            .then(a.cmp(&b))
    });
    order
}

/// Splits bid indices into kept and removed, where a bid is removed if some
/// other bid is strictly cheaper and strictly faster.
pub fn filter_dominated(bids: &[Bid]) -> (Vec<usize>, Vec<usize>) {
    let order = canonical_order(bids);
    let mut removed = Vec::new();
    let mut fastest_cheaper: Option<&TimePoint> = None;
    let mut g = 0;
    while g < order.len() {
        let end = g + order[g..]
            .iter()
            .take_while(|&&i| bids[i].cost == bids[order[g]].cost)
            .count();
        let group = &order[g..end];
        if let Some(f) = fastest_cheaper {
            removed.extend(group.iter().filter(|&&i| &bids[i].time > f));
        }
        let group_fastest = group.iter().map(|&i| &bids[i].time).min();
        fastest_cheaper = fastest_cheaper.into_iter().chain(group_fastest).min();
        g = end;
    }
    removed.sort_unstable();
    let kept = (0..bids.len())
        .filter(|i| removed.binary_search(i).is_err())
        .collect();
    (kept, removed)
}

/// True iff some bid is strictly costlier than another without being
/// strictly faster, the same pattern [`Instance`] rejects.
pub fn detect_inversion(bids: &[Bid]) -> bool {
    let order = canonical_order(bids);
    let mut fastest_cheaper: Option<&TimePoint> = None;
    let mut g = 0;
    while g < order.len() {
        let end = g + order[g..]
            .iter()
            .take_while(|&&i| bids[i].cost == bids[order[g]].cost)
            .count();
        // Slowest of the group comes first in canonical order.
        if fastest_cheaper.is_some_and(|f| &bids[order[g]].time >= f) {
            return true;
        }
        fastest_cheaper = Some(&bids[order[end - 1]].time)
            .into_iter()
            .chain(fastest_cheaper)
            .min();
        g = end;
    }
    false
}

/// Allocates the `k` cheapest non-dominated bids for the largest `k` with
/// `k * c_{k+1} <= 1`, paying each `c_{k+1}`. Past the last bid the price is 1.
pub fn inverse_k_price(bids: &[Bid]) -> Result<AuctionResult> {
    let (kept, _) = filter_dominated(bids);
    let mut order = canonical_order(&kept.iter().map(|&i| bids[i].clone()).collect::<Vec<_>>());
    for o in order.iter_mut() {
        *o = kept[*o];
    }
    let one = Money::one();
    let price_at = |k: usize| -> &Money {
        match order.get(k) {
            Some(&i) if bids[i].cost < one => &bids[i].cost,
            _ => &one,
        }
    };
    let k = (1..=order.len())
        .rev()
        .find(|&k| {
            let price = price_at(k);
            &bids[order[k - 1]].cost <= price
                && price.value() * BigRational::from_integer(BigInt::from(k)) <= BigRational::one()
        })
        .ok_or(Error::NoFeasibleK)?;
    let mut result = AuctionResult::nothing(bids.len());
    let price = price_at(k).clone();
    for &i in &order[..k] {
        result.allocation[i] = true;
        result.rewards[i] = price.clone();
    }
    Ok(result)
}

/// Inverse generalized second price on input `k`.
///
/// With reported costs sorted, the `k - 2` cheapest agents are paid the next
/// cost up, and the costliest agent `l` that fits beside `c_2..c_{k-1}` is
/// paid `1 - (c_2 + ... + c_{k-1})`. For `k > k*` the mechanism runs on `k*`.
/// Inverted bids get nothing.
pub fn igsp(bids: &[Bid], k: usize) -> Result<AuctionResult> {
    if k < 2 {
        return Err(Error::KTooSmall(k));
    }
    let mut result = AuctionResult::nothing(bids.len());
    if detect_inversion(bids) {
        return Ok(result);
    }
    let order = canonical_order(bids);
    let costs: Vec<&BigRational> = order.iter().map(|&i| bids[i].cost.value()).collect();
    let kstar = prefix_within_budget(costs.iter().copied());
    if kstar == 0 {
        return Ok(result);
    }
    // With k* = 1 this still runs the k = 2 procedure: the costliest
    // affordable agent alone, paid 1.
    let k = k.min(kstar).max(2);
    let middle: BigRational = costs[1..k - 1].iter().copied().sum();
    let budget = BigRational::one() - middle;
    let ell = (k - 2..order.len())
        .rev()
        .find(|&z| costs[z] <= &budget)
        .expect("c_k fits beside c_2..c_{k-1} whenever k <= k*");
    for p in 0..k - 2 {
        result.allocation[order[p]] = true;
        result.rewards[order[p]] = bids[order[p + 1]].cost.clone();
    }
    result.allocation[order[ell]] = true;
    result.rewards[order[ell]] = Money::new(budget).expect("reported costs are non-negative");
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    InverseKPrice,
    Igsp,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::InverseKPrice => "inverse-k-price",
            Mechanism::Igsp => "igsp",
        }
    }

    /// Runs the mechanism; `k` is required by I-GSP and ignored otherwise.
    pub fn run(self, bids: &[Bid], k: Option<usize>) -> Result<AuctionResult> {
        match self {
            Mechanism::InverseKPrice => inverse_k_price(bids),
            Mechanism::Igsp => igsp(
                bids,
                k.ok_or_else(|| Error::InvalidConfig("igsp needs k".into()))?,
            ),
        }
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse-k-price" => Ok(Mechanism::InverseKPrice),
            "igsp" => Ok(Mechanism::Igsp),
            _ => Err(Error::UnknownMechanism(s.into())),
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrViolation {
    pub agent: usize,
    pub reward: Money,
    pub cost: Money,
}

/// Allocated agents paid less than their cost under truthful bidding.
pub fn audit_ir(
    mechanism: Mechanism,
    inst: &Instance,
    k: Option<usize>,
) -> Result<Vec<IrViolation>> {
    let result = mechanism.run(&truthful_bids(inst), k)?;
    Ok(result
        .winners()
        .filter(|&i| &result.rewards[i] < inst.cost(i))
        .map(|i| IrViolation {
            agent: i,
            reward: result.rewards[i].clone(),
            cost: inst.cost(i).clone(),
        })
        .collect())
}

/// Deviations tried by [`audit_ic`].
#[derive(Debug, Clone)]
pub struct AuditGrid {
    /// Reported costs `0, step, 2 step, ..., 1`, plus every true cost and its
    /// neighbours at distance `step`.
    pub cost_step: Money,
    /// Later times to try besides every true time and the deadline.
    pub extra_times: Vec<TimePoint>,
}

impl Default for AuditGrid {
    fn default() -> Self {
        Self {
            cost_step: Money::ratio(1, 20),
            extra_times: Vec::new(),
        }
    }
}

/// Instances above this size are refused by the IC auditor.
pub const IC_AUDIT_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcViolation {
    pub agent: usize,
    pub bid: Bid,
    pub truthful_utility: BigRational,
    pub deviant_utility: BigRational,
}

/// Unilateral misreports that strictly beat truthful bidding.
pub fn audit_ic(
    mechanism: Mechanism,
    inst: &Instance,
    k: Option<usize>,
    grid: &AuditGrid,
) -> Result<Vec<IcViolation>> {
    mechanism.run(&truthful_bids(inst), k)?;
    audit_ic_with(inst, grid, |bids| mechanism.run(bids, k))
}

/// [`audit_ic`] for an arbitrary bid-to-outcome map. A mechanism error on a
/// deviant bid profile counts as allocating nothing.
pub fn audit_ic_with<F>(inst: &Instance, grid: &AuditGrid, mechanism: F) -> Result<Vec<IcViolation>>
where
    F: Fn(&[Bid]) -> Result<AuctionResult> + Sync,
{
    let n = inst.len();
    if n > IC_AUDIT_CAP {
        return Err(Error::InstanceTooLarge {
            n,
            cap: IC_AUDIT_CAP,
        });
    }
    let truth = truthful_bids(inst);
    let utility = |bids: &[Bid], i: usize| -> BigRational {
        match mechanism(bids) {
            Ok(r) if r.allocation[i] => r.rewards[i].value() - inst.cost(i).value(),
            _ => BigRational::zero(),
        }
    };
    let costs = cost_candidates(inst, &grid.cost_step);
    let per_agent: Vec<Vec<IcViolation>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let honest = utility(&truth, i);
            let times = time_candidates(inst, i, &grid.extra_times);
            let mut found = Vec::new();
            let mut bids = truth.clone();
            for c in &costs {
                for t in &times {
                    let bid = Bid::new(c.clone(), t.clone());
                    if bid == truth[i] {
                        continue;
                    }
                    bids[i] = bid;
                    let u = utility(&bids, i);
                    if u > honest {
                        found.push(IcViolation {
                            agent: i,
                            bid: bids[i].clone(),
                            truthful_utility: honest.clone(),
                            deviant_utility: u,
                        });
                    }
                }
            }
            found
        })
        .collect();
    Ok(per_agent.concat())
}

fn cost_candidates(inst: &Instance, step: &Money) -> Vec<Money> {
    let mut out = Vec::new();
    if !step.is_zero() {
        let mut c = BigRational::zero();
        while c <= BigRational::one() {
            out.push(c.clone());
            c += step.value();
        }
    }
    for a in inst.agents() {
        let c = a.cost.value();
        out.push(c.clone());
        out.push(c + step.value());
        if c >= step.value() {
            out.push(c - step.value());
        }
    }
    out.sort();
    out.dedup();
    out.into_iter()
        .map(|c| Money::new(c).expect("non-negative"))
        .collect()
}

fn time_candidates(inst: &Instance, agent: usize, extra: &[TimePoint]) -> Vec<TimePoint> {
    let own = inst.time(agent);
    let mut out: Vec<TimePoint> = inst
        .agents()
        .iter()
        .map(|a| &a.time)
        .chain(extra)
        .chain([inst.deadline()])
        .filter(|t| *t >= own)
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Orders violations by agent, then reported cost, then reported time.
pub fn violation_order(a: &IcViolation, b: &IcViolation) -> Ordering {
    a.agent
        .cmp(&b.agent)
        .then_with(|| a.bid.cost.cmp(&b.bid.cost))
        .then_with(|| a.bid.time.cmp(&b.bid.time))
}
