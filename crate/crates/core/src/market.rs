//! Agents, instances, action profiles and outcomes.
//!
//! An [`Instance`] always holds its agents in canonical order: costs
//! non-decreasing, equal costs by time descending and then by original
//! position. All indices handed out by this crate are canonical unless a
//! name says otherwise; [`Instance::original_index`] maps back.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::One;

use crate::error::{Error, Result};
use crate::exact::{parse_rational, Money, TimePoint};

/// An agent's private capability: she can deliver a solution by `time` at
/// a cost of `cost`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentType {
    pub cost: Money,
    pub time: TimePoint,
}

impl AgentType {
    pub fn new(cost: Money, time: TimePoint) -> Self {
        Self { cost, time }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<AgentType>,
    deadline: TimePoint,
    /// canonical index -> original index
    original: Vec<usize>,
}

/// Validates and canonicalizes a list of agent types.
pub fn make_instance(types: Vec<AgentType>, deadline: TimePoint) -> Result<Instance> {
    Instance::new(types, deadline)
}

impl Instance {
    pub fn new(types: Vec<AgentType>, deadline: TimePoint) -> Result<Self> {
        Self::build(types, deadline, true)
    }

    fn build(types: Vec<AgentType>, deadline: TimePoint, monotone: bool) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::EmptyInstance);
        }
        for (i, t) in types.iter().enumerate() {
            if t.cost.is_zero() {
                return Err(Error::InvalidType {
                    agent: i,
                    reason: "cost must be positive".into(),
                });
            }
            if t.time > deadline {
                return Err(Error::InvalidType {
                    agent: i,
                    reason: format!("time {} exceeds deadline {}", t.time, deadline),
                });
            }
        }

        let mut order: Vec<usize> = (0..types.len()).collect();
        order.sort_by(|&a, &b| {
            types[a]
                .cost
                .cmp(&types[b].cost)
                .then_with(|| types[b].time.cmp(&types[a].time))
                .then_with(|| a.cmp(&b))
        });

        // Walk cost groups; every agent must be strictly faster than all
        // strictly cheaper agents.
        let mut fastest_so_far: Option<usize> = None; // original index
        let mut g = 0;
        while monotone && g < order.len() {
            let mut end = g;
            while end < order.len() && types[order[end]].cost == types[order[g]].cost {
                end += 1;
            }
            if let Some(fastest_cheaper) = fastest_so_far {
                for &i in &order[g..end] {
                    if types[i].time >= types[fastest_cheaper].time {
                        return Err(Error::MonotonicityViolation {
                            costlier: i,
                            cheaper: fastest_cheaper,
                        });
                    }
                }
            }
            // Within a group times are descending, so the last one is the fastest.
            let group_fastest = order[end - 1];
            fastest_so_far = Some(match fastest_so_far {
                Some(prev) if types[prev].time <= types[group_fastest].time => prev,
                _ => group_fastest,
            });
            g = end;
        }

        if types[order[0]].cost.value() >= &num_rational::BigRational::one() {
            return Err(Error::Infeasible);
        }

        let agents = order.iter().map(|&i| types[i].clone()).collect();
        Ok(Self {
            agents,
            deadline,
            original: order,
        })
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[AgentType] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentType {
        &self.agents[i]
    }

    pub fn cost(&self, i: usize) -> &Money {
        &self.agents[i].cost
    }

    pub fn time(&self, i: usize) -> &TimePoint {
        &self.agents[i].time
    }

    pub fn deadline(&self) -> &TimePoint {
        &self.deadline
    }

    pub fn original_index(&self, canonical: usize) -> usize {
        self.original[canonical]
    }

    /// canonical index -> original index, for every agent.
    pub fn permutation(&self) -> &[usize] {
        &self.original
    }

    /// Agent types in their original (input) order.
    pub fn original_types(&self) -> Vec<AgentType> {
        let mut out = vec![None; self.len()];
        for (c, &o) in self.original.iter().enumerate() {
            out[o] = Some(self.agents[c].clone());
        }
        out.into_iter()
            .map(|t| t.expect("permutation is a bijection"))
            .collect()
    }

    /// Text form: a `deadline <T>` header, then `cost time` per agent in
    /// original order, so parsing reproduces the same permutation.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("deadline {}\n", self.deadline);
        for t in self.original_types() {
            let _ = writeln!(s, "{} {}", t.cost, t.time);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut deadline = None;
        let mut types = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if deadline.is_none() {
                match fields.as_slice() {
                    ["deadline", t] => {
                        deadline = Some(parse_time(t, line_no)?);
                        continue;
                    }
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "expected `deadline <T>` header".into(),
                        })
                    }
                }
            }
            match fields.as_slice() {
                [c, t] => {
                    let cost = parse_money(c, line_no)?;
                    let time = parse_time(t, line_no)?;
                    types.push(AgentType::new(cost, time));
                }
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected `cost time`, got `{line}`"),
                    })
                }
            }
        }
        let deadline = deadline.ok_or(Error::Parse {
            line: 0,
            msg: "missing `deadline <T>` header".into(),
        })?;
        Instance::new(types, deadline)
    }
}

impl FromStr for Instance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Instance::parse(s)
    }
}

fn parse_money(s: &str, line: usize) -> Result<Money> {
    let v = parse_rational(s).map_err(|msg| Error::Parse { line, msg })?;
    Money::new(v).ok_or(Error::Parse {
        line,
        msg: format!("negative cost `{s}`"),
    })
}

fn parse_time(s: &str, line: usize) -> Result<TimePoint> {
    let v = parse_rational(s).map_err(|msg| Error::Parse { line, msg })?;
    TimePoint::new(v).ok_or(Error::Parse {
        line,
        msg: format!("negative time `{s}`"),
    })
}

/// Instances from the impossibility arguments, with deadline `T = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `(1/2, T), (1/2, T)`.
    HalfHalf,
    /// `(2/3, T), (1/3, T)`: equal splitting keeps only one agent.
    TwoThirdsOneThird,
    /// `kstar - 1` agents `(eps, T)` and one agent `(1 - (kstar-1) eps, delta)`.
    FastExpensive {
        kstar: usize,
        eps: Money,
        delta: TimePoint,
    },
    /// Two agents with `c1 + c2 < 1`; the cheaper one is the slower.
    OverlapPair { c1: Money, c2: Money },
}

impl FromStr for Witness {
    type Err = Error;

    /// `half-half`, `two-thirds-one-third`, `fast-expensive(5,0.01,0.1)`,
    /// `overlap-pair(0.2,0.3)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::UnknownWitness(s.into()))?;
                (
                    name.trim(),
                    inner.split(',').map(str::trim).collect::<Vec<_>>(),
                )
            }
            None => (s, Vec::new()),
        };
        let bad = |msg: &str| Error::InvalidWitness(format!("{s}: {msg}"));
        match (name, args.as_slice()) {
            ("half-half", []) => Ok(Witness::HalfHalf),
            ("two-thirds-one-third", []) => Ok(Witness::TwoThirdsOneThird),
            ("fast-expensive", [k, eps, delta]) => Ok(Witness::FastExpensive {
                kstar: k.parse().map_err(|_| bad("kstar must be an integer"))?,
                eps: eps.parse().map_err(|_| bad("bad eps"))?,
                delta: delta.parse().map_err(|_| bad("bad delta"))?,
            }),
            ("overlap-pair", [c1, c2]) => Ok(Witness::OverlapPair {
                c1: c1.parse().map_err(|_| bad("bad c1"))?,
                c2: c2.parse().map_err(|_| bad("bad c2"))?,
            }),
            _ => Err(Error::UnknownWitness(s.into())),
        }
    }
}

pub fn adversarial_instance(witness: &Witness) -> Result<Instance> {
    let t = TimePoint::integer(1);
    let types = match witness {
        Witness::HalfHalf => vec![
            AgentType::new(Money::ratio(1, 2), t.clone()),
            AgentType::new(Money::ratio(1, 2), t.clone()),
        ],
        Witness::TwoThirdsOneThird => vec![
            AgentType::new(Money::ratio(2, 3), t.clone()),
            AgentType::new(Money::ratio(1, 3), t.clone()),
        ],
        Witness::FastExpensive { kstar, eps, delta } => {
            if *kstar < 2 {
                return Err(Error::InvalidWitness(
                    "fast-expensive needs kstar >= 2".into(),
                ));
            }
            let slow_total =
                eps.value() * num_rational::BigRational::from_integer((*kstar as u64 - 1).into());
            if eps.is_zero() || slow_total >= num_rational::BigRational::one() {
                return Err(Error::InvalidWitness(
                    "fast-expensive needs 0 < (kstar-1) eps < 1".into(),
                ));
            }
            if delta >= &t {
                return Err(Error::InvalidWitness(
                    "fast-expensive needs delta < T".into(),
                ));
            }
            let fast_cost =
                Money::new(num_rational::BigRational::one() - slow_total).expect("positive");
            let mut v: Vec<AgentType> = (0..kstar - 1)
                .map(|_| AgentType::new(eps.clone(), t.clone()))
                .collect();
            v.push(AgentType::new(fast_cost, delta.clone()));
            v
        }
        Witness::OverlapPair { c1, c2 } => {
            if c1.is_zero()
                || c2.is_zero()
                || (c1.clone() + c2).value() >= &num_rational::BigRational::one()
            {
                return Err(Error::InvalidWitness(
                    "overlap-pair needs positive costs with c1 + c2 < 1".into(),
                ));
            }
            let half = TimePoint::ratio(1, 2);
            let (t1, t2) = match c1.cmp(c2) {
                std::cmp::Ordering::Less => (t.clone(), half),
                std::cmp::Ordering::Greater => (half, t.clone()),
                std::cmp::Ordering::Equal => (t.clone(), t.clone()),
            };
            vec![
                AgentType::new(c1.clone(), t1),
                AgentType::new(c2.clone(), t2),
            ]
        }
    };
    // The equal-time pair (2/3, T), (1/3, T) is not strictly monotone; witnesses
    // skip that one check.
    Instance::build(types, t, false)
}

/// What an agent does: submit a solution at some time, or stay out (⊥).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Submit(TimePoint),
    Abstain,
}

impl Action {
    pub fn time(&self) -> Option<&TimePoint> {
        match self {
            Action::Submit(t) => Some(t),
            Action::Abstain => None,
        }
    }

    pub fn is_submit(&self) -> bool {
        matches!(self, Action::Submit(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionProfile {
    actions: Vec<Action>,
}

impl ActionProfile {
    /// A profile tied to `inst`: nobody submits before her true time or
    /// after the deadline.
    pub fn new(inst: &Instance, actions: Vec<Action>) -> Result<Self> {
        if actions.len() != inst.len() {
            return Err(Error::InvalidProfile(format!(
                "{} actions for {} agents",
                actions.len(),
                inst.len()
            )));
        }
        for (i, a) in actions.iter().enumerate() {
            if let Action::Submit(t) = a {
                if t < inst.time(i) {
                    return Err(Error::InvalidProfile(format!(
                        "agent {i} submits before her true time"
                    )));
                }
                if t > inst.deadline() {
                    return Err(Error::InvalidProfile(format!(
                        "agent {i} submits after the deadline"
                    )));
                }
            }
        }
        Ok(Self { actions })
    }

    /// A bare profile, not checked against any instance.
    pub fn from_actions(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    /// Members submit at their true time, everyone else abstains.
    pub fn participation(inst: &Instance, members: &BTreeSet<usize>) -> Self {
        let actions = (0..inst.len())
            .map(|i| {
                if members.contains(&i) {
                    Action::Submit(inst.time(i).clone())
                } else {
                    Action::Abstain
                }
            })
            .collect();
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, i: usize) -> &Action {
        &self.actions[i]
    }

    pub fn with_action(&self, i: usize, a: Action) -> Self {
        let mut actions = self.actions.clone();
        actions[i] = a;
        Self { actions }
    }

    /// `(index, time)` of every submitter.
    pub fn submissions(&self) -> impl Iterator<Item = (usize, &TimePoint)> {
        self.actions
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.time().map(|t| (i, t)))
    }

    pub fn submitter_count(&self) -> usize {
        self.actions.iter().filter(|a| a.is_submit()).count()
    }

    pub fn fastest(&self) -> Option<&TimePoint> {
        self.submissions().map(|(_, t)| t).min()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub participants: BTreeSet<usize>,
    pub rewards: Vec<Money>,
    pub fastest_time: Option<TimePoint>,
}

impl Outcome {
    pub fn new(
        participants: BTreeSet<usize>,
        rewards: Vec<Money>,
        fastest_time: Option<TimePoint>,
    ) -> Result<Self> {
        let total: Money = rewards.iter().sum();
        if total.value() > &num_rational::BigRational::one() {
            return Err(Error::InvalidOutcome(format!(
                "total reward {total} exceeds 1"
            )));
        }
        if let Some(i) =
            (0..rewards.len()).find(|i| !participants.contains(i) && !rewards[*i].is_zero())
        {
            return Err(Error::InvalidOutcome(format!(
                "non-participant {i} is rewarded"
            )));
        }
        if participants.iter().any(|&i| i >= rewards.len()) {
            return Err(Error::InvalidOutcome(
                "participant index out of range".into(),
            ));
        }
        Ok(Self {
            participants,
            rewards,
            fastest_time,
        })
    }

    /// Outcome of a non-revelation rule: participants are the submitters.
    pub fn from_profile(profile: &ActionProfile, rewards: Vec<Money>) -> Result<Self> {
        let participants = profile.submissions().map(|(i, _)| i).collect();
        Self::new(participants, rewards, profile.fastest().cloned())
    }

    /// Participants working at their true times.
    pub fn from_participants(
        inst: &Instance,
        participants: BTreeSet<usize>,
        rewards: Vec<Money>,
    ) -> Result<Self> {
        let fastest = participants.iter().map(|&i| inst.time(i)).min().cloned();
        Self::new(participants, rewards, fastest)
    }

    pub fn total_reward(&self) -> Money {
        self.rewards.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(c: &str, t: &str) -> AgentType {
        AgentType::new(c.parse().unwrap(), t.parse().unwrap())
    }

    #[test]
    fn sorts_example_instance() {
        let eps = "1/100";
        let inst = make_instance(
            vec![agent("1", eps), agent("1/2", "1"), agent("1/2", "1")],
            TimePoint::integer(1),
        )
        .unwrap();
        assert_eq!(
            inst.agents(),
            &[agent("1/2", "1"), agent("1/2", "1"), agent("1", eps)]
        );
        assert_eq!(inst.permutation(), &[1, 2, 0]);
    }

    #[test]
    fn single_agent_identity() {
        let inst = make_instance(vec![agent("0.5", "3")], TimePoint::integer(3)).unwrap();
        assert_eq!(inst.permutation(), &[0]);
    }

    #[test]
    fn costlier_and_faster_is_valid() {
        let inst = make_instance(
            vec![agent("0.2", "5"), agent("0.3", "2")],
            TimePoint::integer(5),
        )
        .unwrap();
        assert_eq!(inst.permutation(), &[0, 1]);
    }

    #[test]
    fn costlier_and_slower_is_rejected() {
        let err = make_instance(
            vec![agent("0.2", "2"), agent("0.3", "5")],
            TimePoint::integer(5),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::MonotonicityViolation {
                costlier: 1,
                cheaper: 0
            }
        );
        // Equal times across different costs are also inconsistent.
        let err = make_instance(
            vec![agent("0.2", "2"), agent("0.3", "2")],
            TimePoint::integer(5),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MonotonicityViolation { .. }));
    }

    #[test]
    fn checks_against_every_cheaper_group() {
        // The 0.3 agent (time 5) is slower than the 0.2 agent at time 4.
        let err = make_instance(
            vec![agent("0.2", "9"), agent("0.2", "4"), agent("0.3", "5")],
            TimePoint::integer(10),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::MonotonicityViolation {
                costlier: 2,
                cheaper: 1
            }
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            make_instance(vec![], TimePoint::integer(1)).unwrap_err(),
            Error::EmptyInstance
        );
        assert_eq!(
            make_instance(vec![agent("1", "1")], TimePoint::integer(1)).unwrap_err(),
            Error::Infeasible
        );
        assert!(matches!(
            make_instance(vec![agent("0", "1")], TimePoint::integer(1)).unwrap_err(),
            Error::InvalidType { .. }
        ));
        assert!(matches!(
            make_instance(vec![agent("0.5", "2")], TimePoint::integer(1)).unwrap_err(),
            Error::InvalidType { .. }
        ));
    }

    #[test]
    fn witnesses() {
        let hh = adversarial_instance(&Witness::HalfHalf).unwrap();
        assert_eq!(hh.agents(), &[agent("1/2", "1"), agent("1/2", "1")]);
        let tt = adversarial_instance(&"two-thirds-one-third".parse().unwrap()).unwrap();
        assert_eq!(tt.agents(), &[agent("1/3", "1"), agent("2/3", "1")]);
        let fe = adversarial_instance(&"fast-expensive(5, 0.01, 0.1)".parse().unwrap()).unwrap();
        assert_eq!(fe.len(), 5);
        assert_eq!(&fe.agents()[..4], &vec![agent("0.01", "1"); 4][..]);
        assert_eq!(fe.agent(4), &agent("0.96", "0.1"));
        let op = adversarial_instance(&"overlap-pair(0.3,0.2)".parse().unwrap()).unwrap();
        assert_eq!(op.agents(), &[agent("0.2", "1"), agent("0.3", "1/2")]);
        assert!(matches!(
            "nope".parse::<Witness>(),
            Err(Error::UnknownWitness(_))
        ));
        assert!(adversarial_instance(&"overlap-pair(0.6,0.4)".parse().unwrap()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let inst = make_instance(
            vec![agent("1/3", "2"), agent("0.25", "7/2"), agent("0.9", "0.5")],
            TimePoint::integer(4),
        )
        .unwrap();
        let text = inst.to_file_string();
        assert_eq!(Instance::parse(&text).unwrap(), inst);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(
            Instance::parse("0.5 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Instance::parse("deadline 2\n0.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        let ok = Instance::parse("# comment\ndeadline 2\n\n0.5 1 # trailing\n").unwrap();
        assert_eq!(ok.len(), 1);
    }

    #[test]
    fn profile_validation() {
        let inst = make_instance(
            vec![agent("0.2", "5"), agent("0.3", "2")],
            TimePoint::integer(5),
        )
        .unwrap();
        assert!(ActionProfile::new(
            &inst,
            vec![Action::Submit(TimePoint::integer(5)), Action::Abstain]
        )
        .is_ok());
        assert!(ActionProfile::new(
            &inst,
            vec![Action::Submit(TimePoint::integer(4)), Action::Abstain]
        )
        .is_err());
        assert!(ActionProfile::new(
            &inst,
            vec![Action::Abstain, Action::Submit(TimePoint::integer(6))]
        )
        .is_err());
        assert!(ActionProfile::new(&inst, vec![Action::Abstain]).is_err());
    }

    #[test]
    fn outcome_budget() {
        let over = Outcome::new(
            [0, 1].into(),
            vec![Money::ratio(2, 3), Money::ratio(2, 3)],
            None,
        );
        assert!(matches!(over, Err(Error::InvalidOutcome(_))));
        let leak = Outcome::new(
            [0].into(),
            vec![Money::ratio(1, 3), Money::ratio(1, 3)],
            None,
        );
        assert!(matches!(leak, Err(Error::InvalidOutcome(_))));
    }
}
