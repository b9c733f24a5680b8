//! Non-revelation reward rules.
//!
//! A rule maps the submission times it observes to a reward vector. Rules
//! only ever see an [`ActionProfile`]; true costs and times are never an
//! input, which is what makes them non-revelation mechanisms.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exact::{harmonic_block_cmp_one, parse_rational, Money, TimePoint};
use crate::market::{Action, ActionProfile, Instance};

/// One non-overlapping type profile: solutions inside `[t_lo, t_hi]` are
/// assumed to cost `cost`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bucket {
    pub t_lo: TimePoint,
    pub t_hi: TimePoint,
    pub cost: Money,
}

/// Buckets ordered slowest (cheapest) first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BucketScheme {
    buckets: Vec<Bucket>,
}

impl BucketScheme {
    pub fn new(buckets: Vec<Bucket>) -> Result<Self> {
        if buckets.is_empty() {
            return Err(Error::SchemeInvalid("no buckets".into()));
        }
        for (j, b) in buckets.iter().enumerate() {
            if b.t_lo > b.t_hi {
                return Err(Error::SchemeInvalid(format!("bucket {j}: empty interval")));
            }
            if b.cost.is_zero() {
                return Err(Error::SchemeInvalid(format!(
                    "bucket {j}: cost must be positive"
                )));
            }
        }
        for (j, w) in buckets.windows(2).enumerate() {
            if w[1].cost <= w[0].cost {
                return Err(Error::SchemeInvalid(format!(
                    "bucket costs must increase (buckets {j}, {})",
                    j + 1
                )));
            }
            if w[1].t_hi >= w[0].t_lo {
                return Err(Error::SchemeInvalid(format!(
                    "bucket {} must lie strictly before bucket {j} in time",
                    j + 1
                )));
            }
        }
        Ok(Self { buckets })
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Bucket containing `t`, if any.
    pub fn bucket_of(&self, t: &TimePoint) -> Option<usize> {
        // Intervals are disjoint and sorted by descending time.
        let j = self.buckets.partition_point(|b| &b.t_lo > t);
        (j < self.buckets.len() && t <= &self.buckets[j].t_hi).then_some(j)
    }

    /// Cost inferred from a submission time.
    pub fn inferred_cost(&self, t: &TimePoint) -> Option<&Money> {
        self.bucket_of(t).map(|j| &self.buckets[j].cost)
    }

    /// One bucket per line, `t_lo t_hi cost`, slowest bucket first.
    pub fn parse(text: &str) -> Result<Self> {
        let mut buckets = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: no + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [lo, hi, c] = fields.as_slice() else {
                return Err(err(format!("expected `t_lo t_hi cost`, got `{line}`")));
            };
            let num = |s: &str| parse_rational(s).map_err(err);
            let nonneg = |v: BigRational, what: &str| {
                TimePoint::new(v).ok_or_else(|| Error::Parse {
                    line: no + 1,
                    msg: format!("negative {what}"),
                })
            };
            let t_lo = nonneg(num(lo)?, "time")?;
            let t_hi = nonneg(num(hi)?, "time")?;
            let cost = Money::new(num(c)?).ok_or_else(|| err("negative cost".into()))?;
            buckets.push(Bucket { t_lo, t_hi, cost });
        }
        Self::new(buckets)
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for b in &self.buckets {
            let _ = writeln!(s, "{} {} {}", b.t_lo, b.t_hi, b.cost);
        }
        s
    }
}

impl FromStr for BucketScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewardRule {
    /// Everything to the earliest submission.
    Fast,
    /// Equal split among submitters.
    Equal,
    /// `1/(m + i - 1)` to the i-th fastest submitter.
    Harmonic,
    /// Rewards the k-best set under costs inferred from buckets.
    BestSet { scheme: BucketScheme, k: usize },
}

impl RewardRule {
    pub fn best_set(scheme: BucketScheme, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::KOutOfRange {
                k,
                min: 2,
                max: usize::MAX,
            });
        }
        Ok(RewardRule::BestSet { scheme, k })
    }

    pub fn rewards(&self, profile: &ActionProfile) -> Vec<Money> {
        match self {
            RewardRule::Fast => reward_fastest(profile),
            RewardRule::Equal => reward_equal(profile),
            RewardRule::Harmonic => reward_harmonic(profile),
            RewardRule::BestSet { scheme, k } => reward_best_set(profile, scheme, *k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RewardRule::Fast => "fast",
            RewardRule::Equal => "equal",
            RewardRule::Harmonic => "harmonic",
            RewardRule::BestSet { .. } => "best-set",
        }
    }
}

/// Rule names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Fast,
    Equal,
    Harmonic,
    BestSet,
}

impl FromStr for RuleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(RuleKind::Fast),
            "equal" => Ok(RuleKind::Equal),
            "harmonic" => Ok(RuleKind::Harmonic),
            "best-set" => Ok(RuleKind::BestSet),
            other => Err(Error::UnknownRule(other.into())),
        }
    }
}

/// Submitters ordered by submission time, lowest index first on ties.
fn ranked_submitters(profile: &ActionProfile) -> Vec<usize> {
    let mut subs: Vec<(usize, &TimePoint)> = profile.submissions().collect();
    subs.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)));
    subs.into_iter().map(|(i, _)| i).collect()
}

pub fn reward_fastest(profile: &ActionProfile) -> Vec<Money> {
    let mut out = vec![Money::zero(); profile.len()];
    if let Some(&winner) = ranked_submitters(profile).first() {
        out[winner] = Money::one();
    }
    out
}

pub fn reward_equal(profile: &ActionProfile) -> Vec<Money> {
    let ell = profile.submitter_count();
    profile
        .actions()
        .iter()
        .map(|a| {
            if a.is_submit() {
                Money::unit_fraction(ell as u64)
            } else {
                Money::zero()
            }
        })
        .collect()
}

/// Smallest `a >= 1` with `sum_{x=a}^{a+ell-1} 1/x <= 1`.
pub fn harmonic_offset(ell: usize) -> usize {
    assert!(ell >= 1, "harmonic offset needs at least one submitter");
    let len = ell as u64;
    // The block sum decreases in `a` and the block starting at `ell` is at most 1.
    let (mut lo, mut hi) = (1u64, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if harmonic_block_cmp_one(mid, len) == Ordering::Greater {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo as usize
}

pub fn reward_harmonic(profile: &ActionProfile) -> Vec<Money> {
    let ranked = ranked_submitters(profile);
    let mut out = vec![Money::zero(); profile.len()];
    if ranked.is_empty() {
        return out;
    }
    let m = harmonic_offset(ranked.len());
    for (rank, &i) in ranked.iter().enumerate() {
        out[i] = Money::unit_fraction((m + rank) as u64);
    }
    out
}

pub fn reward_best_set(profile: &ActionProfile, scheme: &BucketScheme, k: usize) -> Vec<Money> {
    let mut out = vec![Money::zero(); profile.len()];
    for (i, c) in best_set_selection(profile, scheme, k) {
        out[i] = c;
    }
    out
}

/// Selected agents and their inferred costs.
pub(crate) fn best_set_selection(
    profile: &ActionProfile,
    scheme: &BucketScheme,
    k: usize,
) -> Vec<(usize, Money)> {
    struct Sub<'a> {
        idx: usize,
        time: &'a TimePoint,
        bucket: usize,
        cost: &'a Money,
    }
    // Submissions outside every bucket are ineligible.
    let mut eligible: Vec<Sub> = profile
        .submissions()
        .filter_map(|(idx, time)| {
            scheme.bucket_of(time).map(|bucket| Sub {
                idx,
                time,
                bucket,
                cost: &scheme.buckets()[bucket].cost,
            })
        })
        .collect();

    let greedy = |mut subs: Vec<Sub>| -> Vec<(usize, Money)> {
        subs.sort_by(|a, b| {
            a.cost
                .cmp(b.cost)
                .then(b.time.cmp(a.time))
                .then(a.idx.cmp(&b.idx))
        });
        let one = BigRational::one();
        let mut total = BigRational::from_integer(0.into());
        let mut picked = Vec::new();
        for s in subs {
            total += s.cost.value();
            if total > one {
                break;
            }
            picked.push((s.idx, s.cost.clone()));
        }
        picked
    };

    if eligible.len() < k {
        return greedy(eligible);
    }

    // Cheapest buckets first, fastest within a bucket.
    eligible.sort_by(|a, b| {
        a.bucket
            .cmp(&b.bucket)
            .then(a.time.cmp(b.time))
            .then(a.idx.cmp(&b.idx))
    });
    let core_cost: BigRational = eligible[..k - 1].iter().map(|s| s.cost.value()).sum();
    let one = BigRational::one();
    if core_cost > one {
        // k exceeds what the submitted buckets can pay for; keep the budget.
        return greedy(eligible);
    }
    let budget = &one - &core_cost;
    let rest = eligible.split_off(k - 1);
    let fastest_fit = rest
        .into_iter()
        .filter(|s| s.cost.value() <= &budget)
        .min_by(|a, b| {
            a.time
                .cmp(b.time)
                .then(a.cost.cmp(b.cost))
                .then(a.idx.cmp(&b.idx))
        });
    let mut picked: Vec<(usize, Money)> =
        eligible.iter().map(|s| (s.idx, s.cost.clone())).collect();
    if let Some(s) = fastest_fit {
        picked.push((s.idx, s.cost.clone()));
    }
    picked
}

/// First position where the i-th smallest reward grows when one more agent
/// submits. Both `ell` and `position` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub ell: usize,
    pub position: usize,
    pub with_ell: Money,
    pub with_ell_plus_one: Money,
}

/// Compares sorted reward vectors for `ell` and `ell + 1` submitters, every
/// submission at the deadline, for `ell < max_ell`. `None` means monotone.
pub fn check_reward_monotone(
    rule: &RewardRule,
    inst: &Instance,
    max_ell: usize,
) -> Option<MonotonicityViolation> {
    check_reward_monotone_by(|p| rule.rewards(p), inst, max_ell)
}

/// [`check_reward_monotone`] for an arbitrary reward map.
pub fn check_reward_monotone_by<F>(
    rewards: F,
    inst: &Instance,
    max_ell: usize,
) -> Option<MonotonicityViolation>
where
    F: Fn(&ActionProfile) -> Vec<Money>,
{
    let max_ell = max_ell.min(inst.len());
    let sorted_rewards = |ell: usize| {
        let actions = (0..inst.len()).map(|i| {
            if i < ell {
                Action::Submit(inst.deadline().clone())
            } else {
                Action::Abstain
            }
        });
        let profile = ActionProfile::from_actions(actions.collect());
        let mut r: Vec<Money> = rewards(&profile).into_iter().take(ell).collect();
        r.sort();
        r
    };
    let mut prev = sorted_rewards(1);
    for ell in 1..max_ell {
        let next = sorted_rewards(ell + 1);
        for (pos, (a, b)) in prev.iter().zip(&next).enumerate() {
            if a < b {
                return Some(MonotonicityViolation {
                    ell,
                    position: pos + 1,
                    with_ell: a.clone(),
                    with_ell_plus_one: b.clone(),
                });
            }
        }
        prev = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{make_instance, AgentType};

    fn t(s: &str) -> TimePoint {
        s.parse().unwrap()
    }

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn profile(actions: &[Option<&str>]) -> ActionProfile {
        ActionProfile::from_actions(
            actions
                .iter()
                .map(|a| a.map_or(Action::Abstain, |x| Action::Submit(t(x))))
                .collect(),
        )
    }

    fn money(v: &[&str]) -> Vec<Money> {
        v.iter().map(|s| m(s)).collect()
    }

    fn two_buckets() -> BucketScheme {
        "7 10 0.2\n4 6 0.7\n".parse().unwrap()
    }

    #[test]
    fn fastest_rule() {
        assert_eq!(
            reward_fastest(&profile(&[Some("3"), Some("5"), None])),
            money(&["1", "0", "0"])
        );
        assert_eq!(
            reward_fastest(&profile(&[Some("4"), Some("4")])),
            money(&["1", "0"])
        );
        assert_eq!(reward_fastest(&profile(&[None, None])), money(&["0", "0"]));
    }

    #[test]
    fn equal_rule() {
        assert_eq!(
            reward_equal(&profile(&[Some("1"), Some("1")])),
            money(&["1/2", "1/2"])
        );
        assert_eq!(
            reward_equal(&profile(&[None, Some("1")])),
            money(&["0", "1"])
        );
        assert_eq!(
            reward_equal(&profile(&[Some("1"), Some("2"), Some("3"), Some("4")])),
            money(&["1/4"; 4])
        );
    }

    #[test]
    fn harmonic_offsets() {
        assert_eq!(harmonic_offset(1), 1);
        assert_eq!(harmonic_offset(2), 2);
        assert_eq!(harmonic_offset(3), 3);
        assert_eq!(harmonic_offset(6), 4);
    }

    #[test]
    fn harmonic_rule() {
        assert_eq!(
            reward_harmonic(&profile(&[Some("1"), Some("2"), Some("3")])),
            money(&["1/3", "1/4", "1/5"])
        );
        assert_eq!(
            reward_harmonic(&profile(&[None, Some("7")])),
            money(&["0", "1"])
        );
        // Agents 2 and 5 (1-based) tie; the lower index ranks first.
        let p = profile(&[None, Some("4"), None, None, Some("4")]);
        assert_eq!(reward_harmonic(&p), money(&["0", "1/2", "0", "0", "1/3"]));
    }

    #[test]
    fn scheme_validation_and_lookup() {
        let s = two_buckets();
        assert_eq!(s.bucket_of(&t("8")), Some(0));
        assert_eq!(s.bucket_of(&t("10")), Some(0));
        assert_eq!(s.bucket_of(&t("4")), Some(1));
        assert_eq!(s.bucket_of(&t("6.5")), None);
        assert_eq!(s.bucket_of(&t("11")), None);
        assert_eq!(s.bucket_of(&t("1")), None);
        assert!(matches!(
            "7 10 0.7\n4 6 0.2\n".parse::<BucketScheme>(),
            Err(Error::SchemeInvalid(_))
        ));
        assert!(matches!(
            "4 10 0.2\n4 6 0.7\n".parse::<BucketScheme>(),
            Err(Error::SchemeInvalid(_))
        ));
        assert!(matches!(
            "".parse::<BucketScheme>(),
            Err(Error::SchemeInvalid(_))
        ));
        assert_eq!(s.to_file_string().parse::<BucketScheme>().unwrap(), s);
    }

    #[test]
    fn best_set_rule() {
        let s = two_buckets();
        let p = profile(&[Some("9"), Some("8"), Some("5")]);
        assert_eq!(reward_best_set(&p, &s, 2), money(&["0", "0.2", "0.7"]));
        let single = profile(&[None, Some("8"), None]);
        assert_eq!(reward_best_set(&single, &s, 2), money(&["0", "0.2", "0"]));
        let all_slow = profile(&[Some("9"), Some("8"), Some("7")]);
        assert_eq!(
            reward_best_set(&all_slow, &s, 3),
            money(&["0.2", "0.2", "0.2"])
        );
        // Out-of-bucket submissions are ignored.
        let gap = profile(&[Some("6.5"), Some("8"), Some("5")]);
        assert_eq!(reward_best_set(&gap, &s, 2), money(&["0", "0.2", "0.7"]));
    }

    #[test]
    fn best_set_keeps_budget_when_core_is_too_expensive() {
        let s = two_buckets();
        // Three fast submissions with k = 3: two 0.7s already exceed the budget.
        let p = profile(&[Some("5"), Some("4"), Some("6")]);
        let r = reward_best_set(&p, &s, 3);
        assert_eq!(r.iter().sum::<Money>(), m("0.7"));
    }

    #[test]
    fn best_set_needs_k_two() {
        assert!(RewardRule::best_set(two_buckets(), 1).is_err());
    }

    fn flat(n: usize, cost: &str) -> Instance {
        let types = (0..n).map(|_| AgentType::new(m(cost), t("1"))).collect();
        make_instance(types, t("1")).unwrap()
    }

    #[test]
    fn monotonicity_checks() {
        let inst = flat(6, "0.1");
        assert_eq!(check_reward_monotone(&RewardRule::Equal, &inst, 6), None);
        assert_eq!(check_reward_monotone(&RewardRule::Harmonic, &inst, 6), None);
        assert_eq!(check_reward_monotone(&RewardRule::Fast, &inst, 6), None);
    }

    #[test]
    fn monotonicity_check_finds_violations() {
        // A lone submitter gets 1/4, two submitters get 1/2 each.
        let stingy = |p: &ActionProfile| {
            let ell = p.submitter_count();
            let each = if ell == 1 {
                Money::ratio(1, 4)
            } else {
                Money::unit_fraction(ell as u64)
            };
            p.actions()
                .iter()
                .map(|a| {
                    if a.is_submit() {
                        each.clone()
                    } else {
                        Money::zero()
                    }
                })
                .collect()
        };
        let v = check_reward_monotone_by(stingy, &flat(3, "0.1"), 3).unwrap();
        assert_eq!((v.ell, v.position), (1, 1));
        assert_eq!(v.with_ell_plus_one, m("1/2"));
    }
}
