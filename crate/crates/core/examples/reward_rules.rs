//! Rewards paid by each rule for one action profile.

use market_mech::rules::{Bucket, BucketScheme, RewardRule};
use market_mech::{make_instance, Action, ActionProfile, AgentType, Money, Result, TimePoint};

fn main() -> Result<()> {
    let inst = make_instance(
        (0..5)
            .map(|i| AgentType::new(Money::ratio(1, 10), TimePoint::integer(10 - i)))
            .collect(),
        TimePoint::integer(10),
    )?;
    // Agent 4 abstains; the others submit at their own times.
    let actions = (0..inst.len())
        .map(|i| {
            if i == 4 {
                Action::Abstain
            } else {
                Action::Submit(inst.time(i).clone())
            }
        })
        .collect();
    let profile = ActionProfile::new(&inst, actions)?;

    let scheme = BucketScheme::new(vec![
        Bucket {
            t_lo: TimePoint::integer(8),
            t_hi: TimePoint::integer(10),
            cost: Money::ratio(1, 10),
        },
        Bucket {
            t_lo: TimePoint::integer(5),
            t_hi: TimePoint::integer(7),
            cost: Money::ratio(1, 5),
        },
    ])?;
    let rules = [
        RewardRule::Fast,
        RewardRule::Equal,
        RewardRule::Harmonic,
        RewardRule::best_set(scheme, 2)?,
    ];
    for rule in &rules {
        let r: Vec<String> = rule
            .rewards(&profile)
            .iter()
            .map(ToString::to_string)
            .collect();
        println!("{:>9}: {}", rule.name(), r.join("  "));
    }
    Ok(())
}
