//! The best-set rule: a unique equilibrium of exactly k participants.

use market_mech::benchmarks::{decentralization_factor, time_guarantee};
use market_mech::equilibrium::{enumerate_equilibria, is_pure_nash, solve_best_set};
use market_mech::rules::{Bucket, BucketScheme, RewardRule};
use market_mech::{make_instance, AgentType, BigRational, Money, Result, TimePoint};

fn main() -> Result<()> {
    let bucket = |lo, hi, num, den| Bucket {
        t_lo: TimePoint::integer(lo),
        t_hi: TimePoint::integer(hi),
        cost: Money::ratio(num, den),
    };
    let scheme = BucketScheme::new(vec![
        bucket(20, 25, 1, 12),
        bucket(10, 15, 1, 6),
        bucket(0, 5, 1, 3),
    ])?;
    let agent = |t, num, den| AgentType::new(Money::ratio(num, den), TimePoint::integer(t));
    let inst = make_instance(
        vec![
            agent(24, 1, 12),
            agent(22, 1, 12),
            agent(20, 1, 12),
            agent(14, 1, 6),
            agent(12, 1, 6),
            agent(3, 1, 3),
        ],
        TimePoint::integer(25),
    )?;
    let kstar = decentralization_factor(&inst).get();

    for k in 2..=kstar {
        let rule = RewardRule::best_set(scheme.clone(), k)?;
        let s = solve_best_set(&inst, &scheme, k)?;
        let all = enumerate_equilibria(&rule, &inst)?.equilibria;
        let fastest = s.iter().map(|i| inst.time(i)).min().expect("k >= 2");
        let target = time_guarantee(&inst, &BigRational::new(k.into(), kstar.into()))?;
        println!(
            "k = {k}: equilibrium {s}, Nash {}, unique {}, fastest {fastest} vs t* {target}",
            is_pure_nash(&rule, &inst, &s),
            all == vec![s.clone()]
        );
    }
    Ok(())
}
