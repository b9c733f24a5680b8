//! Decentralization factor, time guarantees and k-best sets.

use market_mech::benchmarks::{decentralization_factor, k_best_set, time_guarantee};
use market_mech::{make_instance, AgentType, BigRational, Money, Result, TimePoint};

fn main() -> Result<()> {
    let costs = [(1, 20), (1, 10), (3, 20), (1, 5), (3, 10), (9, 10)];
    let types = costs
        .iter()
        .enumerate()
        .map(|(i, &(n, d))| {
            AgentType::new(Money::ratio(n, d), TimePoint::integer(20 - 3 * i as u64))
        })
        .collect();
    let inst = make_instance(types, TimePoint::integer(20))?;

    let kstar = decentralization_factor(&inst).get();
    println!("k* = {kstar}");
    for j in 1..=kstar {
        let alpha = BigRational::new(j.into(), kstar.into());
        let t = time_guarantee(&inst, &alpha)?;
        let best: Vec<usize> = k_best_set(&inst, j)?.into_iter().collect();
        println!("alpha = {alpha}: t* = {t}, {j}-best set {best:?}");
    }
    Ok(())
}
