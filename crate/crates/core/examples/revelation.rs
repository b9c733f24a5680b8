//! Inverse k-price and I-GSP auctions with IR and IC audits.

use market_mech::revelation::{audit_ic, audit_ir, truthful_bids, AuditGrid, Mechanism};
use market_mech::{make_instance, AgentType, Money, Result, TimePoint};

fn main() -> Result<()> {
    let inst = make_instance(
        vec![
            AgentType::new(Money::ratio(1, 10), TimePoint::integer(10)),
            AgentType::new(Money::ratio(1, 5), TimePoint::integer(8)),
            AgentType::new(Money::ratio(3, 10), TimePoint::integer(6)),
            AgentType::new(Money::ratio(3, 4), TimePoint::integer(4)),
        ],
        TimePoint::integer(10),
    )?;
    let bids = truthful_bids(&inst);

    for (mech, k) in [(Mechanism::InverseKPrice, None), (Mechanism::Igsp, Some(3))] {
        let res = mech.run(&bids, k)?;
        let winners: Vec<String> = res
            .winners()
            .map(|i| format!("{i} gets {}", res.rewards[i]))
            .collect();
        println!(
            "{mech}: {}; fastest {:?}",
            winners.join(", "),
            res.fastest_time(&bids).map(ToString::to_string)
        );
        println!("  IR violations: {}", audit_ir(mech, &inst, k)?.len());
        for v in audit_ic(mech, &inst, k, &AuditGrid::default())?
            .iter()
            .take(3)
        {
            println!(
                "  agent {} gains by bidding {}: {} -> {}",
                v.agent, v.bid, v.truthful_utility, v.deviant_utility
            );
        }
    }
    Ok(())
}
