//! Building, canonicalizing and serializing instances.

use market_mech::market::{adversarial_instance, Witness};
use market_mech::{make_instance, AgentType, Instance, Money, Result, TimePoint};

fn main() -> Result<()> {
    // Input order is free; the instance keeps agents sorted by cost, then time.
    let inst = make_instance(
        vec![
            AgentType::new(Money::ratio(3, 10), TimePoint::integer(4)),
            AgentType::new(Money::ratio(1, 10), TimePoint::integer(9)),
            AgentType::new(Money::ratio(1, 5), TimePoint::integer(6)),
        ],
        TimePoint::integer(10),
    )?;
    for i in 0..inst.len() {
        println!(
            "canonical {i} <- input {}: cost {} time {}",
            inst.original_index(i),
            inst.cost(i),
            inst.time(i)
        );
    }

    let text = inst.to_file_string();
    print!("\n{text}");
    let back: Instance = text.parse()?;
    assert_eq!(back.agents(), inst.agents());

    // A costlier agent that is not faster is rejected.
    let bad = make_instance(
        vec![
            AgentType::new(Money::ratio(1, 10), TimePoint::integer(3)),
            AgentType::new(Money::ratio(1, 5), TimePoint::integer(5)),
        ],
        TimePoint::integer(10),
    );
    println!("\nnon-monotone input: {}", bad.unwrap_err());

    let w = adversarial_instance(&"fast-expensive(4,0.05,0.1)".parse::<Witness>()?)?;
    print!("\nwitness:\n{}", w.to_file_string());
    Ok(())
}
