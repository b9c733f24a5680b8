//! Equilibrium participation under the equal and harmonic rules, checked
//! against exhaustive enumeration.

use market_mech::benchmarks::decentralization_factor;
use market_mech::equilibrium::{enumerate_equilibria, solve_equal, solve_harmonic};
use market_mech::harness::{sample_instance_paired, Distribution};
use market_mech::rules::RewardRule;
use market_mech::Result;

fn main() -> Result<()> {
    let inst = sample_instance_paired(Distribution::Uniform01, 10, 7)?;
    println!("k* = {}", decentralization_factor(&inst).get());

    for (rule, solved) in [
        (RewardRule::Equal, solve_equal(&inst)),
        (RewardRule::Harmonic, solve_harmonic(&inst)),
    ] {
        let report = enumerate_equilibria(&rule, &inst)?;
        println!(
            "{}: solver picks {solved} ({} agents); {} equilibria in total, smallest {}",
            rule.name(),
            solved.len(),
            report.equilibria.len(),
            report.worst.as_ref().map_or(0, |w| w.len()),
        );
        assert!(report.equilibria.contains(&solved));
    }
    Ok(())
}
