//! Small runs of both synthetic experiments, printed as CSV.

use anyhow::Result;
use market_mech::harness::{
    averages, run_decentralization_experiment, run_efficiency_experiment, write_csv, Distribution,
    ExperimentConfig,
};

fn main() -> Result<()> {
    let cfg = ExperimentConfig {
        n_min: 10,
        n_max: 50,
        n_step: 20,
        replications: 5,
        ..ExperimentConfig::new(Distribution::Exp1Normalized)
    };
    let mut out = std::io::stdout().lock();

    let rows = run_decentralization_experiment(&cfg)?;
    write_csv(&rows, &mut out)?;
    for a in averages(&rows) {
        eprintln!(
            "n = {}: mean ratio equal {:.3}, harmonic {:.3}",
            a.n, a.ratio_eq, a.ratio_harm
        );
    }

    write_csv(&run_efficiency_experiment(&cfg)?, &mut out)?;
    Ok(())
}
