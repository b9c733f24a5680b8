//! Seeded instance generators and the two synthetic experiments.
//!
//! Every replication draws from its own ChaCha8 stream seeded by
//! [`replication_seed`], so tables are identical whatever the thread count.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::benchmarks::decentralization_factor;
use crate::equilibrium::{solve_equal, solve_harmonic, ParticipationSet};
use crate::error::{Error, Result};
use crate::exact::{inv_e_enclosure, rational_from_f64, Money, TimePoint};
use crate::market::{AgentType, Instance};
use crate::revelation::{igsp, inverse_k_price, truthful_bids};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Uniform on (0, 1).
    Uniform01,
    /// Exp(1) restricted to (0, 1) by redrawing.
    Exp1Normalized,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform01 => "uniform01",
            Distribution::Exp1Normalized => "exp1-normalized",
        }
    }

    /// One draw in the open unit interval, already on the exact 2^-64 grid.
    fn draw(self, rng: &mut ChaCha8Rng) -> Money {
        loop {
            let x: f64 = match self {
                Distribution::Uniform01 => rng.random(),
                Distribution::Exp1Normalized => rng.sample(Exp1),
            };
            if x > 0.0 && x < 1.0 {
                let q = rational_from_f64(x);
                if q > BigRational::from_integer(0.into()) {
                    return Money::new(q).expect("positive");
                }
            }
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform01" => Ok(Distribution::Uniform01),
            "exp1-normalized" => Ok(Distribution::Exp1Normalized),
            _ => Err(Error::UnknownDistribution(s.into())),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep` at size `n`: SplitMix64 applied in turn to the
/// base seed, `n` and `rep`.
pub fn replication_seed(base_seed: u64, n: usize, rep: usize) -> u64 {
    mix64(mix64(mix64(base_seed) ^ n as u64) ^ rep as u64)
}

/// `n` i.i.d. costs, in draw order.
pub fn sample_costs(dist: Distribution, n: usize, seed: u64) -> Vec<Money> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| dist.draw(&mut rng)).collect()
}

/// Deadline of the paired instances.
pub const PAIRED_DEADLINE: u64 = 10;

/// Costs and times drawn separately, then sorted against each other so the
/// cheaper agents are the slower ones. Times are uniform on `[0, 10]`.
pub fn sample_instance_paired(dist: Distribution, n: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut costs: Vec<Money> = (0..n).map(|_| dist.draw(&mut rng)).collect();
    let mut times: Vec<TimePoint> = (0..n)
        .map(|_| {
            TimePoint::new(rational_from_f64(
                rng.random::<f64>() * PAIRED_DEADLINE as f64,
            ))
            .expect("non-negative")
        })
        .collect();
    costs.sort();
    times.sort_by(|a, b| b.cmp(a));
    // Repeated times across distinct costs would break strict monotonicity;
    // at 2^-64 resolution this essentially never happens, but stay valid.
    for i in 1..n {
        if times[i] >= times[i - 1] && costs[i] > costs[i - 1] {
            return sample_instance_paired(dist, n, mix64(seed));
        }
    }
    let types = costs
        .into_iter()
        .zip(times)
        .map(|(c, t)| AgentType::new(c, t))
        .collect();
    Instance::new(types, TimePoint::integer(PAIRED_DEADLINE))
}

/// Costs with placeholder times `n - i` (cheapest slowest) and deadline `n`.
/// Equilibrium sizes under the equal and harmonic rules ignore times.
pub fn sample_instance_costs_only(dist: Distribution, n: usize, seed: u64) -> Result<Instance> {
    let mut costs = sample_costs(dist, n, seed);
    costs.sort();
    let types = costs
        .into_iter()
        .enumerate()
        .map(|(i, c)| AgentType::new(c, TimePoint::integer((n - i) as u64)))
        .collect();
    Instance::new(types, TimePoint::integer(n as u64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalBounds {
    pub lower_eq: f64,
    pub lower_harm: f64,
    pub upper: f64,
}

/// Decentralization guarantees of the equal and harmonic rules and the
/// impossibility ceiling, as functions of `k*`.
pub fn theoretical_bounds(kstar: usize) -> TheoreticalBounds {
    let k = kstar.max(1) as f64;
    let e = std::f64::consts::E;
    TheoreticalBounds {
        lower_eq: 0.5,
        lower_harm: (1.0 - 1.0 / e - 8.0 / k).max(0.0),
        upper: 1.0 - (-(1.0 + e * e / (2.0 * k))).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub distribution: Distribution,
    pub n_min: usize,
    pub n_max: usize,
    pub n_step: usize,
    pub replications: usize,
    pub base_seed: u64,
}

/// Largest supported instance size.
pub const MAX_N: usize = 10_000;

impl ExperimentConfig {
    pub fn new(distribution: Distribution) -> Self {
        Self {
            distribution,
            n_min: 1,
            n_max: 1000,
            n_step: 1,
            replications: 500,
            base_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be positive".into()));
        }
        if self.n_min == 0 || self.n_min > self.n_max || self.n_max > MAX_N {
            return Err(Error::InvalidConfig(format!(
                "n range [{}, {}] must lie within [1, {MAX_N}]",
                self.n_min, self.n_max
            )));
        }
        if self.n_step == 0 {
            return Err(Error::InvalidConfig("n step must be positive".into()));
        }
        Ok(())
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> {
        (self.n_min..=self.n_max).step_by(self.n_step.max(1))
    }

    fn jobs(&self) -> Vec<(usize, usize)> {
        self.sizes()
            .flat_map(|n| (0..self.replications).map(move |r| (n, r)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub replication: usize,
    pub kstar: usize,
    pub participants_eq: usize,
    pub participants_harm: usize,
    pub ratio_eq: f64,
    pub ratio_harm: f64,
    pub bound_lower: f64,
    pub bound_harm: f64,
    pub bound_upper: f64,
    pub fastest_harm: Option<f64>,
    pub fastest_igsp: Option<f64>,
    /// I-GSP could not match the harmonic participant count.
    pub count_mismatch: bool,
}

fn violated(what: String, inst: &Instance) -> Error {
    Error::BoundViolated {
        what,
        instance: inst.to_file_string(),
    }
}

/// Equilibrium sizes under the equal and harmonic rules, with the proven
/// guarantees asserted on the way.
fn decentralization_row(
    inst: &Instance,
    n: usize,
    replication: usize,
) -> Result<(ExperimentRow, ParticipationSet)> {
    let kstar = decentralization_factor(inst).get();
    let eq = solve_equal(inst).len();
    let harm_set = solve_harmonic(inst);
    let harm = harm_set.len();
    if 2 * eq < kstar {
        return Err(violated(
            format!("equal rule: {eq} participants < k*/2 with k* = {kstar}"),
            inst,
        ));
    }
    // |S| >= (1 - 1/e) k* - 8, checked against an upper bound on 1 - 1/e.
    let one_minus_inv_e = BigRational::from_integer(1.into()) - inv_e_enclosure().lo;
    let rhs = one_minus_inv_e * BigRational::from_integer(BigInt::from(kstar))
        - BigRational::from_integer(8.into());
    if BigRational::from_integer(BigInt::from(harm)) < rhs {
        return Err(violated(
            format!("harmonic rule: {harm} participants < (1 - 1/e) k* - 8 with k* = {kstar}"),
            inst,
        ));
    }
    let b = theoretical_bounds(kstar);
    let row = ExperimentRow {
        n,
        replication,
        kstar,
        participants_eq: eq,
        participants_harm: harm,
        ratio_eq: eq as f64 / kstar as f64,
        ratio_harm: harm as f64 / kstar as f64,
        bound_lower: b.lower_eq,
        bound_harm: b.lower_harm,
        bound_upper: b.upper,
        fastest_harm: None,
        fastest_igsp: None,
        count_mismatch: false,
    };
    Ok((row, harm_set))
}

/// Equilibrium participation under the equal and harmonic rules on random
/// costs, one row per `(n, replication)` in that order.
pub fn run_decentralization_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    cfg.jobs()
        .into_par_iter()
        .map(|(n, r)| {
            let inst = sample_instance_costs_only(
                cfg.distribution,
                n,
                replication_seed(cfg.base_seed, n, r),
            )?;
            decentralization_row(&inst, n, r).map(|(row, _)| row)
        })
        .collect()
}

/// One efficiency-experiment row for an arbitrary instance.
pub fn efficiency_row(inst: &Instance, n: usize, replication: usize) -> Result<ExperimentRow> {
    let (mut row, harm) = decentralization_row(inst, n, replication)?;
    row.fastest_harm = harm
        .iter()
        .map(|i| inst.time(i))
        .min()
        .map(TimePoint::to_f64);

    let bids = truthful_bids(inst);
    let kstar = row.kstar;
    let ell = harm.len();
    let k = (ell + 1).min(kstar).max(2);
    let auction = igsp(&bids, k)?;
    let expected = if kstar >= 2 { k.min(kstar) - 1 } else { 1 };
    if auction.winner_count() != expected {
        return Err(violated(
            format!(
                "I-GSP allocated {} agents, expected {expected}",
                auction.winner_count()
            ),
            inst,
        ));
    }
    let ikp = inverse_k_price(&bids)?.winner_count();
    if 2 * ikp + 2 < kstar {
        return Err(violated(
            format!("inverse k-price allocated {ikp} < k*/2 - 1 with k* = {kstar}"),
            inst,
        ));
    }
    row.fastest_igsp = auction.fastest_time(&bids).map(TimePoint::to_f64);
    row.count_mismatch = auction.winner_count() != ell;
    Ok(row)
}

/// Fastest completion under the harmonic equilibrium versus I-GSP tuned to
/// the same participant count, on paired instances.
pub fn run_efficiency_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    cfg.jobs()
        .into_par_iter()
        .map(|(n, r)| {
            let inst =
                sample_instance_paired(cfg.distribution, n, replication_seed(cfg.base_seed, n, r))?;
            efficiency_row(&inst, n, r)
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "n,replication,kstar,participants_eq,participants_harm,ratio_eq,ratio_harm,\
bound_lower,bound_harm,bound_upper,fastest_harm,fastest_igsp,count_mismatch";

/// Plain decimal with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig12).unwrap_or_default()
}

/// Raw rows, then one `avg` row per `n`. Averages of the optional time
/// columns skip empty cells; `count_mismatch` averages to the flagged share.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.replication,
            r.kstar,
            r.participants_eq,
            r.participants_harm,
            format_sig12(r.ratio_eq),
            format_sig12(r.ratio_harm),
            format_sig12(r.bound_lower),
            format_sig12(r.bound_harm),
            format_sig12(r.bound_upper),
            opt(r.fastest_harm),
            opt(r.fastest_igsp),
            u8::from(r.count_mismatch),
        )?;
    }
    for a in averages(rows) {
        let cells: Vec<String> = [
            a.kstar,
            a.participants_eq,
            a.participants_harm,
            a.ratio_eq,
            a.ratio_harm,
            a.bound_lower,
            a.bound_harm,
            a.bound_upper,
        ]
        .into_iter()
        .map(format_sig12)
        .chain([
            opt(a.fastest_harm),
            opt(a.fastest_igsp),
            format_sig12(a.count_mismatch),
        ])
        .collect();
        writeln!(out, "{},avg,{}", a.n, cells.join(","))?;
    }
    Ok(())
}

/// Per-`n` means of an experiment table.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageRow {
    pub n: usize,
    pub kstar: f64,
    pub participants_eq: f64,
    pub participants_harm: f64,
    pub ratio_eq: f64,
    pub ratio_harm: f64,
    pub bound_lower: f64,
    pub bound_harm: f64,
    pub bound_upper: f64,
    pub fastest_harm: Option<f64>,
    pub fastest_igsp: Option<f64>,
    pub count_mismatch: f64,
}

pub fn averages(rows: &[ExperimentRow]) -> Vec<AverageRow> {
    let mut out = Vec::new();
    for group in rows.chunk_by(|a, b| a.n == b.n) {
        let len = group.len() as f64;
        let mean = |f: &dyn Fn(&ExperimentRow) -> f64| group.iter().map(f).sum::<f64>() / len;
        let mean_opt = |f: &dyn Fn(&ExperimentRow) -> Option<f64>| {
            let xs: Vec<f64> = group.iter().filter_map(f).collect();
            (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
        };
        out.push(AverageRow {
            n: group[0].n,
            kstar: mean(&|r| r.kstar as f64),
            participants_eq: mean(&|r| r.participants_eq as f64),
            participants_harm: mean(&|r| r.participants_harm as f64),
            ratio_eq: mean(&|r| r.ratio_eq),
            ratio_harm: mean(&|r| r.ratio_harm),
            bound_lower: mean(&|r| r.bound_lower),
            bound_harm: mean(&|r| r.bound_harm),
            bound_upper: mean(&|r| r.bound_upper),
            fastest_harm: mean_opt(&|r| r.fastest_harm),
            fastest_igsp: mean_opt(&|r| r.fastest_igsp),
            count_mismatch: mean(&|r| f64::from(u8::from(r.count_mismatch))),
        });
    }
    out
}
