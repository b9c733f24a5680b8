use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use market_mech::benchmarks::{
    brute_force_time_guarantee, decentralization_factor, k_best_set, outcome_metrics,
    time_guarantee,
};
use market_mech::equilibrium::{
    enumerate_equilibria, solve_best_set, solve_equal, solve_harmonic, ParticipationSet,
};
use market_mech::exact::parse_rational;
use market_mech::harness::{
    run_decentralization_experiment, run_efficiency_experiment, sample_instance_costs_only,
    sample_instance_paired, write_csv, Distribution, ExperimentConfig,
};
use market_mech::market::{adversarial_instance, Witness};
use market_mech::revelation::{audit_ic, audit_ir, truthful_bids, AuditGrid, Mechanism};
use market_mech::rules::{BucketScheme, RewardRule, RuleKind};
use market_mech::{Instance, Outcome};

/// Mechanisms for decentralized markets of solution providers.
#[derive(Parser)]
#[command(name = "market-mech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "uniform01")]
        dist: String,
        /// Costs only, with placeholder times (the decentralization experiment's instances).
        #[arg(long)]
        costs_only: bool,
        /// Emit a named adversarial instance instead, e.g. `fast-expensive(5,0.01,0.1)`.
        #[arg(long)]
        witness: Option<String>,
    },
    /// Decentralization factor, time guarantee and k-best set.
    Bench {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long)]
        k: Option<usize>,
        /// Also evaluate the time guarantee by subset enumeration.
        #[arg(long)]
        brute_force: bool,
    },
    /// Pure Nash equilibria of a reward rule.
    Solve {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        instance: PathBuf,
        /// Enumerate every participation set instead of running the solver.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        buckets: Option<PathBuf>,
    },
    /// Run a revelation mechanism on truthful bids.
    Auction {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        audit: Option<Audit>,
    },
    /// Equilibrium participation under the equal and harmonic rules.
    Exp1(ExperimentArgs),
    /// Fastest completion: harmonic rule versus I-GSP.
    Exp2(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Audit {
    Ir,
    Ic,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value = "uniform01")]
    dist: String,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 1000)]
    n_max: usize,
    #[arg(long, default_value_t = 1)]
    n_step: usize,
    #[arg(long, default_value_t = 500)]
    replications: usize,
}

impl ExperimentArgs {
    fn config(&self, seed: u64) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            distribution: self.dist.parse()?,
            n_min: self.n_min,
            n_max: self.n_max,
            n_step: self.n_step,
            replications: self.replications,
            base_seed: seed,
        })
    }
}

fn main() -> Result<()> {
    let Cli { command, output } = Cli::parse();
    let mut text = Vec::new();
    run(command, &output, &mut text)?;
    match &output.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().write_all(&text)?,
    }
    Ok(())
}

fn load_instance(path: &PathBuf) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.parse()?)
}

fn one_based(inst: &Instance, set: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = set
        .into_iter()
        .map(|i| inst.original_index(i) + 1)
        .collect();
    v.sort_unstable();
    v
}

fn join(v: &[usize], sep: &str) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
}

fn run(command: Command, output: &Output, w: &mut Vec<u8>) -> Result<()> {
    let csv = output.format == Format::Csv;
    match command {
        Command::Gen {
            n,
            dist,
            costs_only,
            witness,
        } => {
            let inst = match witness {
                Some(name) => adversarial_instance(&name.parse::<Witness>()?)?,
                None => {
                    let d: Distribution = dist.parse()?;
                    if costs_only {
                        sample_instance_costs_only(d, n, output.seed)?
                    } else {
                        sample_instance_paired(d, n, output.seed)?
                    }
                }
            };
            write!(w, "{}", inst.to_file_string())?;
        }
        Command::Bench {
            instance,
            alpha,
            k,
            brute_force,
        } => {
            let inst = load_instance(&instance)?;
            let alpha = parse_rational(&alpha).map_err(anyhow::Error::msg)?;
            let kstar = decentralization_factor(&inst);
            let t = time_guarantee(&inst, &alpha)?;
            let k = k.unwrap_or(kstar.get());
            let best = one_based(&inst, k_best_set(&inst, k)?);
            if csv {
                writeln!(w, "kstar,alpha,time_guarantee,k,k_best_set")?;
                writeln!(w, "{kstar},{alpha},{t},{k},{}", join(&best, " "))?;
            } else {
                writeln!(
                    w,
                    "k* = {kstar}\nt*_{alpha} = {t}\n{k}-best set = {{{}}}",
                    join(&best, ", ")
                )?;
            }
            if brute_force {
                let b = brute_force_time_guarantee(&inst, &alpha)?;
                if b != t {
                    bail!("brute force disagrees: {b} vs {t}");
                }
                writeln!(w, "{}brute force agrees", if csv { "# " } else { "" })?;
            }
        }
        Command::Solve {
            rule,
            instance,
            oracle,
            k,
            buckets,
        } => {
            let inst = load_instance(&instance)?;
            let kind: RuleKind = rule.parse()?;
            let scheme = match &buckets {
                Some(p) => Some(fs::read_to_string(p)?.parse::<BucketScheme>()?),
                None => None,
            };
            let rule = match kind {
                RuleKind::Fast => RewardRule::Fast,
                RuleKind::Equal => RewardRule::Equal,
                RuleKind::Harmonic => RewardRule::Harmonic,
                RuleKind::BestSet => {
                    let scheme = scheme.clone().context("best-set needs --buckets")?;
                    RewardRule::best_set(scheme, k.context("best-set needs --k")?)?
                }
            };
            let sets: Vec<ParticipationSet> = if oracle {
                enumerate_equilibria(&rule, &inst)?.equilibria
            } else {
                vec![match kind {
                    RuleKind::Equal => solve_equal(&inst),
                    RuleKind::Harmonic => solve_harmonic(&inst),
                    RuleKind::BestSet => solve_best_set(
                        &inst,
                        scheme.as_ref().expect("checked"),
                        k.expect("checked"),
                    )?,
                    RuleKind::Fast => enumerate_equilibria(&rule, &inst)?
                        .equilibria
                        .into_iter()
                        .next()
                        .context("no equilibrium")?,
                }]
            };
            if csv {
                writeln!(
                    w,
                    "members,participants,decentralization_ratio,fastest_time,efficiency_class"
                )?;
            }
            for s in sets {
                let rewards = rule.rewards(&s.profile(&inst));
                let m = outcome_metrics(
                    &inst,
                    &Outcome::from_participants(&inst, s.members().clone(), rewards)?,
                );
                let members = one_based(&inst, s.iter());
                let fastest = m.fastest_time.map(|t| t.to_string()).unwrap_or_default();
                let class = m
                    .efficiency_class
                    .map(|c| c.to_string())
                    .unwrap_or_default();
                if csv {
                    writeln!(
                        w,
                        "{},{},{},{fastest},{class}",
                        join(&members, " "),
                        m.participant_count,
                        m.decentralization_ratio
                    )?;
                } else {
                    writeln!(
                        w,
                        "{{{}}} size {} ratio {} fastest {fastest} class {class}",
                        join(&members, ", "),
                        m.participant_count,
                        m.decentralization_ratio
                    )?;
                }
            }
        }
        Command::Auction {
            mechanism,
            instance,
            k,
            audit,
        } => {
            let inst = load_instance(&instance)?;
            let mech: Mechanism = mechanism.parse()?;
            let result = mech.run(&truthful_bids(&inst), k)?;
            writeln!(w, "agent,cost,time,allocated,reward")?;
            let mut rows: Vec<(usize, usize)> = (0..inst.len())
                .map(|i| (inst.original_index(i) + 1, i))
                .collect();
            rows.sort_unstable();
            for (agent, i) in rows {
                writeln!(
                    w,
                    "{agent},{},{},{},{}",
                    inst.cost(i),
                    inst.time(i),
                    u8::from(result.allocation[i]),
                    result.rewards[i]
                )?;
            }
            match audit {
                Some(Audit::Ir) => {
                    writeln!(w, "\nagent,reward,cost")?;
                    for v in audit_ir(mech, &inst, k)? {
                        writeln!(
                            w,
                            "{},{},{}",
                            inst.original_index(v.agent) + 1,
                            v.reward,
                            v.cost
                        )?;
                    }
                }
                Some(Audit::Ic) => {
                    writeln!(
                        w,
                        "\nagent,reported_cost,reported_time,truthful_utility,deviant_utility"
                    )?;
                    for v in audit_ic(mech, &inst, k, &AuditGrid::default())? {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            inst.original_index(v.agent) + 1,
                            v.bid.cost,
                            v.bid.time,
                            v.truthful_utility,
                            v.deviant_utility
                        )?;
                    }
                }
                None => {}
            }
        }
        Command::Exp1(args) => write_csv(
            &run_decentralization_experiment(&args.config(output.seed)?)?,
            w,
        )?,
        Command::Exp2(args) => {
            write_csv(&run_efficiency_experiment(&args.config(output.seed)?)?, w)?
        }
    }
    Ok(())
}
