use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("instance has no agents")]
    EmptyInstance,

    #[error("agent {agent}: {reason}")]
    InvalidType { agent: usize, reason: String },

    /// Original indices of a pair where the costlier agent is not strictly faster.
    #[error("agents {costlier} and {cheaper} violate cost-time monotonicity (costlier agent is not faster)")]
    MonotonicityViolation { costlier: usize, cheaper: usize },

    #[error("infeasible instance: no agent has cost below the unit reward")]
    Infeasible,

    #[error("unknown witness instance `{0}`")]
    UnknownWitness(String),

    #[error("invalid witness parameters: {0}")]
    InvalidWitness(String),

    #[error("action profile: {0}")]
    InvalidProfile(String),

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("instance has {n} agents, exhaustive search is capped at {cap}")]
    InstanceTooLarge { n: usize, cap: usize },

    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(String),

    #[error("no feasible set of the requested size")]
    NoFeasibleSet,

    #[error("k = {k} is outside the admissible range [{min}, {max}]")]
    KOutOfRange { k: usize, min: usize, max: usize },

    #[error("k = {0} is too small, I-GSP needs k >= 2")]
    KTooSmall(usize),

    #[error("inverse k-price auction found no feasible k")]
    NoFeasibleK,

    #[error("invalid bucket scheme: {0}")]
    SchemeInvalid(String),

    #[error("instance does not fit the bucket scheme: {0}")]
    SchemeMismatch(String),

    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A proven per-row guarantee failed; `instance` is the offending instance in file format.
    #[error("bound violated: {what}\n{instance}")]
    BoundViolated { what: String, instance: String },
}
