//! Mechanisms for outsourcing verifiable computation to a decentralized set
//! of solution providers.
//!
//! A client offers a unit reward; each provider `i` can deliver a solution
//! by time `t_i` at cost `c_i`. The crate covers
//!
//! - [`market`]: agent types, validated instances, action profiles, outcomes;
//! - [`benchmarks`]: the decentralization factor `k*`, time guarantees
//!   `t*_alpha`, k-best sets and outcome metrics;
//! - [`rules`]: the fastest-wins, equal, harmonic and best-set reward rules;
//! - [`equilibrium`]: pure Nash checks, exhaustive enumeration and
//!   constructive solvers for each rule;
//! - [`revelation`]: the inverse k-price auction and inverse generalized
//!   second price (I-GSP) with IR/IC auditors;
//! - [`harness`]: seeded instance generators and the two synthetic
//!   experiments, emitted as CSV.
//!
//! All mechanism logic runs on exact rationals ([`exact`]).

pub mod benchmarks;
pub mod equilibrium;
pub mod error;
pub mod exact;
pub mod harness;
pub mod market;
pub mod revelation;
pub mod rules;

pub use num_rational::BigRational;

pub use crate::error::{Error, Result};
pub use crate::exact::{Money, TimePoint};
pub use crate::market::{make_instance, Action, ActionProfile, AgentType, Instance, Outcome};
