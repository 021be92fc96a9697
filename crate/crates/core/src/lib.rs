//! Multi-player multi-armed bandit simulation library.
//!
//! Simulates a slotted collision channel shared by decentralized players:
//! arms yield stochastic rewards on `[0, 1]`, and whenever two or more
//! players transmit on the same arm in the same round all of them receive
//! zero reward. On top of the environment sit several coordination-free
//! policies — static and dynamic trekking (with upward and downward
//! variants and an epoch-free sensing variant) and the musical-chairs
//! baselines — plus exact regret/collision accounting and a config-driven
//! Monte Carlo experiment runner.
//!
//! Everything is deterministic given a scenario and a base seed: rewards,
//! random hopping, and population churn all draw from per-stream seeded
//! generators, so traces and emitted files are reproducible bit-for-bit.

pub mod env;
pub mod metrics;
pub mod output;
pub mod phase;
pub mod policy;
pub mod runner;
pub mod scenario;
pub mod seed;
pub mod verify;

pub use env::{Action, ArmId, ArmModel, Environment, PlayerId, RewardKind, RoundOutcome};
pub use metrics::{aggregate, round_collisions, round_regret, AggregateSeries, RunSeries};
pub use policy::{Algorithm, PlayerPolicy, TrekVariant};
pub use scenario::ScenarioSpec;
