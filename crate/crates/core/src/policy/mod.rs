//! Player policies.
//!
//! Every algorithm is a per-player state machine behind the same two-call
//! interface: `act(clock)` picks this round's action, `feedback(outcome)`
//! digests the result. No state is shared between players; the only common
//! input is the global round clock, which only the epoch-based variants
//! consult.

pub mod learning;
pub mod mc;
pub mod ranking;
pub mod st;
pub mod trek_down;
pub mod trek_up;

mod dt;
mod dts;

pub use dt::DtPolicy;
pub use dts::{CTrekkingState, DtsPolicy};
pub use learning::LearningState;
pub use mc::{estimate_players, DmcPolicy, McPolicy};
pub use ranking::RankingEstimate;
pub use st::StPolicy;
pub use trek_down::TrekDState;
pub use trek_up::TrekUState;

use serde::{Deserialize, Serialize};

use crate::env::{Action, ArmId, RoundOutcome};

/// Which algorithm a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Static trekking.
    St,
    /// Epoch-restarting dynamic trekking.
    Dt,
    /// Epoch-free dynamic trekking with sensing.
    Dts,
    /// Musical chairs.
    Mc,
    /// Epoch-restarting musical chairs.
    Dmc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::St => "st",
            Algorithm::Dt => "dt",
            Algorithm::Dts => "dts",
            Algorithm::Mc => "mc",
            Algorithm::Dmc => "dmc",
        }
    }

    pub fn uses_sensing(self) -> bool {
        matches!(self, Algorithm::Dts)
    }
}

/// Direction of the trekking phase in the static policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrekVariant {
    /// Probe the next-better arm, retreat on collision.
    #[default]
    Up,
    /// Start from the top arm, back off on contention.
    Down,
}

/// How mid-epoch entrants are handled by the epoch-based policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryMode {
    /// Idle until the next epoch boundary.
    #[default]
    Restricted,
    /// Join the game immediately.
    Unrestricted,
}

/// Resolved per-run constants handed to every new policy instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub k: u32,
    /// Learning length for the trekking policies.
    pub t0: u64,
    /// Epoch length for the restarting trekking policy.
    pub t_ep: u64,
    /// Learning length for musical chairs.
    pub t0_mc: u64,
    /// Epoch length for restarting musical chairs.
    pub t_ep_mc: u64,
    /// Learning length for the sensing policy.
    pub t0_dts: u64,
    /// Locking period between excursions in the sensing policy.
    pub t_l: u64,
    /// Observation count below which an arm stays unestimated.
    pub obs_threshold: u64,
    pub variant: TrekVariant,
    pub entry_mode: EntryMode,
}

/// One player's policy instance.
#[derive(Debug, Clone)]
pub enum PlayerPolicy {
    St(StPolicy),
    Dt(DtPolicy),
    Dts(DtsPolicy),
    Mc(McPolicy),
    Dmc(DmcPolicy),
}

impl PlayerPolicy {
    /// Create a policy for a player joining at `entry_clock`.
    pub fn create(algorithm: Algorithm, p: &PolicyParams, entry_clock: u64, seed: u64) -> Self {
        match algorithm {
            Algorithm::St => PlayerPolicy::St(StPolicy::new(p.k, p.t0, p.variant, seed)),
            Algorithm::Dt => PlayerPolicy::Dt(DtPolicy::new(
                p.k,
                p.t0,
                p.t_ep,
                p.variant,
                p.entry_mode,
                entry_clock,
                seed,
            )),
            Algorithm::Dts => {
                PlayerPolicy::Dts(DtsPolicy::new(p.k, p.t0_dts, p.t_l, p.obs_threshold, seed))
            }
            Algorithm::Mc => PlayerPolicy::Mc(McPolicy::new(p.k, p.t0_mc, seed)),
            Algorithm::Dmc => PlayerPolicy::Dmc(DmcPolicy::new(
                p.k,
                p.t0_mc,
                p.t_ep_mc,
                p.entry_mode,
                entry_clock,
                seed,
            )),
        }
    }

    pub fn act(&mut self, clock: u64) -> Action {
        match self {
            PlayerPolicy::St(p) => p.act(),
            PlayerPolicy::Dt(p) => p.act(clock),
            PlayerPolicy::Dts(p) => p.act(),
            PlayerPolicy::Mc(p) => p.act(),
            PlayerPolicy::Dmc(p) => p.act(clock),
        }
    }

    pub fn feedback(&mut self, outcome: &RoundOutcome) {
        match self {
            PlayerPolicy::St(p) => p.feedback(outcome),
            PlayerPolicy::Dt(p) => p.feedback(outcome),
            PlayerPolicy::Dts(p) => p.feedback(outcome),
            PlayerPolicy::Mc(p) => p.feedback(outcome),
            PlayerPolicy::Dmc(p) => p.feedback(outcome),
        }
    }

    pub fn locked_arm(&self) -> Option<ArmId> {
        match self {
            PlayerPolicy::St(p) => p.locked_arm(),
            PlayerPolicy::Dt(p) => p.locked_arm(),
            PlayerPolicy::Dts(p) => p.locked_arm(),
            PlayerPolicy::Mc(p) => p.locked_arm(),
            PlayerPolicy::Dmc(p) => p.locked_arm(),
        }
    }

    /// Completed excursion lengths; empty for non-sensing policies.
    pub fn excursion_lengths(&self) -> &[u64] {
        match self {
            PlayerPolicy::Dts(p) => p.excursion_lengths(),
            _ => &[],
        }
    }
}
