//! Regret and collision accounting.
//!
//! Per-round regret is the oracle value (sum of the top `N_t` true means)
//! minus the realized value (sum of true means over arms held by exactly
//! one transmitter). Regret uses true means, not reward draws, so a fully
//! settled round contributes exactly zero. Collisions count every player
//! whose transmission was wiped out.
//!
//! Both the oracle and the realized value sum their terms in the same
//! canonical order (descending mean, ties toward the lower arm index), so
//! the two are bitwise equal whenever the occupied set matches the oracle
//! set — settled runs have exactly constant cumulative regret.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Action, ArmId, PlayerId, RoundOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no runs to aggregate")]
    NoRuns,
    #[error("run {0} records a different round grid")]
    MismatchedGrid(usize),
}

/// True arm means sorted once into oracle order, with prefix sums.
#[derive(Debug, Clone)]
pub struct OracleTable {
    /// `(mean, arm)` in descending mean order, ties toward lower index.
    order: Vec<(f64, ArmId)>,
    /// `prefix[n]` = sum of the top `n` means, accumulated left to right.
    prefix: Vec<f64>,
}

impl OracleTable {
    pub fn new(true_means: &[f64]) -> Self {
        let mut order: Vec<(f64, ArmId)> = true_means
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, ArmId::from_raw(i as u32 + 1)))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let mut prefix = Vec::with_capacity(order.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &(m, _) in &order {
            acc += m;
            prefix.push(acc);
        }
        OracleTable { order, prefix }
    }

    pub fn k(&self) -> usize {
        self.order.len()
    }

    /// Sum of the top `n` means; `n` beyond `K` is capped at all arms.
    pub fn oracle_value(&self, n: usize) -> f64 {
        self.prefix[n.min(self.order.len())]
    }

    pub fn mean_of(&self, arm: ArmId) -> f64 {
        self.order
            .iter()
            .find(|(_, a)| *a == arm)
            .map(|(m, _)| *m)
            .expect("arm within range")
    }

    /// Arms of the top `n` set under the canonical tie rule.
    pub fn top_arms(&self, n: usize) -> Vec<ArmId> {
        self.order[..n.min(self.order.len())]
            .iter()
            .map(|&(_, a)| a)
            .collect()
    }

    /// Realized value: arms held by exactly one transmitter, summed in
    /// canonical order.
    fn realized_value(
        &self,
        actions: &BTreeMap<PlayerId, Action>,
        outcomes: &BTreeMap<PlayerId, RoundOutcome>,
    ) -> f64 {
        let mut solo = vec![false; self.order.len()];
        for (player, outcome) in outcomes {
            let action = &actions[player];
            if outcome.transmitted(action) && !outcome.collided {
                solo[outcome.arm.expect("transmission has an arm").index()] = true;
            }
        }
        let mut acc = 0.0;
        for &(m, arm) in &self.order {
            if solo[arm.index()] {
                acc += m;
            }
        }
        acc
    }
}

/// Per-round accounting entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLedger {
    /// Clock value before this round (rounds completed so far).
    pub round: u64,
    /// Active players this round, including idle ones.
    pub n_active: u32,
    pub oracle_value: f64,
    pub realized_value: f64,
    pub collisions: u64,
    /// Set when `n_active` exceeded the arm count and the oracle was
    /// capped at all arms.
    pub oracle_capped: bool,
}

impl RoundLedger {
    pub fn regret(&self) -> f64 {
        self.oracle_value - self.realized_value
    }
}

/// Evaluate one resolved round. A sensing or idle player contributes zero
/// to the realized value and no collision.
pub fn round_ledger(
    round: u64,
    n_active: usize,
    actions: &BTreeMap<PlayerId, Action>,
    outcomes: &BTreeMap<PlayerId, RoundOutcome>,
    table: &OracleTable,
) -> RoundLedger {
    RoundLedger {
        round,
        n_active: n_active as u32,
        oracle_value: table.oracle_value(n_active),
        realized_value: table.realized_value(actions, outcomes),
        collisions: round_collisions(outcomes),
        oracle_capped: n_active > table.k(),
    }
}

/// Per-round expected regret: oracle value minus realized value.
pub fn round_regret(
    actions: &BTreeMap<PlayerId, Action>,
    outcomes: &BTreeMap<PlayerId, RoundOutcome>,
    true_means: &[f64],
    n_active: usize,
) -> f64 {
    let table = OracleTable::new(true_means);
    table.oracle_value(n_active) - table.realized_value(actions, outcomes)
}

/// Number of collision indicators set this round.
pub fn round_collisions(outcomes: &BTreeMap<PlayerId, RoundOutcome>) -> u64 {
    outcomes.values().filter(|o| o.collided).count() as u64
}

/// Population change marker for plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMark {
    pub round: u64,
    pub entered: bool,
    pub player: u32,
}

/// Sampled cumulative series for one repetition.
///
/// Entry `i` describes the state after `rounds[i]` completed rounds; both
/// cumulative series are non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeries {
    pub rounds: Vec<u64>,
    pub cum_regret: Vec<f64>,
    pub cum_collisions: Vec<u64>,
    pub n_active: Vec<u32>,
    pub event_marks: Vec<EventMark>,
}

impl RunSeries {
    pub fn final_regret(&self) -> f64 {
        *self.cum_regret.last().unwrap_or(&0.0)
    }

    pub fn final_collisions(&self) -> u64 {
        *self.cum_collisions.last().unwrap_or(&0)
    }
}

/// Pointwise mean and sample standard deviation across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSeries {
    pub rounds: Vec<u64>,
    pub mean_cum_regret: Vec<f64>,
    pub std_cum_regret: Vec<f64>,
    /// Cumulative regret divided by the round count.
    pub mean_avg_regret: Vec<f64>,
    pub mean_cum_collisions: Vec<f64>,
    pub std_cum_collisions: Vec<f64>,
    pub n_active: Vec<u32>,
    pub repetitions: u32,
}

impl AggregateSeries {
    pub fn final_mean_regret(&self) -> f64 {
        *self.mean_cum_regret.last().unwrap_or(&0.0)
    }

    pub fn final_mean_collisions(&self) -> f64 {
        *self.mean_cum_collisions.last().unwrap_or(&0.0)
    }

    pub fn final_std_regret(&self) -> f64 {
        *self.std_cum_regret.last().unwrap_or(&0.0)
    }

    pub fn final_std_collisions(&self) -> f64 {
        *self.std_cum_collisions.last().unwrap_or(&0.0)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fold repetitions into pointwise mean/std series. All runs must share
/// the same round grid.
pub fn aggregate(runs: &[RunSeries]) -> Result<AggregateSeries, MetricsError> {
    let first = runs.first().ok_or(MetricsError::NoRuns)?;
    for (i, run) in runs.iter().enumerate() {
        if run.rounds != first.rounds {
            return Err(MetricsError::MismatchedGrid(i));
        }
    }
    let points = first.rounds.len();
    let mut mean_cum_regret = Vec::with_capacity(points);
    let mut std_cum_regret = Vec::with_capacity(points);
    let mut mean_avg_regret = Vec::with_capacity(points);
    let mut mean_cum_collisions = Vec::with_capacity(points);
    let mut std_cum_collisions = Vec::with_capacity(points);
    for i in 0..points {
        let regrets: Vec<f64> = runs.iter().map(|r| r.cum_regret[i]).collect();
        let collisions: Vec<f64> = runs.iter().map(|r| r.cum_collisions[i] as f64).collect();
        let (mr, sr) = mean_and_std(&regrets);
        let (mc, sc) = mean_and_std(&collisions);
        mean_cum_regret.push(mr);
        std_cum_regret.push(sr);
        mean_avg_regret.push(mr / first.rounds[i] as f64);
        mean_cum_collisions.push(mc);
        std_cum_collisions.push(sc);
    }
    Ok(AggregateSeries {
        rounds: first.rounds.clone(),
        mean_cum_regret,
        std_cum_regret,
        mean_avg_regret,
        mean_cum_collisions,
        std_cum_collisions,
        n_active: first.n_active.clone(),
        repetitions: runs.len() as u32,
    })
}
