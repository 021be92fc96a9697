//! Exhaustive trekking audit.
//!
//! Drives the trekking state machines directly in rank space over every
//! starting configuration of small instances: for each `K`, each `N <= K`,
//! and each assignment of `N` players to distinct start ranks (all players
//! sharing the correct ranking), the players must settle on the top `N`
//! ranks within the closed-form bound. The upward variant must also keep
//! every player at two collisions or fewer.
//!
//! This is the oracle behind the `verify-trekking` command; the bounds it
//! checks are the same ones the policies use for their phase budgets.

use thiserror::Error;

use crate::phase::{t_tr_down, t_tr_up, PhaseError};
use crate::policy::{TrekDState, TrekUState, TrekVariant};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error("case did not settle within {0} rounds")]
    DidNotSettle(u64),
}

/// Outcome of one simulated starting configuration.
#[derive(Debug, Clone)]
pub struct TrekCase {
    pub k: u32,
    pub n: u32,
    pub start_ranks: Vec<u32>,
    pub variant: TrekVariant,
    pub settle_rounds: u64,
    pub bound: u64,
    pub max_collisions_per_player: u64,
    pub final_ranks: Vec<u32>,
}

impl TrekCase {
    /// Settled in time, on exactly the top `N` ranks, within the collision
    /// budget where one applies.
    pub fn ok(&self) -> bool {
        let expected: Vec<u32> = (1..=self.n).collect();
        let collisions_ok = match self.variant {
            TrekVariant::Up => self.max_collisions_per_player <= 2,
            TrekVariant::Down => true,
        };
        self.settle_rounds <= self.bound && self.final_ranks == expected && collisions_ok
    }
}

/// Aggregated audit over all instances up to `max_k`.
#[derive(Debug, Clone)]
pub struct TrekAuditReport {
    pub cases: u64,
    pub violations: Vec<TrekCase>,
    /// Worst observed settling round per `(k, n, variant)`.
    pub worst: Vec<TrekCase>,
}

enum RankMachine {
    Up(TrekUState),
    Down(TrekDState),
}

impl RankMachine {
    fn new(variant: TrekVariant, start_rank: u32, k: u32) -> Self {
        match variant {
            TrekVariant::Up => RankMachine::Up(TrekUState::new(start_rank)),
            TrekVariant::Down => RankMachine::Down(TrekDState::new(start_rank, k)),
        }
    }

    fn select_rank(&self) -> u32 {
        match self {
            RankMachine::Up(s) => s.select_rank(),
            RankMachine::Down(s) => s.select_rank(),
        }
    }

    fn on_feedback(&mut self, collided: bool) {
        match self {
            RankMachine::Up(s) => s.on_feedback(collided),
            RankMachine::Down(s) => s.on_feedback(collided),
        }
    }

    fn locked_rank(&self) -> Option<u32> {
        match self {
            RankMachine::Up(s) => s.locked_rank(),
            RankMachine::Down(s) => s.locked_rank(),
        }
    }
}

/// Simulate one starting configuration until all players hold distinct
/// locked ranks in a collision-free round.
pub fn simulate_trek(
    k: u32,
    start_ranks: &[u32],
    variant: TrekVariant,
) -> Result<TrekCase, VerifyError> {
    let n = start_ranks.len() as u32;
    let bound = match variant {
        TrekVariant::Up => t_tr_up(k, n)?,
        TrekVariant::Down => t_tr_down(k, n)?,
    };
    let mut players: Vec<RankMachine> = start_ranks
        .iter()
        .map(|&r| RankMachine::new(variant, r, k))
        .collect();
    let mut collisions = vec![0u64; players.len()];
    let mut settle = None;
    // Generous cap; the bound itself is what gets asserted.
    let cap = bound * 4 + 16;
    if players.iter().all(|p| p.locked_rank().is_some()) {
        settle = Some(0);
    }
    let mut round = 0;
    while settle.is_none() && round < cap {
        round += 1;
        let plays: Vec<u32> = players.iter().map(|p| p.select_rank()).collect();
        let mut counts = vec![0u32; k as usize + 1];
        for &r in &plays {
            counts[r as usize] += 1;
        }
        for (i, player) in players.iter_mut().enumerate() {
            let collided = counts[plays[i] as usize] >= 2;
            if collided {
                collisions[i] += 1;
            }
            player.on_feedback(collided);
        }
        let all_locked = players.iter().all(|p| p.locked_rank().is_some());
        let clean = plays.iter().all(|&r| counts[r as usize] == 1);
        let mut sorted = plays.clone();
        sorted.sort_unstable();
        let top_n = sorted == (1..=n).collect::<Vec<u32>>();
        if all_locked && clean && top_n {
            settle = Some(round);
        }
    }
    let settle_rounds = settle.ok_or(VerifyError::DidNotSettle(cap))?;
    let mut final_ranks: Vec<u32> = players.iter().map(|p| p.locked_rank().unwrap()).collect();
    final_ranks.sort_unstable();
    Ok(TrekCase {
        k,
        n,
        start_ranks: start_ranks.to_vec(),
        variant,
        settle_rounds,
        bound,
        max_collisions_per_player: collisions.iter().copied().max().unwrap_or(0),
        final_ranks,
    })
}

fn subsets_of_size(k: u32, n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n as usize);
    fn rec(start: u32, k: u32, n: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == n as usize {
            out.push(current.clone());
            return;
        }
        for v in start..=k {
            current.push(v);
            rec(v + 1, k, n, current, out);
            current.pop();
        }
    }
    rec(1, k, n, &mut current, &mut out);
    out
}

/// Audit both variants over every instance with `2 <= K <= max_k`.
pub fn audit_trekking(max_k: u32) -> Result<TrekAuditReport, VerifyError> {
    let mut cases = 0;
    let mut violations = Vec::new();
    let mut worst: Vec<TrekCase> = Vec::new();
    for k in 2..=max_k {
        for n in 1..=k {
            for variant in [TrekVariant::Up, TrekVariant::Down] {
                let mut worst_case: Option<TrekCase> = None;
                for ranks in subsets_of_size(k, n) {
                    let case = simulate_trek(k, &ranks, variant)?;
                    cases += 1;
                    if !case.ok() {
                        violations.push(case.clone());
                    }
                    if worst_case
                        .as_ref()
                        .map(|w| case.settle_rounds > w.settle_rounds)
                        .unwrap_or(true)
                    {
                        worst_case = Some(case);
                    }
                }
                worst.push(worst_case.expect("at least one subset per (k, n)"));
            }
        }
    }
    Ok(TrekAuditReport {
        cases,
        violations,
        worst,
    })
}
