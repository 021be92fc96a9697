//! Downward trekking with back-off.
//!
//! Players start at the top rank and walk down the ordered list. Ending the
//! learning phase on rank `i` fixes a back-off budget of `K - i + 1` rounds
//! for the whole phase; a player stays on a contested candidate until the
//! budget is spent, then moves to the next-worse rank. The first
//! collision-free play locks her forever. Budgets are distinct because
//! end-of-learning arms are distinct, so every contention has a unique
//! survivor.

#[derive(Debug, Clone)]
pub struct TrekDState {
    backoff_budget: u32,
    candidate_rank: u32,
    collision_streak: u32,
    locked_rank: Option<u32>,
    k: u32,
}

impl TrekDState {
    /// Start downward trekking after ending learning on `start_rank`.
    /// Rank 1 locks immediately.
    pub fn new(start_rank: u32, k: u32) -> Self {
        debug_assert!(start_rank >= 1 && start_rank <= k);
        TrekDState {
            backoff_budget: k - start_rank + 1,
            candidate_rank: 1,
            collision_streak: 0,
            locked_rank: (start_rank == 1).then_some(1),
            k,
        }
    }

    pub fn locked_rank(&self) -> Option<u32> {
        self.locked_rank
    }

    pub fn backoff_budget(&self) -> u32 {
        self.backoff_budget
    }

    pub fn select_rank(&self) -> u32 {
        self.locked_rank.unwrap_or(self.candidate_rank)
    }

    pub fn on_feedback(&mut self, collided: bool) {
        if self.locked_rank.is_some() {
            return;
        }
        if !collided {
            self.locked_rank = Some(self.candidate_rank);
            return;
        }
        self.collision_streak += 1;
        if self.collision_streak >= self.backoff_budget {
            // Budget spent on this candidate: try the next-worse rank.
            // Saturate at K; with at most K players a free rank always
            // exists before that.
            self.candidate_rank = (self.candidate_rank + 1).min(self.k);
            self.collision_streak = 0;
        }
    }
}
