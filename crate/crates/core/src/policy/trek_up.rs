//! Upward trekking.
//!
//! After learning, a player holds the rank of her final arm as the reserved
//! rank `J` and probes the next-better arm: rank `J-1` must be observed
//! collision-free for `J-1` consecutive rounds before it becomes the new
//! reserve. Any collision while probing sends her back to the reserved rank
//! for good; reaching rank 1 locks there. Locks are absorbing — a locked
//! player ignores collisions and never moves.
//!
//! The machine works in rank space; callers map ranks to arms through their
//! own ranking estimate.

#[derive(Debug, Clone)]
pub struct TrekUState {
    reserved_rank: u32,
    probe_clean: u32,
    locked_rank: Option<u32>,
}

impl TrekUState {
    /// Start trekking from the given 1-based rank. Rank 1 locks immediately.
    pub fn new(start_rank: u32) -> Self {
        debug_assert!(start_rank >= 1);
        TrekUState {
            reserved_rank: start_rank,
            probe_clean: 0,
            locked_rank: (start_rank == 1).then_some(1),
        }
    }

    pub fn locked_rank(&self) -> Option<u32> {
        self.locked_rank
    }

    pub fn reserved_rank(&self) -> u32 {
        self.reserved_rank
    }

    /// Rank to play this round: the lock, or the probed candidate `J-1`.
    pub fn select_rank(&self) -> u32 {
        match self.locked_rank {
            Some(r) => r,
            None => self.reserved_rank - 1,
        }
    }

    pub fn on_feedback(&mut self, collided: bool) {
        if self.locked_rank.is_some() {
            return;
        }
        if collided {
            // Candidate is contested: fall back on the reserve forever.
            self.locked_rank = Some(self.reserved_rank);
            return;
        }
        self.probe_clean += 1;
        if self.probe_clean == self.reserved_rank - 1 {
            // Candidate observed clean long enough: promote the reserve.
            self.reserved_rank -= 1;
            self.probe_clean = 0;
            if self.reserved_rank == 1 {
                self.locked_rank = Some(1);
            }
        }
    }
}
