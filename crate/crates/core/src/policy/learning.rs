//! Learning subroutine: random hopping, then sequential hopping.
//!
//! Each round the player selects an arm — uniformly at random until her
//! first collision-free play, deterministically wrapping upward afterwards
//! — and accumulates per-arm reward sums and play counts. In the sensing
//! variant the selected arm is sensed first and the round is forfeited when
//! another transmission is heard.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, ArmId, RoundOutcome};

use super::ranking::RankingEstimate;

#[derive(Debug, Clone)]
pub struct LearningState {
    k: u32,
    budget: u64,
    use_sensing: bool,
    orthogonalized: bool,
    current_arm: Option<ArmId>,
    reward_sums: Vec<f64>,
    play_counts: Vec<u64>,
    clean_counts: Vec<u64>,
    rounds_elapsed: u64,
}

impl LearningState {
    pub fn new(k: u32, budget: u64, use_sensing: bool) -> Self {
        LearningState {
            k,
            budget,
            use_sensing,
            orthogonalized: false,
            current_arm: None,
            reward_sums: vec![0.0; k as usize],
            play_counts: vec![0; k as usize],
            clean_counts: vec![0; k as usize],
            rounds_elapsed: 0,
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn rounds_elapsed(&self) -> u64 {
        self.rounds_elapsed
    }

    pub fn finished(&self) -> bool {
        self.rounds_elapsed >= self.budget
    }

    /// `L` flag: set by the first collision-free play, never cleared.
    pub fn orthogonalized(&self) -> bool {
        self.orthogonalized
    }

    /// Last selected arm (`I_t`).
    pub fn current_arm(&self) -> Option<ArmId> {
        self.current_arm
    }

    pub fn play_count(&self, arm: ArmId) -> u64 {
        self.play_counts[arm.index()]
    }

    /// Collision-free plays, i.e. rounds that yielded a reward sample.
    pub fn clean_count(&self, arm: ArmId) -> u64 {
        self.clean_counts[arm.index()]
    }

    pub fn select(&mut self, rng: &mut ChaCha8Rng) -> Action {
        let arm = if self.orthogonalized {
            self.current_arm
                .expect("orthogonalized implies a previous selection")
                .next_wrapping(self.k)
        } else {
            ArmId::from_raw(rng.gen_range(1..=self.k))
        };
        self.current_arm = Some(arm);
        if self.use_sensing {
            Action::SensePlay(arm)
        } else {
            Action::Play(arm)
        }
    }

    pub fn record(&mut self, outcome: &RoundOutcome) {
        self.rounds_elapsed += 1;
        if self.use_sensing && outcome.sensed_busy {
            // Forfeited round: no transmission, no sample.
            return;
        }
        let arm = outcome.arm.expect("learning outcomes carry an arm");
        self.play_counts[arm.index()] += 1;
        if !outcome.collided {
            self.reward_sums[arm.index()] += outcome.reward;
            self.clean_counts[arm.index()] += 1;
            self.orthogonalized = true;
        }
    }

    /// Empirical mean per arm; arms never played estimate to zero.
    pub fn empirical_means(&self) -> Vec<f64> {
        self.reward_sums
            .iter()
            .zip(&self.play_counts)
            .map(|(&v, &s)| if s == 0 { 0.0 } else { v / s as f64 })
            .collect()
    }

    pub fn ranking(&self) -> RankingEstimate {
        RankingEstimate::from_means(self.empirical_means())
    }
}
