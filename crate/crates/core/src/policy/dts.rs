//! Epoch-free dynamic trekking with sensing.
//!
//! The learning phase is the usual random/sequential hopping, except every
//! selected arm is sensed first and the round is forfeited when a
//! transmission is heard, so a late entrant never disturbs settled players.
//! Afterwards the player alternates forever between a locked state (play
//! one arm for `t_l` rounds) and a trekking excursion that checks, in
//! order, the arms she has no estimate for and then the estimated arms
//! ranked better than her reserve. Sensing a busy candidate moves her to
//! the next one; a collision-free play locks her on the candidate;
//! contention is resolved by a back-off budget of `K - i + 1` rounds for
//! reserve rank `i`, after which she returns home for one round and
//! continues the excursion. Locking on an unestimated arm for the full
//! `t_l` rounds yields its estimate and promotes it into the ranked set.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, ArmId, RoundOutcome};

use super::learning::LearningState;

#[derive(Debug, Clone)]
enum ExcursionStep {
    ChooseNext,
    Probing { arm: ArmId, streak: u32 },
    ReturningHome,
}

#[derive(Debug, Clone)]
enum TrekMode {
    Locked {
        arm: ArmId,
        plays: u64,
        reward_sum: f64,
    },
    Excursion {
        pi2_cursor: usize,
        pi1_cursor: usize,
        step: ExcursionStep,
    },
}

/// Continuous trekking state: the alternating lock/excursion machine.
#[derive(Debug, Clone)]
pub struct CTrekkingState {
    k: u32,
    lock_budget: u64,
    mu_hat: Vec<f64>,
    /// Estimated arms, best first (ties toward the lower arm index).
    pi1: Vec<ArmId>,
    /// Unestimated arms in ascending index order.
    pi2: Vec<ArmId>,
    reserved: ArmId,
    mode: TrekMode,
    current_excursion: u64,
    excursion_lengths: Vec<u64>,
}

impl CTrekkingState {
    /// Build from end-of-learning estimates. `estimated` flags the arms
    /// with enough observations to rank; the reserve is the final learning
    /// arm when it is estimated, otherwise arm `K`.
    pub fn new(
        k: u32,
        lock_budget: u64,
        mu_hat: Vec<f64>,
        estimated: &[bool],
        end_arm: ArmId,
    ) -> Self {
        assert_eq!(mu_hat.len(), k as usize);
        assert_eq!(estimated.len(), k as usize);
        let mut pi1: Vec<ArmId> = (1..=k)
            .map(ArmId::from_raw)
            .filter(|a| estimated[a.index()])
            .collect();
        pi1.sort_by(|a, b| {
            mu_hat[b.index()]
                .total_cmp(&mu_hat[a.index()])
                .then_with(|| a.index().cmp(&b.index()))
        });
        let pi2: Vec<ArmId> = (1..=k)
            .map(ArmId::from_raw)
            .filter(|a| !estimated[a.index()])
            .collect();
        let reserved = if estimated[end_arm.index()] {
            end_arm
        } else {
            ArmId::from_raw(k)
        };
        CTrekkingState {
            k,
            lock_budget,
            mu_hat,
            pi1,
            pi2,
            reserved,
            mode: TrekMode::Excursion {
                pi2_cursor: 0,
                pi1_cursor: 0,
                step: ExcursionStep::ChooseNext,
            },
            current_excursion: 0,
            excursion_lengths: Vec::new(),
        }
    }

    pub fn reserved_arm(&self) -> ArmId {
        self.reserved
    }

    pub fn locked_arm(&self) -> Option<ArmId> {
        match &self.mode {
            TrekMode::Locked { arm, .. } => Some(*arm),
            TrekMode::Excursion { .. } => None,
        }
    }

    pub fn estimated_arms(&self) -> &[ArmId] {
        &self.pi1
    }

    pub fn unestimated_arms(&self) -> &[ArmId] {
        &self.pi2
    }

    /// Completed unlock-to-relock excursion lengths, in rounds.
    pub fn excursion_lengths(&self) -> &[u64] {
        &self.excursion_lengths
    }

    /// 0-based position of the reserve in the ranked list; arms not in the
    /// list rank behind everything estimated.
    fn reserve_pos(&self) -> usize {
        self.pi1
            .iter()
            .position(|a| *a == self.reserved)
            .unwrap_or(self.pi1.len())
    }

    /// Contention persistence `K - i + 1` for 1-based reserve rank `i`.
    fn backoff_budget(&self) -> u32 {
        (self.k as usize - self.reserve_pos()).max(1) as u32
    }

    pub fn act(&mut self) -> Action {
        let (pi2_cursor, pi1_cursor, step) = match &self.mode {
            TrekMode::Locked { arm, .. } => return Action::Play(*arm),
            TrekMode::Excursion {
                pi2_cursor,
                pi1_cursor,
                step,
            } => (*pi2_cursor, *pi1_cursor, step.clone()),
        };
        self.current_excursion += 1;
        match step {
            ExcursionStep::Probing { arm, .. } => Action::SensePlay(arm),
            ExcursionStep::ReturningHome => Action::Play(self.reserved),
            ExcursionStep::ChooseNext => {
                if pi2_cursor < self.pi2.len() {
                    let arm = self.pi2[pi2_cursor];
                    self.mode = TrekMode::Excursion {
                        pi2_cursor: pi2_cursor + 1,
                        pi1_cursor,
                        step: ExcursionStep::Probing { arm, streak: 0 },
                    };
                    Action::SensePlay(arm)
                } else if pi1_cursor < self.reserve_pos() {
                    let arm = self.pi1[pi1_cursor];
                    self.mode = TrekMode::Excursion {
                        pi2_cursor,
                        pi1_cursor: pi1_cursor + 1,
                        step: ExcursionStep::Probing { arm, streak: 0 },
                    };
                    Action::SensePlay(arm)
                } else {
                    // All better arms checked: lock back home.
                    self.mode = TrekMode::Locked {
                        arm: self.reserved,
                        plays: 0,
                        reward_sum: 0.0,
                    };
                    self.excursion_lengths.push(self.current_excursion);
                    self.current_excursion = 0;
                    Action::Play(self.reserved)
                }
            }
        }
    }

    pub fn on_feedback(&mut self, outcome: &RoundOutcome) {
        let backoff = self.backoff_budget();
        match &mut self.mode {
            TrekMode::Locked {
                arm,
                plays,
                reward_sum,
            } => {
                if outcome.collided {
                    // Bumped while locked: fall back on the reserve and
                    // restart the lock period.
                    self.mode = TrekMode::Locked {
                        arm: self.reserved,
                        plays: 0,
                        reward_sum: 0.0,
                    };
                    return;
                }
                *plays += 1;
                *reward_sum += outcome.reward;
                if *plays >= self.lock_budget {
                    let arm = *arm;
                    let estimate = *reward_sum / *plays as f64;
                    self.unlock(arm, estimate);
                }
            }
            TrekMode::Excursion { step, .. } => match step {
                ExcursionStep::Probing { arm, streak } => {
                    if outcome.sensed_busy {
                        // Someone holds the candidate: try the next one.
                        *step = ExcursionStep::ChooseNext;
                    } else if !outcome.collided {
                        // Free arm claimed: lock on it.
                        let arm = *arm;
                        let reward = outcome.reward;
                        self.mode = TrekMode::Locked {
                            arm,
                            plays: 1,
                            reward_sum: reward,
                        };
                        self.excursion_lengths.push(self.current_excursion);
                        self.current_excursion = 0;
                    } else {
                        *streak += 1;
                        if *streak >= backoff {
                            *step = ExcursionStep::ReturningHome;
                        }
                    }
                }
                ExcursionStep::ReturningHome => {
                    *step = ExcursionStep::ChooseNext;
                }
                ExcursionStep::ChooseNext => {
                    unreachable!("ChooseNext always resolves within act")
                }
            },
        }
    }

    /// Lock period over: absorb a fresh estimate when the arm was
    /// unestimated, make it the reserve, and start a new excursion.
    fn unlock(&mut self, arm: ArmId, estimate: f64) {
        if let Some(pos) = self.pi2.iter().position(|a| *a == arm) {
            self.pi2.remove(pos);
            self.mu_hat[arm.index()] = estimate;
            self.pi1.push(arm);
            let mu = &self.mu_hat;
            self.pi1.sort_by(|a, b| {
                mu[b.index()]
                    .total_cmp(&mu[a.index()])
                    .then_with(|| a.index().cmp(&b.index()))
            });
        }
        self.reserved = arm;
        self.mode = TrekMode::Excursion {
            pi2_cursor: 0,
            pi1_cursor: 0,
            step: ExcursionStep::ChooseNext,
        };
        self.current_excursion = 0;
    }
}

#[derive(Debug, Clone)]
enum DtsPhase {
    Learning(LearningState),
    Trek(CTrekkingState),
}

/// The full epoch-free policy: sensing learning followed by continuous
/// trekking. Entrants start learning the moment they join; no global clock
/// is consulted.
#[derive(Debug, Clone)]
pub struct DtsPolicy {
    k: u32,
    lock_budget: u64,
    obs_threshold: u64,
    rng: ChaCha8Rng,
    phase: DtsPhase,
}

impl DtsPolicy {
    pub fn new(k: u32, t0: u64, lock_budget: u64, obs_threshold: u64, seed: u64) -> Self {
        DtsPolicy {
            k,
            lock_budget,
            obs_threshold,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: DtsPhase::Learning(LearningState::new(k, t0, true)),
        }
    }

    fn finish_learning(&mut self) {
        let DtsPhase::Learning(learning) = &self.phase else {
            return;
        };
        let estimated: Vec<bool> = (1..=self.k)
            .map(|a| learning.clean_count(ArmId::from_raw(a)) >= self.obs_threshold)
            .collect();
        let end_arm = learning
            .current_arm()
            .expect("learning selected at least one arm");
        self.phase = DtsPhase::Trek(CTrekkingState::new(
            self.k,
            self.lock_budget,
            learning.empirical_means(),
            &estimated,
            end_arm,
        ));
    }

    pub fn act(&mut self) -> Action {
        if matches!(&self.phase, DtsPhase::Learning(l) if l.finished()) {
            self.finish_learning();
        }
        match &mut self.phase {
            DtsPhase::Learning(l) => l.select(&mut self.rng),
            DtsPhase::Trek(t) => t.act(),
        }
    }

    pub fn feedback(&mut self, outcome: &RoundOutcome) {
        match &mut self.phase {
            DtsPhase::Learning(l) => l.record(outcome),
            DtsPhase::Trek(t) => t.on_feedback(outcome),
        }
    }

    pub fn locked_arm(&self) -> Option<ArmId> {
        match &self.phase {
            DtsPhase::Learning(_) => None,
            DtsPhase::Trek(t) => t.locked_arm(),
        }
    }

    pub fn trek(&self) -> Option<&CTrekkingState> {
        match &self.phase {
            DtsPhase::Trek(t) => Some(t),
            DtsPhase::Learning(_) => None,
        }
    }

    pub fn learning(&self) -> Option<&LearningState> {
        match &self.phase {
            DtsPhase::Learning(l) => Some(l),
            DtsPhase::Trek(_) => None,
        }
    }

    pub fn excursion_lengths(&self) -> &[u64] {
        self.trek().map(|t| t.excursion_lengths()).unwrap_or(&[])
    }
}
