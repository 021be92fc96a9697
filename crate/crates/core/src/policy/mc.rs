//! Musical-chairs baseline and its epoch-restarting variant.
//!
//! Learning phase: play a uniformly random arm every round, estimating
//! means from collision-free observations only and counting collisions.
//! The collision count inverts to an estimate of the player count, and the
//! chairs phase then plays uniformly over the estimated top arms until the
//! first collision-free play, which is locked forever.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, ArmId, RoundOutcome};

use super::ranking::RankingEstimate;
use super::EntryMode;

/// Invert the per-round collision probability `1 - (1 - 1/K)^(N-1)`
/// observed over the learning phase into a player-count estimate, clamped
/// to `[1, K]`.
pub fn estimate_players(collision_count: u64, t0_mc: u64, k: u32) -> u32 {
    assert!(t0_mc > 0, "learning budget must be positive");
    let t = t0_mc as f64;
    let f_free = ((t - collision_count as f64) / t).max(1.0 / t);
    let n = (f_free.ln() / (1.0 - 1.0 / f64::from(k)).ln()).round() + 1.0;
    (n.max(1.0) as u32).min(k)
}

#[derive(Debug, Clone)]
struct McLearning {
    rounds: u64,
    current_arm: Option<ArmId>,
    reward_sums: Vec<f64>,
    clean_counts: Vec<u64>,
    collision_count: u64,
}

#[derive(Debug, Clone)]
enum McPhase {
    Learning(McLearning),
    Chairs {
        ranking: RankingEstimate,
        n_hat: u32,
    },
    Locked {
        arm: ArmId,
    },
}

#[derive(Debug, Clone)]
pub struct McPolicy {
    k: u32,
    t0_mc: u64,
    rng: ChaCha8Rng,
    phase: McPhase,
}

impl McPolicy {
    pub fn new(k: u32, t0_mc: u64, seed: u64) -> Self {
        McPolicy {
            k,
            t0_mc,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: McPhase::Learning(McLearning {
                rounds: 0,
                current_arm: None,
                reward_sums: vec![0.0; k as usize],
                clean_counts: vec![0; k as usize],
                collision_count: 0,
            }),
        }
    }

    fn finish_learning(&mut self) {
        let McPhase::Learning(l) = &self.phase else {
            return;
        };
        let means: Vec<f64> = l
            .reward_sums
            .iter()
            .zip(&l.clean_counts)
            .map(|(&v, &s)| if s == 0 { 0.0 } else { v / s as f64 })
            .collect();
        let n_hat = estimate_players(l.collision_count, self.t0_mc, self.k);
        self.phase = McPhase::Chairs {
            ranking: RankingEstimate::from_means(means),
            n_hat,
        };
    }

    pub fn act(&mut self) -> Action {
        if matches!(&self.phase, McPhase::Learning(l) if l.rounds >= self.t0_mc) {
            self.finish_learning();
        }
        match &mut self.phase {
            McPhase::Learning(l) => {
                let arm = ArmId::from_raw(self.rng.gen_range(1..=self.k));
                l.current_arm = Some(arm);
                Action::Play(arm)
            }
            McPhase::Chairs { ranking, n_hat } => {
                let rank = self.rng.gen_range(1..=*n_hat);
                Action::Play(ranking.arm_at_rank(rank))
            }
            McPhase::Locked { arm } => Action::Play(*arm),
        }
    }

    pub fn feedback(&mut self, outcome: &RoundOutcome) {
        match &mut self.phase {
            McPhase::Learning(l) => {
                l.rounds += 1;
                let arm = outcome.arm.expect("learning outcomes carry an arm");
                if outcome.collided {
                    l.collision_count += 1;
                } else {
                    l.reward_sums[arm.index()] += outcome.reward;
                    l.clean_counts[arm.index()] += 1;
                }
            }
            McPhase::Chairs { .. } => {
                if !outcome.collided {
                    self.phase = McPhase::Locked {
                        arm: outcome.arm.expect("chairs outcomes carry an arm"),
                    };
                }
            }
            McPhase::Locked { .. } => {}
        }
    }

    pub fn locked_arm(&self) -> Option<ArmId> {
        match &self.phase {
            McPhase::Locked { arm } => Some(*arm),
            _ => None,
        }
    }

    /// Player-count estimate, available once learning has ended.
    pub fn n_hat(&self) -> Option<u32> {
        match &self.phase {
            McPhase::Chairs { n_hat, .. } => Some(*n_hat),
            _ => None,
        }
    }

    pub fn learning_collisions(&self) -> u64 {
        match &self.phase {
            McPhase::Learning(l) => l.collision_count,
            _ => 0,
        }
    }
}

/// Musical chairs restarted on every epoch boundary of the global clock,
/// with the same restricted-entry idling rule as the trekking counterpart.
#[derive(Debug, Clone)]
pub struct DmcPolicy {
    k: u32,
    t0_mc: u64,
    epoch_len: u64,
    rng: ChaCha8Rng,
    inner: Option<McPolicy>,
}

impl DmcPolicy {
    pub fn new(
        k: u32,
        t0_mc: u64,
        epoch_len: u64,
        entry_mode: EntryMode,
        entry_clock: u64,
        seed: u64,
    ) -> Self {
        assert!(epoch_len >= 1, "epoch length must be positive");
        let mut policy = DmcPolicy {
            k,
            t0_mc,
            epoch_len,
            rng: ChaCha8Rng::seed_from_u64(seed),
            inner: None,
        };
        // Mirrors the trekking counterpart: a boundary entrant starts via
        // the first act(); only an unrestricted mid-epoch entrant starts
        // early.
        let mid_epoch = !entry_clock.is_multiple_of(epoch_len);
        if entry_mode == EntryMode::Unrestricted && mid_epoch {
            policy.start_epoch();
        }
        policy
    }

    fn start_epoch(&mut self) {
        let seed = self.rng.gen::<u64>();
        self.inner = Some(McPolicy::new(self.k, self.t0_mc, seed));
    }

    pub fn is_waiting(&self) -> bool {
        self.inner.is_none()
    }

    pub fn act(&mut self, clock: u64) -> Action {
        if clock.is_multiple_of(self.epoch_len) {
            self.start_epoch();
        }
        match &mut self.inner {
            Some(mc) => mc.act(),
            None => Action::Absent,
        }
    }

    pub fn feedback(&mut self, outcome: &RoundOutcome) {
        if let Some(mc) = &mut self.inner {
            mc.feedback(outcome);
        }
    }

    pub fn locked_arm(&self) -> Option<ArmId> {
        self.inner.as_ref().and_then(|mc| mc.locked_arm())
    }

    pub fn inner(&self) -> Option<&McPolicy> {
        self.inner.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(arm: ArmId, reward: f64, collided: bool) -> RoundOutcome {
        RoundOutcome {
            arm: Some(arm),
            reward,
            collided,
            sensed_busy: false,
        }
    }

    #[test]
    fn estimator_examples() {
        // Solo player sees no collisions.
        assert_eq!(estimate_players(0, 3000, 10), 1);
        // Free fraction 0.9^4 inverts to five players.
        let cc = (3000.0 * (1.0 - 0.9f64.powi(4))).round() as u64;
        assert_eq!(estimate_players(cc, 3000, 10), 5);
        // Everything collided: the floor kicks in and clamps at K.
        assert_eq!(estimate_players(3000, 3000, 10), 10);
    }

    #[test]
    fn learning_plays_uniformly_then_chairs_over_top_ranks() {
        let mut mc = McPolicy::new(5, 50, 7);
        for _ in 0..50 {
            let a = mc.act();
            assert!(matches!(a, Action::Play(_)));
            let arm = a.arm().unwrap();
            // Arm 3 is the only one paying.
            let reward = if arm.get() == 3 { 1.0 } else { 0.0 };
            mc.feedback(&outcome(arm, reward, false));
        }
        let a = mc.act();
        assert_eq!(mc.n_hat(), Some(1), "collision-free learning");
        // With one estimated player, chairs always plays the top arm.
        assert_eq!(a.arm().unwrap().get(), 3);
        mc.feedback(&outcome(a.arm().unwrap(), 1.0, false));
        assert_eq!(mc.locked_arm().map(ArmId::get), Some(3));
    }

    #[test]
    fn lock_is_absorbing() {
        let mut mc = McPolicy::new(3, 2, 8);
        for _ in 0..2 {
            let a = mc.act();
            mc.feedback(&outcome(a.arm().unwrap(), 0.0, false));
        }
        let a = mc.act();
        mc.feedback(&outcome(a.arm().unwrap(), 0.0, false));
        let locked = mc.locked_arm().unwrap();
        for _ in 0..5 {
            let again = mc.act();
            assert_eq!(again, Action::Play(locked));
            mc.feedback(&outcome(locked, 0.0, true));
            assert_eq!(mc.locked_arm(), Some(locked));
        }
    }

    #[test]
    fn chairs_keeps_hopping_until_collision_free() {
        let mut mc = McPolicy::new(4, 3, 21);
        for _ in 0..3 {
            let a = mc.act();
            mc.feedback(&outcome(a.arm().unwrap(), 0.0, true));
        }
        for i in 0..6 {
            let a = mc.act();
            if i == 0 {
                assert_eq!(mc.n_hat(), Some(4), "all-collision learning maxes out");
            }
            assert!(mc.locked_arm().is_none());
            mc.feedback(&outcome(a.arm().unwrap(), 0.0, true));
        }
        let a = mc.act();
        mc.feedback(&outcome(a.arm().unwrap(), 0.0, false));
        assert!(mc.locked_arm().is_some());
    }

    #[test]
    fn zero_churn_epoch_matches_plain_chairs() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let seed = 2718u64;
        let inner_seed = ChaCha8Rng::seed_from_u64(seed).gen::<u64>();
        let mut dmc = DmcPolicy::new(4, 10, 60, EntryMode::Restricted, 0, seed);
        let mut mc = McPolicy::new(4, 10, inner_seed);
        for clock in 0..60 {
            let a = dmc.act(clock);
            let b = mc.act();
            assert_eq!(a, b, "clock {clock}");
            let o = outcome(a.arm().unwrap(), 0.0, false);
            dmc.feedback(&o);
            mc.feedback(&o);
        }
    }

    #[test]
    fn dmc_restarts_and_idles_like_its_trekking_counterpart() {
        let mut dmc = DmcPolicy::new(4, 5, 20, EntryMode::Restricted, 13, 3);
        assert!(dmc.is_waiting());
        for clock in 13..20 {
            assert_eq!(dmc.act(clock), Action::Absent);
        }
        let a = dmc.act(20);
        assert!(matches!(a, Action::Play(_)));
        dmc.feedback(&outcome(a.arm().unwrap(), 0.0, false));

        // Settle, then verify the boundary resets the lock.
        for clock in 21..40 {
            let a = dmc.act(clock);
            dmc.feedback(&outcome(a.arm().unwrap(), 0.0, false));
        }
        assert!(dmc.locked_arm().is_some());
        dmc.act(40);
        assert!(dmc.locked_arm().is_none());
    }
}
