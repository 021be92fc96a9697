//! Static trekking policy: learning, then one trekking pass, then a lock.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, ArmId, RoundOutcome};

use super::learning::LearningState;
use super::ranking::RankingEstimate;
use super::trek_down::TrekDState;
use super::trek_up::TrekUState;
use super::TrekVariant;

#[derive(Debug, Clone)]
enum StPhase {
    Learning(LearningState),
    TrekUp(TrekUState),
    TrekDown(TrekDState),
}

#[derive(Debug, Clone)]
pub struct StPolicy {
    k: u32,
    variant: TrekVariant,
    rng: ChaCha8Rng,
    phase: StPhase,
    ranking: Option<RankingEstimate>,
}

impl StPolicy {
    pub fn new(k: u32, t0: u64, variant: TrekVariant, seed: u64) -> Self {
        StPolicy {
            k,
            variant,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: StPhase::Learning(LearningState::new(k, t0, false)),
            ranking: None,
        }
    }

    /// Re-index arms by estimated rank and enter the trekking phase (or
    /// lock straight away when already on the top-ranked arm).
    fn finish_learning(&mut self) {
        let StPhase::Learning(learning) = &self.phase else {
            return;
        };
        let ranking = learning.ranking();
        let current = learning
            .current_arm()
            .expect("learning selected at least one arm");
        let start_rank = ranking.rank_of(current);
        self.ranking = Some(ranking);
        self.phase = match self.variant {
            TrekVariant::Up => StPhase::TrekUp(TrekUState::new(start_rank)),
            TrekVariant::Down => StPhase::TrekDown(TrekDState::new(start_rank, self.k)),
        };
    }

    pub fn act(&mut self) -> Action {
        if matches!(&self.phase, StPhase::Learning(l) if l.finished()) {
            self.finish_learning();
        }
        match &mut self.phase {
            StPhase::Learning(l) => l.select(&mut self.rng),
            StPhase::TrekUp(t) => {
                Action::Play(self.ranking.as_ref().unwrap().arm_at_rank(t.select_rank()))
            }
            StPhase::TrekDown(t) => {
                Action::Play(self.ranking.as_ref().unwrap().arm_at_rank(t.select_rank()))
            }
        }
    }

    pub fn feedback(&mut self, outcome: &RoundOutcome) {
        match &mut self.phase {
            StPhase::Learning(l) => l.record(outcome),
            StPhase::TrekUp(t) => t.on_feedback(outcome.collided),
            StPhase::TrekDown(t) => t.on_feedback(outcome.collided),
        }
    }

    pub fn learning(&self) -> Option<&LearningState> {
        match &self.phase {
            StPhase::Learning(l) => Some(l),
            _ => None,
        }
    }

    pub fn ranking(&self) -> Option<&RankingEstimate> {
        self.ranking.as_ref()
    }

    /// Arm this player is locked on, once trekking has settled her.
    pub fn locked_arm(&self) -> Option<ArmId> {
        let rank = match &self.phase {
            StPhase::Learning(_) => None,
            StPhase::TrekUp(t) => t.locked_rank(),
            StPhase::TrekDown(t) => t.locked_rank(),
        }?;
        Some(self.ranking.as_ref().unwrap().arm_at_rank(rank))
    }

    pub fn orthogonalized(&self) -> bool {
        match &self.phase {
            StPhase::Learning(l) => l.orthogonalized(),
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ArmModel, Environment, PlayerId};
    use std::collections::BTreeMap;

    fn run_static(
        means: &[f64],
        n: u32,
        t0: u64,
        variant: TrekVariant,
        seed: u64,
    ) -> Vec<StPolicy> {
        let arms = means
            .iter()
            .map(|&m| ArmModel::bernoulli(m).unwrap())
            .collect();
        let mut env = Environment::new(arms, seed, 0).unwrap();
        let mut players: BTreeMap<PlayerId, StPolicy> = (1..=n)
            .map(|i| {
                env.enter_player(PlayerId(i)).unwrap();
                (
                    PlayerId(i),
                    StPolicy::new(means.len() as u32, t0, variant, seed * 1000 + u64::from(i)),
                )
            })
            .collect();
        let horizon = t0 + 200;
        for _ in 0..horizon {
            let actions: BTreeMap<_, _> =
                players.iter_mut().map(|(p, pol)| (*p, pol.act())).collect();
            let outcomes = env.resolve_round(&actions).unwrap();
            for (p, pol) in players.iter_mut() {
                pol.feedback(&outcomes[p]);
            }
        }
        players.into_values().collect()
    }

    #[test]
    fn learning_player_on_top_arm_locks_without_trekking() {
        // Single player, strongly separated arms: after learning she ranks
        // the arms correctly; if her walk ended on the best arm she locks
        // there, otherwise she treks up to it.
        let policies = run_static(&[0.05, 0.95, 0.5], 1, 60, TrekVariant::Up, 3);
        assert_eq!(policies[0].locked_arm().map(ArmId::get), Some(2));
    }

    #[test]
    fn five_players_settle_on_top_five_arms() {
        let mu: Vec<f64> = (0..10).map(|i| 0.22 + 0.07 * i as f64).collect();
        for variant in [TrekVariant::Up, TrekVariant::Down] {
            let policies = run_static(&mu, 5, 3000, variant, 11);
            let mut locked: Vec<u32> = policies
                .iter()
                .map(|p| p.locked_arm().expect("settled").get())
                .collect();
            locked.sort_unstable();
            assert_eq!(locked, vec![6, 7, 8, 9, 10], "{variant:?}");
        }
    }

    #[test]
    fn act_feedback_sequence_is_stable_under_reconstruction() {
        let mk = || StPolicy::new(5, 40, TrekVariant::Up, 77);
        let mut a = mk();
        let mut b = mk();
        for _ in 0..40 {
            let x = a.act();
            let y = b.act();
            assert_eq!(x, y);
            let o = RoundOutcome {
                arm: x.arm(),
                reward: 1.0,
                collided: false,
                sensed_busy: false,
            };
            a.feedback(&o);
            b.feedback(&o);
        }
    }
}
