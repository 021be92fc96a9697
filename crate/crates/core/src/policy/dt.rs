//! Epoch-restarting dynamic trekking.
//!
//! Runs the static policy from scratch in every epoch of the shared global
//! clock: whenever `clock % t_ep == 0` the player discards her state and
//! learns again. Under restricted entry a player who joins mid-epoch idles
//! (no transmissions, no collisions) until the next boundary; under
//! unrestricted entry she starts learning immediately and is swept back in
//! sync at the next restart.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, ArmId, RoundOutcome};

use super::st::StPolicy;
use super::{EntryMode, TrekVariant};

#[derive(Debug, Clone)]
pub struct DtPolicy {
    k: u32,
    t0: u64,
    epoch_len: u64,
    variant: TrekVariant,
    rng: ChaCha8Rng,
    inner: Option<StPolicy>,
}

impl DtPolicy {
    pub fn new(
        k: u32,
        t0: u64,
        epoch_len: u64,
        variant: TrekVariant,
        entry_mode: EntryMode,
        entry_clock: u64,
        seed: u64,
    ) -> Self {
        assert!(epoch_len >= 1, "epoch length must be positive");
        let mut policy = DtPolicy {
            k,
            t0,
            epoch_len,
            variant,
            rng: ChaCha8Rng::seed_from_u64(seed),
            inner: None,
        };
        // At a boundary the first act() starts the epoch; only an
        // unrestricted mid-epoch entrant starts early.
        let mid_epoch = !entry_clock.is_multiple_of(epoch_len);
        if entry_mode == EntryMode::Unrestricted && mid_epoch {
            policy.start_epoch();
        }
        policy
    }

    fn start_epoch(&mut self) {
        let seed = self.rng.gen::<u64>();
        self.inner = Some(StPolicy::new(self.k, self.t0, self.variant, seed));
    }

    /// Whether the player is parked until the next epoch boundary.
    pub fn is_waiting(&self) -> bool {
        self.inner.is_none()
    }

    pub fn act(&mut self, clock: u64) -> Action {
        if clock.is_multiple_of(self.epoch_len) {
            self.start_epoch();
        }
        match &mut self.inner {
            Some(st) => st.act(),
            None => Action::Absent,
        }
    }

    pub fn feedback(&mut self, outcome: &RoundOutcome) {
        if let Some(st) = &mut self.inner {
            st.feedback(outcome);
        }
    }

    pub fn locked_arm(&self) -> Option<ArmId> {
        self.inner.as_ref().and_then(|st| st.locked_arm())
    }

    pub fn inner(&self) -> Option<&StPolicy> {
        self.inner.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(action: &Action) -> RoundOutcome {
        RoundOutcome {
            arm: action.arm(),
            reward: 0.0,
            collided: false,
            sensed_busy: false,
        }
    }

    #[test]
    fn restart_at_epoch_boundary_forgets_the_lock() {
        let mut dt = DtPolicy::new(4, 10, 50, TrekVariant::Up, EntryMode::Restricted, 0, 9);
        for clock in 0..50 {
            let a = dt.act(clock);
            dt.feedback(&clean(&a));
        }
        assert!(dt.locked_arm().is_some(), "settled within first epoch");
        // Boundary: state reset, learning starts over.
        let a = dt.act(50);
        assert!(matches!(a, Action::Play(_)));
        assert!(dt.locked_arm().is_none());
        assert!(dt.inner().unwrap().learning().is_some());
        // Same again at exactly two epoch lengths.
        for clock in 50..100 {
            let a = dt.act(clock);
            dt.feedback(&clean(&a));
        }
        assert!(dt.locked_arm().is_some());
        dt.act(100);
        assert!(dt.locked_arm().is_none());
    }

    #[test]
    fn zero_churn_epoch_matches_the_static_policy() {
        // With no events, an epoch of the restarting policy is the static
        // policy verbatim: same seed derivation, same action trace.
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let seed = 314u64;
        let inner_seed = ChaCha8Rng::seed_from_u64(seed).gen::<u64>();
        let mut dt = DtPolicy::new(4, 10, 50, TrekVariant::Up, EntryMode::Restricted, 0, seed);
        let mut st = crate::policy::StPolicy::new(4, 10, TrekVariant::Up, inner_seed);
        for clock in 0..50 {
            let a = dt.act(clock);
            let b = st.act();
            assert_eq!(a, b, "clock {clock}");
            dt.feedback(&clean(&a));
            st.feedback(&clean(&b));
        }
    }

    #[test]
    fn restricted_entrant_idles_until_boundary() {
        let mut dt = DtPolicy::new(4, 10, 50, TrekVariant::Up, EntryMode::Restricted, 23, 9);
        assert!(dt.is_waiting());
        for clock in 23..50 {
            assert_eq!(dt.act(clock), Action::Absent);
        }
        let a = dt.act(50);
        assert!(matches!(a, Action::Play(_)));
        assert!(!dt.is_waiting());
    }

    #[test]
    fn unrestricted_entrant_joins_immediately() {
        let mut dt = DtPolicy::new(4, 10, 50, TrekVariant::Up, EntryMode::Unrestricted, 23, 9);
        assert!(!dt.is_waiting());
        assert!(matches!(dt.act(23), Action::Play(_)));
    }

    #[test]
    fn epoch_traces_repeat_across_identical_runs() {
        let run = || {
            let mut dt = DtPolicy::new(4, 10, 50, TrekVariant::Up, EntryMode::Restricted, 0, 42);
            let mut trace = Vec::new();
            for clock in 0..150 {
                let a = dt.act(clock);
                trace.push(a);
                dt.feedback(&clean(&a));
            }
            trace
        };
        assert_eq!(run(), run());
    }
}
