//! Slotted collision-channel environment.
//!
//! Owns the arms, reward sampling, the collision/sensing resolution rule,
//! and the dynamic player population. One instance simulates one game:
//! every round each active player submits an [`Action`], the environment
//! resolves who transmitted, who collided, and who sensed whom, and hands
//! back one [`RoundOutcome`] per acting player.
//!
//! Arm indices are 1-based: the sequential-hopping step `I_t = I_{t-1} + 1
//! modulo K` wraps arm `K` back to arm `1`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{stream_rng, Stream};

/// 1-based arm index in `[1, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArmId(u32);

impl ArmId {
    /// Checked constructor; `value` must lie in `[1, k]`.
    pub fn new(value: u32, k: u32) -> Result<Self, EnvError> {
        if value == 0 || value > k {
            return Err(EnvError::ArmOutOfRange { arm: value, k });
        }
        Ok(ArmId(value))
    }

    /// Unchecked constructor for internal call sites that already hold a
    /// valid index.
    pub(crate) fn from_raw(value: u32) -> Self {
        debug_assert!(value >= 1);
        ArmId(value)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based position for vector storage.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    /// Sequential-hopping successor: `K` wraps to `1`.
    pub fn next_wrapping(self, k: u32) -> ArmId {
        ArmId(self.0 % k + 1)
    }
}

impl std::fmt::Display for ArmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of one simulated player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlayerId(pub u32);

impl std::fmt::Display for PlayerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Reward distribution attached to an arm. Means live on `[0, 1]` and every
/// sampled reward lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    /// Success/failure channel; reward is `1` with probability `mean`.
    #[default]
    Bernoulli,
    /// Uniform on `[mean - w, mean + w]` with `w = min(mean, 1 - mean)`.
    Uniform,
}

/// One arm: a stationary reward distribution with mean `mu_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmModel {
    mean: f64,
    kind: RewardKind,
}

impl ArmModel {
    pub fn new(mean: f64, kind: RewardKind) -> Result<Self, EnvError> {
        if !(0.0..=1.0).contains(&mean) || !mean.is_finite() {
            return Err(EnvError::MeanOutOfRange(mean));
        }
        Ok(ArmModel { mean, kind })
    }

    pub fn bernoulli(mean: f64) -> Result<Self, EnvError> {
        Self::new(mean, RewardKind::Bernoulli)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.kind {
            RewardKind::Bernoulli => {
                if rng.gen::<f64>() < self.mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardKind::Uniform => {
                let w = self.mean.min(1.0 - self.mean);
                self.mean + (rng.gen::<f64>() * 2.0 - 1.0) * w
            }
        }
    }
}

/// What one player does in one round.
///
/// `Absent` is the marker for players that are not participating this round
/// (departed, or parked while waiting for an epoch boundary); it is never
/// submitted to [`Environment::resolve_round`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Transmit on the arm unconditionally.
    Play(ArmId),
    /// Sense the arm first and transmit only if no transmission is heard.
    SensePlay(ArmId),
    /// Observe the arm without ever transmitting.
    Sense(ArmId),
    /// Not participating.
    Absent,
}

impl Action {
    pub fn arm(&self) -> Option<ArmId> {
        match *self {
            Action::Play(a) | Action::SensePlay(a) | Action::Sense(a) => Some(a),
            Action::Absent => None,
        }
    }
}

/// Per-player feedback for one round.
///
/// `collided == true` implies `reward == 0`. `sensed_busy` is meaningful
/// only for `Sense`/`SensePlay` actions and is always `false` for `Play`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub arm: Option<ArmId>,
    pub reward: f64,
    pub collided: bool,
    pub sensed_busy: bool,
}

impl RoundOutcome {
    /// Whether the player actually transmitted, given the action that
    /// produced this outcome.
    pub fn transmitted(&self, action: &Action) -> bool {
        match action {
            Action::Play(_) => true,
            Action::SensePlay(_) => !self.sensed_busy,
            Action::Sense(_) | Action::Absent => false,
        }
    }
}

/// Scheduled change to the player population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationEvent {
    /// Global clock value (completed rounds) at which the event applies,
    /// before the round's actions.
    pub round: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Enter(PlayerId),
    Leave(LeaveTarget),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaveTarget {
    Player(PlayerId),
    /// Uniformly random among currently active players.
    RandomActive,
}

/// Applied population change, reported back to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationChange {
    Entered(PlayerId),
    Left(PlayerId),
}

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("need at least two arms, got {0}")]
    TooFewArms(usize),
    #[error("arm mean {0} outside [0, 1]")]
    MeanOutOfRange(f64),
    #[error("arm index {arm} outside [1, {k}]")]
    ArmOutOfRange { arm: u32, k: u32 },
    #[error("player {0} is not active")]
    InactivePlayer(PlayerId),
    #[error("player {0} submitted an Absent action")]
    AbsentAction(PlayerId),
    #[error("player {0} is already active")]
    AlreadyActive(PlayerId),
    #[error("population cap {0} reached; relaxed mode is off")]
    PopulationCap(u32),
    #[error("no active players to remove")]
    NoActivePlayers,
    #[error("sensing actions are disabled in this environment")]
    SensingDisabled,
    #[error("event scheduled for round {scheduled} but clock is {clock}")]
    StaleEvent { scheduled: u64, clock: u64 },
}

/// The collision-channel game state.
///
/// A single instance is strictly sequential and single-owner; Monte Carlo
/// repetitions each build their own instance from a per-repetition seed and
/// share nothing mutable.
#[derive(Debug, Clone)]
pub struct Environment {
    arms: Vec<ArmModel>,
    round: u64,
    active: BTreeMap<PlayerId, u64>,
    departed: BTreeSet<PlayerId>,
    arm_rngs: Vec<ChaCha8Rng>,
    event_rng: ChaCha8Rng,
    relaxed_population: bool,
    allow_sensing: bool,
    entered: u64,
    left: u64,
}

impl Environment {
    pub fn new(arms: Vec<ArmModel>, base_seed: u64, repetition: u32) -> Result<Self, EnvError> {
        if arms.len() < 2 {
            return Err(EnvError::TooFewArms(arms.len()));
        }
        let arm_rngs = (0..arms.len() as u32)
            .map(|i| stream_rng(base_seed, repetition, Stream::ArmRewards(i + 1)))
            .collect();
        Ok(Environment {
            arms,
            round: 0,
            active: BTreeMap::new(),
            departed: BTreeSet::new(),
            arm_rngs,
            event_rng: stream_rng(base_seed, repetition, Stream::Events),
            relaxed_population: false,
            allow_sensing: true,
            entered: 0,
            left: 0,
        })
    }

    /// Allow more active players than arms (`N_t > K`).
    pub fn with_relaxed_population(mut self, relaxed: bool) -> Self {
        self.relaxed_population = relaxed;
        self
    }

    /// Forbid `Sense`/`SensePlay` actions.
    pub fn with_sensing(mut self, allow: bool) -> Self {
        self.allow_sensing = allow;
        self
    }

    pub fn k(&self) -> u32 {
        self.arms.len() as u32
    }

    /// Global clock: number of completed rounds.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, player: PlayerId) -> bool {
        self.active.contains_key(&player)
    }

    pub fn active_players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.active.keys().copied()
    }

    pub fn mean(&self, arm: ArmId) -> f64 {
        self.arms[arm.index()].mean()
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.mean()).collect()
    }

    /// Total players that entered and left so far (`e`, `l`).
    pub fn churn_counts(&self) -> (u64, u64) {
        (self.entered, self.left)
    }

    pub fn enter_player(&mut self, player: PlayerId) -> Result<(), EnvError> {
        if self.active.contains_key(&player) {
            return Err(EnvError::AlreadyActive(player));
        }
        if !self.relaxed_population && self.active.len() >= self.arms.len() {
            return Err(EnvError::PopulationCap(self.k()));
        }
        self.active.insert(player, self.round);
        self.entered += 1;
        Ok(())
    }

    pub fn leave_player(&mut self, player: PlayerId) -> Result<(), EnvError> {
        if self.active.remove(&player).is_none() {
            return Err(EnvError::InactivePlayer(player));
        }
        self.departed.insert(player);
        self.left += 1;
        Ok(())
    }

    /// Remove one active player chosen uniformly at random.
    pub fn leave_random_active(&mut self) -> Result<PlayerId, EnvError> {
        if self.active.is_empty() {
            return Err(EnvError::NoActivePlayers);
        }
        let idx = self.event_rng.gen_range(0..self.active.len());
        let player = *self.active.keys().nth(idx).expect("index in range");
        self.leave_player(player)?;
        Ok(player)
    }

    /// Apply every event scheduled for the current clock value. Events must
    /// not be stale (scheduled before the current round).
    pub fn apply_population_events(
        &mut self,
        events: &[PopulationEvent],
    ) -> Result<Vec<PopulationChange>, EnvError> {
        let mut changes = Vec::new();
        for ev in events {
            if ev.round < self.round {
                return Err(EnvError::StaleEvent {
                    scheduled: ev.round,
                    clock: self.round,
                });
            }
            if ev.round > self.round {
                continue;
            }
            match &ev.kind {
                EventKind::Enter(p) => {
                    self.enter_player(*p)?;
                    changes.push(PopulationChange::Entered(*p));
                }
                EventKind::Leave(LeaveTarget::Player(p)) => {
                    self.leave_player(*p)?;
                    changes.push(PopulationChange::Left(*p));
                }
                EventKind::Leave(LeaveTarget::RandomActive) => {
                    let p = self.leave_random_active()?;
                    changes.push(PopulationChange::Left(p));
                }
            }
        }
        Ok(changes)
    }

    /// Resolve one round of simultaneous actions.
    ///
    /// Transmitters on an arm are the `Play` players plus the `SensePlay`
    /// players that sensed it free. Exactly one transmitter receives a
    /// reward sample; two or more all collide and receive zero. Sensing
    /// hears only `Play` transmissions, so two `SensePlay` players starting
    /// simultaneously on a free arm both transmit and collide.
    pub fn resolve_round(
        &mut self,
        actions: &BTreeMap<PlayerId, Action>,
    ) -> Result<BTreeMap<PlayerId, RoundOutcome>, EnvError> {
        let k = self.k();
        for (player, action) in actions {
            if !self.active.contains_key(player) {
                return Err(EnvError::InactivePlayer(*player));
            }
            match action {
                Action::Absent => return Err(EnvError::AbsentAction(*player)),
                Action::Sense(a) | Action::SensePlay(a) => {
                    if !self.allow_sensing {
                        return Err(EnvError::SensingDisabled);
                    }
                    ArmId::new(a.get(), k)?;
                }
                Action::Play(a) => {
                    ArmId::new(a.get(), k)?;
                }
            }
        }

        let mut play_count = vec![0u32; k as usize];
        for action in actions.values() {
            if let Action::Play(a) = action {
                play_count[a.index()] += 1;
            }
        }

        // Who ends up transmitting, after the sensing gate.
        let mut transmit_count = play_count.clone();
        let mut transmits: BTreeMap<PlayerId, ArmId> = BTreeMap::new();
        let mut sensed: BTreeMap<PlayerId, bool> = BTreeMap::new();
        for (player, action) in actions {
            match action {
                Action::Play(a) => {
                    transmits.insert(*player, *a);
                }
                Action::SensePlay(a) => {
                    let busy = play_count[a.index()] > 0;
                    sensed.insert(*player, busy);
                    if !busy {
                        transmits.insert(*player, *a);
                        transmit_count[a.index()] += 1;
                    }
                }
                Action::Sense(a) => {
                    sensed.insert(*player, play_count[a.index()] > 0);
                }
                Action::Absent => unreachable!("rejected above"),
            }
        }

        let mut outcomes = BTreeMap::new();
        for (player, action) in actions {
            let outcome = match action {
                Action::Sense(a) => RoundOutcome {
                    arm: Some(*a),
                    reward: 0.0,
                    collided: false,
                    sensed_busy: sensed[player],
                },
                Action::SensePlay(a) if sensed[player] => RoundOutcome {
                    arm: Some(*a),
                    reward: 0.0,
                    collided: false,
                    sensed_busy: true,
                },
                Action::Play(a) | Action::SensePlay(a) => {
                    let collided = transmit_count[a.index()] >= 2;
                    let reward = if collided {
                        0.0
                    } else {
                        self.arms[a.index()].sample(&mut self.arm_rngs[a.index()])
                    };
                    RoundOutcome {
                        arm: Some(*a),
                        reward,
                        collided,
                        sensed_busy: false,
                    }
                }
                Action::Absent => unreachable!("rejected above"),
            };
            outcomes.insert(*player, outcome);
        }

        self.round += 1;
        Ok(outcomes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env_with_means(means: &[f64]) -> Environment {
        let arms = means
            .iter()
            .map(|&m| ArmModel::bernoulli(m).unwrap())
            .collect();
        Environment::new(arms, 99, 0).unwrap()
    }

    fn enter_all(env: &mut Environment, n: u32) {
        for i in 1..=n {
            env.enter_player(PlayerId(i)).unwrap();
        }
    }

    fn arm(v: u32) -> ArmId {
        ArmId::from_raw(v)
    }

    #[test]
    fn two_players_same_arm_both_collide() {
        let mut env = env_with_means(&[0.5; 6]);
        enter_all(&mut env, 2);
        let actions: BTreeMap<_, _> = [
            (PlayerId(1), Action::Play(arm(5))),
            (PlayerId(2), Action::Play(arm(5))),
        ]
        .into();
        let out = env.resolve_round(&actions).unwrap();
        for o in out.values() {
            assert!(o.collided);
            assert_eq!(o.reward, 0.0);
        }
        assert_eq!(env.round(), 1);
    }

    #[test]
    fn solo_play_on_sure_arm_pays_one() {
        let mut env = env_with_means(&[0.3, 1.0]);
        enter_all(&mut env, 1);
        let actions: BTreeMap<_, _> = [(PlayerId(1), Action::Play(arm(2)))].into();
        let out = env.resolve_round(&actions).unwrap();
        let o = &out[&PlayerId(1)];
        assert!(!o.collided);
        assert_eq!(o.reward, 1.0);
        assert!(!o.sensed_busy);
    }

    #[test]
    fn senseplay_defers_to_locked_transmitter() {
        // A transmits on arm 3, B sense-plays it: A keeps her reward
        // stream, B backs off with zero reward and no collision.
        let mut env = env_with_means(&[0.5, 0.5, 0.9, 0.5]);
        enter_all(&mut env, 2);
        let actions: BTreeMap<_, _> = [
            (PlayerId(1), Action::Play(arm(3))),
            (PlayerId(2), Action::SensePlay(arm(3))),
        ]
        .into();
        let out = env.resolve_round(&actions).unwrap();
        let a = &out[&PlayerId(1)];
        let b = &out[&PlayerId(2)];
        assert!(!a.collided && !a.sensed_busy);
        assert!(b.sensed_busy && !b.collided);
        assert_eq!(b.reward, 0.0);
    }

    #[test]
    fn simultaneous_senseplay_on_free_arm_collides() {
        let mut env = env_with_means(&[0.5; 4]);
        enter_all(&mut env, 2);
        let actions: BTreeMap<_, _> = [
            (PlayerId(1), Action::SensePlay(arm(2))),
            (PlayerId(2), Action::SensePlay(arm(2))),
        ]
        .into();
        let out = env.resolve_round(&actions).unwrap();
        for o in out.values() {
            assert!(!o.sensed_busy, "neither hears the other's sensing");
            assert!(o.collided);
            assert_eq!(o.reward, 0.0);
        }
    }

    #[test]
    fn pure_sense_never_transmits() {
        let mut env = env_with_means(&[0.5; 3]);
        enter_all(&mut env, 2);
        let actions: BTreeMap<_, _> = [
            (PlayerId(1), Action::Play(arm(1))),
            (PlayerId(2), Action::Sense(arm(1))),
        ]
        .into();
        let out = env.resolve_round(&actions).unwrap();
        assert!(!out[&PlayerId(1)].collided, "sensing is invisible");
        assert!(out[&PlayerId(2)].sensed_busy);
        assert_eq!(out[&PlayerId(2)].reward, 0.0);
    }

    #[test]
    fn error_paths() {
        let mut env = env_with_means(&[0.5, 0.5]);
        enter_all(&mut env, 2);

        let bad: BTreeMap<_, _> = [(PlayerId(9), Action::Play(arm(1)))].into();
        assert_eq!(
            env.resolve_round(&bad).unwrap_err(),
            EnvError::InactivePlayer(PlayerId(9))
        );

        let oob: BTreeMap<_, _> = [(PlayerId(1), Action::Play(arm(3)))].into();
        assert_eq!(
            env.resolve_round(&oob).unwrap_err(),
            EnvError::ArmOutOfRange { arm: 3, k: 2 }
        );

        let absent: BTreeMap<_, _> = [(PlayerId(1), Action::Absent)].into();
        assert_eq!(
            env.resolve_round(&absent).unwrap_err(),
            EnvError::AbsentAction(PlayerId(1))
        );

        assert_eq!(
            env.enter_player(PlayerId(3)).unwrap_err(),
            EnvError::PopulationCap(2)
        );
        assert_eq!(
            env.enter_player(PlayerId(1)).unwrap_err(),
            EnvError::AlreadyActive(PlayerId(1))
        );
        assert_eq!(
            env.leave_player(PlayerId(7)).unwrap_err(),
            EnvError::InactivePlayer(PlayerId(7))
        );

        let mut strict = env_with_means(&[0.5, 0.5]).with_sensing(false);
        enter_all(&mut strict, 1);
        let sense: BTreeMap<_, _> = [(PlayerId(1), Action::SensePlay(arm(1)))].into();
        assert_eq!(
            strict.resolve_round(&sense).unwrap_err(),
            EnvError::SensingDisabled
        );
    }

    #[test]
    fn relaxed_population_allows_more_players_than_arms() {
        let mut env = env_with_means(&[0.5, 0.5]).with_relaxed_population(true);
        enter_all(&mut env, 3);
        assert_eq!(env.n_active(), 3);
    }

    #[test]
    fn population_events_apply_in_order() {
        let mut env = env_with_means(&[0.5; 4]);
        enter_all(&mut env, 1);
        let events = [
            PopulationEvent {
                round: 2,
                kind: EventKind::Enter(PlayerId(2)),
            },
            PopulationEvent {
                round: 5,
                kind: EventKind::Leave(LeaveTarget::Player(PlayerId(1))),
            },
        ];
        let mut n_active = Vec::new();
        for _ in 0..6 {
            let due: Vec<_> = events
                .iter()
                .filter(|e| e.round == env.round())
                .cloned()
                .collect();
            env.apply_population_events(&due).unwrap();
            n_active.push(env.n_active());
            let actions: BTreeMap<_, _> = env
                .active_players()
                .map(|p| (p, Action::Play(arm(p.0))))
                .collect();
            env.resolve_round(&actions).unwrap();
        }
        assert_eq!(n_active, vec![1, 1, 2, 2, 2, 1]);
        assert_eq!(env.churn_counts(), (2, 1));
    }

    #[test]
    fn stale_event_is_rejected() {
        let mut env = env_with_means(&[0.5; 4]);
        enter_all(&mut env, 1);
        let actions: BTreeMap<_, _> = [(PlayerId(1), Action::Play(arm(1)))].into();
        env.resolve_round(&actions).unwrap();
        let events = vec![PopulationEvent {
            round: 0,
            kind: EventKind::Enter(PlayerId(2)),
        }];
        assert!(matches!(
            env.apply_population_events(&events).unwrap_err(),
            EnvError::StaleEvent { .. }
        ));
    }

    #[test]
    fn random_leave_is_seed_deterministic() {
        let pick = |seed| {
            let mut env = env_with_means(&[0.5; 5]);
            if seed > 0 {
                // reseed by rebuilding
                let arms = (0..5).map(|_| ArmModel::bernoulli(0.5).unwrap()).collect();
                env = Environment::new(arms, seed, 0).unwrap();
            }
            enter_all(&mut env, 4);
            env.leave_random_active().unwrap()
        };
        assert_eq!(pick(1), pick(1));
        assert_eq!(pick(2), pick(2));
    }

    #[test]
    fn empirical_mean_tracks_arm_mean() {
        // M solo plays land within 3*sqrt(mu(1-mu)/M) of the mean.
        let mut env = env_with_means(&[0.64, 0.2]);
        enter_all(&mut env, 1);
        let m = 20_000u32;
        let mut total = 0.0;
        for _ in 0..m {
            let actions: BTreeMap<_, _> = [(PlayerId(1), Action::Play(arm(1)))].into();
            total += env.resolve_round(&actions).unwrap()[&PlayerId(1)].reward;
        }
        let mean = total / f64::from(m);
        let tol = 3.0 * (0.64f64 * 0.36 / f64::from(m)).sqrt();
        assert!((mean - 0.64).abs() <= tol, "mean {mean} tol {tol}");
    }

    #[test]
    fn eta_symmetry_exhaustive_small_instances() {
        // Over every action profile for K<=3 and up to 3 players, a player
        // collides iff at least two transmitters share her arm.
        for k in 2u32..=3 {
            for n in 1u32..=3 {
                if n > k {
                    continue;
                }
                // Each player's action encodes kind (play/senseplay/sense)
                // and arm, 3*k choices per player.
                let choices = 3 * k;
                let profiles = (choices as u64).pow(n);
                for code in 0..profiles {
                    let mut c = code;
                    let mut actions = BTreeMap::new();
                    for p in 1..=n {
                        let v = (c % u64::from(choices)) as u32;
                        c /= u64::from(choices);
                        let a = arm(v % k + 1);
                        let act = match v / k {
                            0 => Action::Play(a),
                            1 => Action::SensePlay(a),
                            _ => Action::Sense(a),
                        };
                        actions.insert(PlayerId(p), act);
                    }
                    let mut env = env_with_means(&vec![0.5; k as usize]);
                    enter_all(&mut env, n);
                    let out = env.resolve_round(&actions).unwrap();

                    // Recompute transmitters independently.
                    let mut played = vec![0u32; k as usize];
                    for act in actions.values() {
                        if let Action::Play(a) = act {
                            played[a.index()] += 1;
                        }
                    }
                    let mut tx = vec![0u32; k as usize];
                    for act in actions.values() {
                        match act {
                            Action::Play(a) => tx[a.index()] += 1,
                            Action::SensePlay(a) if played[a.index()] == 0 => {
                                tx[a.index()] += 1;
                            }
                            _ => {}
                        }
                    }
                    for (p, act) in &actions {
                        let o = &out[p];
                        let transmitted = o.transmitted(act);
                        let expect = transmitted && tx[act.arm().unwrap().index()] >= 2;
                        assert_eq!(o.collided, expect, "profile {code} k={k} n={n}");
                        if o.collided {
                            assert_eq!(o.reward, 0.0);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn identical_seeds_give_identical_traces(
            seed in 0u64..1_000,
            plan in proptest::collection::vec((1u32..=3, 1u32..=3), 1..40),
        ) {
            let trace = |seed: u64| {
                let arms: Vec<_> = [0.2, 0.5, 0.8]
                    .iter()
                    .map(|&m| ArmModel::bernoulli(m).unwrap())
                    .collect();
                let mut env = Environment::new(arms, seed, 0).unwrap();
                for i in 1..=3 {
                    env.enter_player(PlayerId(i)).unwrap();
                }
                let mut out = Vec::new();
                for (p, a) in &plan {
                    let actions: BTreeMap<_, _> =
                        [(PlayerId(*p), Action::Play(ArmId::from_raw(*a)))].into();
                    out.push(env.resolve_round(&actions).unwrap());
                }
                out
            };
            prop_assert_eq!(trace(seed), trace(seed));
        }

        #[test]
        fn conservation_reward_bearing_equals_solo_transmitters(
            arms_played in proptest::collection::vec(1u32..=4, 1..=4),
        ) {
            let mut env = env_with_means(&[1.0; 4]);
            let n = arms_played.len() as u32;
            enter_all(&mut env, n);
            let actions: BTreeMap<_, _> = arms_played
                .iter()
                .enumerate()
                .map(|(i, &a)| (PlayerId(i as u32 + 1), Action::Play(arm(a))))
                .collect();
            let out = env.resolve_round(&actions).unwrap();
            let mut counts = [0u32; 4];
            for &a in &arms_played {
                counts[(a - 1) as usize] += 1;
            }
            let solo_arms = counts.iter().filter(|&&c| c == 1).count();
            let rewarded = out.values().filter(|o| o.reward > 0.0).count();
            prop_assert_eq!(rewarded, solo_arms);
        }
    }
}
