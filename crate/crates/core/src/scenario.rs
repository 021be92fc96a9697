//! Scenario configuration.
//!
//! A scenario is a TOML document describing the environment (arms, horizon),
//! the algorithm and its parameter overrides, the population schedule
//! (explicit events or a churn generator), and the Monte Carlo setup
//! (repetitions, base seed). Presets live as files under `configs/`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EventKind, LeaveTarget, PlayerId, PopulationEvent, RewardKind};
use crate::phase::{self, PhaseError};
use crate::policy::{Algorithm, EntryMode, PolicyParams, TrekVariant};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("means length {got} does not match k = {k}")]
    MeansLength { got: usize, k: u32 },
    #[error("mean {0} outside [0, 1]")]
    MeanOutOfRange(f64),
    #[error("need k > 1, got {0}")]
    ArmCount(u32),
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("repetitions must be positive")]
    ZeroRepetitions,
    #[error("initial players {n} exceed k = {k} without relaxed population")]
    TooManyPlayers { n: u32, k: u32 },
    #[error("event at round {0} outside (0, horizon)")]
    EventRound(u64),
    #[error("events must be sorted by round (round {0} out of order)")]
    UnsortedEvents(u64),
    #[error("record stride must be positive")]
    ZeroStride,
    #[error("generator period must be positive (period_exponent too small?)")]
    ZeroPeriod,
    #[error("leave target {0} refers to an unknown fixed player")]
    UnknownTarget(u32),
    #[error("phase formula error: {0}")]
    Phase(#[from] PhaseError),
}

/// Overrides for the derived phase constants. Anything left unset falls
/// back to the closed-form value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Learning length for the static and epoch-restarting trekking
    /// policies.
    pub t0: Option<u64>,
    /// Learning length for the sensing policy (otherwise its own widened
    /// formula).
    pub t0_dts: Option<u64>,
    /// Learning length for musical chairs.
    pub t0_mc: Option<u64>,
    /// Epoch length (applies to both restarting policies).
    pub t_ep: Option<u64>,
    /// Locking period for the sensing policy.
    pub t_l: Option<u64>,
    /// Observation threshold for an arm to count as estimated.
    pub c_m: Option<u64>,
    /// Churn bound used by the formulas instead of the event count.
    pub churn_bound: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKindSpec {
    Enter,
    Leave,
}

/// Leave target in configs: `"random"` or a fixed player number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Fixed(u32),
    Named(NamedTarget),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedTarget {
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    /// Clock value (completed rounds) at which the event applies.
    pub round: u64,
    pub kind: EventKindSpec,
    /// Leave only; defaults to random.
    pub target: Option<TargetSpec>,
}

/// Synthesizes an alternating leave/enter schedule, one event every
/// `floor(horizon^period_exponent)` rounds (or every fixed `period`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub period: Option<u64>,
    pub period_exponent: Option<f64>,
    /// Whether the first event is a leave (the default) or an enter.
    #[serde(default = "default_true")]
    pub leave_first: bool,
}

fn default_true() -> bool {
    true
}

fn default_reps() -> u32 {
    1
}

fn default_players() -> u32 {
    1
}

fn default_stride() -> u64 {
    1
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub k: u32,
    pub means: Vec<f64>,
    pub horizon: u64,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub trek_variant: TrekVariant,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default = "default_reps")]
    pub repetitions: u32,
    pub base_seed: u64,
    #[serde(default = "default_players")]
    pub initial_players: u32,
    #[serde(default)]
    pub entry_mode: EntryMode,
    #[serde(default)]
    pub relaxed_population: bool,
    #[serde(default)]
    pub reward_kind: RewardKind,
    /// Record every n-th round in the output series (the final round is
    /// always recorded).
    #[serde(default = "default_stride")]
    pub record_stride: u64,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            source: Box::new(e),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k < 2 {
            return Err(ConfigError::ArmCount(self.k));
        }
        if self.means.len() != self.k as usize {
            return Err(ConfigError::MeansLength {
                got: self.means.len(),
                k: self.k,
            });
        }
        for &m in &self.means {
            if !(0.0..=1.0).contains(&m) || !m.is_finite() {
                return Err(ConfigError::MeanOutOfRange(m));
            }
        }
        if self.horizon == 0 {
            return Err(ConfigError::ZeroHorizon);
        }
        if self.repetitions == 0 {
            return Err(ConfigError::ZeroRepetitions);
        }
        if self.record_stride == 0 {
            return Err(ConfigError::ZeroStride);
        }
        if !self.relaxed_population && self.initial_players > self.k {
            return Err(ConfigError::TooManyPlayers {
                n: self.initial_players,
                k: self.k,
            });
        }
        let mut last = 0;
        for ev in &self.events {
            if ev.round == 0 || ev.round >= self.horizon {
                return Err(ConfigError::EventRound(ev.round));
            }
            if ev.round < last {
                return Err(ConfigError::UnsortedEvents(ev.round));
            }
            last = ev.round;
            if let Some(TargetSpec::Fixed(id)) = ev.target {
                if id == 0 || id > self.initial_players {
                    return Err(ConfigError::UnknownTarget(id));
                }
            }
        }
        if let Some(g) = &self.generator {
            if self.generator_period(g)? == 0 {
                return Err(ConfigError::ZeroPeriod);
            }
        }
        Ok(())
    }

    fn generator_period(&self, g: &GeneratorSpec) -> Result<u64, ConfigError> {
        if let Some(p) = g.period {
            return Ok(p);
        }
        let exp = g.period_exponent.unwrap_or(0.84);
        Ok((self.horizon as f64).powf(exp).floor() as u64)
    }

    /// Concrete population schedule: explicit events followed by the
    /// generator's synthetic ones. Entering players receive fresh ids
    /// above the initial population.
    pub fn expand_events(&self) -> Result<Vec<PopulationEvent>, ConfigError> {
        let mut next_id = self.initial_players + 1;
        let mut out = Vec::new();
        for ev in &self.events {
            let kind = match ev.kind {
                EventKindSpec::Enter => {
                    let id = PlayerId(next_id);
                    next_id += 1;
                    EventKind::Enter(id)
                }
                EventKindSpec::Leave => EventKind::Leave(match ev.target {
                    Some(TargetSpec::Fixed(id)) => LeaveTarget::Player(PlayerId(id)),
                    Some(TargetSpec::Named(NamedTarget::Random)) | None => {
                        LeaveTarget::RandomActive
                    }
                }),
            };
            out.push(PopulationEvent {
                round: ev.round,
                kind,
            });
        }
        if let Some(g) = &self.generator {
            let period = self.generator_period(g)?;
            let mut leave = g.leave_first;
            let mut round = period;
            while round < self.horizon {
                let kind = if leave {
                    EventKind::Leave(LeaveTarget::RandomActive)
                } else {
                    let id = PlayerId(next_id);
                    next_id += 1;
                    EventKind::Enter(id)
                };
                out.push(PopulationEvent { round, kind });
                leave = !leave;
                round += period;
            }
        }
        Ok(out)
    }

    /// Churn bound `x`: the override, or the number of scheduled events,
    /// floored at one so the square-root formulas stay defined.
    pub fn churn_bound(&self) -> Result<u64, ConfigError> {
        if let Some(x) = self.overrides.churn_bound {
            return Ok(x.max(1));
        }
        Ok((self.expand_events()?.len() as u64).max(1))
    }

    /// Resolve every phase constant this scenario needs, applying
    /// overrides where present.
    pub fn resolve_params(&self) -> Result<PolicyParams, ConfigError> {
        let x = self.churn_bound()?;
        let t0 = match self.overrides.t0 {
            Some(v) => v,
            None => phase::t0_st(self.k, self.epsilon, self.delta)?,
        };
        let t0_mc = match self.overrides.t0_mc {
            Some(v) => v,
            None => phase::t0_mc(self.k, self.epsilon, self.delta)?,
        };
        let t0_dts = match self.overrides.t0_dts {
            Some(v) => v,
            None => phase::t0_dts(self.k, x, self.epsilon, self.delta)?,
        };
        // Worst-case settling bound for the configured variant.
        let t_tr = match self.trek_variant {
            TrekVariant::Up => phase::t_tr_up(self.k, 1)?,
            TrekVariant::Down => phase::t_tr_down(self.k, self.k)?,
        };
        let t_ep = match self.overrides.t_ep {
            Some(v) => v,
            None => phase::t_ep(self.horizon, self.k, t0, t_tr, x)?,
        };
        let t_ep_mc = match self.overrides.t_ep {
            Some(v) => v,
            None => phase::t_ep(self.horizon, self.k, t0_mc, 0, x)?,
        };
        let t_l = match self.overrides.t_l {
            Some(v) => v,
            None => phase::t_l(self.horizon, self.k, x)?,
        };
        let obs_threshold = match self.overrides.c_m {
            Some(v) => v,
            None => phase::c_m(
                self.k,
                self.k + u32::try_from(x.min(u64::from(u32::MAX))).unwrap_or(u32::MAX),
                self.epsilon,
                self.delta,
            )?,
        };
        Ok(PolicyParams {
            k: self.k,
            t0,
            t_ep,
            t0_mc,
            t_ep_mc,
            t0_dts,
            t_l,
            obs_threshold,
            variant: self.trek_variant,
            entry_mode: self.entry_mode,
        })
    }
}
