//! Closed-form phase lengths and thresholds.
//!
//! Single source of truth for every duration the policies and tests use:
//! random-hopping and sequential-hopping lengths, trekking bounds for both
//! variants, epoch length, the sensing variant's learning/locking periods,
//! the musical-chairs learning length, and the per-arm sample count needed
//! for a reliable ranking.
//!
//! All logarithms are natural. Every function returns a positive integer
//! round count: the real-valued formula is evaluated in `f64` and ceiled
//! once at the end (composite formulas that contain an inner ceiling keep
//! it, since that term is already an integer).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("need K > 1, got {0}")]
    ArmCount(u32),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error("player count must be >= 1, got {0}")]
    PlayerCount(u32),
    #[error("churn bound must be >= 1, got {0}")]
    ChurnBound(u64),
    #[error("horizon must be >= 1, got {0}")]
    Horizon(u64),
}

fn check_k(k: u32) -> Result<(), PhaseError> {
    if k < 2 {
        return Err(PhaseError::ArmCount(k));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<(), PhaseError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PhaseError::Delta(delta));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<(), PhaseError> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(PhaseError::Epsilon(epsilon));
    }
    Ok(())
}

fn ceil_rounds(x: f64) -> u64 {
    let c = x.ceil();
    if c < 1.0 {
        1
    } else {
        c as u64
    }
}

/// Rounds of random hopping after which all players hold distinct arms with
/// probability at least `1 - delta`:
/// `ceil(ln(delta/K) / ln(1 - 1/(4K)))`.
pub fn t_rh(k: u32, delta: f64) -> Result<u64, PhaseError> {
    check_k(k)?;
    check_delta(delta)?;
    let kf = f64::from(k);
    Ok(ceil_rounds(
        (delta / kf).ln() / (1.0 - 1.0 / (4.0 * kf)).ln(),
    ))
}

/// Sequential-hopping length for an epsilon-correct ranking:
/// `(2K/eps^2) * ln(4KN/delta)`.
pub fn t_sh(k: u32, n: u32, epsilon: f64, delta: f64) -> Result<u64, PhaseError> {
    check_k(k)?;
    check_delta(delta)?;
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(PhaseError::PlayerCount(n));
    }
    let (kf, nf) = (f64::from(k), f64::from(n));
    Ok(ceil_rounds(
        2.0 * kf / (epsilon * epsilon) * (4.0 * kf * nf / delta).ln(),
    ))
}

/// Learning length for the static trekking policy, with the player count
/// replaced by `K` so it depends only on `K` and `delta`:
/// `t_rh(K, delta/2) + (2K/eps^2) * ln(4K^2/delta)`.
pub fn t0_st(k: u32, epsilon: f64, delta: f64) -> Result<u64, PhaseError> {
    check_epsilon(epsilon)?;
    let rh = t_rh(k, delta / 2.0)?;
    let kf = f64::from(k);
    let sh = 2.0 * kf / (epsilon * epsilon) * (4.0 * kf * kf / delta).ln();
    Ok(rh + ceil_rounds(sh))
}

/// Settling bound for upward trekking: `(K^2 - (N-1)^2)/2 + 1`.
pub fn t_tr_up(k: u32, n: u32) -> Result<u64, PhaseError> {
    check_k(k)?;
    if n == 0 || n > k {
        return Err(PhaseError::PlayerCount(n));
    }
    let a = u64::from(k) * u64::from(k) - u64::from(n - 1) * u64::from(n - 1);
    Ok(a.div_ceil(2) + 1)
}

/// Settling bound for downward trekking: `(N-1)(K-1) + 1`.
pub fn t_tr_down(k: u32, n: u32) -> Result<u64, PhaseError> {
    check_k(k)?;
    if n == 0 || n > k {
        return Err(PhaseError::PlayerCount(n));
    }
    Ok(u64::from(n - 1) * u64::from(k - 1) + 1)
}

/// Musical-chairs learning length:
/// `max((16K/eps^2) ln(4K^2/delta), K^2 ln(4/delta)/0.02)`.
pub fn t0_mc(k: u32, epsilon: f64, delta: f64) -> Result<u64, PhaseError> {
    check_k(k)?;
    check_delta(delta)?;
    check_epsilon(epsilon)?;
    let kf = f64::from(k);
    let a = 16.0 * kf / (epsilon * epsilon) * (4.0 * kf * kf / delta).ln();
    let b = kf * kf * (4.0 / delta).ln() / 0.02;
    Ok(ceil_rounds(a.max(b)))
}

/// Epoch length for the restarting dynamic policies:
/// `sqrt(T*K*(T0+Ttr)/(2x))`, floored below by `T0 + Ttr` so every epoch
/// contains a complete learning and trekking phase.
pub fn t_ep(horizon: u64, k: u32, t0: u64, t_tr: u64, x: u64) -> Result<u64, PhaseError> {
    check_k(k)?;
    if x == 0 {
        return Err(PhaseError::ChurnBound(x));
    }
    if horizon == 0 {
        return Err(PhaseError::Horizon(horizon));
    }
    let raw = (horizon as f64 * f64::from(k) * (t0 + t_tr) as f64 / (2.0 * x as f64)).sqrt();
    Ok(ceil_rounds(raw).max(t0 + t_tr))
}

/// Learning length for the sensing variant, widened for up to `x` extra
/// players:
/// `ceil(ln(delta/(2(K+x))) / ln(1 - 1/(4K))) + (2K/eps^2) ln(4K(K+x)/delta)`.
pub fn t0_dts(k: u32, x: u64, epsilon: f64, delta: f64) -> Result<u64, PhaseError> {
    check_k(k)?;
    check_delta(delta)?;
    check_epsilon(epsilon)?;
    let kf = f64::from(k);
    let pool = kf + x as f64;
    let rh = ceil_rounds((delta / (2.0 * pool)).ln() / (1.0 - 1.0 / (4.0 * kf)).ln());
    let sh = 2.0 * kf / (epsilon * epsilon) * (4.0 * kf * pool / delta).ln();
    Ok(rh + ceil_rounds(sh))
}

/// Worst-case length of one continuous-trekking excursion:
/// `(K/2)^2 + K/2`.
pub fn t_trek_cycle(k: u32) -> Result<u64, PhaseError> {
    check_k(k)?;
    let kf = f64::from(k);
    Ok(ceil_rounds(kf * kf / 4.0 + kf / 2.0))
}

/// Locking period between excursions in the sensing variant:
/// `sqrt(T * t_trek_cycle(K) / x)`.
pub fn t_l(horizon: u64, k: u32, x: u64) -> Result<u64, PhaseError> {
    if x == 0 {
        return Err(PhaseError::ChurnBound(x));
    }
    if horizon == 0 {
        return Err(PhaseError::Horizon(horizon));
    }
    let cycle = t_trek_cycle(k)?;
    Ok(ceil_rounds(
        (horizon as f64 * cycle as f64 / x as f64).sqrt(),
    ))
}

/// Per-arm observation count sufficient for an epsilon-correct ranking:
/// `(2/eps^2) * ln(4KN/delta)`.
pub fn c_m(k: u32, n: u32, epsilon: f64, delta: f64) -> Result<u64, PhaseError> {
    check_k(k)?;
    check_delta(delta)?;
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(PhaseError::PlayerCount(n));
    }
    Ok(ceil_rounds(
        2.0 / (epsilon * epsilon) * (4.0 * f64::from(k) * f64::from(n) / delta).ln(),
    ))
}

/// Inputs for a full derived-constants table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorizonParams {
    pub k: u32,
    /// Player count, or `K` as the usual surrogate when unknown.
    pub n: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub horizon: u64,
    /// Bound on total players entering plus leaving.
    pub churn_bound: u64,
}

/// Every derived constant for one parameter set, for experiment logs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseTable {
    pub t_rh: u64,
    pub t_sh: u64,
    pub t0_st: u64,
    pub t_tr_up: u64,
    pub t_tr_down: u64,
    pub t0_mc: u64,
    pub t0_dts: u64,
    pub t_trek_cycle: u64,
    pub t_l: u64,
    pub t_ep: u64,
    pub c_m: u64,
}

impl PhaseTable {
    pub fn compute(p: &HorizonParams) -> Result<Self, PhaseError> {
        let t0 = t0_st(p.k, p.epsilon, p.delta)?;
        let tr_up = t_tr_up(p.k, p.n)?;
        Ok(PhaseTable {
            t_rh: t_rh(p.k, p.delta)?,
            t_sh: t_sh(p.k, p.n, p.epsilon, p.delta)?,
            t0_st: t0,
            t_tr_up: tr_up,
            t_tr_down: t_tr_down(p.k, p.n)?,
            t0_mc: t0_mc(p.k, p.epsilon, p.delta)?,
            t0_dts: t0_dts(p.k, p.churn_bound, p.epsilon, p.delta)?,
            t_trek_cycle: t_trek_cycle(p.k)?,
            t_l: t_l(p.horizon, p.k, p.churn_bound.max(1))?,
            t_ep: t_ep(p.horizon, p.k, t0, tr_up, p.churn_bound.max(1))?,
            c_m: c_m(p.k, p.n, p.epsilon, p.delta)?,
        })
    }
}
