//! Scenario execution.
//!
//! One repetition owns one environment plus one policy per player and is
//! strictly sequential; repetitions are independent and run in parallel.
//! Waiting players (epoch-based policies parked until the next boundary)
//! stay out of the action map but still count toward `N_t`, so their idle
//! rounds show up as regret.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::env::{Action, ArmModel, EnvError, Environment, PlayerId, PopulationChange};
use crate::metrics::{
    self, aggregate, AggregateSeries, EventMark, MetricsError, OracleTable, RoundLedger, RunSeries,
};
use crate::policy::{Algorithm, PlayerPolicy, PolicyParams};
use crate::scenario::{ConfigError, ScenarioSpec};
use crate::seed::{stream_seed, Stream};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("comparison needs at least one scenario")]
    EmptyComparison,
    #[error("scenario {0} does not share the comparison environment")]
    MismatchedEnvironment(String),
}

/// Read-only view of one resolved round, for test instrumentation.
pub struct RoundView<'a> {
    /// Clock value before the round (rounds completed so far).
    pub clock: u64,
    pub ledger: &'a RoundLedger,
    pub policies: &'a BTreeMap<PlayerId, PlayerPolicy>,
}

/// All repetitions of one scenario plus their aggregate.
#[derive(Debug, Clone)]
pub struct ScenarioResults {
    pub spec: ScenarioSpec,
    pub params: PolicyParams,
    pub seeds: Vec<u64>,
    pub per_rep: Vec<RunSeries>,
    pub aggregate: AggregateSeries,
}

/// Run a single repetition, invoking `observer` after every round.
pub fn run_one<F: FnMut(RoundView<'_>)>(
    spec: &ScenarioSpec,
    repetition: u32,
    mut observer: F,
) -> Result<RunSeries, RunError> {
    spec.validate()?;
    let params = spec.resolve_params()?;
    let events = spec.expand_events()?;
    let arms: Vec<ArmModel> = spec
        .means
        .iter()
        .map(|&m| ArmModel::new(m, spec.reward_kind))
        .collect::<Result<_, _>>()?;
    let table = OracleTable::new(&spec.means);

    let mut env = Environment::new(arms, spec.base_seed, repetition)?
        .with_relaxed_population(spec.relaxed_population)
        .with_sensing(true);
    let mut policies: BTreeMap<PlayerId, PlayerPolicy> = BTreeMap::new();
    for i in 1..=spec.initial_players {
        let player = PlayerId(i);
        env.enter_player(player)?;
        policies.insert(player, new_policy(spec, &params, player, 0, repetition));
    }

    let mut series = SeriesRecorder::new(spec.horizon, spec.record_stride);
    let mut event_cursor = 0usize;

    for clock in 0..spec.horizon {
        // Population changes scheduled for this clock value.
        let due_end = events[event_cursor..]
            .iter()
            .position(|e| e.round != clock)
            .map(|p| event_cursor + p)
            .unwrap_or(events.len());
        if due_end > event_cursor {
            let changes = env.apply_population_events(&events[event_cursor..due_end])?;
            for change in changes {
                match change {
                    PopulationChange::Entered(p) => {
                        policies.insert(p, new_policy(spec, &params, p, clock, repetition));
                        series.mark(EventMark {
                            round: clock,
                            entered: true,
                            player: p.0,
                        });
                    }
                    PopulationChange::Left(p) => {
                        policies.remove(&p);
                        series.mark(EventMark {
                            round: clock,
                            entered: false,
                            player: p.0,
                        });
                    }
                }
            }
            event_cursor = due_end;
        }

        let n_active = env.n_active();
        let mut actions: BTreeMap<PlayerId, Action> = BTreeMap::new();
        for (player, policy) in policies.iter_mut() {
            let action = policy.act(clock);
            if action != Action::Absent {
                actions.insert(*player, action);
            }
        }
        let outcomes = env.resolve_round(&actions)?;
        for (player, outcome) in &outcomes {
            policies
                .get_mut(player)
                .expect("outcome for unknown player")
                .feedback(outcome);
        }

        let ledger = metrics::round_ledger(clock, n_active, &actions, &outcomes, &table);
        series.push(&ledger);
        observer(RoundView {
            clock,
            ledger: &ledger,
            policies: &policies,
        });
    }

    Ok(series.finish())
}

fn new_policy(
    spec: &ScenarioSpec,
    params: &PolicyParams,
    player: PlayerId,
    entry_clock: u64,
    repetition: u32,
) -> PlayerPolicy {
    let seed = stream_seed(spec.base_seed, repetition, Stream::Policy(player.0));
    PlayerPolicy::create(spec.algorithm, params, entry_clock, seed)
}

/// Run every repetition (seeds `base_seed + i` derive the streams) and
/// aggregate.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResults, RunError> {
    spec.validate()?;
    let params = spec.resolve_params()?;
    let per_rep: Vec<RunSeries> = (0..spec.repetitions)
        .into_par_iter()
        .map(|rep| run_one(spec, rep, |_| {}))
        .collect::<Result<_, _>>()?;
    let agg = aggregate(&per_rep)?;
    Ok(ScenarioResults {
        spec: spec.clone(),
        params,
        seeds: (0..spec.repetitions)
            .map(|rep| stream_seed(spec.base_seed, rep, Stream::Events))
            .collect(),
        per_rep,
        aggregate: agg,
    })
}

/// One row of a cross-algorithm comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub algorithm: String,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
    pub mean_final_collisions: f64,
    pub std_final_collisions: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>10} {:>14} {:>12} {:>16} {:>12}\n",
            "scenario",
            "algorithm",
            "regret(mean)",
            "regret(std)",
            "collisions(mean)",
            "collisions(std)"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<24} {:>10} {:>14.2} {:>12.2} {:>16.2} {:>12.2}\n",
                r.name,
                r.algorithm,
                r.mean_final_regret,
                r.std_final_regret,
                r.mean_final_collisions,
                r.std_final_collisions
            ));
        }
        out
    }
}

/// Run several scenarios side by side under common random numbers.
///
/// All specs must share the environment (arms, horizon, population
/// schedule, seeds); the per-arm reward streams are then identical across
/// algorithms, repetition by repetition.
pub fn compare(specs: &[ScenarioSpec]) -> Result<ComparisonTable, RunError> {
    let first = specs.first().ok_or(RunError::EmptyComparison)?;
    for spec in &specs[1..] {
        let shared = spec.k == first.k
            && spec.means == first.means
            && spec.horizon == first.horizon
            && spec.base_seed == first.base_seed
            && spec.repetitions == first.repetitions
            && spec.initial_players == first.initial_players
            && spec.events == first.events
            && spec.generator == first.generator;
        if !shared {
            return Err(RunError::MismatchedEnvironment(spec.name.clone()));
        }
    }
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let results = run_scenario(spec)?;
        rows.push(ComparisonRow {
            name: spec.name.clone(),
            algorithm: spec.algorithm.name().to_string(),
            mean_final_regret: results.aggregate.final_mean_regret(),
            std_final_regret: results.aggregate.final_std_regret(),
            mean_final_collisions: results.aggregate.final_mean_collisions(),
            std_final_collisions: results.aggregate.final_std_collisions(),
        });
    }
    Ok(ComparisonTable { rows })
}

/// Clone a spec with a different algorithm, for comparisons over a shared
/// environment.
pub fn with_algorithm(spec: &ScenarioSpec, algorithm: Algorithm) -> ScenarioSpec {
    let mut out = spec.clone();
    out.algorithm = algorithm;
    out.name = format!("{}[{}]", spec.name, algorithm.name());
    out
}

/// Streaming recorder: samples cumulative values every `stride` rounds and
/// always keeps the final round.
struct SeriesRecorder {
    horizon: u64,
    stride: u64,
    cum_regret: f64,
    cum_collisions: u64,
    series: RunSeries,
}

impl SeriesRecorder {
    fn new(horizon: u64, stride: u64) -> Self {
        let cap = (horizon / stride + 2) as usize;
        SeriesRecorder {
            horizon,
            stride,
            cum_regret: 0.0,
            cum_collisions: 0,
            series: RunSeries {
                rounds: Vec::with_capacity(cap),
                cum_regret: Vec::with_capacity(cap),
                cum_collisions: Vec::with_capacity(cap),
                n_active: Vec::with_capacity(cap),
                event_marks: Vec::new(),
            },
        }
    }

    fn mark(&mut self, mark: EventMark) {
        self.series.event_marks.push(mark);
    }

    fn push(&mut self, ledger: &RoundLedger) {
        self.cum_regret += ledger.regret();
        self.cum_collisions += ledger.collisions;
        let completed = ledger.round + 1;
        if completed.is_multiple_of(self.stride) || completed == self.horizon {
            self.series.rounds.push(completed);
            self.series.cum_regret.push(self.cum_regret);
            self.series.cum_collisions.push(self.cum_collisions);
            self.series.n_active.push(ledger.n_active);
        }
    }

    fn finish(self) -> RunSeries {
        self.series
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::TrekVariant;
    use crate::scenario::{EventKindSpec, EventSpec, Overrides, TargetSpec};

    fn quick_spec(algorithm: Algorithm) -> ScenarioSpec {
        ScenarioSpec {
            name: "quick".into(),
            k: 4,
            means: vec![0.1, 0.4, 0.7, 0.9],
            horizon: 400,
            algorithm,
            trek_variant: TrekVariant::Up,
            epsilon: 0.1,
            delta: 0.1,
            repetitions: 3,
            base_seed: 77,
            initial_players: 2,
            entry_mode: Default::default(),
            relaxed_population: false,
            reward_kind: Default::default(),
            record_stride: 1,
            overrides: Overrides {
                t0: Some(100),
                t0_dts: Some(120),
                t0_mc: Some(100),
                t_ep: Some(200),
                t_l: Some(40),
                c_m: Some(5),
                churn_bound: None,
            },
            events: vec![],
            generator: None,
        }
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        for algorithm in [
            Algorithm::St,
            Algorithm::Dt,
            Algorithm::Dts,
            Algorithm::Mc,
            Algorithm::Dmc,
        ] {
            let spec = quick_spec(algorithm);
            let a = run_one(&spec, 0, |_| {}).unwrap();
            let b = run_one(&spec, 0, |_| {}).unwrap();
            assert_eq!(a, b, "{algorithm:?}");
            let c = run_one(&spec, 1, |_| {}).unwrap();
            assert_ne!(a, c, "different repetitions explore differently");
        }
    }

    #[test]
    fn series_are_non_decreasing_and_gridded() {
        let spec = quick_spec(Algorithm::St);
        let s = run_one(&spec, 0, |_| {}).unwrap();
        assert_eq!(s.rounds.len(), 400);
        assert!(s.cum_regret.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(s.cum_collisions.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stride_keeps_final_round() {
        let mut spec = quick_spec(Algorithm::St);
        spec.record_stride = 64;
        let s = run_one(&spec, 0, |_| {}).unwrap();
        assert_eq!(*s.rounds.last().unwrap(), 400);
        assert_eq!(s.rounds[0], 64);
    }

    #[test]
    fn population_schedule_reaches_metrics() {
        let mut spec = quick_spec(Algorithm::Dts);
        spec.initial_players = 1;
        spec.events = vec![
            EventSpec {
                round: 150,
                kind: EventKindSpec::Enter,
                target: None,
            },
            EventSpec {
                round: 300,
                kind: EventKindSpec::Leave,
                target: Some(TargetSpec::Fixed(1)),
            },
        ];
        let s = run_one(&spec, 0, |_| {}).unwrap();
        assert_eq!(s.n_active[100], 1);
        assert_eq!(s.n_active[200], 2);
        assert_eq!(s.n_active[350], 1);
        assert_eq!(s.event_marks.len(), 2);
        assert!(s.event_marks[0].entered && s.event_marks[0].round == 150);
        assert!(!s.event_marks[1].entered && s.event_marks[1].round == 300);
    }

    #[test]
    fn aggregate_over_reps_matches_manual_fold() {
        let spec = quick_spec(Algorithm::Mc);
        let results = run_scenario(&spec).unwrap();
        assert_eq!(results.per_rep.len(), 3);
        let manual = aggregate(&results.per_rep).unwrap();
        assert_eq!(results.aggregate, manual);
    }

    #[test]
    fn compare_same_algorithm_twice_gives_identical_rows() {
        let spec = quick_spec(Algorithm::St);
        let twin = with_algorithm(&spec, Algorithm::St);
        let table = compare(&[spec, twin]).unwrap();
        assert_eq!(
            (
                table.rows[0].mean_final_regret,
                table.rows[0].mean_final_collisions
            ),
            (
                table.rows[1].mean_final_regret,
                table.rows[1].mean_final_collisions
            )
        );
    }

    #[test]
    fn compare_rejects_mismatched_environments() {
        let a = quick_spec(Algorithm::St);
        let mut b = with_algorithm(&a, Algorithm::Mc);
        b.horizon = 500;
        assert!(matches!(
            compare(&[a, b]),
            Err(RunError::MismatchedEnvironment(_))
        ));
    }

    #[test]
    fn common_random_numbers_share_reward_streams() {
        // Two algorithms, same repetition: the k-th reward draw of each
        // arm must coincide. Drive two environments directly with
        // different play patterns and check the draws line up.
        use std::collections::BTreeMap as Map;
        let arms = |seed| {
            Environment::new(
                vec![
                    ArmModel::bernoulli(0.3).unwrap(),
                    ArmModel::bernoulli(0.6).unwrap(),
                ],
                seed,
                4,
            )
            .unwrap()
        };
        let mut e1 = arms(9);
        let mut e2 = arms(9);
        e1.enter_player(PlayerId(1)).unwrap();
        e2.enter_player(PlayerId(1)).unwrap();
        e2.enter_player(PlayerId(2)).unwrap();

        // e1: player 1 plays arm 1 six times.
        let mut draws1 = Vec::new();
        for _ in 0..6 {
            let acts: Map<_, _> = [(
                PlayerId(1),
                Action::Play(crate::env::ArmId::new(1, 2).unwrap()),
            )]
            .into();
            draws1.push(e1.resolve_round(&acts).unwrap()[&PlayerId(1)].reward);
        }
        // e2: interleaves arm 1 (player 1) with arm 2 (player 2).
        let mut draws2 = Vec::new();
        for _ in 0..6 {
            let acts: Map<_, _> = [
                (
                    PlayerId(1),
                    Action::Play(crate::env::ArmId::new(1, 2).unwrap()),
                ),
                (
                    PlayerId(2),
                    Action::Play(crate::env::ArmId::new(2, 2).unwrap()),
                ),
            ]
            .into();
            draws2.push(e2.resolve_round(&acts).unwrap()[&PlayerId(1)].reward);
        }
        assert_eq!(
            draws1, draws2,
            "arm 1's stream is independent of arm 2 usage"
        );
    }
}
