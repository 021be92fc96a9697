//! Result files: plot-ready CSV plus a JSON summary.
//!
//! The aggregate CSV schema is one row per recorded round:
//! `round, mean_cum_regret, std_cum_regret, mean_avg_regret,
//! mean_cum_collisions, std_cum_collisions, n_active`.
//! Numbers are written with Rust's shortest-roundtrip float formatting, so
//! identical results produce byte-identical files on every platform.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{AggregateSeries, EventMark, RunSeries};
use crate::policy::PolicyParams;
use crate::runner::{ComparisonTable, ScenarioResults};
use crate::scenario::ScenarioSpec;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("nothing to write: empty results")]
    EmptyResults,
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Output format selection for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            "both" => Some(OutputFormat::Both),
            _ => None,
        }
    }

    fn wants_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn wants_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// Final-value summary persisted next to the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub algorithm: String,
    pub repetitions: u32,
    pub horizon: u64,
    pub final_mean_cum_regret: f64,
    pub final_std_cum_regret: f64,
    pub final_mean_cum_collisions: f64,
    pub final_std_cum_collisions: f64,
    /// Phase constants the run actually used, overrides applied.
    pub params: PolicyParams,
    pub event_marks: Vec<EventMark>,
    /// Per-repetition event-stream seeds, for audit.
    pub seeds: Vec<u64>,
    /// Echo of the scenario that produced this summary.
    pub spec: ScenarioSpec,
}

impl RunSummary {
    pub fn from_results(results: &ScenarioResults) -> Result<Self, OutputError> {
        let first = results.per_rep.first().ok_or(OutputError::EmptyResults)?;
        Ok(RunSummary {
            name: results.spec.name.clone(),
            algorithm: results.spec.algorithm.name().to_string(),
            repetitions: results.spec.repetitions,
            horizon: results.spec.horizon,
            final_mean_cum_regret: results.aggregate.final_mean_regret(),
            final_std_cum_regret: results.aggregate.final_std_regret(),
            final_mean_cum_collisions: results.aggregate.final_mean_collisions(),
            final_std_cum_collisions: results.aggregate.final_std_collisions(),
            params: results.params,
            event_marks: first.event_marks.clone(),
            seeds: results.seeds.clone(),
            spec: results.spec.clone(),
        })
    }
}

pub fn aggregate_csv(agg: &AggregateSeries) -> String {
    let mut out = String::with_capacity(agg.rounds.len() * 64);
    out.push_str(
        "round,mean_cum_regret,std_cum_regret,mean_avg_regret,mean_cum_collisions,std_cum_collisions,n_active\n",
    );
    for i in 0..agg.rounds.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            agg.rounds[i],
            agg.mean_cum_regret[i],
            agg.std_cum_regret[i],
            agg.mean_avg_regret[i],
            agg.mean_cum_collisions[i],
            agg.std_cum_collisions[i],
            agg.n_active[i]
        );
    }
    out
}

pub fn rep_csv(series: &RunSeries) -> String {
    let mut out = String::with_capacity(series.rounds.len() * 32);
    out.push_str("round,cum_regret,cum_collisions,n_active\n");
    for i in 0..series.rounds.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            series.rounds[i], series.cum_regret[i], series.cum_collisions[i], series.n_active[i]
        );
    }
    out
}

pub fn comparison_csv(table: &ComparisonTable) -> String {
    let mut out = String::new();
    out.push_str(
        "scenario,algorithm,mean_final_regret,std_final_regret,mean_final_collisions,std_final_collisions\n",
    );
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            r.algorithm,
            r.mean_final_regret,
            r.std_final_regret,
            r.mean_final_collisions,
            r.std_final_collisions
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| OutputError::Io {
            path: parent.display().to_string(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| OutputError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Persist a scenario's results. Fails before touching the filesystem when
/// the results are empty. Returns the written paths.
pub fn emit_outputs(
    results: &ScenarioResults,
    format: OutputFormat,
    out_dir: &Path,
    emit_reps: bool,
) -> Result<Vec<PathBuf>, OutputError> {
    if results.per_rep.is_empty() || results.aggregate.rounds.is_empty() {
        return Err(OutputError::EmptyResults);
    }
    let mut written = Vec::new();
    let stem = results.spec.name.replace([' ', '/'], "_");
    if format.wants_csv() {
        let path = out_dir.join(format!("{stem}.csv"));
        write_file(&path, &aggregate_csv(&results.aggregate))?;
        written.push(path);
        if emit_reps {
            for (i, series) in results.per_rep.iter().enumerate() {
                let path = out_dir.join(format!("{stem}_rep{i}.csv"));
                write_file(&path, &rep_csv(series))?;
                written.push(path);
            }
        }
    }
    if format.wants_json() {
        let summary = RunSummary::from_results(results)?;
        let path = out_dir.join(format!("{stem}.json"));
        write_file(&path, &serde_json::to_string_pretty(&summary)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Algorithm;
    use crate::runner::run_scenario;
    use crate::scenario::Overrides;

    fn tiny_results() -> ScenarioResults {
        let spec = ScenarioSpec {
            name: "tiny".into(),
            k: 3,
            means: vec![0.2, 0.5, 0.8],
            horizon: 50,
            algorithm: Algorithm::St,
            trek_variant: Default::default(),
            epsilon: 0.1,
            delta: 0.1,
            repetitions: 2,
            base_seed: 5,
            initial_players: 2,
            entry_mode: Default::default(),
            relaxed_population: false,
            reward_kind: Default::default(),
            record_stride: 1,
            overrides: Overrides {
                t0: Some(20),
                ..Default::default()
            },
            events: vec![],
            generator: None,
        };
        run_scenario(&spec).unwrap()
    }

    #[test]
    fn csv_has_schema_and_is_stable() {
        let results = tiny_results();
        let a = aggregate_csv(&results.aggregate);
        let b = aggregate_csv(&results.aggregate);
        assert_eq!(a, b);
        let header = a.lines().next().unwrap();
        assert_eq!(
            header,
            "round,mean_cum_regret,std_cum_regret,mean_avg_regret,mean_cum_collisions,std_cum_collisions,n_active"
        );
        assert_eq!(a.lines().count(), 51);
    }

    #[test]
    fn summary_round_trips_through_json() {
        let results = tiny_results();
        let summary = RunSummary::from_results(&results).unwrap();
        let text = serde_json::to_string(&summary).unwrap();
        let back: RunSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, summary);
    }

    #[test]
    fn empty_results_refuse_to_write() {
        let mut results = tiny_results();
        results.per_rep.clear();
        let dir = std::env::temp_dir().join("mpmab_empty_test");
        let err = emit_outputs(&results, OutputFormat::Both, &dir, false).unwrap_err();
        assert!(matches!(err, OutputError::EmptyResults));
        assert!(!dir.join("tiny.csv").exists());
    }

    #[test]
    fn files_land_in_out_dir() {
        let results = tiny_results();
        let dir = std::env::temp_dir().join(format!("mpmab_out_{}", std::process::id()));
        let written = emit_outputs(&results, OutputFormat::Both, &dir, true).unwrap();
        assert_eq!(written.len(), 4, "aggregate + 2 reps + summary");
        for path in &written {
            assert!(path.exists());
        }
        let _ = std::fs::remove_dir_all(&dir);
    }
}
