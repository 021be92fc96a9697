//! Experiment runner CLI.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpmab_core::output::{self, OutputFormat};
use mpmab_core::phase::{HorizonParams, PhaseTable};
use mpmab_core::policy::Algorithm;
use mpmab_core::runner;
use mpmab_core::scenario::ScenarioSpec;
use mpmab_core::verify;

#[derive(Parser)]
#[command(
    name = "mpmab",
    about = "Multi-player bandit simulations: trekking and musical-chairs policies on a collision channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and write CSV/JSON results.
    Run(RunArgs),
    /// Run several scenarios (or one scenario across algorithms) under
    /// common random numbers and print a comparison table.
    Compare(CompareArgs),
    /// Print every derived phase constant for a parameter set.
    PhaseMath(PhaseMathArgs),
    /// Exhaustively audit trekking settlement on small instances.
    VerifyTrekking(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (TOML).
    config: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's repetition count.
    #[arg(long)]
    reps: Option<u32>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Output format: csv, json, or both.
    #[arg(long, default_value = "both")]
    format: String,
    /// Also write one CSV per repetition.
    #[arg(long)]
    emit_reps: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario configs; a single config may be fanned out with
    /// --algorithms.
    configs: Vec<PathBuf>,
    /// Comma-separated algorithms (st,dt,dts,mc,dmc) applied to the first
    /// config.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Override the shared base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the shared repetition count.
    #[arg(long)]
    reps: Option<u32>,
    /// Optional directory for a comparison CSV.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseMathArgs {
    #[arg(long)]
    k: u32,
    /// Player count; defaults to K.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 500_000)]
    horizon: u64,
    /// Bound on players entering plus leaving.
    #[arg(long, default_value_t = 1)]
    churn: u64,
    /// Emit JSON instead of the plain table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest arm count to audit (every K from 2 up).
    #[arg(long, default_value_t = 6)]
    max_k: u32,
}

fn parse_algorithm(name: &str) -> Option<Algorithm> {
    match name {
        "st" => Some(Algorithm::St),
        "dt" => Some(Algorithm::Dt),
        "dts" => Some(Algorithm::Dts),
        "mc" => Some(Algorithm::Mc),
        "dmc" => Some(Algorithm::Dmc),
        _ => None,
    }
}

fn load_spec(path: &Path, seed: Option<u64>, reps: Option<u32>) -> Result<ScenarioSpec, String> {
    let mut spec = ScenarioSpec::from_path(path).map_err(|e| e.to_string())?;
    if let Some(s) = seed {
        spec.base_seed = s;
    }
    if let Some(r) = reps {
        spec.repetitions = r;
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn cmd_run(args: &RunArgs) -> Result<(), (u8, String)> {
    let format = OutputFormat::parse(&args.format)
        .ok_or_else(|| (1, format!("unknown format `{}`", args.format)))?;
    let spec = load_spec(&args.config, args.seed, args.reps).map_err(|e| (1, e))?;
    let results = runner::run_scenario(&spec).map_err(|e| (2, e.to_string()))?;
    let written = output::emit_outputs(&results, format, &args.out_dir, args.emit_reps)
        .map_err(|e| (2, e.to_string()))?;
    println!(
        "{}: {} reps over {} rounds  regret {:.2} (±{:.2})  collisions {:.1} (±{:.1})",
        spec.name,
        spec.repetitions,
        spec.horizon,
        results.aggregate.final_mean_regret(),
        results.aggregate.final_std_regret(),
        results.aggregate.final_mean_collisions(),
        results.aggregate.final_std_collisions(),
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), (u8, String)> {
    if args.configs.is_empty() {
        return Err((1, "compare needs at least one config".into()));
    }
    let mut specs = Vec::new();
    if !args.algorithms.is_empty() {
        if args.configs.len() != 1 {
            return Err((
                1,
                "--algorithms fans out a single config; pass exactly one".into(),
            ));
        }
        let base = load_spec(&args.configs[0], args.seed, args.reps).map_err(|e| (1, e))?;
        for name in &args.algorithms {
            let algorithm =
                parse_algorithm(name).ok_or_else(|| (1, format!("unknown algorithm `{name}`")))?;
            specs.push(runner::with_algorithm(&base, algorithm));
        }
    } else {
        for path in &args.configs {
            specs.push(load_spec(path, args.seed, args.reps).map_err(|e| (1, e))?);
        }
    }
    let table = runner::compare(&specs).map_err(|e| (2, e.to_string()))?;
    print!("{}", table.render());
    if let Some(dir) = &args.out_dir {
        let path = dir.join("comparison.csv");
        std::fs::create_dir_all(dir).map_err(|e| (2, e.to_string()))?;
        std::fs::write(&path, output::comparison_csv(&table)).map_err(|e| (2, e.to_string()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_phase_math(args: &PhaseMathArgs) -> Result<(), (u8, String)> {
    let params = HorizonParams {
        k: args.k,
        n: args.n.unwrap_or(args.k),
        epsilon: args.epsilon,
        delta: args.delta,
        horizon: args.horizon,
        churn_bound: args.churn,
    };
    let table = PhaseTable::compute(&params).map_err(|e| (1, e.to_string()))?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&table).map_err(|e| (2, e.to_string()))?
        );
    } else {
        println!("t_rh          {:>12}", table.t_rh);
        println!("t_sh          {:>12}", table.t_sh);
        println!("t0_st         {:>12}", table.t0_st);
        println!("t_tr_up       {:>12}", table.t_tr_up);
        println!("t_tr_down     {:>12}", table.t_tr_down);
        println!("t0_mc         {:>12}", table.t0_mc);
        println!("t0_dts        {:>12}", table.t0_dts);
        println!("t_trek_cycle  {:>12}", table.t_trek_cycle);
        println!("t_l           {:>12}", table.t_l);
        println!("t_ep          {:>12}", table.t_ep);
        println!("c_m           {:>12}", table.c_m);
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), (u8, String)> {
    if args.max_k < 2 {
        return Err((1, "--max-k must be at least 2".into()));
    }
    let report = verify::audit_trekking(args.max_k).map_err(|e| (2, e.to_string()))?;
    println!(
        "audited {} starting configurations up to K = {}",
        report.cases, args.max_k
    );
    for worst in &report.worst {
        println!(
            "K={} N={} {:<4?} worst settle {:>3} rounds (bound {:>3}) max collisions/player {}",
            worst.k,
            worst.n,
            worst.variant,
            worst.settle_rounds,
            worst.bound,
            worst.max_collisions_per_player
        );
    }
    if report.violations.is_empty() {
        println!("no violations");
        Ok(())
    } else {
        for v in &report.violations {
            println!(
                "VIOLATION: K={} N={} start={:?} {:?} settled {} bound {} final {:?}",
                v.k, v.n, v.start_ranks, v.variant, v.settle_rounds, v.bound, v.final_ranks
            );
        }
        Err((2, format!("{} violations", report.violations.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::PhaseMath(args) => cmd_phase_math(args),
        Command::VerifyTrekking(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
