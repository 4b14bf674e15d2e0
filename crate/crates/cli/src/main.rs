use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use germ_core::analysis::bernstein_min_b;
use germ_core::experiment::{
    run_experiment, run_experiment_with_workers, AlgorithmSpec, CheckSpec, EngineSpec, ExperimentConfig,
    ExperimentResult,
};
use germ_core::oracle::{check_monotone, RiskCurve, Tolerance, Verdict};
use germ_core::problem::draw_sample;
use germ_core::rademacher::{exact_rademacher_multinomial, rbar_empirical, rbar_massart};
use germ_core::rng::stream_rng;
use germ_core::scenarios::{builtin_scenarios, find_scenario};
use germ_core::{GermError, Result};

/// Gated ERM experiments: exact and Monte Carlo risk curves, bound checks.
#[derive(Parser)]
#[command(name = "germ", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Threads for Monte Carlo and enumeration work; outputs do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Compute one risk curve and write it under --out.
    Curve {
        scenario: String,
        /// `erm` or `germ:<massart|empirical|bernstein|fixed=x|user=a/b>[:initial]`.
        #[arg(long)]
        algo: String,
        #[arg(long, value_enum)]
        engine: Engine,
        /// Required for the mc engine.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Largest n of an exact curve.
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 20_000)]
        replications: usize,
        /// Comma-separated checkpoint sizes for the mc engine.
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 50, 100, 200])]
        grid: Vec<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Flag adjacent increases in a curve CSV.
    CheckMonotone {
        csv: PathBuf,
        /// Absolute tolerance.
        #[arg(long, conflicts_with = "sigmas")]
        tol: Option<f64>,
        /// Tolerance in pooled standard errors (Monte Carlo curves).
        #[arg(long)]
        sigmas: Option<f64>,
    },
    /// Rademacher complexity of a scenario's loss class at sample size k.
    Rademacher {
        scenario: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        mode: RadMode,
        /// Required for the empirical mode.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Smallest Bernstein-condition constant of a scenario.
    Bernstein {
        scenario: String,
        #[arg(long)]
        beta: f64,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadMode {
    Empirical,
    Massart,
    Exact,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run { config, workers } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            report_run(&execute(&cfg, workers)?)
        }
        Command::Scenarios { action: ScenarioAction::List } => {
            for s in builtin_scenarios()? {
                let tags: Vec<&str> = s.tags.iter().map(|t| t.as_str()).collect();
                println!(
                    "{} m={} H={} tags={}",
                    s.id,
                    s.problem.num_outcomes(),
                    s.problem.class_size(),
                    tags.join(",")
                );
            }
            Ok(0)
        }
        Command::Curve { scenario, algo, engine, seed, out, n_max, replications, grid, workers } => {
            let engine = match engine {
                Engine::Exact => EngineSpec::Exact { n_max },
                Engine::Mc => EngineSpec::Mc { replications, seed, grid, n_max: None },
            };
            let cfg = ExperimentConfig {
                scenario: Some(scenario),
                problem_file: None,
                algorithm: algo.parse::<AlgorithmSpec>()?,
                engine,
                checks: vec![CheckSpec::Monotone { tolerance: None }],
                output_dir: out,
                dump_trajectory: false,
            };
            report_run(&execute(&cfg, workers)?)
        }
        Command::CheckMonotone { csv, tol, sigmas } => {
            let curve = RiskCurve::read_csv(std::fs::File::open(&csv)?)?;
            let tolerance = match (tol, sigmas) {
                (Some(t), _) => Tolerance::Absolute(t),
                (None, Some(c)) => Tolerance::PooledStdErr(c),
                (None, None) => Tolerance::Absolute(0.0),
            };
            let report = check_monotone(&curve, tolerance)?;
            let first = report.violations.first().map_or("none".to_string(), |v| v.n.to_string());
            println!(
                "check-monotone verdict={} violations={} first_violation_n={} max_increase={:?}",
                verdict_str(report.verdict),
                report.violations.len(),
                first,
                report.max_increase
            );
            Ok(if report.verdict == Verdict::Monotone { 0 } else { 1 })
        }
        Command::Rademacher { scenario, k, mode, seed } => {
            let s = find_scenario(&scenario)?;
            let (name, value) = match mode {
                RadMode::Massart => ("massart", rbar_massart(s.problem.class_size(), k)?),
                RadMode::Exact => ("exact", exact_rademacher_multinomial(&s.problem, k)?),
                RadMode::Empirical => {
                    let seed = seed.ok_or_else(|| GermError::InvalidArgument("empirical mode needs --seed".into()))?;
                    if k == 0 {
                        return Err(GermError::InvalidArgument("k must be >= 1".into()));
                    }
                    let mut rng = stream_rng(seed, 0);
                    let sample = draw_sample(&s.problem, k, &mut rng);
                    ("empirical", rbar_empirical(s.problem.loss(), &sample, &mut rng)?)
                }
            };
            println!("rademacher scenario={} k={k} mode={name} value={value:?}", s.id);
            Ok(0)
        }
        Command::Bernstein { scenario, beta } => {
            let s = find_scenario(&scenario)?;
            let cert = bernstein_min_b(&s.problem, beta)?;
            println!(
                "bernstein scenario={} beta={:?} minimal_B={:?} hstar={}",
                s.id, cert.beta, cert.minimal_b, cert.hstar_index
            );
            Ok(0)
        }
    }
}

fn execute(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentResult> {
    match workers {
        Some(w) => run_experiment_with_workers(cfg, w),
        None => run_experiment(cfg),
    }
}

fn report_run(result: &ExperimentResult) -> Result<u8> {
    for check in &result.report.checks {
        eprintln!("{}", check.summary());
    }
    let r = &result.report;
    println!(
        "run problem={} algo={} engine={} points={} checks={} passed={} curve={} report={}",
        r.problem,
        r.algorithm,
        r.engine,
        result.curve.len(),
        r.checks.len(),
        r.passed,
        result.curve_path.display(),
        result.report_path.display()
    );
    Ok(result.exit_code() as u8)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Monotone => "monotone",
        Verdict::Violated => "violated",
    }
}
