//! Command line interface: single checks, benchmark export, and plan runs.
//!
//! Exit codes: 0 means the check PASSed (or the command succeeded),
//! 1 means a check ran to completion and FAILed, 2 means the invocation
//! or its inputs were invalid.

use clap::{Parser, Subcommand};
use qbbt::{emit_report, run_plan, suite_entries, ExperimentPlan};
use qbbt_core::bench::export_suite;
use qbbt_core::checkers::{
    eq_check_optimized, eq_check_original, id_check, un_check_optimized, un_check_original,
    CheckConfig, FailRule, Verdict,
};
use qbbt_core::circuit::Program;
use qbbt_core::params::{eq_min_rounds, un_min_rounds};
use qbbt_core::sim::Rng;
use qbbt_core::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qbbt",
    version,
    about = "Statistical black-box checking of quantum programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one checker on program files and report PASS or FAIL.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Operations on the built-in mutation benchmark suite.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Execute an experiment plan and write a CSV or JSON report.
    Experiment {
        /// Plan file (JSON).
        #[arg(long)]
        plan: PathBuf,
        /// Report destination; the extension picks csv or json.
        #[arg(long)]
        out: PathBuf,
        /// Bounded-budget profile: 20 repetitions, round counts capped at 500.
        #[arg(long)]
        quick: bool,
    },
}

/// Sampling flags shared by the equivalence and unitarity checks.
#[derive(clap::Args)]
struct SampledArgs {
    /// Number of random test points.
    #[arg(long)]
    k: usize,
    /// Failure threshold on the estimated statistic, in (0, 1).
    #[arg(long)]
    epsilon: f64,
    /// Swap-test rounds per estimate (alternative to --auto-s).
    #[arg(long)]
    s: Option<u64>,
    /// Derive the round count from k, epsilon, and alpha2.
    #[arg(long)]
    auto_s: bool,
    /// Per-run error rate used by --auto-s (default 0.1).
    #[arg(long)]
    alpha2: Option<f64>,
    /// Use the purity-probing variant (requires --t).
    #[arg(long)]
    optimized: bool,
    /// Rounds per early-exit probe (requires --optimized).
    #[arg(long)]
    t: Option<u64>,
    /// Root seed for all sampling.
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Equivalence of two programs.
    Eq {
        /// First program file (JSON).
        #[arg(long)]
        p1: PathBuf,
        /// Second program file (JSON).
        #[arg(long)]
        p2: PathBuf,
        #[command(flatten)]
        sampled: SampledArgs,
    },
    /// Whether one program acts as the identity channel.
    Id {
        /// Program file (JSON).
        #[arg(long)]
        p1: PathBuf,
        /// Number of random test points.
        #[arg(long)]
        k: usize,
        /// Root seed for all sampling.
        #[arg(long)]
        seed: u64,
    },
    /// Whether one program acts as a unitary channel.
    Un {
        /// Program file (JSON).
        #[arg(long)]
        p1: PathBuf,
        #[command(flatten)]
        sampled: SampledArgs,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Build and verify the 63-entry suite, then write it to a directory.
    Export {
        /// Destination directory (created if missing).
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Honor QBBT_THREADS as a cap on the worker pool.
fn configure_threads() -> Result<()> {
    match std::env::var("QBBT_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "QBBT_THREADS must be a positive integer, got '{raw}'"
                ))
            })?;
            if n < 1 {
                return Err(Error::InvalidInput(
                    "QBBT_THREADS must be a positive integer, got '0'".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidInput(format!("cannot size the worker pool: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check(check) => run_check(check),
        Command::Bench(BenchCommand::Export { dir }) => {
            let entries = suite_entries()?;
            export_suite(&dir, entries)?;
            println!(
                "exported {} benchmark entries to {}",
                entries.len(),
                dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { plan, out, quick } => {
            let text = std::fs::read_to_string(&plan)?;
            let mut plan: ExperimentPlan = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("not a valid plan: {e}")))?;
            if quick {
                plan = plan.quick();
            }
            let report = run_plan(&plan)?;
            emit_report(&report, &out)?;
            println!(
                "wrote {} rows (seed {}) to {}",
                report.rows.len(),
                report.seed,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_program(path: &Path) -> Result<Program> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Program::from_json(&text)
}

enum SampledTask {
    Eq,
    Un,
}

/// Resolve the round count and probe count from the sampling flags.
fn resolve_sampling(task: &SampledTask, args: &SampledArgs) -> Result<(u64, u64)> {
    let s = match (args.s, args.auto_s) {
        (Some(s), false) => {
            if let Some(a) = args.alpha2 {
                return Err(Error::InvalidInput(format!(
                    "--alpha2 {a} only applies with --auto-s"
                )));
            }
            s
        }
        (None, true) => {
            let alpha2 = args.alpha2.unwrap_or(0.1);
            let rounds = match task {
                SampledTask::Eq => eq_min_rounds(args.k, args.epsilon, alpha2)?,
                SampledTask::Un => un_min_rounds(args.k, args.epsilon, alpha2)?,
            };
            rounds as u64
        }
        _ => {
            return Err(Error::InvalidInput(
                "pass exactly one of --s or --auto-s".into(),
            ))
        }
    };
    let t = match (args.optimized, args.t) {
        (true, Some(t)) => t,
        (false, None) => 0,
        (true, None) => {
            return Err(Error::InvalidInput(
                "--optimized requires --t (probe rounds)".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::InvalidInput("--t requires --optimized".into()));
        }
    };
    Ok((s, t))
}

fn run_check(cmd: CheckCommand) -> Result<ExitCode> {
    let (label, verdict, config_line) = match &cmd {
        CheckCommand::Eq { p1, p2, sampled } => {
            let a = load_program(p1)?;
            let b = load_program(p2)?;
            let (s, t) = resolve_sampling(&SampledTask::Eq, sampled)?;
            let cfg = CheckConfig {
                k: sampled.k,
                s,
                t: t.max(1),
                epsilon: sampled.epsilon,
                seed: sampled.seed,
            };
            let verdict = if sampled.optimized {
                eq_check_optimized(a.n_qubits, &cfg, &a, &b)?
            } else {
                eq_check_original(a.n_qubits, &cfg, &a, &b)?
            };
            let line = format!(
                "config: task=eq variant={} k={} epsilon={} s={} t={} seed={}",
                if sampled.optimized { "optimized" } else { "original" },
                sampled.k, sampled.epsilon, s, t, sampled.seed
            );
            ("eq", verdict, line)
        }
        CheckCommand::Id { p1, k, seed } => {
            let p = load_program(p1)?;
            let verdict = id_check(p.n_qubits, *k, &p, &Rng::new(*seed))?;
            let line = format!("config: task=id k={k} seed={seed}");
            ("id", verdict, line)
        }
        CheckCommand::Un { p1, sampled } => {
            let p = load_program(p1)?;
            let (s, t) = resolve_sampling(&SampledTask::Un, sampled)?;
            let cfg = CheckConfig {
                k: sampled.k,
                s,
                t: t.max(1),
                epsilon: sampled.epsilon,
                seed: sampled.seed,
            };
            let verdict = if sampled.optimized {
                un_check_optimized(p.n_qubits, &cfg, &p)?
            } else {
                un_check_original(p.n_qubits, &cfg, &p)?
            };
            let line = format!(
                "config: task=un variant={} k={} epsilon={} s={} t={} seed={}",
                if sampled.optimized { "optimized" } else { "original" },
                sampled.k, sampled.epsilon, s, t, sampled.seed
            );
            ("un", verdict, line)
        }
    };
    report_verdict(label, &verdict, &config_line);
    Ok(if verdict.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn rule_name(rule: FailRule) -> &'static str {
    match rule {
        FailRule::Threshold => "threshold",
        FailRule::PurityMismatch => "purity-mismatch",
        FailRule::PureOverlap => "pure-overlap",
        FailRule::PurityViolation => "purity-violation",
        FailRule::NonzeroMeasurement => "nonzero-measurement",
    }
}

fn report_verdict(label: &str, verdict: &Verdict, config_line: &str) {
    println!(
        "verdict: {} ({label})",
        if verdict.passed() { "PASS" } else { "FAIL" }
    );
    println!("{config_line}");
    println!(
        "cost: shots={} triggers={}",
        verdict.shots_executed, verdict.trigger_count
    );
    if let Some(point) = &verdict.failing_point {
        println!(
            "failure: point={} rule={} statistic={}",
            point.point_index,
            rule_name(point.rule),
            point.statistic
        );
    }
}
