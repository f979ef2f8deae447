//! Experiment harness for the black-box program checkers.
//!
//! This crate drives [`qbbt_core`] at experiment scale: an
//! [`ExperimentPlan`] selects benchmark entries and sweep axes (test-point
//! count `k`, threshold `epsilon`, round-budget fraction, probe rounds `t`),
//! [`run_plan`] executes every (entry, configuration) cell for `R` seeded
//! repetitions, and [`ExperimentReport`] carries the per-cell PASS counts,
//! trigger counts, and shot totals out to CSV or JSON.
//!
//! Reproducibility contract: a plan plus its base seed fully determines
//! every random draw. Each cell derives its own RNG stream from
//! (base seed, entry id, configuration index, repetition index), so reports
//! are identical across runs and thread counts except for wall-time fields.

pub mod plan;
pub mod report;
pub mod runner;

pub use plan::{ExperimentPlan, Variant};
pub use report::{emit_report, ExperimentReport, ReportRow, CSV_HEADER};
pub use runner::{run_plan, suite_entries};
