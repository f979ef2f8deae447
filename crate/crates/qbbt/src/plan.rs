//! Experiment plans: which entries to run and the parameter grid to sweep.

use qbbt_core::bench::BenchTask;
use qbbt_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which checker family a plan exercises.
///
/// `Original` runs the plain sampled checkers; `Optimized` runs the
/// purity-probing variants (equivalence and unitarity). Identity checking
/// has a single algorithm, used under either setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Optimized,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Optimized => "optimized",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_epsilon() -> Vec<f64> {
    vec![0.1]
}
fn default_s_fraction() -> Vec<f64> {
    vec![1.0]
}
fn default_t() -> Vec<u64> {
    vec![20]
}
fn default_alpha2() -> f64 {
    0.1
}

/// A sweep description: entry selection, parameter axes, repetition count,
/// and the base seed.
///
/// The effective grid depends on the task of each selected entry:
/// equivalence and unitarity cells sweep `k x epsilon x s_fraction`
/// (`x t` under the optimized variant), while identity cells sweep `k` only.
/// Round counts are derived per `(k, epsilon)` from the minimum-rounds
/// calculator at `alpha2`, scaled by each `s_fraction`, and clipped to
/// `s_cap` when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Restrict to entries of these tasks; empty means all tasks.
    #[serde(default)]
    pub tasks: Vec<BenchTask>,
    /// Restrict to these entry ids; empty means all selected-task entries.
    #[serde(default)]
    pub ids: Vec<String>,
    pub variant: Variant,
    /// Test-point counts to sweep.
    pub k: Vec<usize>,
    /// Failure thresholds to sweep (ignored by identity cells).
    #[serde(default = "default_epsilon")]
    pub epsilon: Vec<f64>,
    /// Fractions of the derived minimum round count (ignored by identity
    /// cells). `1.0` runs at the full budget.
    #[serde(default = "default_s_fraction")]
    pub s_fraction: Vec<f64>,
    /// Purity-probe rounds to sweep (optimized equivalence/unitarity only).
    #[serde(default = "default_t")]
    pub t: Vec<u64>,
    /// Seeded repetitions per cell.
    pub repetitions: usize,
    /// Base seed; every cell derives its stream from it.
    pub seed: u64,
    /// Two-sided per-run error rate used to derive round counts.
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    /// Upper bound applied to every derived round count, if set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_cap: Option<u64>,
}

impl ExperimentPlan {
    /// Check the plan's own invariants (entry-id existence is checked
    /// against the suite by the runner).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("experiment plan: {msg}")));
        if self.repetitions < 1 {
            return bad("repetitions must be at least 1".into());
        }
        if self.k.is_empty() {
            return bad("k list must not be empty".into());
        }
        if self.k.contains(&0) {
            return bad("k values must be at least 1".into());
        }
        if self.epsilon.is_empty() {
            return bad("epsilon list must not be empty".into());
        }
        for &e in &self.epsilon {
            if !e.is_finite() || e <= 0.0 || e >= 1.0 {
                return bad(format!("epsilon must lie in (0, 1), got {e}"));
            }
        }
        if self.s_fraction.is_empty() {
            return bad("s_fraction list must not be empty".into());
        }
        for &f in &self.s_fraction {
            if !f.is_finite() || f <= 0.0 || f > 1.0 {
                return bad(format!("s_fraction must lie in (0, 1], got {f}"));
            }
        }
        if self.t.is_empty() {
            return bad("t list must not be empty".into());
        }
        if self.t.contains(&0) {
            return bad("t values must be at least 1".into());
        }
        if !self.alpha2.is_finite() || self.alpha2 <= 0.0 || self.alpha2 >= 1.0 {
            return bad(format!("alpha2 must lie in (0, 1), got {}", self.alpha2));
        }
        if self.s_cap == Some(0) {
            return bad("s_cap must be at least 1 when set".into());
        }
        Ok(())
    }

    /// The bounded-budget profile: 20 repetitions and round counts capped
    /// at 500. Other axes are kept as written.
    pub fn quick(mut self) -> Self {
        self.repetitions = 20;
        self.s_cap = Some(500);
        self
    }
}
