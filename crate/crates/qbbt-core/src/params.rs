//! Sample-size selection for the sampled checks.
//!
//! The equivalence and unitarity checkers run `s` swap-test rounds per test
//! point and fail a point when the estimated statistic crosses the threshold
//! `epsilon`. For programs that *should* pass, each point still fails with
//! some small probability; over `k` points those errors accumulate. This
//! module computes the minimum `s` that keeps the overall false-failure
//! probability at or below a budget `alpha2`:
//!
//! - equivalence (Hoeffding bound on the three-estimate statistic):
//!   `s >= (8 / epsilon^2) * ln(2 / x)`
//! - unitarity (Chernoff bound on the orthogonality estimate):
//!   `s >= (2 / epsilon^2) * log2(1 / x)`
//!
//! where `x = 1 - (1 - alpha2)^(1/k)` is the failure budget allotted to a
//! single test point. `x` itself has no tidy closed form in `k`, but it is
//! bracketed by `alpha2 / k <= x <= -ln(1 - alpha2) / k`, which yields the
//! end-to-end growth `s = Theta(log k)` at fixed `epsilon` and `alpha2`;
//! [`budget_bounds`] exposes that bracket.

use crate::{Error, Result};

/// Which sampled check a round budget is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Two-program equivalence checking.
    Equivalence,
    /// Single-program unitarity checking.
    Unitarity,
}

/// A computed round budget together with the parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundBudget {
    /// The check this budget is for.
    pub task: Task,
    /// Minimum swap-test rounds per test point; always at least 1.
    pub s: usize,
    /// Number of test points the run will use.
    pub k: usize,
    /// Per-point failure threshold on the estimated statistic.
    pub epsilon: f64,
    /// Overall false-failure probability budget.
    pub alpha2: f64,
}

impl RoundBudget {
    /// Round budget for equivalence checking over `k` test points.
    pub fn equivalence(k: usize, epsilon: f64, alpha2: f64) -> Result<Self> {
        Ok(RoundBudget {
            task: Task::Equivalence,
            s: eq_min_rounds(k, epsilon, alpha2)?,
            k,
            epsilon,
            alpha2,
        })
    }

    /// Round budget for unitarity checking over `k` test points.
    pub fn unitarity(k: usize, epsilon: f64, alpha2: f64) -> Result<Self> {
        Ok(RoundBudget {
            task: Task::Unitarity,
            s: un_min_rounds(k, epsilon, alpha2)?,
            k,
            epsilon,
            alpha2,
        })
    }
}

/// Snap tolerance: a real bound this close to an integer is treated as that
/// integer before taking the ceiling, so floating-point noise in the last
/// bits of an analytically integral bound cannot inflate `s` by one.
const SNAP_TOL: f64 = 1e-9;

/// Smallest integer at or above `x`, snapping to a nearby integer first.
fn ceil_snapped(x: f64) -> usize {
    let r = x.round();
    let v = if (x - r).abs() <= SNAP_TOL { r } else { x.ceil() };
    v as usize
}

fn check_domain(task: &'static str, k_min: usize, k: usize, epsilon: f64, alpha2: f64) -> Result<()> {
    if k < k_min {
        return Err(Error::InvalidInput(format!(
            "{task}: k must be at least {k_min}, got {k}"
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "{task}: epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    check_alpha2(task, alpha2)
}

fn check_alpha2(task: &'static str, alpha2: f64) -> Result<()> {
    if !alpha2.is_finite() || alpha2 <= 0.0 || alpha2 >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "{task}: alpha2 must lie in (0, 1), got {alpha2}"
        )));
    }
    Ok(())
}

/// Failure budget allotted to a single test point, `1 - (1 - alpha2)^(1/k)`.
///
/// Evaluated as `-expm1(ln_1p(-alpha2) / k)`, which keeps the `k = 1` case
/// exactly `alpha2` and loses no precision for small budgets.
pub fn point_error_rate(k: usize, alpha2: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidInput("point_error_rate: k must be at least 1".into()));
    }
    check_alpha2("point_error_rate", alpha2)?;
    Ok(-((-alpha2).ln_1p() / k as f64).exp_m1())
}

/// Minimum swap-test rounds per point for equivalence checking.
///
/// Smallest integer `s` with `s >= (8 / epsilon^2) * ln(2 / x)` where
/// `x = 1 - (1 - alpha2)^(1/k)`; guarantees the probability that a run over
/// `k` points falsely fails an equivalent pair is at most `alpha2`.
pub fn eq_min_rounds(k: usize, epsilon: f64, alpha2: f64) -> Result<usize> {
    check_domain("eq_min_rounds", 1, k, epsilon, alpha2)?;
    let x = point_error_rate(k, alpha2)?;
    let bound = (8.0 / (epsilon * epsilon)) * (2.0 / x).ln();
    Ok(ceil_snapped(bound).max(1))
}

/// Minimum swap-test rounds per point for unitarity checking.
///
/// Smallest integer `s` with `s >= (2 / epsilon^2) * log2(1 / x)` where
/// `x = 1 - (1 - alpha2)^(1/k)`; guarantees the probability that a run over
/// `k` points falsely fails a unitary program is at most `alpha2`. Unitarity
/// checking draws pairs of distinct basis states, so it needs `k >= 2`.
pub fn un_min_rounds(k: usize, epsilon: f64, alpha2: f64) -> Result<usize> {
    check_domain("un_min_rounds", 2, k, epsilon, alpha2)?;
    let x = point_error_rate(k, alpha2)?;
    let bound = (2.0 / (epsilon * epsilon)) * (1.0 / x).log2();
    Ok(ceil_snapped(bound).max(1))
}

/// Analytic bracket `(k / -ln(1 - alpha2), k / alpha2)` around `1 / x`,
/// the reciprocal of the per-point failure budget.
///
/// The lower bound is strict for all inputs; the upper bound is attained
/// exactly at `k = 1`. Both grow linearly in `k`, which is what caps the
/// round budgets at logarithmic growth in `k`.
pub fn budget_bounds(k: usize, alpha2: f64) -> Result<(f64, f64)> {
    if k < 1 {
        return Err(Error::InvalidInput("budget_bounds: k must be at least 1".into()));
    }
    check_alpha2("budget_bounds", alpha2)?;
    let kf = k as f64;
    Ok((kf / -(-alpha2).ln_1p(), kf / alpha2))
}
