//! The five black-box decision procedures.
//!
//! Each checker examines a program (or pair) on `k` randomly chosen test
//! points and returns a [`Verdict`]: PASS if every point looked consistent
//! with the claimed property, FAIL at the first point that did not.
//!
//! - [`eq_check_original`] — equivalence of two programs: per point, three
//!   sampled swap tests estimate the distinguishability statistic.
//! - [`eq_check_optimized`] — equivalence with purity short-cuts: cheap
//!   early-exit probes settle pure-output points without full sampling.
//! - [`id_check`] — identity checking: conjugating the program by a random
//!   Pauli preparation must return the register to all zeros.
//! - [`un_check_original`] — unitarity: orthogonal input pairs must yield
//!   orthogonal outputs, estimated by one swap test per point.
//! - [`un_check_optimized`] — unitarity with a purity-preservation stage in
//!   front of the orthogonality stage.
//!
//! Randomness is derived, never shared: a check seeds a root stream, point
//! `i` works from `root.split(i)`, the input draw uses the point's label-0
//! substream and each execution (swap test, probe, shot) gets its own
//! label. Identical configuration and seed therefore reproduce the
//! identical verdict, bit for bit, on any thread count.

use crate::circuit::{compose, Program};
use crate::sim::{run_shot, CompiledProgram, Rng};
use crate::states::{
    basis_prep, pauli_prep, pauli_prep_inverse, random_basis_state, random_pauli_index,
    superpos_prep, Sign,
};
use crate::swaptest::{is_trab_equals_1, swap_test};
use crate::qnum::StateVector;
use crate::{Error, Result};

/// Parameters of one checking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    /// Number of test points.
    pub k: usize,
    /// Swap-test rounds per sampled estimate.
    pub s: u64,
    /// Rounds per early-exit overlap probe (optimized variants only).
    pub t: u64,
    /// Failure threshold on the estimated statistic, in (0, 1).
    pub epsilon: f64,
    /// Root seed; everything the run samples derives from it.
    pub seed: u64,
}

/// Which rule a failing point tripped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailRule {
    /// A sampled statistic exceeded `epsilon`.
    Threshold,
    /// Purity probes disagreed between the two programs.
    PurityMismatch,
    /// Both outputs probed pure but their overlap probe read a 1.
    PureOverlap,
    /// A single program's output purity probe read a 1.
    PurityViolation,
    /// The identity check measured a nonzero register.
    NonzeroMeasurement,
}

/// The random input a test point examined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointInput {
    /// Pauli preparation digits, one per qubit.
    PauliIndex(Vec<u8>),
    /// Two distinct computational basis states.
    BasisPair { m: u64, n: u64 },
    /// The plus/minus superpositions of two basis states.
    SuperposPair { m: u64, n: u64 },
}

/// Where and why a run failed.
///
/// `statistic` depends on the rule: the estimated value compared against
/// `epsilon` for `Threshold`; the measured register integer for
/// `NonzeroMeasurement`; the probe round count at detection for
/// `PureOverlap` / `PurityViolation`; +1 or -1 for `PurityMismatch`
/// (sign says which side probed pure).
#[derive(Debug, Clone, PartialEq)]
pub struct FailingPoint {
    /// Sequential point index within the run (stages share one sequence).
    pub point_index: usize,
    /// The input drawn for that point.
    pub input: PointInput,
    /// Rule-dependent diagnostic value (see type docs).
    pub statistic: f64,
    /// The rule that fired.
    pub rule: FailRule,
}

/// Outcome of a checking run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

/// Result of one checking run, with enough instrumentation to audit the
/// early-exit and optimization behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Present exactly when `outcome == Fail`.
    pub failing_point: Option<FailingPoint>,
    /// How many optimized rules fired (purity mismatch / pure overlap /
    /// purity violation).
    pub trigger_count: usize,
    /// Total sampled executions: swap-test shots, probe rounds, and
    /// identity-check shots actually run before the verdict.
    pub shots_executed: u64,
    /// Points that executed the general (full swap-test) branch.
    pub general_branch_points: usize,
}

impl Verdict {
    /// True when the run passed.
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    fn pass(trigger_count: usize, shots_executed: u64, general_branch_points: usize) -> Self {
        Verdict {
            outcome: Outcome::Pass,
            failing_point: None,
            trigger_count,
            shots_executed,
            general_branch_points,
        }
    }

    fn fail(
        point: FailingPoint,
        trigger_count: usize,
        shots_executed: u64,
        general_branch_points: usize,
    ) -> Self {
        Verdict {
            outcome: Outcome::Fail,
            failing_point: Some(point),
            trigger_count,
            shots_executed,
            general_branch_points,
        }
    }
}

fn validate_config(what: &'static str, cfg: &CheckConfig, k_min: usize) -> Result<()> {
    if cfg.k < k_min {
        return Err(Error::InvalidInput(format!(
            "{what}: k must be at least {k_min}, got {}",
            cfg.k
        )));
    }
    if cfg.s < 1 || cfg.t < 1 {
        return Err(Error::InvalidInput(format!(
            "{what}: s and t must be at least 1, got s={} t={}",
            cfg.s, cfg.t
        )));
    }
    if !cfg.epsilon.is_finite() || cfg.epsilon <= 0.0 || cfg.epsilon >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "{what}: epsilon must lie in (0, 1), got {}",
            cfg.epsilon
        )));
    }
    Ok(())
}

fn validate_register(what: &'static str, n: usize, p: &Program) -> Result<()> {
    if p.n_qubits != n {
        return Err(Error::ShapeMismatch(format!(
            "{what}: program '{}' has {} I/O qubit(s), check expects {n}",
            p.name, p.n_qubits
        )));
    }
    Ok(())
}

/// Equivalence checking by three swap tests per point.
///
/// Per point: draw a random Pauli preparation `G_K`, estimate the three
/// overlaps among the two program outputs on that input, and form the
/// statistic `|2*s12 - s1 - s2| / s`. For equivalent programs its
/// expectation is 0; a point fails when it exceeds `epsilon`.
pub fn eq_check_original(
    n: usize,
    cfg: &CheckConfig,
    p1: &Program,
    p2: &Program,
) -> Result<Verdict> {
    validate_config("eq_check_original", cfg, 1)?;
    validate_register("eq_check_original", n, p1)?;
    validate_register("eq_check_original", n, p2)?;
    let root = Rng::new(cfg.seed);
    let mut shots = 0u64;
    let mut general = 0usize;
    for i in 0..cfg.k {
        let point = root.split(i as u64);
        let mut input_rng = point.split(0);
        let digits = random_pauli_index(n, &mut input_rng);
        let g_k = pauli_prep(&digits)?;
        let prog1 = compose(&g_k, p1)?;
        let prog2 = compose(&g_k, p2)?;
        general += 1;
        let (e_tilde, used) = e_statistic(n, cfg.s, &prog1, &prog2, &point)?;
        shots += used;
        if e_tilde > cfg.epsilon {
            return Ok(Verdict::fail(
                FailingPoint {
                    point_index: i,
                    input: PointInput::PauliIndex(digits),
                    statistic: e_tilde,
                    rule: FailRule::Threshold,
                },
                0,
                shots,
                general,
            ));
        }
    }
    Ok(Verdict::pass(0, shots, general))
}

/// The three-swap-test statistic `|2*s12 - s1 - s2| / s` for one prepared
/// input, using execution labels 1..=3 of `point` (or 4..=6 for the
/// optimized fallback, via `label_base`).
fn e_statistic_with_labels(
    n: usize,
    s: u64,
    prog1: &Program,
    prog2: &Program,
    point: &Rng,
    label_base: u64,
) -> Result<(f64, u64)> {
    let r1 = swap_test(n, s, prog1, prog1, &point.split(label_base))?;
    let r2 = swap_test(n, s, prog2, prog2, &point.split(label_base + 1))?;
    let r12 = swap_test(n, s, prog1, prog2, &point.split(label_base + 2))?;
    let sf = s as f64;
    let e = ((2.0 * r12.s1 as f64 - r1.s1 as f64 - r2.s1 as f64) / sf).abs();
    Ok((e, 3 * s))
}

fn e_statistic(
    n: usize,
    s: u64,
    prog1: &Program,
    prog2: &Program,
    point: &Rng,
) -> Result<(f64, u64)> {
    e_statistic_with_labels(n, s, prog1, prog2, point, 1)
}

/// Equivalence checking with purity short-cuts.
///
/// Per point, two `t`-round probes test whether each output is consistent
/// with being pure. Disagreement fails the point immediately (rule
/// `PurityMismatch`). When both probe pure, a third probe across the two
/// outputs settles the point: a 1 anywhere proves the pure outputs differ
/// (rule `PureOverlap`), otherwise the point passes with no full sampling.
/// Only when both outputs probe mixed does the point fall back to the
/// original three-swap-test branch. `trigger_count` counts the probe-rule
/// failures; `general_branch_points` counts the fallbacks.
pub fn eq_check_optimized(
    n: usize,
    cfg: &CheckConfig,
    p1: &Program,
    p2: &Program,
) -> Result<Verdict> {
    validate_config("eq_check_optimized", cfg, 1)?;
    validate_register("eq_check_optimized", n, p1)?;
    validate_register("eq_check_optimized", n, p2)?;
    let root = Rng::new(cfg.seed);
    let mut shots = 0u64;
    let mut triggers = 0usize;
    let mut general = 0usize;
    for i in 0..cfg.k {
        let point = root.split(i as u64);
        let mut input_rng = point.split(0);
        let digits = random_pauli_index(n, &mut input_rng);
        let g_k = pauli_prep(&digits)?;
        let prog1 = compose(&g_k, p1)?;
        let prog2 = compose(&g_k, p2)?;
        let probe1 = is_trab_equals_1(n, cfg.t, &prog1, &prog1, &point.split(1))?;
        shots += probe1.rounds_run;
        let probe2 = is_trab_equals_1(n, cfg.t, &prog2, &prog2, &point.split(2))?;
        shots += probe2.rounds_run;
        if probe1.is_one != probe2.is_one {
            triggers += 1;
            return Ok(Verdict::fail(
                FailingPoint {
                    point_index: i,
                    input: PointInput::PauliIndex(digits),
                    statistic: if probe1.is_one { 1.0 } else { -1.0 },
                    rule: FailRule::PurityMismatch,
                },
                triggers,
                shots,
                general,
            ));
        }
        if probe1.is_one {
            // Both outputs look pure: one cross probe decides the point.
            let cross = is_trab_equals_1(n, cfg.t, &prog1, &prog2, &point.split(3))?;
            shots += cross.rounds_run;
            if !cross.is_one {
                triggers += 1;
                return Ok(Verdict::fail(
                    FailingPoint {
                        point_index: i,
                        input: PointInput::PauliIndex(digits),
                        statistic: cross.rounds_run as f64,
                        rule: FailRule::PureOverlap,
                    },
                    triggers,
                    shots,
                    general,
                ));
            }
        } else {
            general += 1;
            let (e_tilde, used) =
                e_statistic_with_labels(n, cfg.s, &prog1, &prog2, &point, 4)?;
            shots += used;
            if e_tilde > cfg.epsilon {
                return Ok(Verdict::fail(
                    FailingPoint {
                        point_index: i,
                        input: PointInput::PauliIndex(digits),
                        statistic: e_tilde,
                        rule: FailRule::Threshold,
                    },
                    triggers,
                    shots,
                    general,
                ));
            }
        }
    }
    Ok(Verdict::pass(triggers, shots, general))
}

/// Identity checking: `G_K -> P -> G_K^{-1}` must return the register to
/// all zeros, verified by a single shot per point measuring every I/O
/// qubit. Any nonzero reading fails immediately.
pub fn id_check(n: usize, k: usize, p: &Program, rng: &Rng) -> Result<Verdict> {
    if k < 1 {
        return Err(Error::InvalidInput(format!(
            "id_check: k must be at least 1, got {k}"
        )));
    }
    validate_register("id_check", n, p)?;
    let mut shots = 0u64;
    for i in 0..k {
        let point = rng.split(i as u64);
        let mut input_rng = point.split(0);
        let digits = random_pauli_index(n, &mut input_rng);
        let forward = compose(&pauli_prep(&digits)?, p)?;
        let mut round_trip = compose(&forward, &pauli_prep_inverse(&digits)?)?;
        let slot = round_trip.n_slots();
        round_trip = round_trip.measure(&(0..n).collect::<Vec<_>>(), slot);
        let cp = CompiledProgram::compile(&round_trip)?;
        let mut shot_rng = point.split(1);
        let result = run_shot(&cp, &StateVector::zero_state(n)?, &mut shot_rng)?;
        shots += 1;
        let reading = result.slots[slot];
        if reading != 0 {
            return Ok(Verdict::fail(
                FailingPoint {
                    point_index: i,
                    input: PointInput::PauliIndex(digits),
                    statistic: reading as f64,
                    rule: FailRule::NonzeroMeasurement,
                },
                0,
                shots,
                0,
            ));
        }
    }
    Ok(Verdict::pass(0, shots, 0))
}

/// The orthogonality stage shared by both unitarity checkers: `k` points at
/// global indices `start..start + k`, the first `ceil(k/2)` of them
/// superposition pairs `(m, ~m)`, the rest distinct basis pairs. Each point
/// estimates the output overlap `r = 1 - 2*s1/s` by one swap test and fails
/// when `|r| > epsilon`.
fn un_orthogonality_stage(
    n: usize,
    cfg: &CheckConfig,
    p: &Program,
    root: &Rng,
    start: usize,
    shots: &mut u64,
) -> Result<Option<FailingPoint>> {
    let superpos_points = cfg.k.div_ceil(2);
    let mask = (1u64 << n) - 1;
    for j in 0..cfg.k {
        let index = start + j;
        let point = root.split(index as u64);
        let mut input_rng = point.split(0);
        let (prog_a, prog_b, input) = if j < superpos_points {
            let m = random_basis_state(n, &mut input_rng);
            let partner = !m & mask;
            let plus = compose(&superpos_prep(n, m, partner, Sign::Plus)?, p)?;
            let minus = compose(&superpos_prep(n, m, partner, Sign::Minus)?, p)?;
            (plus, minus, PointInput::SuperposPair { m, n: partner })
        } else {
            let m = random_basis_state(n, &mut input_rng);
            let mut m2 = random_basis_state(n, &mut input_rng);
            while m2 == m {
                m2 = random_basis_state(n, &mut input_rng);
            }
            let a = compose(&basis_prep(n, m)?, p)?;
            let b = compose(&basis_prep(n, m2)?, p)?;
            (a, b, PointInput::BasisPair { m, n: m2 })
        };
        let res = swap_test(n, cfg.s, &prog_a, &prog_b, &point.split(1))?;
        *shots += cfg.s;
        let r = 1.0 - 2.0 * res.s1 as f64 / cfg.s as f64;
        if r.abs() > cfg.epsilon {
            return Ok(Some(FailingPoint {
                point_index: index,
                input,
                statistic: r,
                rule: FailRule::Threshold,
            }));
        }
    }
    Ok(None)
}

/// Unitarity checking by orthogonality preservation.
///
/// A unitary program maps orthogonal inputs to orthogonal outputs, so every
/// point's overlap estimate should sit near 0; `|r| > epsilon` fails.
pub fn un_check_original(n: usize, cfg: &CheckConfig, p: &Program) -> Result<Verdict> {
    validate_config("un_check_original", cfg, 2)?;
    validate_register("un_check_original", n, p)?;
    let root = Rng::new(cfg.seed);
    let mut shots = 0u64;
    match un_orthogonality_stage(n, cfg, p, &root, 0, &mut shots)? {
        Some(pt) => {
            let executed = pt.point_index + 1;
            Ok(Verdict::fail(pt, 0, shots, executed))
        }
        None => Ok(Verdict::pass(0, shots, cfg.k)),
    }
}

/// Unitarity checking with a purity-preservation stage.
///
/// Stage one draws `k` random Pauli inputs and probes each output's purity
/// with a `t`-round early-exit probe; a 1 proves the output mixed, which a
/// unitary program can never produce (rule `PurityViolation`, counted in
/// `trigger_count`). Stage two is the full orthogonality stage at global
/// point indices `k..2k`.
pub fn un_check_optimized(n: usize, cfg: &CheckConfig, p: &Program) -> Result<Verdict> {
    validate_config("un_check_optimized", cfg, 2)?;
    validate_register("un_check_optimized", n, p)?;
    let root = Rng::new(cfg.seed);
    let mut shots = 0u64;
    let mut triggers = 0usize;
    for i in 0..cfg.k {
        let point = root.split(i as u64);
        let mut input_rng = point.split(0);
        let digits = random_pauli_index(n, &mut input_rng);
        let prog = compose(&pauli_prep(&digits)?, p)?;
        let probe = is_trab_equals_1(n, cfg.t, &prog, &prog, &point.split(1))?;
        shots += probe.rounds_run;
        if !probe.is_one {
            triggers += 1;
            return Ok(Verdict::fail(
                FailingPoint {
                    point_index: i,
                    input: PointInput::PauliIndex(digits),
                    statistic: probe.rounds_run as f64,
                    rule: FailRule::PurityViolation,
                },
                triggers,
                shots,
                0,
            ));
        }
    }
    match un_orthogonality_stage(n, cfg, p, &root, cfg.k, &mut shots)? {
        Some(pt) => {
            let general = pt.point_index - cfg.k + 1;
            Ok(Verdict::fail(pt, triggers, shots, general))
        }
        None => Ok(Verdict::pass(triggers, shots, cfg.k)),
    }
}
