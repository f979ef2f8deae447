//! Plan execution: expand a plan into parameter cells, run every cell's
//! repetitions, and aggregate the results into a report.
//!
//! # Determinism
//!
//! Every repetition draws from a stream keyed by
//! `(base seed, entry id, cell index, repetition index)`, so a report is a
//! pure function of the plan: re-running it reproduces every column except
//! the wall-clock timings. Cells execute in parallel but rows are emitted
//! in grid order (entries in suite order; within an entry, the parameter
//! axes nest as `k`, then `epsilon`, then `s_fraction`, then `t`).

use crate::plan::{ExperimentPlan, Variant};
use crate::report::{ExperimentReport, ReportRow};
use qbbt_core::bench::{suite, BenchTask, BenchmarkEntry, Payload};
use qbbt_core::checkers::{
    eq_check_optimized, eq_check_original, id_check, un_check_optimized, un_check_original,
    CheckConfig, Verdict,
};
use qbbt_core::params::{eq_min_rounds, un_min_rounds};
use qbbt_core::sim::Rng;
use qbbt_core::{Error, Result};
use rayon::prelude::*;
use std::sync::OnceLock;
use std::time::Instant;

/// The benchmark suite, built and oracle-verified once per process.
pub fn suite_entries() -> Result<&'static [BenchmarkEntry]> {
    static SUITE: OnceLock<std::result::Result<Vec<BenchmarkEntry>, String>> = OnceLock::new();
    match SUITE.get_or_init(|| suite().map_err(|e| e.to_string())) {
        Ok(entries) => Ok(entries.as_slice()),
        Err(msg) => Err(Error::InternalInconsistency(format!(
            "benchmark suite failed to build: {msg}"
        ))),
    }
}

fn fnv1a64(text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in text.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One (entry, parameter point) to execute.
struct Cell {
    entry: &'static BenchmarkEntry,
    /// Position in the entry's own grid; part of the stream key.
    cell_index: u64,
    k: usize,
    epsilon: f64,
    s: u64,
    t: u64,
}

fn selected_entries(plan: &ExperimentPlan) -> Result<Vec<&'static BenchmarkEntry>> {
    let suite = suite_entries()?;
    for id in &plan.ids {
        if !suite.iter().any(|e| &e.id == id) {
            return Err(Error::InvalidInput(format!(
                "experiment plan names unknown entry id '{id}'"
            )));
        }
    }
    let selected: Vec<&'static BenchmarkEntry> = suite
        .iter()
        .filter(|e| plan.tasks.is_empty() || plan.tasks.contains(&e.task))
        .filter(|e| plan.ids.is_empty() || plan.ids.iter().any(|id| id == &e.id))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidInput(
            "experiment plan selects no benchmark entries".into(),
        ));
    }
    Ok(selected)
}

fn cells_for_entry(plan: &ExperimentPlan, entry: &'static BenchmarkEntry) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    let mut index = 0u64;
    match entry.task {
        // Identity checking has no sampled statistic: no epsilon, no round
        // budget, no probe stage. Only k sweeps.
        BenchTask::Identity => {
            for &k in &plan.k {
                cells.push(Cell {
                    entry,
                    cell_index: index,
                    k,
                    epsilon: 0.0,
                    s: 0,
                    t: 0,
                });
                index += 1;
            }
        }
        BenchTask::Equivalence | BenchTask::Unitarity => {
            let t_axis: &[u64] = match plan.variant {
                Variant::Optimized => &plan.t,
                // The plain checkers have no probe stage; report t as 0.
                Variant::Original => &[0],
            };
            for &k in &plan.k {
                for &epsilon in &plan.epsilon {
                    let s0 = match entry.task {
                        BenchTask::Equivalence => eq_min_rounds(k, epsilon, plan.alpha2)?,
                        _ => un_min_rounds(k, epsilon, plan.alpha2)?,
                    } as f64;
                    for &fraction in &plan.s_fraction {
                        let mut s = ((fraction * s0).round() as u64).max(1);
                        if let Some(cap) = plan.s_cap {
                            s = s.min(cap);
                        }
                        for &t in t_axis {
                            cells.push(Cell {
                                entry,
                                cell_index: index,
                                k,
                                epsilon,
                                s,
                                t,
                            });
                            index += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn run_repetition(plan: &ExperimentPlan, cell: &Cell, seed: u64) -> Result<Verdict> {
    let entry = cell.entry;
    match (&entry.task, &entry.payload) {
        (BenchTask::Identity, Payload::Single(p)) => {
            id_check(p.n_qubits, cell.k, p, &Rng::new(seed))
        }
        (BenchTask::Equivalence, Payload::Pair(a, b)) => {
            let cfg = CheckConfig {
                k: cell.k,
                s: cell.s,
                t: cell.t.max(1),
                epsilon: cell.epsilon,
                seed,
            };
            match plan.variant {
                Variant::Original => eq_check_original(a.n_qubits, &cfg, a, b),
                Variant::Optimized => eq_check_optimized(a.n_qubits, &cfg, a, b),
            }
        }
        (BenchTask::Unitarity, Payload::Single(p)) => {
            let cfg = CheckConfig {
                k: cell.k,
                s: cell.s,
                t: cell.t.max(1),
                epsilon: cell.epsilon,
                seed,
            };
            match plan.variant {
                Variant::Original => un_check_original(p.n_qubits, &cfg, p),
                Variant::Optimized => un_check_optimized(p.n_qubits, &cfg, p),
            }
        }
        _ => Err(Error::InternalInconsistency(format!(
            "entry {}: payload shape does not match its task",
            entry.id
        ))),
    }
}

fn run_cell(plan: &ExperimentPlan, cell: &Cell) -> Result<ReportRow> {
    let started = Instant::now();
    let cell_stream = Rng::new(plan.seed)
        .split(fnv1a64(&cell.entry.id))
        .split(cell.cell_index);
    let mut pass_count = 0usize;
    let mut trigger_count = 0u64;
    let mut total_shots = 0u64;
    for rep in 0..plan.repetitions {
        let seed = cell_stream.split(rep as u64).next_u64();
        let verdict = run_repetition(plan, cell, seed)?;
        if verdict.passed() {
            pass_count += 1;
        }
        trigger_count += verdict.trigger_count as u64;
        total_shots += verdict.shots_executed;
    }
    Ok(ReportRow {
        entry_id: cell.entry.id.clone(),
        task: cell.entry.task.as_str().to_string(),
        variant: plan.variant.as_str().to_string(),
        k: cell.k,
        epsilon: cell.epsilon,
        s: cell.s,
        t: cell.t,
        repetitions: plan.repetitions,
        pass_count,
        trigger_count,
        total_shots,
        wall_ms: started.elapsed().as_millis() as u64,
        seed: plan.seed,
    })
}

/// Execute a plan and return its report.
///
/// Fails fast on invalid plans, unknown entry ids, and selections that
/// match no entry.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let selected = selected_entries(plan)?;
    let mut cells = Vec::new();
    for entry in selected {
        cells.extend(cells_for_entry(plan, entry)?);
    }
    let rows = cells
        .par_iter()
        .map(|cell| run_cell(plan, cell))
        .collect::<Result<Vec<ReportRow>>>()?;
    Ok(ExperimentReport::new(plan.seed, rows))
}

/// Spearman rank correlation with average ranks for ties.
///
/// Returns 0 when either series is constant (no ordering information).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman: series lengths differ");
    if xs.len() < 2 {
        return 0.0;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean).powi(2);
        var_y += (b - mean).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    cov / (var_x * var_y).sqrt()
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Tied values share the mean of the ranks they span (1-based).
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{ExperimentPlan, Variant};

    fn plan_for(ids: &[&str], variant: Variant) -> ExperimentPlan {
        ExperimentPlan {
            tasks: vec![],
            ids: ids.iter().map(|s| s.to_string()).collect(),
            variant,
            k: vec![1],
            epsilon: vec![0.1],
            s_fraction: vec![1.0],
            t: vec![20],
            repetitions: 5,
            seed: 20260819,
            alpha2: 0.1,
            s_cap: None,
        }
    }

    fn rows_without_walltime(report: &ExperimentReport) -> Vec<ReportRow> {
        report
            .rows
            .iter()
            .cloned()
            .map(|mut r| {
                r.wall_ms = 0;
                r
            })
            .collect()
    }

    #[test]
    fn identical_plans_reproduce_identical_reports() {
        let mut plan = plan_for(&["5.1"], Variant::Optimized);
        plan.k = vec![1, 2];
        plan.s_fraction = vec![0.02];
        plan.t = vec![5];
        let first = run_plan(&plan).unwrap();
        let second = run_plan(&plan).unwrap();
        assert_eq!(rows_without_walltime(&first), rows_without_walltime(&second));
        assert_eq!(first.seed, second.seed);
        assert_eq!(first.version, second.version);
        assert_eq!(first.rows.len(), 2);
    }

    #[test]
    fn identity_cells_sweep_k_only_and_pass_on_identity_programs() {
        let mut plan = plan_for(&["10"], Variant::Original);
        plan.k = vec![50];
        plan.repetitions = 100;
        let report = run_plan(&plan).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.task, "ID");
        assert_eq!(row.k, 50);
        assert_eq!(row.epsilon, 0.0);
        assert_eq!(row.s, 0);
        assert_eq!(row.t, 0);
        assert_eq!(row.pass_count, 100);
        assert_eq!(row.total_shots, 100 * 50);
    }

    #[test]
    fn reset_program_always_fails_the_unitarity_check() {
        let mut plan = plan_for(&["26"], Variant::Original);
        plan.k = vec![4];
        plan.epsilon = vec![0.15];
        plan.repetitions = 10;
        let report = run_plan(&plan).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.task, "UN");
        // Derived from the calculator at alpha2 = 0.1.
        assert_eq!(row.s, 469);
        assert_eq!(row.pass_count, 0);
        // The first test point already violates orthogonality, so every
        // repetition stops after exactly one sampled estimate.
        assert_eq!(row.total_shots, 10 * 469);
    }

    #[test]
    fn full_budget_equivalence_passes_at_every_round_fraction() {
        let mut plan = plan_for(&["1"], Variant::Original);
        plan.s_fraction = vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9, 1.0];
        plan.repetitions = 25;
        let report = run_plan(&plan).unwrap();
        assert_eq!(report.rows.len(), 9);
        // Full budget at k = 1, epsilon = 0.1.
        assert_eq!(report.rows.last().unwrap().s, 2397);
        for row in &report.rows {
            assert_eq!(
                row.pass_count, 25,
                "entry 1 should pass at every round fraction, failed at s={}",
                row.s
            );
        }
        // Fractions ascend, so derived round counts must too.
        for pair in report.rows.windows(2) {
            assert!(pair[0].s < pair[1].s);
        }
    }

    #[test]
    fn grid_shape_covers_the_full_parameter_product() {
        let mut plan = plan_for(&["5.1"], Variant::Original);
        plan.k = vec![1, 2, 3, 4, 6, 10];
        plan.epsilon = vec![0.05, 0.1, 0.15, 0.2];
        plan.repetitions = 1;
        plan.s_cap = Some(1);
        let report = run_plan(&plan).unwrap();
        assert_eq!(report.rows.len(), 24);
        let mut expected = Vec::new();
        for &k in &plan.k {
            for &e in &plan.epsilon {
                expected.push((k, e));
            }
        }
        let got: Vec<(usize, f64)> = report.rows.iter().map(|r| (r.k, r.epsilon)).collect();
        assert_eq!(got, expected);
        assert!(report.rows.iter().all(|r| r.s == 1 && r.t == 0));

        // The optimized variant adds a probe-rounds axis.
        plan.variant = Variant::Optimized;
        plan.k = vec![1, 2];
        plan.epsilon = vec![0.1];
        plan.t = vec![10, 20];
        let report = run_plan(&plan).unwrap();
        assert_eq!(report.rows.len(), 4);
        let ts: Vec<u64> = report.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![10, 20, 10, 20]);
    }

    #[test]
    fn pass_rate_declines_as_k_grows_on_inequivalent_pairs() {
        let mut plan = plan_for(&["5.1", "5.2", "5.3", "5.4", "5.5"], Variant::Original);
        plan.k = vec![1, 2, 4, 8];
        plan.epsilon = vec![0.2];
        plan.s_cap = Some(4);
        plan.repetitions = 40;
        let report = run_plan(&plan).unwrap();
        assert_eq!(report.rows.len(), 20);

        let ks: Vec<f64> = plan.k.iter().map(|&k| k as f64).collect();
        let mut coefficients = Vec::new();
        for id in &plan.ids {
            let series: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| &r.entry_id == id)
                .map(|r| r.pass_count as f64)
                .collect();
            assert_eq!(series.len(), ks.len());
            if series.iter().sum::<f64>() > 0.0 {
                coefficients.push(spearman(&ks, &series));
            }
        }
        assert!(
            !coefficients.is_empty(),
            "starved round budgets should let some repetitions pass"
        );
        let avg = coefficients.iter().sum::<f64>() / coefficients.len() as f64;
        assert!(
            avg <= 0.0,
            "pass counts should not rise with k, got average correlation {avg}"
        );
    }

    #[test]
    fn plans_reject_unknown_ids_and_empty_selections() {
        let plan = plan_for(&["99"], Variant::Original);
        let err = run_plan(&plan).unwrap_err().to_string();
        assert!(err.contains("unknown entry id"), "got: {err}");

        let mut plan = plan_for(&["1"], Variant::Original);
        plan.tasks = vec![qbbt_core::bench::BenchTask::Identity];
        let err = run_plan(&plan).unwrap_err().to_string();
        assert!(err.contains("selects no benchmark entries"), "got: {err}");
    }

    #[test]
    fn spearman_ranks_with_average_ties() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]), -1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), 0.0);
        // Ties share averaged ranks; a final drop still reads negative.
        let c = spearman(&[1.0, 2.0, 3.0, 4.0], &[7.0, 7.0, 7.0, 1.0]);
        assert!(c < 0.0);
    }
}
