//! Experiment reports: one row per (entry, parameter cell), emitted as CSV
//! or JSON.

use qbbt_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Fixed CSV column order; `write_csv` and `ReportRow` agree on it.
pub const CSV_HEADER: [&str; 13] = [
    "entry_id",
    "task",
    "variant",
    "k",
    "epsilon",
    "s",
    "t",
    "repetitions",
    "pass_count",
    "trigger_count",
    "total_shots",
    "wall_ms",
    "seed",
];

/// One parameter cell of one benchmark entry, aggregated over all
/// repetitions. `wall_ms` is informational only and is the single field
/// excluded from reproducibility comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub entry_id: String,
    pub task: String,
    pub variant: String,
    pub k: usize,
    pub epsilon: f64,
    pub s: u64,
    pub t: u64,
    pub repetitions: usize,
    pub pass_count: usize,
    pub trigger_count: u64,
    pub total_shots: u64,
    pub wall_ms: u64,
    pub seed: u64,
}

/// A full experiment result: the producing version, the plan's base seed,
/// and the rows in deterministic grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(seed: u64, rows: Vec<ReportRow>) -> Self {
        ExperimentReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            rows,
        }
    }

    /// Serialize to pretty JSON. Parsing the output back yields a
    /// bit-identical report.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("report serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("not a valid report: {e}")))
    }

    /// Render as CSV with the fixed header. An empty report yields the
    /// header line alone.
    pub fn to_csv(&self) -> Result<String> {
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv error: {e}"));
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
        String::from_utf8(bytes)
            .map_err(|e| Error::InvalidInput(format!("csv produced invalid utf-8: {e}")))
    }
}

/// Write `report` to `path`, choosing the format by extension:
/// `.csv` or `.json`.
pub fn emit_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    let text = match ext.as_deref() {
        Some("csv") => report.to_csv()?,
        Some("json") => report.to_json()?,
        _ => {
            return Err(Error::InvalidInput(format!(
                "cannot infer report format from '{}': use a .csv or .json extension",
                path.display()
            )))
        }
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ReportRow {
        ReportRow {
            entry_id: "5.1".into(),
            task: "EQ".into(),
            variant: "original".into(),
            k: 4,
            epsilon: 0.15,
            s: 1545,
            t: 0,
            repetitions: 100,
            pass_count: 3,
            trigger_count: 0,
            total_shots: 618_000,
            wall_ms: 1234,
            seed: 42,
        }
    }

    #[test]
    fn empty_report_renders_header_only_csv() {
        let report = ExperimentReport::new(1, vec![]);
        let csv = report.to_csv().unwrap();
        assert_eq!(
            csv,
            "entry_id,task,variant,k,epsilon,s,t,repetitions,pass_count,\
             trigger_count,total_shots,wall_ms,seed\n"
        );
    }

    #[test]
    fn csv_rows_follow_the_header_order() {
        let report = ExperimentReport::new(42, vec![sample_row()]);
        let csv = report.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            CSV_HEADER.join(",")
        );
        assert_eq!(
            lines.next().unwrap(),
            "5.1,EQ,original,4,0.15,1545,0,100,3,0,618000,1234,42"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut row = sample_row();
        // A value that exercises shortest-representation float printing.
        row.epsilon = 0.1 + 0.2;
        let report = ExperimentReport::new(7, vec![row]);
        let text = report.to_json().unwrap();
        let back = ExperimentReport::from_json(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn emit_report_requires_a_known_extension() {
        let dir = tempfile::tempdir().unwrap();
        let report = ExperimentReport::new(3, vec![sample_row()]);

        let csv_path = dir.path().join("out.csv");
        emit_report(&report, &csv_path).unwrap();
        let csv = std::fs::read_to_string(&csv_path).unwrap();
        assert!(csv.starts_with("entry_id,task,"));

        let json_path = dir.path().join("out.json");
        emit_report(&report, &json_path).unwrap();
        let back =
            ExperimentReport::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(back, report);

        let bad = dir.path().join("out.txt");
        assert!(emit_report(&report, &bad).is_err());
    }
}
