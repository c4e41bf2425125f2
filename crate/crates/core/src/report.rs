//! Tabular experiment reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

/// Per-cube or per-sample detail rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub experiment: String,
    pub run_id: String,
    pub level: u32,
    pub seed: u64,
    pub config_hash: String,
    pub params: BTreeMap<String, String>,
    pub statistics: Vec<Statistic>,
    pub rows: Table,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(experiment: &str, level: u32, seed: u64) -> Self {
        ExperimentReport {
            version: REPORT_VERSION,
            experiment: experiment.to_string(),
            run_id: experiment.to_string(),
            level,
            seed,
            config_hash: String::new(),
            params: BTreeMap::new(),
            statistics: Vec::new(),
            rows: Table::default(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.params.insert(name.to_string(), value.to_string());
        self
    }

    /// Record a statistic; `pass` feeds the report's overall verdict.
    pub fn stat(&mut self, name: &str, value: f64, tolerance: Option<f64>, pass: bool) -> &mut Self {
        self.pass &= pass;
        self.statistics.push(Statistic { name: name.to_string(), value, tolerance, pass });
        self
    }

    /// Record a statistic that is informational only.
    pub fn info(&mut self, name: &str, value: f64) -> &mut Self {
        self.statistics.push(Statistic { name: name.to_string(), value, tolerance: None, pass: true });
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.statistic(name).map(|s| s.value)
    }

    /// Stamp identifiers coming from the run configuration.
    pub fn stamp(&mut self, config_hash: &str) {
        self.config_hash = config_hash.to_string();
        let short: String = config_hash.chars().take(12).collect();
        self.run_id = format!("{}-{}-{}", self.experiment, short, self.seed);
    }

    fn params_field(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }

    /// Summary CSV: `run_id,level,params,statistic,value,tolerance,pass`.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["run_id", "level", "params", "statistic", "value", "tolerance", "pass"])?;
        let params = self.params_field();
        for s in &self.statistics {
            out.write_record([
                self.run_id.clone(),
                self.level.to_string(),
                params.clone(),
                s.name.clone(),
                fmt_f64(s.value),
                s.tolerance.map(fmt_f64).unwrap_or_default(),
                s.pass.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Detail CSV: `run_id` followed by the table's own columns.
    pub fn write_rows_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["run_id".to_string()];
        header.extend(self.rows.columns.iter().cloned());
        out.write_record(&header)?;
        for r in &self.rows.rows {
            let mut rec = vec![self.run_id.clone()];
            rec.extend(r.iter().cloned());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Shortest round-trip decimal form; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}
