//! Report files: summary CSV, detail CSV, JSON, and a timing sidecar.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use diamond_core::report::{Statistic, REPORT_VERSION};
use diamond_core::ExperimentReport;
use diamond_experiments::{run_all, run_experiment, ExperimentError, RunConfig, EXPERIMENTS};
use serde::Serialize;

use crate::CliError;

/// Write `<name>.summary.csv`, `<name>.rows.csv` and `<name>.json`.
pub fn write_report(rep: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let name = &rep.experiment;
    let summary = dir.join(format!("{name}.summary.csv"));
    let rows = dir.join(format!("{name}.rows.csv"));
    let json = dir.join(format!("{name}.json"));
    rep.write_summary_csv(fs::File::create(&summary)?).map_err(|e| CliError::Failed(format!("csv: {e}")))?;
    rep.write_rows_csv(fs::File::create(&rows)?).map_err(|e| CliError::Failed(format!("csv: {e}")))?;
    fs::write(&json, rep.to_json() + "\n")?;
    Ok(vec![summary, rows, json])
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    config_hash: &'a str,
    started: String,
    finished: String,
    elapsed_ms: u128,
    threads: usize,
}

fn write_sidecar(dir: &Path, name: &str, hash: &str, started: chrono::DateTime<chrono::Utc>, clock: Instant) -> Result<(), CliError> {
    let side = Sidecar {
        command: name,
        config_hash: hash,
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        elapsed_ms: clock.elapsed().as_millis(),
        threads: rayon::current_num_threads(),
    };
    fs::write(dir.join(format!("{name}.run.json")), serde_json::to_string_pretty(&side).expect("sidecar serializes") + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct AllEntry {
    experiment: String,
    run_id: String,
    pass: bool,
    error: Option<String>,
    statistics: Vec<Statistic>,
}

#[derive(Serialize)]
struct AllSummary {
    version: u32,
    config_hash: String,
    seed: u64,
    pass: bool,
    experiments: Vec<AllEntry>,
}

fn print_report(rep: &ExperimentReport) {
    for s in &rep.statistics {
        let tol = s.tolerance.map(|t| format!(" (tolerance {t})")).unwrap_or_default();
        println!("  {} = {}{tol}{}", s.name, s.value, if s.pass { "" } else { "  FAILED" });
    }
    println!("{}: {}", rep.experiment, if rep.pass { "PASS" } else { "FAIL" });
}

/// Run `name` (or `all`), write its files, and report whether everything passed.
pub fn run(name: &str, cfg: &RunConfig, hash: &str, dir: &Path) -> Result<bool, CliError> {
    if name != "all" && !EXPERIMENTS.contains(&name) {
        return Err(CliError::Usage(format!("unknown experiment `{name}`; known: all, {}", EXPERIMENTS.join(", "))));
    }
    let started = chrono::Utc::now();
    let clock = Instant::now();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), format!("# config_hash = {hash}\n{}", cfg.to_text()))?;
    if name != "all" {
        let mut rep = run_experiment(name, cfg)?;
        rep.stamp(hash);
        write_report(&rep, dir)?;
        write_sidecar(dir, name, hash, started, clock)?;
        print_report(&rep);
        return Ok(rep.pass);
    }
    let mut entries = Vec::new();
    let mut worst: Option<ExperimentError> = None;
    for (exp, res) in run_all(cfg) {
        match res {
            Ok(mut rep) => {
                rep.stamp(hash);
                write_report(&rep, dir)?;
                print_report(&rep);
                entries.push(AllEntry { experiment: exp.into(), run_id: rep.run_id.clone(), pass: rep.pass, error: None, statistics: rep.statistics });
            }
            Err(e) => {
                println!("{exp}: ERROR {e}");
                entries.push(AllEntry { experiment: exp.into(), run_id: String::new(), pass: false, error: Some(e.to_string()), statistics: vec![] });
                worst.get_or_insert(e);
            }
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    let summary = AllSummary { version: REPORT_VERSION, config_hash: hash.into(), seed: cfg.seed, pass, experiments: entries };
    fs::write(dir.join("all.summary.json"), serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n")?;
    write_sidecar(dir, "all", hash, started, clock)?;
    println!("all: {}", if pass { "PASS" } else { "FAIL" });
    match worst {
        Some(e) => Err(e.into()),
        None => Ok(pass),
    }
}
