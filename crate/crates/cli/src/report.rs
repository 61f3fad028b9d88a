//! Result records and the CSV/JSON output formats.

use std::io::Write;
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use ising_core::stats::EstimateRecord;

/// One row of `results.csv`. Floats are written with Rust's shortest
/// round-trip formatting, so equal runs produce byte-identical files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Row {
    pub experiment_id: String,
    pub observable: String,
    pub n: i64,
    pub beta: f64,
    pub bc: String,
    pub h: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub tau: f64,
    pub seed: u64,
}

impl Row {
    pub fn from_record(
        experiment_id: &str,
        observable: &str,
        n: i64,
        beta: f64,
        bc: &str,
        h: f64,
        rec: &EstimateRecord<f64>,
    ) -> Self {
        Row {
            experiment_id: experiment_id.to_string(),
            observable: observable.to_string(),
            n,
            beta,
            bc: bc.to_string(),
            h,
            value: rec.value,
            std_error: rec.std_error,
            n_samples: rec.n_samples,
            tau: rec.tau,
            seed: rec.seed,
        }
    }
}

pub const CSV_HEADER: &str =
    "experiment_id,observable,n,beta,bc,h,value,std_error,n_samples,tau,seed";

pub fn write_csv<W: Write>(mut w: W, rows: &[Row]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment_id,
            r.observable,
            r.n,
            r.beta,
            r.bc,
            r.h,
            r.value,
            r.std_error,
            r.n_samples,
            r.tau,
            r.seed
        )?;
    }
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            anyhow::ensure!(line == CSV_HEADER, "unexpected CSV header: {line}");
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(f.len() == 11, "bad CSV row: {line}");
        rows.push(Row {
            experiment_id: f[0].to_string(),
            observable: f[1].to_string(),
            n: f[2].parse()?,
            beta: f[3].parse()?,
            bc: f[4].to_string(),
            h: f[5].parse()?,
            value: f[6].parse()?,
            std_error: f[7].parse()?,
            n_samples: f[8].parse()?,
            tau: f[9].parse()?,
            seed: f[10].parse()?,
        });
    }
    Ok(rows)
}

/// Everything a run leaves behind.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub config_hash: String,
    pub rows: Vec<Row>,
    pub wall_clock_secs: f64,
}

impl ResultRecord {
    /// Writes `results.csv` (statistics only; wall clock stays in run.json).
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        write_csv(&mut csv, &self.rows)?;
        std::fs::write(dir.join("results.csv"), csv)?;
        let meta = serde_json::json!({
            "experiment_id": self.experiment_id,
            "config_hash": self.config_hash,
            "wall_clock_secs": self.wall_clock_secs,
            "n_rows": self.rows.len(),
        });
        std::fs::write(dir.join("run.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}
