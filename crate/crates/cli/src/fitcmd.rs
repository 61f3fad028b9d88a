//! Power-law fits over scan results.

use anyhow::{bail, Result};
use serde::Serialize;

use ising_core::fit::{fit_power_law, PowerLawFit};

use crate::report::Row;

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub observable: String,
    pub exponent: f64,
    pub exponent_se: f64,
    pub amplitude: f64,
    pub goodness: f64,
    pub window_sensitivity: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitCurveRow {
    pub n: i64,
    pub value: f64,
    pub std_error: f64,
    pub fit: f64,
}

/// Fits `observable` rows against n. Rejects fewer than three points,
/// nonpositive values, and mixed inputs (rows that disagree on beta, bc or
/// h, or duplicate n values).
pub fn run_fit(rows: &[Row], observable: &str, min_n: Option<i64>) -> Result<(FitReport, Vec<FitCurveRow>)> {
    let mut selected: Vec<&Row> = rows
        .iter()
        .filter(|r| r.observable == observable && min_n.map_or(true, |m| r.n >= m))
        .collect();
    if selected.len() < 3 {
        bail!(
            "need at least 3 points for observable {observable:?}, found {}",
            selected.len()
        );
    }
    selected.sort_by_key(|r| r.n);
    let first = selected[0];
    for r in &selected {
        if r.beta != first.beta || r.bc != first.bc || r.h != first.h {
            bail!(
                "mixed input: rows disagree on (beta, bc, h): ({}, {}, {}) vs ({}, {}, {})",
                first.beta,
                first.bc,
                first.h,
                r.beta,
                r.bc,
                r.h
            );
        }
    }
    if selected.windows(2).any(|w| w[0].n == w[1].n) {
        bail!("mixed input: duplicate n values for observable {observable:?}");
    }
    let points: Vec<(f64, f64, f64)> = selected
        .iter()
        .map(|r| (r.n as f64, r.value, r.std_error))
        .collect();
    let fit: PowerLawFit<f64> = fit_power_law(&points).map_err(|e| anyhow::anyhow!("{e}"))?;
    let curve = selected
        .iter()
        .map(|r| FitCurveRow {
            n: r.n,
            value: r.value,
            std_error: r.std_error,
            fit: fit.amplitude * (r.n as f64).powf(fit.exponent),
        })
        .collect();
    Ok((
        FitReport {
            observable: observable.to_string(),
            exponent: fit.exponent,
            exponent_se: fit.exponent_se,
            amplitude: fit.amplitude,
            goodness: fit.goodness,
            window_sensitivity: fit.window_sensitivity,
            n_points: points.len(),
        },
        curve,
    ))
}

pub fn write_fit_csv<W: std::io::Write>(mut w: W, curve: &[FitCurveRow]) -> Result<()> {
    writeln!(w, "n,value,std_error,fit")?;
    for r in curve {
        writeln!(w, "{},{},{},{}", r.n, r.value, r.std_error, r.fit)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(observable: &str, n: i64, value: f64, beta: f64) -> Row {
        Row {
            experiment_id: "t".into(),
            observable: observable.into(),
            n,
            beta,
            bc: "free".into(),
            h: 0.0,
            value,
            std_error: 0.0,
            n_samples: 10,
            tau: 0.5,
            seed: 0,
        }
    }

    #[test]
    fn synthetic_square_law() {
        let rows: Vec<Row> = (2..8)
            .map(|n| row("chi", n, 3.0 * (n as f64).powi(2), 0.5))
            .collect();
        let (report, curve) = run_fit(&rows, "chi", None).unwrap();
        assert!((report.exponent - 2.0).abs() < 1e-10);
        assert!((report.amplitude - 3.0).abs() < 1e-8);
        assert_eq!(curve.len(), 6);
    }

    #[test]
    fn mixed_inputs_rejected() {
        let mut rows: Vec<Row> = (2..6)
            .map(|n| row("chi", n, (n as f64).powi(2), 0.5))
            .collect();
        rows[2].beta = 0.6;
        let err = run_fit(&rows, "chi", None).unwrap_err().to_string();
        assert!(err.contains("mixed input"), "{err}");
    }

    #[test]
    fn too_few_points_rejected() {
        let rows: Vec<Row> = (2..4).map(|n| row("chi", n, 1.0, 0.5)).collect();
        assert!(run_fit(&rows, "chi", None).is_err());
        assert!(run_fit(&rows, "nope", None).is_err());
    }
}
