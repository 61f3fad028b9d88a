//! Tilting experiment: the exact finite-volume change of measure between the
//! critical (H = 0) ensemble and the near-critical field `H = h a^{(d+2)/2}`,
//! checked by running both pipelines and comparing means, variances and
//! moment generating functions, next to the Gaussian-form predictions.

use anyhow::{bail, Result};
use serde::Serialize;

use ising_core::lattice::LatticeGraph;
use ising_core::mc::{sample_ensemble, ModelParams, Schedule, SpinConfiguration};
use ising_core::observables::{
    covariance_estimate, field_functional, mgf_estimate, tilt_reweight, TestFunction,
};
use ising_core::stats::{batch_means, effective_sample_size, kahan_sum, mean, EstimateRecord};

use crate::config::ExperimentConfig;
use crate::report::{ResultRecord, Row};

/// Minimum effective sample size before a tilted estimate is flagged.
pub const ESS_FLOOR: f64 = 200.0;

#[derive(Debug, Clone, Serialize)]
pub struct TiltComparison {
    pub test_function: String,
    pub h: f64,
    pub mean_tilt: f64,
    pub mean_tilt_se: f64,
    pub mean_direct: f64,
    pub mean_direct_se: f64,
    /// Gaussian-form prediction `h * Cov_0(Phi(f), Phi(1))`.
    pub mean_predicted: f64,
    pub var_tilt: f64,
    pub var_tilt_se: f64,
    pub var_direct: f64,
    pub var_direct_se: f64,
    pub effective_samples: f64,
    pub reliable: bool,
    pub mean_sigmas: f64,
    pub var_sigmas: f64,
}

fn weighted_jackknife(
    ws: &[f64],
    fs: &[f64],
    nb: usize,
    stat: impl Fn(&[f64], &[f64]) -> f64,
) -> (f64, f64) {
    let nb = nb.min(ws.len()).max(2);
    let batch = ws.len() / nb;
    let used = nb * batch;
    let full = stat(&ws[..used], &fs[..used]);
    let mut parts = Vec::with_capacity(nb);
    let mut bw = Vec::with_capacity(used - batch);
    let mut bf = Vec::with_capacity(used - batch);
    for i in 0..nb {
        bw.clear();
        bf.clear();
        bw.extend_from_slice(&ws[..i * batch]);
        bw.extend_from_slice(&ws[(i + 1) * batch..used]);
        bf.extend_from_slice(&fs[..i * batch]);
        bf.extend_from_slice(&fs[(i + 1) * batch..used]);
        parts.push(stat(&bw, &bf));
    }
    let pm = mean(&parts);
    let var =
        kahan_sum(parts.iter().map(|&p| (p - pm) * (p - pm))) * (nb as f64 - 1.0) / nb as f64;
    (full, var.sqrt())
}

fn weighted_mean(ws: &[f64], fs: &[f64]) -> f64 {
    kahan_sum(ws.iter().zip(fs).map(|(&w, &f)| w * f)) / kahan_sum(ws.iter().copied())
}

fn weighted_var(ws: &[f64], fs: &[f64]) -> f64 {
    let m = weighted_mean(ws, fs);
    kahan_sum(ws.iter().zip(fs).map(|(&w, &f)| w * (f - m) * (f - m)))
        / kahan_sum(ws.iter().copied())
}

/// Runs the paired pipelines and returns the result rows plus the
/// comparison table.
pub fn run_tilt(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<(ResultRecord, Vec<TiltComparison>)> {
    let _ = threads; // two sequential ensembles; replicas are not split here
    cfg.validate()?;
    if cfg.field_h <= 0.0 {
        bail!("tilt experiment needs field_h > 0");
    }
    let started = std::time::Instant::now();
    let d = cfg.dimension;
    let n = *cfg.radii.last().unwrap();
    let g = LatticeGraph::<f64>::build_box(d, &vec![n; d], cfg.bc)?;
    let beta = cfg.beta_value();
    let a = cfg.lattice_spacing;
    let h = cfg.field_h;
    let big_h = cfg.physical_field();

    let schedule = Schedule {
        burn_in: cfg.schedule.burn_in,
        n_samples: cfg.schedule.n_samples * cfg.schedule.replicas,
        thinning: cfg.schedule.thinning,
        seed: cfg.seed,
    };
    let p_critical = ModelParams::with_spacing(beta, 0.0, a).map_err(|e| anyhow::anyhow!("{e}"))?;
    let p_field =
        ModelParams::with_spacing(beta, big_h, a).map_err(|e| anyhow::anyhow!("{e}"))?;

    let (crit_samples, _) = sample_ensemble(&g, &p_critical, cfg.sampler, &schedule)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let field_schedule = Schedule {
        seed: cfg.seed ^ 0x9e3779b97f4a7c15,
        ..schedule
    };
    let (field_samples, _) = sample_ensemble(&g, &p_field, cfg.sampler, &field_schedule)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let fns = vec![
        TestFunction::indicator(&g),
        TestFunction::bump(&g),
        TestFunction::coordinate(&g, 0),
    ];
    let indicator = TestFunction::indicator(&g);

    let scale = a.powf((d as f64 + 2.0) / 2.0);
    let weights: Vec<f64> = {
        let exps: Vec<f64> = crit_samples
            .iter()
            .map(|c| h * scale * c.magnetization() as f64)
            .collect();
        let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        exps.iter().map(|&e| (e - m).exp()).collect()
    };

    let experiment_id = format!("tilt-{}", cfg.short_hash());
    let bc = cfg.bc.to_string();
    let mut rows = Vec::new();
    let mut comparisons = Vec::new();

    for f in &fns {
        let phi_of = |c: &SpinConfiguration| field_functional(c, f, a, d);
        let phi_crit: Vec<f64> = crit_samples.iter().map(&phi_of).collect();
        let phi_field: Vec<f64> = field_samples.iter().map(&phi_of).collect();

        let tilt_mean = tilt_reweight(&crit_samples, h, a, d, &phi_of, ESS_FLOOR, cfg.seed)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let (var_t, var_t_se) = weighted_jackknife(&weights, &phi_crit, 32, weighted_var);
        let direct_mean = batch_means(&phi_field, cfg.seed).map_err(|e| anyhow::anyhow!("{e}"))?;
        let (var_d, var_d_se) =
            weighted_jackknife(&vec![1.0; phi_field.len()], &phi_field, 32, weighted_var);

        // linear-response prediction from the critical run
        let cov = covariance_estimate(&crit_samples, f, &indicator, a, d, cfg.seed)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mean_predicted = h * cov.value;

        let mean_sigmas = tilt_mean.record.sigmas_from(&direct_mean);
        let var_sigmas =
            (var_t - var_d).abs() / (var_t_se * var_t_se + var_d_se * var_d_se).sqrt().max(1e-300);

        comparisons.push(TiltComparison {
            test_function: f.name.clone(),
            h,
            mean_tilt: tilt_mean.record.value,
            mean_tilt_se: tilt_mean.record.std_error,
            mean_direct: direct_mean.value,
            mean_direct_se: direct_mean.std_error,
            mean_predicted,
            var_tilt: var_t,
            var_tilt_se: var_t_se,
            var_direct: var_d,
            var_direct_se: var_d_se,
            effective_samples: tilt_mean.effective_samples,
            reliable: tilt_mean.reliable,
            mean_sigmas,
            var_sigmas,
        });

        let push = |rows: &mut Vec<Row>, name: String, rec: &EstimateRecord<f64>| {
            rows.push(Row::from_record(
                &experiment_id,
                &name,
                n,
                beta,
                &bc,
                h,
                rec,
            ));
        };
        push(&mut rows, format!("phi_mean_tilt_{}", f.name), &tilt_mean.record);
        push(&mut rows, format!("phi_mean_direct_{}", f.name), &direct_mean);
        push(
            &mut rows,
            format!("phi_var_tilt_{}", f.name),
            &EstimateRecord {
                value: var_t,
                std_error: var_t_se,
                n_samples: crit_samples.len() as u64,
                tau: 0.5,
                seed: cfg.seed,
            },
        );
        push(
            &mut rows,
            format!("phi_var_direct_{}", f.name),
            &EstimateRecord {
                value: var_d,
                std_error: var_d_se,
                n_samples: field_samples.len() as u64,
                tau: 0.5,
                seed: cfg.seed,
            },
        );
        push(
            &mut rows,
            format!("phi_mean_pred_{}", f.name),
            &EstimateRecord {
                value: mean_predicted,
                std_error: h * cov.std_error,
                n_samples: crit_samples.len() as u64,
                tau: 0.5,
                seed: cfg.seed,
            },
        );

        // mgf grid of the field ensemble: tilt route (ratio of exponential
        // tilts over the critical run) against the direct-field route
        let sd = var_d.sqrt().max(1e-9);
        let denom_exps: Vec<f64> = crit_samples
            .iter()
            .map(|c| h * scale * c.magnetization() as f64)
            .collect();
        let dm = denom_exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let den: Vec<f64> = denom_exps.iter().map(|&e| (e - dm).exp()).collect();
        for j in [-2i32, -1, 1, 2] {
            let t = 0.35 * j as f64 / sd;
            // direct route
            let rec = mgf_estimate(&phi_field, t, cfg.seed).map_err(|e| anyhow::anyhow!("{e}"))?;
            push(&mut rows, format!("mgf_direct_t{j}_{}", f.name), &rec);
            // tilt route: <e^{t phi + h M}>_0 / <e^{h M}>_0, shifted sums
            let combined: Vec<f64> = phi_crit
                .iter()
                .zip(&denom_exps)
                .map(|(&phi, &e)| t * phi + e)
                .collect();
            let m = combined.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let num: Vec<f64> = combined.iter().map(|&e| (e - m).exp()).collect();
            let (ratio, ratio_se) = weighted_jackknife(&num, &den, 32, |ns, ds| {
                kahan_sum(ns.iter().copied()) / kahan_sum(ds.iter().copied())
            });
            let scale_back = (m - dm).exp();
            push(
                &mut rows,
                format!("mgf_tilt_t{j}_{}", f.name),
                &EstimateRecord {
                    value: ratio * scale_back,
                    std_error: ratio_se * scale_back,
                    n_samples: crit_samples.len() as u64,
                    tau: 0.5,
                    seed: cfg.seed,
                },
            );
        }
    }

    // weight diagnostics
    let ess = effective_sample_size(&weights);
    rows.push(Row {
        experiment_id: experiment_id.clone(),
        observable: "tilt_effective_samples".into(),
        n,
        beta,
        bc: bc.clone(),
        h,
        value: ess,
        std_error: 0.0,
        n_samples: crit_samples.len() as u64,
        tau: 0.0,
        seed: cfg.seed,
    });

    Ok((
        ResultRecord {
            experiment_id,
            config_hash: cfg.hash(),
            rows,
            wall_clock_secs: started.elapsed().as_secs_f64(),
        },
        comparisons,
    ))
}
