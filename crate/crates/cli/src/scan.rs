//! Scaling scans: for each bulk radius n, sample the free box `[-Mn, Mn]^d`
//! (or the periodic box `[-n, n]^d`), accumulate translation-averaged
//! on-axis two-point values for bulk pairs and the windowed susceptibility,
//! and emit one CSV row per observable.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};

use ising_core::lattice::{Bc, LatticeGraph};
use ising_core::mc::{for_each_sample, ModelParams, Schedule};
use ising_core::stats::{batch_means, EstimateRecord};

use crate::config::ExperimentConfig;
use crate::report::{ResultRecord, Row};

/// Translation-averaged on-axis pair measurement over a centered window,
/// plus the window magnetization. Pure index arithmetic on the sampling box.
pub struct WindowMeasure {
    strides: Vec<i64>,
    outer_radii: Vec<i64>,
    window: i64,
    wrap: bool,
    pub r_max: usize,
    /// Number of (site, axis) pairs contributing at each separation r.
    pub counts: Vec<f64>,
    window_sites: Vec<u32>,
}

impl WindowMeasure {
    pub fn new(g: &LatticeGraph<f64>, window: i64) -> Result<Self> {
        let outer_radii = g
            .radii()
            .context("scan needs box graphs")?
            .to_vec();
        let d = g.dimension();
        let wrap = g.bc() == Bc::Periodic;
        anyhow::ensure!(
            outer_radii.iter().all(|&r| r >= window),
            "window radius {window} exceeds the box"
        );
        let sides: Vec<i64> = outer_radii.iter().map(|&r| 2 * r + 1).collect();
        let mut strides = vec![1i64; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sides[i + 1];
        }
        let r_max = if wrap { window } else { 2 * window } as usize;
        let w_side = (2 * window + 1) as f64;
        let mut counts = vec![0.0; r_max + 1];
        for r in 1..=r_max {
            let per_axis = if wrap {
                w_side.powi(d as i32)
            } else {
                (w_side - r as f64) * w_side.powi(d as i32 - 1)
            };
            counts[r] = per_axis * d as f64;
        }
        // window site indices in odometer order
        let mut window_sites = Vec::with_capacity((w_side as usize).pow(d as u32));
        let mut x = vec![-window; d];
        loop {
            let idx: i64 = x
                .iter()
                .zip(&outer_radii)
                .zip(&strides)
                .map(|((&c, &r), &s)| (c + r) * s)
                .sum();
            window_sites.push(idx as u32);
            let mut axis = d;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                x[axis] += 1;
                if x[axis] <= window {
                    break;
                }
                x[axis] = -window;
            }
            if x.iter().all(|&c| c == -window) {
                break;
            }
        }
        Ok(WindowMeasure {
            strides,
            outer_radii,
            window,
            wrap,
            r_max,
            counts,
            window_sites,
        })
    }

    /// Returns per-separation translation averages `g_r` (index 0 unused)
    /// and the window magnetization.
    pub fn measure(&self, spins: &[i8]) -> (Vec<f64>, i64) {
        let d = self.strides.len();
        let w = self.window;
        let mut sums = vec![0i64; self.r_max + 1];
        let mut mag = 0i64;
        let mut coord = vec![-w; d];
        let l = 2 * w + 1;
        for &site in &self.window_sites {
            let idx = site as usize;
            let s = spins[idx] as i64;
            mag += s;
            for a in 0..d {
                let stride = self.strides[a];
                if self.wrap {
                    // partner wraps within the periodic box (outer radius = w)
                    let side_stride = (2 * self.outer_radii[a] + 1) * stride;
                    for r in 1..=self.r_max as i64 {
                        let mut partner = idx as i64 + r * stride;
                        if coord[a] + r > w {
                            partner -= side_stride;
                        }
                        sums[r as usize] += s * spins[partner as usize] as i64;
                    }
                } else {
                    let r_here = w - coord[a];
                    for r in 1..=r_here {
                        let partner = idx as i64 + r * stride;
                        sums[r as usize] += s * spins[partner as usize] as i64;
                    }
                }
            }
            // advance the coordinate odometer alongside the site list
            let mut axis = d;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                coord[axis] += 1;
                if coord[axis] < l - w {
                    break;
                }
                coord[axis] = -w;
            }
        }
        let g_r = (0..=self.r_max)
            .map(|r| {
                if r == 0 {
                    0.0
                } else {
                    sums[r] as f64 / self.counts[r]
                }
            })
            .collect();
        (g_r, mag)
    }
}

struct ReplicaOut {
    g_series: Vec<Vec<f64>>, // [r][sample]
    chi_series: Vec<f64>,
}

/// Runs the scan for one radius and returns merged estimates:
/// `(g_r records, chi record)`.
fn scan_one_radius(
    cfg: &ExperimentConfig,
    n: i64,
    threads: usize,
) -> Result<(Vec<EstimateRecord<f64>>, EstimateRecord<f64>)> {
    let d = cfg.dimension;
    let beta = cfg.beta_value();
    let (outer, window) = match cfg.bc {
        Bc::Free => (cfg.cube_ratio * n, n),
        Bc::Periodic => (n, n),
    };
    let g = LatticeGraph::<f64>::build_box(d, &vec![outer; d], cfg.bc)?;
    let meas = WindowMeasure::new(&g, window)?;
    let p = ModelParams::with_spacing(beta, cfg.physical_field(), cfg.lattice_spacing)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    anyhow::ensure!(
        cfg.physical_field() == 0.0,
        "scan measures chi and needs an H = 0 ensemble"
    );
    let schedule = Schedule {
        burn_in: cfg.schedule.burn_in,
        n_samples: cfg.schedule.n_samples,
        thinning: cfg.schedule.thinning,
        seed: cfg.seed,
    };
    let replicas = cfg.schedule.replicas as usize;
    let slots: Mutex<Vec<Option<ReplicaOut>>> = Mutex::new((0..replicas).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let v_window = ((2 * window + 1) as f64).powi(d as i32);

    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for _ in 0..threads.max(1).min(replicas) {
            handles.push(scope.spawn(|| -> Result<()> {
                loop {
                    let rep = next.fetch_add(1, Ordering::Relaxed);
                    if rep >= replicas {
                        return Ok(());
                    }
                    let mut g_series: Vec<Vec<f64>> =
                        vec![Vec::with_capacity(schedule.n_samples as usize); meas.r_max + 1];
                    let mut chi_series = Vec::with_capacity(schedule.n_samples as usize);
                    for_each_sample(&g, &p, cfg.sampler, &schedule, rep as u64, |_, c| {
                        let (g_r, mag) = meas.measure(&c.spins);
                        for r in 1..=meas.r_max {
                            g_series[r].push(g_r[r]);
                        }
                        chi_series.push((mag as f64) * (mag as f64) / v_window);
                    })
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                    slots.lock().unwrap()[rep] = Some(ReplicaOut {
                        g_series,
                        chi_series,
                    });
                }
            }));
        }
        for h in handles {
            h.join().expect("replica thread")?;
        }
        Ok(())
    })?;

    let outs: Vec<ReplicaOut> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("replica completed"))
        .collect();

    // merge replicas in index order
    let merge_series = |select: &dyn Fn(&ReplicaOut) -> &Vec<f64>| -> Result<EstimateRecord<f64>> {
        let mut merged: Option<EstimateRecord<f64>> = None;
        for (rep, out) in outs.iter().enumerate() {
            let rec = batch_means(select(out), cfg.seed ^ rep as u64)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            merged = Some(match merged {
                None => rec,
                Some(m) => m.merge(&rec),
            });
        }
        Ok(merged.expect("at least one replica"))
    };

    let mut g_records = Vec::with_capacity(meas.r_max + 1);
    for r in 0..=meas.r_max {
        if r == 0 {
            g_records.push(EstimateRecord::exact(1.0, 0, cfg.seed));
            continue;
        }
        g_records.push(merge_series(&|o: &ReplicaOut| &o.g_series[r])?);
    }
    let chi_record = merge_series(&|o: &ReplicaOut| &o.chi_series)?;
    Ok((g_records, chi_record))
}

/// Full scan over the configured radii.
pub fn run_scan(cfg: &ExperimentConfig, threads: usize) -> Result<ResultRecord> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let beta = cfg.beta_value();
    let experiment_id = format!("scan-{}", cfg.short_hash());
    let bc = cfg.bc.to_string();
    let mut rows = Vec::new();
    for &n in &cfg.radii {
        let (g_records, chi) = scan_one_radius(cfg, n, threads)?;
        for (r, rec) in g_records.iter().enumerate().skip(1) {
            rows.push(Row::from_record(
                &experiment_id,
                &format!("two_point_r{r}"),
                n,
                beta,
                &bc,
                cfg.field_h,
                rec,
            ));
        }
        // the box-scale pair value used by the decay-exponent fit
        let scaled = &g_records[n as usize];
        rows.push(Row::from_record(
            &experiment_id,
            "two_point_scaled",
            n,
            beta,
            &bc,
            cfg.field_h,
            scaled,
        ));
        rows.push(Row::from_record(
            &experiment_id,
            "chi",
            n,
            beta,
            &bc,
            cfg.field_h,
            &chi,
        ));
    }
    Ok(ResultRecord {
        experiment_id,
        config_hash: cfg.hash(),
        rows,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}
