//! Estimators over configuration streams: two-point tables, susceptibility,
//! magnetization-field functionals, exponential tilting, moment generating
//! functions, and cumulant diagnostics.

use crate::error::{Error, Result};
use crate::lattice::{Bc, LatticeGraph};
use crate::mc::SpinConfiguration;
use crate::scalar::Scalar;
use crate::stats::{
    batch_means, effective_sample_size, jackknife_batches, kahan_sum, mean, EstimateRecord,
    KahanSum,
};

/// Sample means of `sigma_x sigma_y` for the given pairs, with batch-means
/// errors. Rejects empty streams.
pub fn two_point_table<S: Scalar>(
    samples: &[SpinConfiguration],
    pairs: &[(usize, usize)],
    seed: u64,
) -> Result<Vec<EstimateRecord<S>>> {
    if samples.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut out = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let series: Vec<S> = samples
            .iter()
            .map(|c| S::from_f64((c.spins[x] * c.spins[y]) as f64))
            .collect();
        out.push(batch_means(&series, seed)?);
    }
    Ok(out)
}

/// Susceptibility record for one box.
#[derive(Debug, Clone)]
pub struct SusceptibilityRecord<S> {
    pub n: i64,
    pub beta: S,
    pub bc: Bc,
    pub chi: EstimateRecord<S>,
}

/// `chi_n = <(sum_x s_x)^2> / |V|` from an H = 0 stream (equal to the pair
/// sum there, since one-point functions vanish). Streams with a field are
/// rejected: the truncated definition is not estimated here.
pub fn susceptibility<S: Scalar>(
    samples: &[SpinConfiguration],
    g: &LatticeGraph<S>,
    beta: S,
    field: S,
    seed: u64,
) -> Result<SusceptibilityRecord<S>> {
    if !field.is_zero() {
        return Err(Error::InvalidArgument(
            "susceptibility is defined from H = 0 streams".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::EmptyStream);
    }
    let v = S::from_usize_(g.n_vertices());
    let series: Vec<S> = samples
        .iter()
        .map(|c| {
            let m = S::from_f64(c.magnetization() as f64);
            m * m / v
        })
        .collect();
    let n = g.radii().map(|r| r.iter().copied().max().unwrap_or(0)).unwrap_or(0);
    Ok(SusceptibilityRecord {
        n,
        beta,
        bc: g.bc(),
        chi: batch_means(&series, seed)?,
    })
}

/// Exact susceptibility by the pair sum over a small graph.
pub fn susceptibility_exact<S: Scalar>(g: &LatticeGraph<S>, beta: S) -> Result<S> {
    let nv = g.n_vertices();
    let mut pairs = Vec::with_capacity(nv * (nv - 1) / 2);
    for x in 0..nv {
        for y in (x + 1)..nv {
            pairs.push((x, y));
        }
    }
    let vals = crate::exact::two_point_table_enum(g, beta, S::zero(), &pairs)?;
    let mut sum = KahanSum::new();
    for v in vals {
        sum.add(v + v); // both orderings
    }
    sum.add(S::from_usize_(nv)); // x = y terms
    Ok(sum.value() / S::from_usize_(nv))
}

/// A test function sampled on the sites of a graph.
#[derive(Debug, Clone)]
pub struct TestFunction<S> {
    pub name: String,
    pub values: Vec<S>,
}

impl<S: Scalar> TestFunction<S> {
    /// Indicator of the whole box: `Phi(f)` is the scaled total magnetization.
    pub fn indicator(g: &LatticeGraph<S>) -> Self {
        TestFunction {
            name: "indicator".into(),
            values: vec![S::one(); g.n_vertices()],
        }
    }

    /// Centered product bump `prod_i (1 - (x_i / (n_i + 1))^2)`.
    pub fn bump(g: &LatticeGraph<S>) -> Self {
        let radii = g.radii().map(|r| r.to_vec()).unwrap_or_default();
        let values = g
            .coords()
            .iter()
            .map(|x| {
                let mut v = S::one();
                for (i, &c) in x.iter().enumerate() {
                    let r = S::from_f64((radii.get(i).copied().unwrap_or(1) + 1) as f64);
                    let t = S::from_f64(c as f64) / r;
                    v = v * (S::one() - t * t);
                }
                v
            })
            .collect();
        TestFunction {
            name: "bump".into(),
            values,
        }
    }

    /// A single coordinate, `f(x) = x_axis`.
    pub fn coordinate(g: &LatticeGraph<S>, axis: usize) -> Self {
        TestFunction {
            name: format!("coordinate{axis}"),
            values: g
                .coords()
                .iter()
                .map(|x| S::from_f64(x[axis] as f64))
                .collect(),
        }
    }
}

/// `Phi^{a}(f) = a^{(d+2)/2} sum_x f(x) s_x` for one configuration.
pub fn field_functional<S: Scalar>(
    config: &SpinConfiguration,
    f: &TestFunction<S>,
    a: S,
    d: usize,
) -> S {
    let scale = a.powf(S::from_f64((d as f64 + 2.0) / 2.0));
    let mut sum = KahanSum::new();
    for (x, &s) in config.spins.iter().enumerate() {
        sum.add(f.values[x] * S::from_f64(s as f64));
    }
    scale * sum.value()
}

/// Sample covariance of `Phi(f)` and `Phi(g)` with jackknife errors.
pub fn covariance_estimate<S: Scalar>(
    samples: &[SpinConfiguration],
    f: &TestFunction<S>,
    g_fn: &TestFunction<S>,
    a: S,
    d: usize,
    seed: u64,
) -> Result<EstimateRecord<S>> {
    if samples.len() < 4 {
        return Err(Error::EmptyStream);
    }
    let phi_f: Vec<S> = samples
        .iter()
        .map(|c| field_functional(c, f, a, d))
        .collect();
    let phi_g: Vec<S> = samples
        .iter()
        .map(|c| field_functional(c, g_fn, a, d))
        .collect();
    let (value, se) = jackknife_two_series(&phi_f, &phi_g, 32, |xs, ys| {
        let mx = mean(xs);
        let my = mean(ys);
        kahan_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)))
            / S::from_usize_(xs.len())
    })?;
    Ok(EstimateRecord {
        value,
        std_error: se,
        n_samples: samples.len() as u64,
        tau: S::from_f64(0.5),
        seed,
    })
}

fn jackknife_two_series<S: Scalar>(
    xs: &[S],
    ys: &[S],
    nb: usize,
    stat: impl Fn(&[S], &[S]) -> S,
) -> Result<(S, S)> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::SizeMismatch("paired series lengths differ".into()));
    }
    let nb = nb.min(xs.len()).max(2);
    let batch = xs.len() / nb;
    if batch == 0 {
        return Err(Error::InvalidArgument("too few samples to jackknife".into()));
    }
    let used = nb * batch;
    let full = stat(&xs[..used], &ys[..used]);
    let mut parts = Vec::with_capacity(nb);
    let mut bx = Vec::with_capacity(used - batch);
    let mut by = Vec::with_capacity(used - batch);
    for i in 0..nb {
        bx.clear();
        by.clear();
        bx.extend_from_slice(&xs[..i * batch]);
        bx.extend_from_slice(&xs[(i + 1) * batch..used]);
        by.extend_from_slice(&ys[..i * batch]);
        by.extend_from_slice(&ys[(i + 1) * batch..used]);
        parts.push(stat(&bx, &by));
    }
    let nb_s = S::from_usize_(nb);
    let pm = mean(&parts);
    let var = kahan_sum(parts.iter().map(|&p| (p - pm) * (p - pm))) * (nb_s - S::one()) / nb_s;
    Ok((full, var.sqrt()))
}

/// Result of an exponential-tilting estimate.
#[derive(Debug, Clone)]
pub struct TiltEstimate<S> {
    pub record: EstimateRecord<S>,
    pub effective_samples: S,
    pub reliable: bool,
}

/// Estimates `<F>_H` from critical (`H = 0`) samples by exponential tilting:
/// `<F e^{h M^a}>_0 / <e^{h M^a}>_0` with `M^a = a^{(d+2)/2} sum_x s_x`.
/// This is the exact finite-volume change of measure; the effective sample
/// size of the weights is reported and the estimate flagged when it falls
/// below `ess_floor`.
pub fn tilt_reweight<S: Scalar>(
    samples: &[SpinConfiguration],
    h: S,
    a: S,
    d: usize,
    f_obs: impl Fn(&SpinConfiguration) -> S,
    ess_floor: S,
    seed: u64,
) -> Result<TiltEstimate<S>> {
    if samples.is_empty() {
        return Err(Error::EmptyStream);
    }
    let scale = a.powf(S::from_f64((d as f64 + 2.0) / 2.0));
    let exponents: Vec<S> = samples
        .iter()
        .map(|c| h * scale * S::from_f64(c.magnetization() as f64))
        .collect();
    let shift = exponents
        .iter()
        .fold(S::neg_infinity(), |m, &x| if x > m { x } else { m });
    let weights: Vec<S> = exponents.iter().map(|&x| (x - shift).exp()).collect();
    let f_vals: Vec<S> = samples.iter().map(|c| f_obs(c)).collect();
    let (value, se) = jackknife_two_series(&weights, &f_vals, 32, |ws, fs| {
        let num = kahan_sum(ws.iter().zip(fs).map(|(&w, &f)| w * f));
        let den = kahan_sum(ws.iter().copied());
        num / den
    })?;
    let ess = effective_sample_size(&weights);
    Ok(TiltEstimate {
        record: EstimateRecord {
            value,
            std_error: se,
            n_samples: samples.len() as u64,
            tau: S::from_f64(0.5),
            seed,
        },
        effective_samples: ess,
        reliable: ess >= ess_floor,
    })
}

/// `<exp(t Phi)>` with a max-shift guard; the record's value and error are in
/// the original (unshifted) scale.
pub fn mgf_estimate<S: Scalar>(phi: &[S], t: S, seed: u64) -> Result<EstimateRecord<S>> {
    if phi.is_empty() {
        return Err(Error::EmptyStream);
    }
    let shift = phi
        .iter()
        .map(|&x| t * x)
        .fold(S::neg_infinity(), |m, x| if x > m { x } else { m });
    let shifted: Vec<S> = phi.iter().map(|&x| (t * x - shift).exp()).collect();
    let rec = batch_means(&shifted, seed)?;
    let scale = shift.exp();
    Ok(EstimateRecord {
        value: rec.value * scale,
        std_error: rec.std_error * scale,
        ..rec
    })
}

/// Moment diagnostics of a scalar series with jackknife errors.
#[derive(Debug, Clone)]
pub struct CumulantReport<S> {
    pub variance: (S, S),
    pub excess_kurtosis: (S, S),
    pub binder: (S, S),
}

/// Variance, excess kurtosis, and the Binder ratio `1 - <m^4>/(3 <m^2>^2)`.
pub fn cumulant_diagnostics<S: Scalar>(series: &[S], min_samples: usize) -> Result<CumulantReport<S>> {
    if series.len() < min_samples.max(8) {
        return Err(Error::InvalidArgument(format!(
            "cumulant diagnostics need at least {} samples, got {}",
            min_samples.max(8),
            series.len()
        )));
    }
    let three = S::from_f64(3.0);
    let variance = jackknife_batches(series, 32, |xs| {
        let m = mean(xs);
        kahan_sum(xs.iter().map(|&x| (x - m) * (x - m))) / S::from_usize_(xs.len())
    })?;
    let excess_kurtosis = jackknife_batches(series, 32, |xs| {
        let m = mean(xs);
        let n = S::from_usize_(xs.len());
        let m2 = kahan_sum(xs.iter().map(|&x| (x - m) * (x - m))) / n;
        let m4 = kahan_sum(xs.iter().map(|&x| {
            let d = x - m;
            d * d * d * d
        })) / n;
        m4 / (m2 * m2) - three
    })?;
    let binder = jackknife_batches(series, 32, |xs| {
        let n = S::from_usize_(xs.len());
        let m2 = kahan_sum(xs.iter().map(|&x| x * x)) / n;
        let m4 = kahan_sum(xs.iter().map(|&x| x * x * x * x)) / n;
        S::one() - m4 / (three * m2 * m2)
    })?;
    Ok(CumulantReport {
        variance,
        excess_kurtosis,
        binder,
    })
}
