//! Error estimation for correlated Monte Carlo series: compensated sums,
//! non-overlapping batch means with automatic batch doubling, windowed
//! integrated autocorrelation time, and jackknife over batches.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kahan-compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<S> {
    sum: S,
    comp: S,
}

impl<S: Scalar> Default for KahanSum<S> {
    fn default() -> Self {
        KahanSum {
            sum: S::zero(),
            comp: S::zero(),
        }
    }
}

impl<S: Scalar> KahanSum<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: S) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> S {
        self.sum
    }
}

pub fn kahan_sum<S: Scalar>(xs: impl IntoIterator<Item = S>) -> S {
    let mut k = KahanSum::new();
    for x in xs {
        k.add(x);
    }
    k.value()
}

/// A Monte Carlo estimate with its provenance.
///
/// `merge` combines estimates over disjoint sample sets; the combined mean is
/// the sample-count weighted mean and the seeds fold commutatively, so merge
/// order does not matter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRecord<S> {
    pub value: S,
    pub std_error: S,
    pub n_samples: u64,
    pub tau: S,
    pub seed: u64,
}

impl<S: Scalar> EstimateRecord<S> {
    pub fn exact(value: S, n_samples: u64, seed: u64) -> Self {
        EstimateRecord {
            value,
            std_error: S::zero(),
            n_samples,
            tau: S::zero(),
            seed,
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        let n1 = S::from_f64(self.n_samples as f64);
        let n2 = S::from_f64(other.n_samples as f64);
        let n = n1 + n2;
        let value = (self.value * n1 + other.value * n2) / n;
        // replicas are independent: variance of the weighted mean
        let se = ((self.std_error * self.std_error * n1 * n1
            + other.std_error * other.std_error * n2 * n2)
            / (n * n))
            .sqrt();
        EstimateRecord {
            value,
            std_error: se,
            n_samples: self.n_samples + other.n_samples,
            tau: (self.tau * n1 + other.tau * n2) / n,
            seed: self.seed ^ other.seed,
        }
    }

    /// |value - other.value| in units of the combined standard error.
    pub fn sigmas_from(&self, other: &Self) -> S {
        let se = (self.std_error * self.std_error + other.std_error * other.std_error).sqrt();
        if se.is_zero() {
            if self.value == other.value {
                S::zero()
            } else {
                S::infinity()
            }
        } else {
            (self.value - other.value).abs() / se
        }
    }

    /// |value - x| in units of this record's standard error.
    pub fn sigmas_from_value(&self, x: S) -> S {
        if self.std_error.is_zero() {
            if self.value == x {
                S::zero()
            } else {
                S::infinity()
            }
        } else {
            (self.value - x).abs() / self.std_error
        }
    }
}

pub fn mean<S: Scalar>(xs: &[S]) -> S {
    kahan_sum(xs.iter().copied()) / S::from_usize_(xs.len())
}

pub fn variance<S: Scalar>(xs: &[S]) -> S {
    let m = mean(xs);
    let n = xs.len();
    if n < 2 {
        return S::zero();
    }
    kahan_sum(xs.iter().map(|&x| (x - m) * (x - m))) / S::from_usize_(n - 1)
}

fn batch_se<S: Scalar>(xs: &[S], batch: usize) -> Option<S> {
    let nb = xs.len() / batch;
    if nb < 4 {
        return None;
    }
    let means: Vec<S> = (0..nb)
        .map(|i| mean(&xs[i * batch..(i + 1) * batch]))
        .collect();
    Some((variance(&means) / S::from_usize_(nb)).sqrt())
}

/// Batch-means estimate of a correlated series.
///
/// Batch size doubles from 1 until the error estimate stabilizes (relative
/// change under 20%) or batches run out; the reported tau is implied by the
/// ratio of batched to naive errors.
pub fn batch_means<S: Scalar>(xs: &[S], seed: u64) -> Result<EstimateRecord<S>> {
    if xs.is_empty() {
        return Err(Error::EmptyStream);
    }
    let m = mean(xs);
    let n = xs.len();
    if n < 8 {
        let se = (variance(xs) / S::from_usize_(n)).sqrt();
        return Ok(EstimateRecord {
            value: m,
            std_error: se,
            n_samples: n as u64,
            tau: S::from_f64(0.5),
            seed,
        });
    }
    let naive_var = variance(xs);
    let naive_se = (naive_var / S::from_usize_(n)).sqrt();
    let mut batch = 1usize;
    let mut se = batch_se(xs, 1).unwrap_or(naive_se);
    let threshold = S::from_f64(0.2);
    while let Some(next) = batch_se(xs, batch * 2) {
        let prev = se;
        batch *= 2;
        se = if next > se { next } else { se };
        if prev > S::zero() && ((next - prev).abs() / prev) < threshold {
            break;
        }
    }
    let tau = if naive_se > S::zero() {
        let r = se / naive_se;
        (r * r) * S::from_f64(0.5)
    } else {
        S::from_f64(0.5)
    };
    Ok(EstimateRecord {
        value: m,
        std_error: se,
        n_samples: n as u64,
        tau,
        seed,
    })
}

/// Integrated autocorrelation time by windowed summation: the window `W`
/// grows until `W >= 6 * tau(W)` (Sokal's self-consistent rule).
pub fn integrated_autocorrelation_time<S: Scalar>(xs: &[S]) -> S {
    let n = xs.len();
    let half = S::from_f64(0.5);
    if n < 8 {
        return half;
    }
    let m = mean(xs);
    let var = kahan_sum(xs.iter().map(|&x| (x - m) * (x - m))) / S::from_usize_(n);
    if var <= S::zero() {
        return half;
    }
    let rho = |t: usize| -> S {
        kahan_sum((0..n - t).map(|i| (xs[i] - m) * (xs[i + t] - m))) / S::from_usize_(n - t) / var
    };
    let mut tau = half;
    for t in 1..n / 2 {
        tau = tau + rho(t);
        if S::from_usize_(t) >= S::from_f64(6.0) * tau {
            break;
        }
    }
    if tau < half {
        half
    } else {
        tau
    }
}

/// Jackknife over `nb` contiguous batches for an arbitrary statistic of the
/// series. Returns `(estimate, std_error)`.
pub fn jackknife_batches<S: Scalar, F: Fn(&[S]) -> S>(
    xs: &[S],
    nb: usize,
    stat: F,
) -> Result<(S, S)> {
    if xs.is_empty() {
        return Err(Error::EmptyStream);
    }
    let nb = nb.min(xs.len()).max(2);
    let batch = xs.len() / nb;
    if batch == 0 {
        return Err(Error::InvalidArgument("too few samples to jackknife".into()));
    }
    let used = nb * batch;
    let full = stat(&xs[..used]);
    let mut leave_outs = Vec::with_capacity(nb);
    let mut buf = Vec::with_capacity(used - batch);
    for i in 0..nb {
        buf.clear();
        buf.extend_from_slice(&xs[..i * batch]);
        buf.extend_from_slice(&xs[(i + 1) * batch..used]);
        leave_outs.push(stat(&buf));
    }
    let nb_s = S::from_usize_(nb);
    let lo_mean = mean(&leave_outs);
    let var = kahan_sum(leave_outs.iter().map(|&x| (x - lo_mean) * (x - lo_mean)))
        * (nb_s - S::one())
        / nb_s;
    Ok((full, var.sqrt()))
}

/// Effective sample size of normalized importance weights.
pub fn effective_sample_size<S: Scalar>(weights: &[S]) -> S {
    let s = kahan_sum(weights.iter().copied());
    let s2 = kahan_sum(weights.iter().map(|&w| w * w));
    if s2 <= S::zero() {
        S::zero()
    } else {
        s * s / s2
    }
}
