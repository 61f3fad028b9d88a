//! Markov-chain samplers for the Ising measure
//! `P(sigma) ∝ exp[beta sum J s s + H sum s]`: single-site Metropolis and
//! Wolff cluster updates (external field through a ghost spin), with seeded
//! reproducible ensembles and an optional binary sample spool.

use std::io::{BufRead, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::scalar::Scalar;
use crate::stats::integrated_autocorrelation_time;

/// A +-1 assignment per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    pub spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn all_plus(n: usize) -> Self {
        SpinConfiguration { spins: vec![1; n] }
    }

    pub fn all_minus(n: usize) -> Self {
        SpinConfiguration { spins: vec![-1; n] }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        SpinConfiguration {
            spins: (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    pub fn magnetization(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    pub fn validate<S: Scalar>(&self, g: &LatticeGraph<S>) -> Result<()> {
        if self.spins.len() != g.n_vertices() {
            return Err(Error::SizeMismatch(format!(
                "{} spins on a graph with {} vertices",
                self.spins.len(),
                g.n_vertices()
            )));
        }
        if self.spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("spins must be +-1".into()));
        }
        Ok(())
    }
}

/// Inverse temperature, external field, and the lattice spacing used for
/// near-critical bookkeeping (`H = h a^{(d+2)/2}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<S> {
    pub beta: S,
    pub field: S,
    pub lattice_spacing: S,
}

impl<S: Scalar> ModelParams<S> {
    pub fn new(beta: S, field: S) -> Result<Self> {
        Self::with_spacing(beta, field, S::one())
    }

    pub fn with_spacing(beta: S, field: S, lattice_spacing: S) -> Result<Self> {
        if beta < S::zero() {
            return Err(Error::InvalidArgument("beta must be >= 0".into()));
        }
        if !(lattice_spacing > S::zero()) {
            return Err(Error::InvalidArgument("lattice spacing must be > 0".into()));
        }
        Ok(ModelParams {
            beta,
            field,
            lattice_spacing,
        })
    }

    /// Near-critical field `H = h a^{(d+2)/2}` at spacing `a` in dimension `d`.
    pub fn near_critical(beta: S, h: S, a: S, d: usize) -> Result<Self> {
        let exponent = S::from_f64((d as f64 + 2.0) / 2.0);
        Self::with_spacing(beta, h * a.powf(exponent), a)
    }
}

/// `(sum_{xy} J s_x s_y, sum_x s_x)`: the two energy terms of the measure.
/// The bond sum is exactly integral for unit couplings.
pub fn energy_terms<S: Scalar>(
    c: &SpinConfiguration,
    g: &LatticeGraph<S>,
) -> Result<(S, i64)> {
    c.validate(g)?;
    let mut bond = S::zero();
    for e in g.edges() {
        bond = bond
            + e.coupling * S::from_f64((c.spins[e.u as usize] * c.spins[e.v as usize]) as f64);
    }
    Ok((bond, c.magnetization()))
}

/// Markov chain state: configuration, deterministic RNG, and sweep counter.
/// Equal seeds and parameters reproduce trajectories bit-exactly.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub config: SpinConfiguration,
    pub rng: ChaCha8Rng,
    pub sweeps: u64,
}

impl ChainState {
    /// Fresh chain with a random ("hot") start. `stream` selects the RNG
    /// substream, letting replicas share one seed.
    pub fn new<S: Scalar>(g: &LatticeGraph<S>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let config = SpinConfiguration::random(g.n_vertices(), &mut rng);
        ChainState {
            config,
            rng,
            sweeps: 0,
        }
    }

    pub fn from_config(config: SpinConfiguration, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ChainState {
            config,
            rng,
            sweeps: 0,
        }
    }
}

/// One full-lattice pass of single-site Metropolis updates in vertex order.
///
/// Acceptance uses `min(1, e^dlogw)` with the even tie (`dlogw = 0`) broken by
/// a fair coin, which keeps detailed balance and makes the chain mix at
/// `beta = H = 0` instead of deterministically alternating.
pub fn metropolis_sweep<S: Scalar>(
    state: &mut ChainState,
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
) -> Result<()> {
    state.config.validate(g)?;
    let spins = &mut state.config.spins;
    let half = S::from_f64(0.5);
    for x in 0..g.n_vertices() {
        let sx = spins[x];
        let mut local = S::zero();
        for &(w, e) in g.neighbors(x) {
            local = local + g.edges()[e as usize].coupling * S::from_f64(spins[w as usize] as f64);
        }
        // log-weight change of flipping x
        let dlogw = -S::from_f64(2.0 * sx as f64) * (p.beta * local + p.field);
        let accept = if dlogw > S::zero() {
            true
        } else {
            let threshold = if dlogw.is_zero() { half } else { dlogw.exp() };
            S::sample_unit(&mut state.rng) < threshold
        };
        if accept {
            spins[x] = -sx;
        }
    }
    state.sweeps += 1;
    Ok(())
}

/// Precomputed Wolff tables for a fixed `(graph, params)` pair.
///
/// The external field enters through a ghost vertex coupled to every site
/// with strength `|H|/beta` (so the bond weight is `|H|`); when the grown
/// cluster contains the ghost, the complement is flipped instead, keeping
/// stored spins in the physical frame.
pub struct WolffSampler<S> {
    p_edge: Vec<S>,
    p_ghost: S,
    ghost_spin: i8,
    // reusable growth buffers: membership is "stamp == epoch", so clusters
    // never pay for clearing a lattice-sized array
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
    cluster: Vec<u32>,
}

impl<S: Scalar> WolffSampler<S> {
    pub fn new(g: &LatticeGraph<S>, p: &ModelParams<S>) -> Result<Self> {
        if g.edges().iter().any(|e| e.coupling < S::zero()) {
            return Err(Error::InvalidArgument(
                "cluster updates need nonnegative couplings".into(),
            ));
        }
        let two = S::from_f64(2.0);
        let p_edge = g
            .edges()
            .iter()
            .map(|e| S::one() - (-two * p.beta * e.coupling).exp())
            .collect();
        let p_ghost = S::one() - (-two * p.field.abs()).exp();
        Ok(WolffSampler {
            p_edge,
            p_ghost,
            ghost_spin: if p.field >= S::zero() { 1 } else { -1 },
            stamp: vec![0; g.n_vertices() + 1],
            epoch: 0,
            stack: Vec::with_capacity(64),
            cluster: Vec::with_capacity(64),
        })
    }

    /// Grows and flips one cluster; returns the number of lattice sites
    /// flipped (complement counted when the ghost joined the cluster).
    pub fn cluster_update(&mut self, g: &LatticeGraph<S>, state: &mut ChainState) -> usize {
        let n = g.n_vertices();
        let ghost = n;
        let spins = &mut state.config.spins;
        if self.epoch == u32::MAX {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let stamp = &mut self.stamp;
        self.stack.clear();
        self.cluster.clear();

        let seed = state.rng.gen_range(0..n);
        stamp[seed] = epoch;
        self.stack.push(seed as u32);
        self.cluster.push(seed as u32);
        let mut ghost_joined = false;
        let ghost_active = !self.p_ghost.is_zero();

        while let Some(site) = self.stack.pop() {
            if site as usize == ghost {
                // the ghost neighbors every site of its sign
                for w in 0..n {
                    if stamp[w] != epoch
                        && spins[w] == self.ghost_spin
                        && S::sample_unit(&mut state.rng) < self.p_ghost
                    {
                        stamp[w] = epoch;
                        self.cluster.push(w as u32);
                        self.stack.push(w as u32);
                    }
                }
                continue;
            }
            let v = site as usize;
            let sv = spins[v];
            for &(w, e) in g.neighbors(v) {
                let w = w as usize;
                if stamp[w] == epoch || spins[w] != sv {
                    continue;
                }
                let pe = self.p_edge[e as usize];
                if pe.is_zero() {
                    continue;
                }
                if S::sample_unit(&mut state.rng) < pe {
                    stamp[w] = epoch;
                    self.cluster.push(w as u32);
                    self.stack.push(w as u32);
                }
            }
            if ghost_active
                && !ghost_joined
                && sv == self.ghost_spin
                && S::sample_unit(&mut state.rng) < self.p_ghost
            {
                ghost_joined = true;
                stamp[ghost] = epoch;
                self.stack.push(ghost as u32);
            }
        }

        if ghost_joined {
            // flip the complement so the ghost stays fixed
            let mut flipped = 0;
            for w in 0..n {
                if stamp[w] != epoch {
                    spins[w] = -spins[w];
                    flipped += 1;
                }
            }
            flipped
        } else {
            for &w in &self.cluster {
                spins[w as usize] = -spins[w as usize];
            }
            self.cluster.len()
        }
    }
}

/// One Wolff cluster flip (tables rebuilt per call; use [`WolffSampler`]
/// directly in loops).
pub fn wolff_update<S: Scalar>(
    state: &mut ChainState,
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
) -> Result<usize> {
    state.config.validate(g)?;
    let mut sampler = WolffSampler::new(g, p)?;
    Ok(sampler.cluster_update(g, state))
}

/// Which dynamics drives an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Metropolis,
    Wolff,
    /// One Wolff sweep-equivalent followed by one Metropolis sweep.
    Hybrid,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerKind::Metropolis => write!(f, "metropolis"),
            SamplerKind::Wolff => write!(f, "wolff"),
            SamplerKind::Hybrid => write!(f, "hybrid"),
        }
    }
}

/// Sampling schedule. `burn_in = None` estimates the integrated
/// autocorrelation time on a pilot stretch and discards ten times that.
/// Thinning counts site-sweep equivalents between samples (for Wolff:
/// clusters until `thinning * |V|` sites have flipped).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub burn_in: Option<u64>,
    pub n_samples: u64,
    pub thinning: u64,
    pub seed: u64,
}

impl Schedule {
    pub fn new(burn_in: u64, n_samples: u64, thinning: u64, seed: u64) -> Result<Self> {
        if n_samples == 0 || thinning == 0 {
            return Err(Error::InvalidArgument(
                "schedule needs positive n_samples and thinning".into(),
            ));
        }
        Ok(Schedule {
            burn_in: Some(burn_in),
            n_samples,
            thinning,
            seed,
        })
    }
}

/// Metadata attached to every emitted ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub seed: u64,
    pub stream: u64,
    pub burn_in_used: u64,
    pub n_samples: u64,
    pub thinning: u64,
    pub kind: SamplerKind,
}

/// Advances whole thinning units with a cluster count fixed in advance.
///
/// The count must not be adapted to the running state between measurements:
/// stopping "once enough sites flipped" makes the measurement times
/// cluster-size dependent and biases estimates noticeably on small lattices.
/// The count is therefore calibrated on a separate stretch and frozen.
fn advance<S: Scalar>(
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
    kind: SamplerKind,
    wolff: &mut WolffSampler<S>,
    clusters_per_unit: u64,
    state: &mut ChainState,
    units: u64,
) -> Result<()> {
    for _ in 0..units {
        match kind {
            SamplerKind::Metropolis => metropolis_sweep(state, g, p)?,
            SamplerKind::Wolff => {
                for _ in 0..clusters_per_unit {
                    wolff.cluster_update(g, state);
                }
                state.sweeps += 1;
            }
            SamplerKind::Hybrid => {
                for _ in 0..clusters_per_unit {
                    wolff.cluster_update(g, state);
                }
                metropolis_sweep(state, g, p)?;
            }
        }
    }
    Ok(())
}

/// Number of clusters that flip about one lattice worth of sites, measured
/// over a fixed 32-cluster stretch.
fn calibrate_clusters_per_unit<S: Scalar>(
    g: &LatticeGraph<S>,
    kind: SamplerKind,
    wolff: &mut WolffSampler<S>,
    state: &mut ChainState,
) -> u64 {
    if kind == SamplerKind::Metropolis {
        return 0;
    }
    const STRETCH: u64 = 32;
    let mut flipped = 0usize;
    for _ in 0..STRETCH {
        flipped += wolff.cluster_update(g, state);
    }
    let mean_cluster = (flipped as f64 / STRETCH as f64).max(1.0);
    (g.n_vertices() as f64 / mean_cluster).ceil() as u64
}

/// Burn-in units: no measurements happen here, so clusters may run until a
/// lattice worth of sites has flipped (the adaptive rule that must not be
/// used between measurements).
fn advance_adaptive<S: Scalar>(
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
    kind: SamplerKind,
    wolff: &mut WolffSampler<S>,
    state: &mut ChainState,
    units: u64,
) -> Result<()> {
    let v = g.n_vertices();
    for _ in 0..units {
        match kind {
            SamplerKind::Metropolis => metropolis_sweep(state, g, p)?,
            SamplerKind::Wolff => {
                let mut flipped = 0usize;
                while flipped < v {
                    flipped += wolff.cluster_update(g, state);
                }
                state.sweeps += 1;
            }
            SamplerKind::Hybrid => {
                let mut flipped = 0usize;
                while flipped < v {
                    flipped += wolff.cluster_update(g, state);
                }
                metropolis_sweep(state, g, p)?;
            }
        }
    }
    Ok(())
}

/// Runs a seeded chain and hands every retained sample to `visit`.
/// Identical seeds reproduce the stream bit-exactly.
pub fn for_each_sample<S: Scalar>(
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
    kind: SamplerKind,
    schedule: &Schedule,
    stream: u64,
    mut visit: impl FnMut(u64, &SpinConfiguration),
) -> Result<EnsembleMeta> {
    if schedule.n_samples == 0 || schedule.thinning == 0 {
        return Err(Error::InvalidArgument(
            "schedule needs positive n_samples and thinning".into(),
        ));
    }
    let mut state = ChainState::new(g, schedule.seed, stream);
    let mut wolff = WolffSampler::new(g, p)?;

    let burn = match schedule.burn_in {
        Some(b) => {
            advance_adaptive(g, p, kind, &mut wolff, &mut state, b)?;
            b
        }
        None => {
            // pilot stretch; then discard ten estimated autocorrelation times
            const PILOT: u64 = 64;
            let mut mags: Vec<S> = Vec::with_capacity(PILOT as usize);
            for _ in 0..PILOT {
                advance_adaptive(g, p, kind, &mut wolff, &mut state, schedule.thinning)?;
                mags.push(S::from_f64(state.config.magnetization() as f64));
            }
            let tau = integrated_autocorrelation_time(&mags);
            let extra = (S::from_f64(10.0) * tau).ceil().to_f64() as u64;
            advance_adaptive(g, p, kind, &mut wolff, &mut state, extra * schedule.thinning)?;
            PILOT * schedule.thinning + extra * schedule.thinning
        }
    };

    // freeze the cluster count on equilibrated data, then measure
    let cpu = calibrate_clusters_per_unit(g, kind, &mut wolff, &mut state);
    for i in 0..schedule.n_samples {
        advance(g, p, kind, &mut wolff, cpu, &mut state, schedule.thinning)?;
        visit(i, &state.config);
    }
    Ok(EnsembleMeta {
        seed: schedule.seed,
        stream,
        burn_in_used: burn,
        n_samples: schedule.n_samples,
        thinning: schedule.thinning,
        kind,
    })
}

/// Collects the ensemble into memory (small runs and tests).
pub fn sample_ensemble<S: Scalar>(
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
    kind: SamplerKind,
    schedule: &Schedule,
) -> Result<(Vec<SpinConfiguration>, EnsembleMeta)> {
    let mut out = Vec::with_capacity(schedule.n_samples as usize);
    let meta = for_each_sample(g, p, kind, schedule, 0, |_, c| out.push(c.clone()))?;
    Ok((out, meta))
}

/// Header of the binary sample spool.
#[derive(Debug, Serialize, Deserialize)]
pub struct SpoolHeader {
    pub graph: crate::lattice::GraphSpec,
    pub beta: f64,
    pub field: f64,
    pub lattice_spacing: f64,
    pub kind: SamplerKind,
    pub meta: EnsembleMeta,
    pub n_vertices: usize,
}

/// Writes header (one JSON line) + packed sign bitplanes, one record per
/// configuration.
pub fn write_spool<S: Scalar, W: Write>(
    mut w: W,
    g: &LatticeGraph<S>,
    p: &ModelParams<S>,
    meta: &EnsembleMeta,
    samples: &[SpinConfiguration],
) -> Result<()> {
    let header = SpoolHeader {
        graph: g.to_spec()?,
        beta: p.beta.to_f64(),
        field: p.field.to_f64(),
        lattice_spacing: p.lattice_spacing.to_f64(),
        kind: meta.kind,
        meta: meta.clone(),
        n_vertices: g.n_vertices(),
    };
    let mut line = serde_json::to_string(&header)?;
    line.push('\n');
    w.write_all(line.as_bytes())?;
    let nbytes = (g.n_vertices() + 7) / 8;
    let mut buf = vec![0u8; nbytes];
    for s in samples {
        buf.iter_mut().for_each(|b| *b = 0);
        for (i, &spin) in s.spins.iter().enumerate() {
            if spin > 0 {
                buf[i / 8] |= 1 << (i % 8);
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a spool written by [`write_spool`].
pub fn read_spool<R: Read>(r: R) -> Result<(SpoolHeader, Vec<SpinConfiguration>)> {
    let mut br = std::io::BufReader::new(r);
    let mut line = String::new();
    br.read_line(&mut line)?;
    let header: SpoolHeader = serde_json::from_str(line.trim_end())?;
    let nbytes = (header.n_vertices + 7) / 8;
    let mut samples = Vec::with_capacity(header.meta.n_samples as usize);
    let mut buf = vec![0u8; nbytes];
    loop {
        match br.read_exact(&mut buf) {
            Ok(()) => {
                let spins = (0..header.n_vertices)
                    .map(|i| if buf[i / 8] & (1 << (i % 8)) != 0 { 1 } else { -1 })
                    .collect();
                samples.push(SpinConfiguration { spins });
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((header, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Bc, LatticeGraph};

    type G = LatticeGraph<f64>;

    #[test]
    fn energy_terms_examples() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let (bond, mag) = energy_terms(&SpinConfiguration::all_plus(9), &g).unwrap();
        assert_eq!(bond, 12.0);
        assert_eq!(mag, 9);

        let e = G::from_parts(1, vec![vec![0], vec![1]], &[(0, 1)]).unwrap();
        let c = SpinConfiguration { spins: vec![1, -1] };
        let (bond, mag) = energy_terms(&c, &e).unwrap();
        assert_eq!(bond, -1.0);
        assert_eq!(mag, 0);

        // size mismatch rejected
        assert!(energy_terms(&SpinConfiguration::all_plus(3), &e).is_err());
    }

    #[test]
    fn energy_terms_ring_vs_direct_sum() {
        use rand::SeedableRng;
        // 4-cycle assembled by hand, random configs vs direct re-summation
        let ring = G::from_parts(
            2,
            vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![0, 1]],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let c = SpinConfiguration::random(4, &mut rng);
            let (bond, mag) = energy_terms(&c, &ring).unwrap();
            let direct: f64 = [(0, 1), (1, 2), (2, 3), (3, 0)]
                .iter()
                .map(|&(a, b)| (c.spins[a] * c.spins[b]) as f64)
                .sum();
            assert_eq!(bond, direct);
            assert_eq!(mag, c.spins.iter().map(|&s| s as i64).sum::<i64>());
        }
    }

    #[test]
    fn metropolis_infinite_temperature_is_iid() {
        // chi-square over the 16 states of a 4-site graph, 10^4 sweeps
        let g = G::from_parts(
            1,
            vec![vec![0], vec![1], vec![2], vec![3]],
            &[(0, 1), (1, 2), (2, 3)],
        )
        .unwrap();
        let p = ModelParams::new(0.0, 0.0).unwrap();
        let mut state = ChainState::new(&g, 123, 0);
        let mut counts = [0u64; 16];
        let sweeps = 10_000;
        for _ in 0..sweeps {
            metropolis_sweep(&mut state, &g, &p).unwrap();
            let idx = state
                .config
                .spins
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &s)| acc | ((s > 0) as usize) << i);
            counts[idx] += 1;
        }
        let expect = sweeps as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 15 dof, 1% critical value
        assert!(chi2 < 30.58, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn metropolis_strong_field_forces_all_plus() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let p = ModelParams::new(0.0, 50.0).unwrap();
        let mut state =
            ChainState::from_config(SpinConfiguration::all_minus(9), 99, 0);
        metropolis_sweep(&mut state, &g, &p).unwrap();
        assert_eq!(state.config, SpinConfiguration::all_plus(9));
    }

    #[test]
    fn wolff_beta_zero_single_site_cluster() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let p = ModelParams::new(0.0, 0.0).unwrap();
        let mut state = ChainState::new(&g, 5, 0);
        for _ in 0..50 {
            assert_eq!(wolff_update(&mut state, &g, &p).unwrap(), 1);
        }
    }

    #[test]
    fn wolff_beta_infinity_flips_everything() {
        // from an aligned state every bond activates and the whole (connected)
        // graph flips
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let p = ModelParams::new(f64::INFINITY, 0.0).unwrap();
        let mut state = ChainState::from_config(SpinConfiguration::all_plus(9), 6, 0);
        let size = wolff_update(&mut state, &g, &p).unwrap();
        assert_eq!(size, 9);
        assert_eq!(state.config.magnetization(), -9);
    }

    #[test]
    fn ensembles_are_reproducible() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let p = ModelParams::new(0.35, 0.05).unwrap();
        let s = Schedule::new(10, 50, 1, 7).unwrap();
        let (a, _) = sample_ensemble(&g, &p, SamplerKind::Hybrid, &s).unwrap();
        let (b, _) = sample_ensemble(&g, &p, SamplerKind::Hybrid, &s).unwrap();
        assert_eq!(a, b);
        let s2 = Schedule::new(10, 50, 1, 8).unwrap();
        let (c, _) = sample_ensemble(&g, &p, SamplerKind::Hybrid, &s2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn beta_zero_stream_has_centered_means() {
        let g = G::build_box(3, &[1, 0, 0], Bc::Free).unwrap(); // 3 sites
        let p = ModelParams::new(0.0, 0.0).unwrap();
        let s = Schedule::new(5, 10_000, 1, 31).unwrap();
        let mut sums = vec![0i64; 3];
        for_each_sample(&g, &p, SamplerKind::Metropolis, &s, 0, |_, c| {
            for (i, &x) in c.spins.iter().enumerate() {
                sums[i] += x as i64;
            }
        })
        .unwrap();
        let bound = 4.0 / (10_000f64).sqrt();
        for &s in &sums {
            assert!((s as f64 / 10_000.0).abs() < bound, "site mean {s}");
        }
    }

    #[test]
    fn auto_burn_in_runs() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let p = ModelParams::new(0.3, 0.0).unwrap();
        let s = Schedule {
            burn_in: None,
            n_samples: 10,
            thinning: 1,
            seed: 3,
        };
        let meta = for_each_sample(&g, &p, SamplerKind::Wolff, &s, 0, |_, _| {}).unwrap();
        assert!(meta.burn_in_used >= 64);
    }

    #[test]
    fn spool_round_trip() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let p = ModelParams::new(0.4, 0.0).unwrap();
        let s = Schedule::new(5, 20, 1, 11).unwrap();
        let (samples, meta) = sample_ensemble(&g, &p, SamplerKind::Wolff, &s).unwrap();
        let mut buf = Vec::new();
        write_spool(&mut buf, &g, &p, &meta, &samples).unwrap();
        let (header, back) = read_spool(&buf[..]).unwrap();
        assert_eq!(back, samples);
        assert_eq!(header.beta, 0.4);
        assert_eq!(header.meta.seed, 11);
    }
}
