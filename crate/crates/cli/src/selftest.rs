//! Quick install sanity checks (seconds, not minutes).

use anyhow::Result;

use ising_core::exact;
use ising_core::lattice::{Bc, LatticeGraph, Reflection};
use ising_core::mc::{sample_ensemble, ModelParams, SamplerKind, Schedule};
use ising_core::observables::two_point_table;

pub struct SelftestOutcome {
    pub lines: Vec<(String, bool)>,
}

impl SelftestOutcome {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|(_, ok)| *ok)
    }
}

pub fn run_selftest() -> Result<SelftestOutcome> {
    let mut lines = Vec::new();
    let mut check = |name: &str, ok: bool| lines.push((name.to_string(), ok));

    // single edge: exact correlation is tanh(beta)
    let edge = LatticeGraph::<f64>::from_parts(1, vec![vec![0], vec![1]], &[(0, 1)])?;
    let c = exact::correlation(&edge, 0.5, 0.0, &[0, 1])?;
    check("exact single-edge tanh", (c - 0.5f64.tanh()).abs() < 1e-12);

    // reflection involution
    let r = Reflection { axis: 0, offset: 2 };
    check(
        "reflection involution",
        r.apply(&r.apply(&[3, -1])) == vec![3, -1],
    );

    // determinism: same seed, same stream
    let g = LatticeGraph::<f64>::build_box(2, &[1, 1], Bc::Free)?;
    let p = ModelParams::new(0.35, 0.0)?;
    let s = Schedule::new(20, 50, 1, 99)?;
    let (a, _) = sample_ensemble(&g, &p, SamplerKind::Hybrid, &s)?;
    let (b, _) = sample_ensemble(&g, &p, SamplerKind::Hybrid, &s)?;
    check("seeded reproducibility", a == b);

    // Wolff vs Metropolis on the 3x3 box
    let s1 = Schedule::new(200, 8_000, 1, 5)?;
    let s2 = Schedule::new(200, 8_000, 1, 6)?;
    let (wolff, _) = sample_ensemble(&g, &p, SamplerKind::Wolff, &s1)?;
    let (metro, _) = sample_ensemble(&g, &p, SamplerKind::Metropolis, &s2)?;
    let rw = &two_point_table::<f64>(&wolff, &[(0, 4)], 5)?[0];
    let rm = &two_point_table::<f64>(&metro, &[(0, 4)], 6)?[0];
    let exact_val = exact::correlation(&g, 0.35, 0.0, &[0, 4])?;
    check("wolff matches exact (4 sigma)", rw.sigmas_from_value(exact_val) < 4.0);
    check(
        "metropolis matches exact (4 sigma)",
        rm.sigmas_from_value(exact_val) < 4.0,
    );

    // transfer matrix against enumeration
    let rect = LatticeGraph::<f64>::build_box(2, &[1, 2], Bc::Free)?;
    let ca = exact::correlation_enum(&rect, 0.44, 0.0, &[0, 14])?;
    let cb = exact::correlation_tm(&rect, 0.44, 0.0, &[0, 14])?;
    check("oracle cross-agreement", (ca - cb).abs() < 1e-10);

    Ok(SelftestOutcome { lines })
}
