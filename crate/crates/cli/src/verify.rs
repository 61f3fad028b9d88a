//! The exact-identity verification suite: a fixed instance matrix of
//! switching, backbone, concatenation, reflection, finite-volume-bound and
//! oracle-agreement checks, reported as JSON.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ising_core::current::{enumerate_backbones, Backbone, EdgeOrder};
use ising_core::exact::{
    self, verify_backbone_expansion, verify_concat, verify_reflection, verify_switching,
    verify_tfin,
};
use ising_core::lattice::Bc;

use crate::fixtures::{self, G};

pub const EQUALITY_TOL: f64 = 1e-10;
pub const INEQUALITY_TOL: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyProfile {
    Quick,
    Full,
    /// No checks at all; runs report "nothing ran" (exit code 2).
    Empty,
}

impl std::str::FromStr for VerifyProfile {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(VerifyProfile::Quick),
            "full" => Ok(VerifyProfile::Full),
            "empty" => Ok(VerifyProfile::Empty),
            _ => anyhow::bail!("unknown profile {s:?} (quick|full|empty)"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub instance: String,
    /// Deviation for equalities, margin/slack for inequalities.
    pub metric: f64,
    pub pass: bool,
    pub skipped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub profile: String,
    pub checks: Vec<CheckRecord>,
    pub n_pass: usize,
    pub n_fail: usize,
    pub n_skipped: usize,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.checks.is_empty() {
            2 // nothing ran
        } else if self.n_fail > 0 {
            1
        } else {
            0
        }
    }
}

struct Suite {
    checks: Vec<CheckRecord>,
}

impl Suite {
    fn equality(&mut self, check: &str, instance: String, deviation: f64) {
        self.checks.push(CheckRecord {
            check: check.into(),
            instance,
            metric: deviation,
            pass: deviation < EQUALITY_TOL,
            skipped: false,
        });
    }

    fn inequality(&mut self, check: &str, instance: String, margin: f64) {
        self.checks.push(CheckRecord {
            check: check.into(),
            instance,
            metric: margin,
            pass: margin >= INEQUALITY_TOL,
            skipped: false,
        });
    }

    fn skipped(&mut self, check: &str, instance: String) {
        self.checks.push(CheckRecord {
            check: check.into(),
            instance,
            metric: f64::NAN,
            pass: false,
            skipped: true,
        });
    }
}

fn switching_instances(suite: &mut Suite, quick: bool) {
    // (label, graph, x, y, sub-path mask edges)
    let graphs: Vec<(&str, G, usize, usize, Vec<(u32, u32)>)> = vec![
        ("single_edge", fixtures::single_edge(), 0, 1, vec![]),
        ("path2", fixtures::path(2), 0, 2, vec![(0, 1)]),
        ("path4", fixtures::path(4), 1, 3, vec![(1, 2), (2, 3)]),
        ("square", fixtures::square(), 0, 3, vec![(0, 1), (1, 3)]),
        ("square", fixtures::square(), 0, 1, vec![(0, 1)]),
        (
            "square_with_leg",
            fixtures::square_with_leg(),
            4,
            2,
            vec![(1, 4), (0, 1), (0, 2)],
        ),
        (
            "grid_2x3",
            fixtures::grid_2x3(),
            0,
            5,
            vec![(0, 2), (2, 4), (4, 5)],
        ),
    ];
    let beta = 0.45;
    for (label, g, x, y, sub_edges) in &graphs {
        let full = vec![true; g.n_edges()];
        let mut masks: Vec<(&str, Vec<bool>)> = vec![("g1=g", full)];
        if !sub_edges.is_empty() {
            let mut m = vec![false; g.n_edges()];
            for &(a, b) in sub_edges {
                m[g.edge_id(a, b).unwrap() as usize] = true;
            }
            masks.push(("g1=subpath", m));
        }
        let mut source_sets: Vec<(String, Vec<usize>)> = vec![
            ("A={}".into(), vec![]),
            (format!("A={{{x},{y}}}"), vec![*x, *y]),
        ];
        if g.n_vertices() >= 4 && !quick {
            source_sets.push(("A=4pt".into(), vec![0, 1, 2, 3]));
        }
        for (mname, mask) in &masks {
            for (aname, a) in &source_sets {
                let cap = 4;
                match verify_switching(g, mask, a, *x, *y, cap, beta) {
                    Ok(out) => suite.equality(
                        "switching",
                        format!("{label} {mname} {aname} x={x} y={y} cap={cap}"),
                        out.max_deviation,
                    ),
                    Err(e) => suite.skipped("switching", format!("{label} {mname} {aname}: {e}")),
                }
            }
        }
    }
}

fn backbone_instances(suite: &mut Suite, quick: bool) {
    let graphs: Vec<(&str, G, usize, usize)> = vec![
        ("single_edge", fixtures::single_edge(), 0, 1),
        ("path3", fixtures::path(3), 0, 3),
        ("square", fixtures::square(), 0, 3),
        ("square_with_leg", fixtures::square_with_leg(), 4, 2),
        ("grid_2x3", fixtures::grid_2x3(), 0, 5),
        ("grid_2x3", fixtures::grid_2x3(), 0, 3),
        ("ladder_2x4", fixtures::ladder_2x4(), 0, 7),
    ];
    let betas: &[f64] = if quick { &[0.45] } else { &[0.35, 0.55] };
    for (label, g, x, y) in &graphs {
        let orders = [
            ("standard", EdgeOrder::standard(g)),
            ("axis_reversed", EdgeOrder::axis_reversed(g)),
        ];
        for (oname, order) in &orders {
            for &beta in betas {
                match verify_backbone_expansion(g, order, beta, *x, *y) {
                    Ok(dev) => suite.equality(
                        "backbone_expansion",
                        format!("{label} order={oname} beta={beta} x={x} y={y}"),
                        dev,
                    ),
                    Err(e) => suite.skipped(
                        "backbone_expansion",
                        format!("{label} order={oname}: {e}"),
                    ),
                }
            }
            // concatenation: split enumerated backbones at interior points
            let bbs = match enumerate_backbones(g, order, *x, *y) {
                Ok(b) => b,
                Err(e) => {
                    suite.skipped("concatenation", format!("{label} order={oname}: {e}"));
                    continue;
                }
            };
            let mut splits_done = 0;
            'outer: for bb in bbs.iter().filter(|b| b.len() >= 2) {
                for split in 1..bb.len() {
                    let w1 = Backbone::new(g, order, bb.steps()[..split].to_vec()).unwrap();
                    let w2 = match Backbone::new(g, order, bb.steps()[split..].to_vec()) {
                        Ok(w) => w,
                        Err(_) => continue, // tail not a backbone on its own
                    };
                    match verify_concat(g, order, 0.45, &w1, &w2) {
                        Ok(dev) => suite.equality(
                            "concatenation",
                            format!("{label} order={oname} split={split} len={}", bb.len()),
                            dev,
                        ),
                        Err(e) => suite
                            .skipped("concatenation", format!("{label} order={oname}: {e}")),
                    }
                    splits_done += 1;
                    if splits_done >= if quick { 3 } else { 12 } {
                        break 'outer;
                    }
                }
            }
        }
    }
}

fn reflection_scan(suite: &mut Suite, quick: bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let boxes: Vec<Vec<i64>> = vec![vec![1, 1], vec![2, 1], vec![2, 2]];
    let n_sets = if quick { 10 } else { 50 };
    let betas = [0.2, 0.44, 0.8];
    for k in 0..n_sets {
        let radii = &boxes[k % boxes.len()];
        let d = G::build_box(2, radii, Bc::Free).unwrap();
        // random edge set in the nonnegative halfspace, then its mirror
        let halfspace: Vec<(u32, u32)> = d
            .edges()
            .iter()
            .filter(|e| d.coord(e.u as usize)[0] >= 0 && d.coord(e.v as usize)[0] >= 0)
            .map(|e| (e.u, e.v))
            .collect();
        let a_set: Vec<(u32, u32)> = halfspace
            .iter()
            .copied()
            .filter(|_| rng.gen::<f64>() < 0.3)
            .collect();
        let a_bar: Vec<(u32, u32)> = a_set
            .iter()
            .map(|&(p, q)| {
                let mut cp = d.coord(p as usize).to_vec();
                let mut cq = d.coord(q as usize).to_vec();
                cp[0] = -cp[0];
                cq[0] = -cq[0];
                (
                    d.index_of(&cp).unwrap() as u32,
                    d.index_of(&cq).unwrap() as u32,
                )
            })
            .collect();
        let u = vec![0i64, rng.gen_range(-radii[1]..=radii[1])];
        let y = vec![
            rng.gen_range(0..=radii[0]),
            rng.gen_range(-radii[1]..=radii[1]),
        ];
        for beta in betas {
            match verify_reflection(&d, &a_bar, beta, &u, &y) {
                Ok(out) => suite.inequality(
                    "reflection",
                    format!(
                        "box={radii:?} |A|={} u={u:?} y={y:?} beta={beta}",
                        a_bar.len()
                    ),
                    out.margin,
                ),
                Err(e) => suite.skipped("reflection", format!("box={radii:?}: {e}")),
            }
        }
    }
}

fn tfin_instances(suite: &mut Suite) {
    // d = 1: enumeration route, cross-checked against the closed path form
    let outer = G::build_box(1, &[8], Bc::Free).unwrap();
    for beta in [0.3, 0.6, 0.9] {
        match verify_tfin(&outer, &[2], beta, &[0], &[1]) {
            Ok(out) => {
                suite.inequality(
                    "tfin",
                    format!("d=1 outer=8 inner=2 x=0 y=1 beta={beta}"),
                    out.slack,
                );
                let expect = exact::path_correlation_closed(beta, 3)
                    + exact::path_correlation_closed(beta, 5);
                suite.equality(
                    "tfin_path_closed_form",
                    format!("d=1 beta={beta} image sum"),
                    (out.image_sum - expect).abs(),
                );
            }
            Err(e) => suite.skipped("tfin", format!("d=1: {e}")),
        }
    }
    // d = 2: transfer-matrix route
    let outer = G::build_box(2, &[5, 5], Bc::Free).unwrap();
    for beta in [0.3, 0.44, 0.6] {
        for y in [[1i64, 0], [1, 1]] {
            match verify_tfin(&outer, &[2, 2], beta, &[0, 0], &y) {
                Ok(out) => suite.inequality(
                    "tfin",
                    format!("d=2 outer=5 inner=2 x=(0,0) y={y:?} beta={beta}"),
                    out.slack,
                ),
                Err(e) => suite.skipped("tfin", format!("d=2 y={y:?}: {e}")),
            }
        }
    }
}

fn rho_trend(suite: &mut Suite) {
    for beta in [0.3, 0.44] {
        for (name, steps) in [
            ("one_step", vec![([0i64, 0], [1i64, 0])]),
            ("l_step", vec![([0i64, 0], [1i64, 0]), ([1, 0], [1, 1])]),
        ] {
            let mut rhos = Vec::new();
            for r in [1i64, 2, 3] {
                let g = fixtures::box2(r, r);
                let order = EdgeOrder::standard(&g);
                let walk: Vec<(u32, u32)> = steps
                    .iter()
                    .map(|(a, b)| {
                        (
                            g.index_of(a).unwrap() as u32,
                            g.index_of(b).unwrap() as u32,
                        )
                    })
                    .collect();
                let bb = Backbone::new(&g, &order, walk).unwrap();
                rhos.push(exact::rho_exact(&g, beta, &bb).unwrap());
            }
            let d12 = (rhos[1] - rhos[0]).abs();
            let d23 = (rhos[2] - rhos[1]).abs();
            suite.inequality(
                "rho_volume_trend",
                format!("backbone={name} beta={beta} boxes=1,2,3"),
                d12 - d23,
            );
        }
    }
}

fn oracle_agreement(suite: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc0);
    for radii in [[1i64, 2], [1, 3], [3, 1]] {
        let g = G::build_box(2, &radii, Bc::Free).unwrap();
        let removed: Vec<(u32, u32)> = g
            .edges()
            .iter()
            .filter(|_| rng.gen::<f64>() < 0.12)
            .map(|e| (e.u, e.v))
            .collect();
        let g = g.remove_edges(&removed).unwrap();
        for (beta, h) in [(0.44, 0.0), (0.3, 0.1)] {
            let pair = [0usize, g.n_vertices() - 1];
            let a = exact::correlation_enum(&g, beta, h, &pair).unwrap();
            let b = exact::correlation_tm(&g, beta, h, &pair).unwrap();
            suite.equality(
                "oracle_agreement",
                format!("box={radii:?} minus {} edges beta={beta} h={h}", removed.len()),
                (a - b).abs(),
            );
        }
    }
}

pub fn run_verify(profile: VerifyProfile) -> VerifyReport {
    let mut suite = Suite { checks: Vec::new() };
    match profile {
        VerifyProfile::Empty => {}
        VerifyProfile::Quick => {
            switching_instances(&mut suite, true);
            backbone_instances(&mut suite, true);
            reflection_scan(&mut suite, true);
            tfin_instances(&mut suite);
            rho_trend(&mut suite);
            oracle_agreement(&mut suite);
        }
        VerifyProfile::Full => {
            switching_instances(&mut suite, false);
            backbone_instances(&mut suite, false);
            reflection_scan(&mut suite, false);
            tfin_instances(&mut suite);
            rho_trend(&mut suite);
            oracle_agreement(&mut suite);
        }
    }
    let n_pass = suite.checks.iter().filter(|c| c.pass).count();
    let n_skipped = suite.checks.iter().filter(|c| c.skipped).count();
    let n_fail = suite.checks.len() - n_pass - n_skipped;
    VerifyReport {
        profile: match profile {
            VerifyProfile::Quick => "quick".into(),
            VerifyProfile::Full => "full".into(),
            VerifyProfile::Empty => "empty".into(),
        },
        checks: suite.checks,
        n_pass,
        n_fail,
        n_skipped,
    }
}
