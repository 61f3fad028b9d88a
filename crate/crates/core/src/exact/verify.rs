//! Verifiers for the random-current identities and correlation inequalities.
//!
//! Each verifier computes both sides of its identity through independent
//! routes and reports the deviation (equalities) or margin/slack
//! (inequalities). The switching check is level-wise in the combined current
//! `n + m`, where the identity is exact, so value caps introduce no
//! truncation error.

use crate::current::{enumerate_backbones, Backbone, EdgeOrder};
use crate::error::{Error, Result};
use crate::exact::{correlation, rho_exact};
use crate::lattice::{reflected_images, Bc, LatticeGraph, Reflection};
use crate::scalar::Scalar;
use crate::stats::KahanSum;

/// Result of a switching-lemma check.
#[derive(Debug, Clone, Copy)]
pub struct SwitchingOutcome<S> {
    pub max_deviation: S,
    pub levels_checked: usize,
}

const SWITCHING_EDGE_LIMIT: usize = 12;

/// Per-edge level weight `k -> (beta J_e)^k / k!` of the current expansion.
fn default_level_weight<S: Scalar>(g: &LatticeGraph<S>, beta: S) -> impl Fn(usize, u32) -> S + '_ {
    move |e: usize, k: u32| {
        let bj = beta * g.edges()[e].coupling;
        let mut f = S::one();
        for i in 1..=k {
            f = f * bj / S::from_usize_(i as usize);
        }
        f
    }
}

/// Checks the switching identity level by level.
///
/// For every combined configuration `N` (entries capped at `cap`) with
/// `dN = A xor {x,y}`, all decompositions `N = n + m` with `m` supported on
/// the subgraph `g1` are summed on both sides:
///
/// `sum_{dn=A, dm={x,y}} w(n)w(m)  =  sum_{dn=A xor {x,y}, dm=0} w(n)w(m) * 1[x <-> y in g1 under N]`
///
/// and the maximum absolute deviation over levels is returned.
pub fn verify_switching<S: Scalar>(
    g: &LatticeGraph<S>,
    g1_edges: &[bool],
    a: &[usize],
    x: usize,
    y: usize,
    cap: u32,
    beta: S,
) -> Result<SwitchingOutcome<S>> {
    let wf = default_level_weight(g, beta);
    verify_switching_with(g, g1_edges, a, x, y, cap, &wf)
}

/// [`verify_switching`] with an injectable level-weight function (the
/// negative-control hook of the verification suite).
pub fn verify_switching_with<S: Scalar>(
    g: &LatticeGraph<S>,
    g1_edges: &[bool],
    a: &[usize],
    x: usize,
    y: usize,
    cap: u32,
    wf: &dyn Fn(usize, u32) -> S,
) -> Result<SwitchingOutcome<S>> {
    let nv = g.n_vertices();
    if g1_edges.len() != g.n_edges() {
        return Err(Error::SizeMismatch(
            "subgraph mask length != edge count".into(),
        ));
    }
    if nv > 30 {
        return Err(Error::BudgetExceeded {
            what: "vertices for switching check",
            got: nv,
            limit: 30,
        });
    }
    let active: Vec<usize> = (0..g.n_edges())
        .filter(|&e| !g.edges()[e].coupling.is_zero())
        .collect();
    if active.len() > SWITCHING_EDGE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "active edges for switching check",
            got: active.len(),
            limit: SWITCHING_EDGE_LIMIT,
        });
    }
    let count = ((cap + 1) as f64).powi(active.len() as i32);
    if count > 2e7 {
        return Err(Error::BudgetExceeded {
            what: "combined current levels",
            got: count as usize,
            limit: 2e7 as usize,
        });
    }

    let vertex_bit = |v: usize| 1u32 << v;
    let mut target = 0u32; // parity mask of A xor {x,y}
    for &v in a {
        target ^= vertex_bit(v);
    }
    target ^= vertex_bit(x) ^ vertex_bit(y);
    let pxy = vertex_bit(x) ^ vertex_bit(y);

    let e1_active: Vec<usize> = active.iter().copied().filter(|&e| g1_edges[e]).collect();
    let rest: Vec<usize> = active.iter().copied().filter(|&e| !g1_edges[e]).collect();

    // per-edge parity masks
    let edge_mask: Vec<u32> = g
        .edges()
        .iter()
        .map(|e| vertex_bit(e.u as usize) ^ vertex_bit(e.v as usize))
        .collect();

    let mut max_dev = S::zero();
    let mut levels = 0usize;

    // odometer over the active edges
    let mut n = vec![0u32; active.len()];
    loop {
        // sources of the combined level N
        let mut parity = 0u32;
        for (slot, &e) in active.iter().enumerate() {
            if n[slot] % 2 == 1 {
                parity ^= edge_mask[e];
            }
        }
        if parity == target {
            levels += 1;
            // weight of the n-part on edges outside g1 (m = 0 there)
            let mut base = S::one();
            for (slot, &e) in active.iter().enumerate() {
                if !g1_edges[e] {
                    base = base * wf(e, n[slot]);
                }
            }
            let _ = &rest;
            // recurse over g1 edges: m_e even or odd
            let mut s_xy = S::zero();
            let mut s_empty = S::zero();
            {
                // per-edge (even, odd) decomposition sums at this level
                let mut split = Vec::with_capacity(e1_active.len());
                for &e in &e1_active {
                    let slot = active.iter().position(|&a| a == e).unwrap();
                    let ne = n[slot];
                    let mut even = S::zero();
                    let mut odd = S::zero();
                    for j in 0..=ne {
                        let term = wf(e, ne - j) * wf(e, j);
                        if j % 2 == 0 {
                            even = even + term;
                        } else {
                            odd = odd + term;
                        }
                    }
                    split.push((edge_mask[e], even, odd));
                }
                fn rec<S: Scalar>(
                    split: &[(u32, S, S)],
                    i: usize,
                    parity: u32,
                    factor: S,
                    pxy: u32,
                    s_xy: &mut S,
                    s_empty: &mut S,
                ) {
                    if i == split.len() {
                        if parity == pxy {
                            *s_xy = *s_xy + factor;
                        }
                        if parity == 0 {
                            *s_empty = *s_empty + factor;
                        }
                        return;
                    }
                    let (mask, even, odd) = split[i];
                    if !even.is_zero() {
                        rec(split, i + 1, parity, factor * even, pxy, s_xy, s_empty);
                    }
                    if !odd.is_zero() {
                        rec(split, i + 1, parity ^ mask, factor * odd, pxy, s_xy, s_empty);
                    }
                }
                rec(&split, 0, 0, base, pxy, &mut s_xy, &mut s_empty);
            }

            // connectivity of x and y through positive N-values inside g1
            let connected = {
                let mut seen = vec![false; nv];
                let mut stack = vec![x];
                seen[x] = true;
                let mut hit = x == y;
                'bfs: while let Some(v) = stack.pop() {
                    for &(w, e) in g.neighbors(v) {
                        if !g1_edges[e as usize] || seen[w as usize] {
                            continue;
                        }
                        let slot = match active.iter().position(|&a| a == e as usize) {
                            Some(s) => s,
                            None => continue, // zero-coupling edge: N_e = 0
                        };
                        if n[slot] == 0 {
                            continue;
                        }
                        if w as usize == y {
                            hit = true;
                            break 'bfs;
                        }
                        seen[w as usize] = true;
                        stack.push(w as usize);
                    }
                }
                hit
            };

            let rhs = if connected { s_empty } else { S::zero() };
            let dev = (s_xy - rhs).abs();
            if dev > max_dev {
                max_dev = dev;
            }
        }

        // odometer increment
        let mut i = 0;
        loop {
            if i == n.len() {
                return Ok(SwitchingOutcome {
                    max_deviation: max_dev,
                    levels_checked: levels,
                });
            }
            n[i] += 1;
            if n[i] <= cap {
                break;
            }
            n[i] = 0;
            i += 1;
        }
        if n.is_empty() {
            return Ok(SwitchingOutcome {
                max_deviation: max_dev,
                levels_checked: levels,
            });
        }
    }
}

/// `|<sigma_x sigma_y> - sum_{dw={x,y}} rho_g(w)|`: the backbone expansion,
/// both sides computed independently.
pub fn verify_backbone_expansion<S: Scalar>(
    g: &LatticeGraph<S>,
    order: &EdgeOrder,
    beta: S,
    x: usize,
    y: usize,
) -> Result<S> {
    let lhs = correlation(g, beta, S::zero(), &[x, y])?;
    let bbs = enumerate_backbones(g, order, x, y)?;
    let mut rhs = KahanSum::new();
    for b in &bbs {
        rhs.add(rho_exact(g, beta, b)?);
    }
    Ok((lhs - rhs.value()).abs())
}

/// `|rho_g(w1 o w2) - rho_g(w1) rho_{g \ w1~}(w2)|`: concatenation
/// factorization. Rejects inconsistent concatenations.
pub fn verify_concat<S: Scalar>(
    g: &LatticeGraph<S>,
    order: &EdgeOrder,
    beta: S,
    w1: &Backbone,
    w2: &Backbone,
) -> Result<S> {
    let combined = w1.concat(g, order, w2)?;
    let lhs = rho_exact(g, beta, &combined)?;
    let reduced = g.remove_edge_ids(w1.cancelled())?;
    let w2_reduced = Backbone::new(&reduced, order, w2.steps().to_vec())?;
    let rhs = rho_exact(g, beta, w1)? * rho_exact(&reduced, beta, &w2_reduced)?;
    Ok((lhs - rhs).abs())
}

/// Result of a reflection-inequality check.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionOutcome<S> {
    pub margin: S,
    pub pass: bool,
}

/// Checks `<s_u s_y>_{D \ A_bar} >= <s_u s_ybar>_{D \ A_bar}` where `A_bar`
/// (the set removed) is the mirror image across `x_1 = 0` of an edge set in
/// the nonnegative half-space, `u_1 = 0` and `y_1 >= 0`.
pub fn verify_reflection<S: Scalar>(
    d: &LatticeGraph<S>,
    a_bar: &[(u32, u32)],
    beta: S,
    u: &[i64],
    y: &[i64],
) -> Result<ReflectionOutcome<S>> {
    if d.radii().is_none() || d.bc() != Bc::Free {
        return Err(Error::InvalidArgument(
            "reflection check needs a free-BC box".into(),
        ));
    }
    if u[0] != 0 {
        return Err(Error::InvalidArgument("u must lie on the plane x_1 = 0".into()));
    }
    if y[0] < 0 {
        return Err(Error::InvalidArgument(
            "y must have nonnegative first coordinate".into(),
        ));
    }
    for &(p, q) in a_bar {
        if d.coord(p as usize)[0] > 0 || d.coord(q as usize)[0] > 0 {
            return Err(Error::InvalidArgument(
                "removed set must be the reflection of a nonnegative-halfspace edge set".into(),
            ));
        }
    }
    let g = d.remove_edges(a_bar)?;
    let ui = d
        .index_of(u)
        .ok_or_else(|| Error::InvalidArgument(format!("u = {u:?} outside the box")))?;
    let yi = d
        .index_of(y)
        .ok_or_else(|| Error::InvalidArgument(format!("y = {y:?} outside the box")))?;
    let refl = Reflection { axis: 0, offset: 0 };
    let ybar = refl.apply(y);
    let ybi = d
        .index_of(&ybar)
        .ok_or_else(|| Error::Internal("reflected point left the box".into()))?;
    let c_near = correlation(&g, beta, S::zero(), &[ui, yi])?;
    let c_far = correlation(&g, beta, S::zero(), &[ui, ybi])?;
    let margin = c_near - c_far;
    Ok(ReflectionOutcome {
        margin,
        pass: margin >= S::from_f64(-1e-12),
    })
}

/// Result of the finite-volume two-point comparison.
#[derive(Debug, Clone, Copy)]
pub struct TfinOutcome<S> {
    pub volume_gap: S,
    pub image_sum: S,
    pub slack: S,
    pub pass: bool,
}

/// Finite-volume comparison bound: for nested free boxes `inner` inside
/// `outer` and `x, y` in the inner box,
///
/// `<s_x s_y>_outer - <s_x s_y>_inner <= sum_{i=1}^{2d} <s_x s_{y^i}>_outer`
///
/// with `y^i` the reflections of `y` across the planes of the inner box's
/// faces. All `y^i` must lie in the outer box.
pub fn verify_tfin<S: Scalar>(
    outer: &LatticeGraph<S>,
    inner_radii: &[i64],
    beta: S,
    x: &[i64],
    y: &[i64],
) -> Result<TfinOutcome<S>> {
    let outer_radii = outer
        .radii()
        .ok_or_else(|| Error::InvalidArgument("tfin check needs a box graph".into()))?;
    if outer.bc() != Bc::Free {
        return Err(Error::InvalidArgument("tfin check needs free BC".into()));
    }
    if inner_radii.len() != outer.dimension()
        || inner_radii
            .iter()
            .zip(outer_radii)
            .any(|(&m, &n)| m < 0 || m > n)
    {
        return Err(Error::InvalidRadii(
            "inner box not contained in outer box".into(),
        ));
    }
    for (p, name) in [(x, "x"), (y, "y")] {
        if p.iter().zip(inner_radii).any(|(&c, &m)| c.abs() > m) {
            return Err(Error::InvalidArgument(format!(
                "{name} = {p:?} outside the inner box"
            )));
        }
    }
    let inner = LatticeGraph::<S>::build_box(outer.dimension(), inner_radii, Bc::Free)?;
    let images = reflected_images(y, inner_radii);
    let mut image_ids = Vec::with_capacity(images.len());
    for img in &images {
        let id = outer.index_of(img).ok_or_else(|| {
            Error::InvalidArgument(format!("reflected image {img:?} outside the outer box"))
        })?;
        image_ids.push(id);
    }
    let xo = outer.index_of(x).unwrap();
    let yo = outer.index_of(y).unwrap();
    let xi = inner.index_of(x).unwrap();
    let yi = inner.index_of(y).unwrap();
    let c_outer = correlation(outer, beta, S::zero(), &[xo, yo])?;
    let c_inner = correlation(&inner, beta, S::zero(), &[xi, yi])?;
    let mut image_sum = KahanSum::new();
    for &id in &image_ids {
        image_sum.add(correlation(outer, beta, S::zero(), &[xo, id])?);
    }
    let volume_gap = c_outer - c_inner;
    let image_sum = image_sum.value();
    let slack = image_sum - volume_gap;
    Ok(TfinOutcome {
        volume_gap,
        image_sum,
        slack,
        pass: slack >= S::from_f64(-1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::path_correlation_closed;
    use crate::lattice::{Bc, LatticeGraph};

    type G = LatticeGraph<f64>;

    fn square() -> G {
        G::from_parts(
            2,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn switching_single_edge() {
        let g = G::from_parts(1, vec![vec![0], vec![1]], &[(0, 1)]).unwrap();
        let out = verify_switching(&g, &[true], &[], 0, 1, 4, 0.5).unwrap();
        assert!(out.levels_checked > 0);
        assert!(out.max_deviation < 1e-12, "{}", out.max_deviation);
    }

    #[test]
    fn switching_square_with_side_subgraph() {
        let g = square();
        // G1 = the side path 0-1-3
        let mut mask = vec![false; 4];
        mask[g.edge_id(0, 1).unwrap() as usize] = true;
        mask[g.edge_id(1, 3).unwrap() as usize] = true;
        let out = verify_switching(&g, &mask, &[0, 3], 0, 3, 3, 0.45).unwrap();
        assert!(out.max_deviation < 1e-12, "{}", out.max_deviation);
        assert!(out.levels_checked > 0);
    }

    #[test]
    fn switching_four_point_source_set() {
        let g = square();
        let mask = vec![true; 4];
        let out = verify_switching(&g, &mask, &[0, 1, 2, 3], 0, 3, 3, 0.4).unwrap();
        assert!(out.max_deviation < 1e-12, "{}", out.max_deviation);
    }

    #[test]
    fn switching_negative_control_fails() {
        // corrupting the level weights must break the identity; the instance
        // uses a proper subgraph, where the two sides are genuinely coupled
        // (for G1 = G and A = {}, the decomposition m -> N - m makes the
        // identity hold for any weight function)
        let g = square();
        let mut mask = vec![false; 4];
        mask[g.edge_id(0, 1).unwrap() as usize] = true;
        mask[g.edge_id(1, 3).unwrap() as usize] = true;
        let beta = 0.4f64;
        let bad = move |e: usize, k: u32| -> f64 {
            let mut f = 1.0;
            for i in 1..=k {
                f = f * beta * (1.0 + 0.2 * e as f64) / (i as f64 + 0.25);
            }
            f
        };
        let out = verify_switching_with(&g, &mask, &[0, 3], 0, 3, 3, &bad).unwrap();
        assert!(
            out.max_deviation > 1e-6,
            "corrupted weights still passed: {}",
            out.max_deviation
        );
    }

    #[test]
    fn backbone_expansion_small_graphs() {
        for (g, x, y) in [
            (G::from_parts(1, vec![vec![0], vec![1]], &[(0, 1)]).unwrap(), 0, 1),
            (G::build_box(1, &[1], Bc::Free).unwrap(), 0, 2),
            (square(), 0, 3),
        ] {
            let order = EdgeOrder::standard(&g);
            let dev = verify_backbone_expansion(&g, &order, 0.4, x, y).unwrap();
            assert!(dev < 1e-12, "{} deviates by {dev}", g.label());
        }
    }

    #[test]
    fn concat_split_paths() {
        // 3-site path split at the middle vertex
        let g = G::build_box(1, &[1], Bc::Free).unwrap();
        let order = EdgeOrder::standard(&g);
        let w1 = Backbone::new(&g, &order, vec![(0, 1)]).unwrap();
        let w2 = Backbone::new(&g, &order, vec![(1, 2)]).unwrap();
        let dev = verify_concat(&g, &order, 0.5, &w1, &w2).unwrap();
        assert!(dev < 1e-12, "{dev}");

        // L-shaped backbone on the square split at the corner
        let g = square();
        let order = EdgeOrder::standard(&g);
        let w1 = Backbone::new(&g, &order, vec![(0, 1)]).unwrap();
        let w2 = Backbone::new(&g, &order, vec![(1, 3)]).unwrap();
        let dev = verify_concat(&g, &order, 0.4, &w1, &w2).unwrap();
        assert!(dev < 1e-12, "{dev}");

        // empty second factor reduces to identity
        let dev = verify_concat(&g, &order, 0.4, &w1, &Backbone::empty()).unwrap();
        assert!(dev < 1e-15);
    }

    #[test]
    fn reflection_plane_point_zero_margin() {
        let d = G::build_box(2, &[2, 2], Bc::Free).unwrap();
        let out = verify_reflection(&d, &[], 0.4, &[0, 1], &[0, -2]).unwrap();
        assert!(out.pass);
        assert_eq!(out.margin, 0.0);
    }

    #[test]
    fn reflection_margins() {
        let d = G::build_box(2, &[2, 2], Bc::Free).unwrap();
        // with nothing removed the box is mirror symmetric, so the two
        // correlations coincide for central u
        let out = verify_reflection(&d, &[], 0.4, &[0, 0], &[1, 0]).unwrap();
        assert!(out.pass);
        assert!(out.margin.abs() < 1e-12);
        // removing edges on the mirror side makes the margin strictly positive
        let p = d.index_of(&[-1, 0]).unwrap() as u32;
        let q = d.index_of(&[-2, 0]).unwrap() as u32;
        let out = verify_reflection(&d, &[(p, q)], 0.4, &[0, 0], &[1, 0]).unwrap();
        assert!(out.pass);
        assert!(out.margin > 1e-6, "margin {}", out.margin);
    }

    #[test]
    fn reflection_with_removed_mirror_edges() {
        let d = G::build_box(2, &[2, 2], Bc::Free).unwrap();
        // A = {(1,0)-(2,0)} in the nonneg halfspace; remove its mirror
        let p = d.index_of(&[-1, 0]).unwrap() as u32;
        let q = d.index_of(&[-2, 0]).unwrap() as u32;
        for beta in [0.2, 0.44, 0.8] {
            let out = verify_reflection(&d, &[(p, q)], beta, &[0, 1], &[2, 0]).unwrap();
            assert!(out.pass, "beta={beta}: margin {}", out.margin);
        }
    }

    #[test]
    fn reflection_rejects_bad_inputs() {
        let d = G::build_box(2, &[2, 2], Bc::Free).unwrap();
        assert!(verify_reflection(&d, &[], 0.4, &[1, 0], &[1, 0]).is_err()); // u off plane
        assert!(verify_reflection(&d, &[], 0.4, &[0, 0], &[-1, 0]).is_err()); // y negative
        let p = d.index_of(&[1, 0]).unwrap() as u32;
        let q = d.index_of(&[2, 0]).unwrap() as u32;
        // removed set in the positive halfspace is not admissible
        assert!(verify_reflection(&d, &[(p, q)], 0.4, &[0, 0], &[1, 0]).is_err());
    }

    #[test]
    fn tfin_beta_zero_is_tight() {
        let outer = G::build_box(1, &[8], Bc::Free).unwrap();
        let out = verify_tfin(&outer, &[2], 0.0, &[0], &[1]).unwrap();
        assert!(out.pass);
        assert_eq!(out.volume_gap, 0.0);
        assert_eq!(out.image_sum, 0.0);
    }

    #[test]
    fn tfin_path_matches_closed_form() {
        let outer = G::build_box(1, &[8], Bc::Free).unwrap();
        let beta = 0.6;
        let out = verify_tfin(&outer, &[2], beta, &[0], &[1]).unwrap();
        assert!(out.pass);
        // path correlations do not feel the boundary
        assert!(out.volume_gap.abs() < 1e-14);
        // images of y=1 across +-2 are 3 and -5
        let expect = path_correlation_closed(beta, 3) + path_correlation_closed(beta, 5);
        assert!((out.image_sum - expect).abs() < 1e-12);
        assert!(out.slack > 0.0);
    }

    #[test]
    fn tfin_rejects_images_outside() {
        let outer = G::build_box(1, &[4], Bc::Free).unwrap();
        // image -5 falls outside [-4, 4]
        assert!(verify_tfin(&outer, &[2], 0.5, &[0], &[1]).is_err());
    }

    #[test]
    fn tfin_d2_transfer_matrix_route() {
        let outer = G::build_box(2, &[5, 5], Bc::Free).unwrap();
        for beta in [0.3, 0.44, 0.6] {
            let out = verify_tfin(&outer, &[2, 2], beta, &[0, 0], &[1, 0]).unwrap();
            assert!(out.pass, "beta={beta}: slack {}", out.slack);
            assert!(out.volume_gap >= -1e-12, "gks violated?");
        }
    }
}
