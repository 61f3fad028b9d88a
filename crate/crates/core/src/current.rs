//! Random currents and their backbone algebra: sources, weights, connectivity,
//! the fixed oriented-edge order, cancellation sets, consistency, backbone
//! extraction, and exhaustive enumeration on small graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::scalar::Scalar;

/// Nonnegative integer per edge, indexed by edge id of its graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurrentConfiguration {
    pub values: Vec<u32>,
}

impl CurrentConfiguration {
    pub fn zero(n_edges: usize) -> Self {
        CurrentConfiguration {
            values: vec![0; n_edges],
        }
    }
}

/// Vertices with odd total incident current, sorted. Always of even size.
pub fn sources<S: Scalar>(g: &LatticeGraph<S>, n: &CurrentConfiguration) -> Vec<usize> {
    let mut parity = vec![false; g.n_vertices()];
    for (e, &v) in n.values.iter().enumerate() {
        if v % 2 == 1 {
            let edge = &g.edges()[e];
            parity[edge.u as usize] ^= true;
            parity[edge.v as usize] ^= true;
        }
    }
    (0..g.n_vertices()).filter(|&v| parity[v]).collect()
}

/// Current weight `prod_e (beta J_e)^{n_e} / n_e!`.
pub fn weight<S: Scalar>(g: &LatticeGraph<S>, n: &CurrentConfiguration, beta: S) -> S {
    let mut w = S::one();
    for (e, &k) in n.values.iter().enumerate() {
        let bj = beta * g.edges()[e].coupling;
        let mut f = S::one();
        for i in 1..=k {
            f = f * bj / S::from_usize_(i as usize);
        }
        w = w * f;
    }
    w
}

/// True iff a path of strictly positive current joins `x` to `y` inside the
/// subgraph selected by `edge_mask` (all edges when `None`).
pub fn connected<S: Scalar>(
    g: &LatticeGraph<S>,
    n: &CurrentConfiguration,
    x: usize,
    y: usize,
    edge_mask: Option<&[bool]>,
) -> bool {
    if x == y {
        return true;
    }
    let mut seen = vec![false; g.n_vertices()];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(v) = stack.pop() {
        for &(w, e) in g.neighbors(v) {
            if n.values[e as usize] == 0 || seen[w as usize] {
                continue;
            }
            if let Some(mask) = edge_mask {
                if !mask[e as usize] {
                    continue;
                }
            }
            if w as usize == y {
                return true;
            }
            seen[w as usize] = true;
            stack.push(w as usize);
        }
    }
    false
}

/// A total order on the oriented edges of a graph.
///
/// Oriented edge ids are `2*edge + 0` for `u -> v` and `2*edge + 1` for
/// `v -> u`. The standard order ranks by (source vertex index, direction)
/// with directions `+e_1 < -e_1 < +e_2 < ...`; the backbone identities must
/// hold for any fixed order, so alternatives are provided for the test
/// matrix.
#[derive(Debug, Clone)]
pub struct EdgeOrder {
    ranks: Vec<u32>,
}

impl EdgeOrder {
    fn from_keys<S: Scalar>(g: &LatticeGraph<S>, key: impl Fn(usize, u32) -> (u32, u32)) -> Self {
        // key(source vertex, direction slot) -> sortable pair
        let m = g.n_edges();
        let mut oriented: Vec<(u32, u32, u32)> = Vec::with_capacity(2 * m);
        for (e, edge) in g.edges().iter().enumerate() {
            for side in 0..2u32 {
                let (src, step_dir) = if side == 0 {
                    (edge.u, edge.dir_from_u)
                } else {
                    (edge.v, -edge.dir_from_u)
                };
                let slot = 2 * edge.axis as u32 + if step_dir > 0 { 0 } else { 1 };
                let (k0, k1) = key(src as usize, slot);
                oriented.push((k0, k1, 2 * e as u32 + side));
            }
        }
        oriented.sort_unstable();
        let mut ranks = vec![0u32; 2 * m];
        for (rank, &(_, _, oid)) in oriented.iter().enumerate() {
            ranks[oid as usize] = rank as u32;
        }
        EdgeOrder { ranks }
    }

    /// The default order: source index, then `+e_1 < -e_1 < +e_2 < ...`.
    pub fn standard<S: Scalar>(g: &LatticeGraph<S>) -> Self {
        Self::from_keys(g, |src, slot| (src as u32, slot))
    }

    /// Source index, then reversed direction priority.
    pub fn axis_reversed<S: Scalar>(g: &LatticeGraph<S>) -> Self {
        Self::from_keys(g, |src, slot| (src as u32, u32::MAX - slot))
    }

    /// Seeded random total order (still vertex-grouped is not required; this
    /// one is a full shuffle).
    pub fn shuffled<S: Scalar>(g: &LatticeGraph<S>, seed: u64) -> Self {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = g.n_edges();
        let mut perm: Vec<u32> = (0..2 * m as u32).collect();
        perm.shuffle(&mut rng);
        let mut ranks = vec![0u32; 2 * m];
        for (rank, &oid) in perm.iter().enumerate() {
            ranks[oid as usize] = rank as u32;
        }
        EdgeOrder { ranks }
    }

    pub fn rank(&self, oriented_id: u32) -> u32 {
        self.ranks[oriented_id as usize]
    }

    /// Oriented id of the step `from -> to` along edge `e`.
    pub fn oriented_id<S: Scalar>(g: &LatticeGraph<S>, e: u32, from: u32) -> u32 {
        if g.edges()[e as usize].u == from {
            2 * e
        } else {
            2 * e + 1
        }
    }
}

/// Edge ids cancelled by the oriented step `from -> to` (edge `e`): the edge
/// itself plus every edge `{from, z}` whose oriented version from `from`
/// comes earlier in the order.
fn step_cancels<S: Scalar>(g: &LatticeGraph<S>, order: &EdgeOrder, e: u32, from: u32) -> Vec<u32> {
    let my_rank = order.rank(EdgeOrder::oriented_id(g, e, from));
    let mut out = vec![e];
    for &(_, e2) in g.neighbors(from as usize) {
        if e2 != e && order.rank(EdgeOrder::oriented_id(g, e2, from)) < my_rank {
            out.push(e2);
        }
    }
    out
}

/// Union of the per-step cancellation sets of an oriented edge sequence,
/// as a sorted set of edge ids. Monotone under sequence extension.
pub fn cancelled_edges<S: Scalar>(
    g: &LatticeGraph<S>,
    order: &EdgeOrder,
    steps: &[(u32, u32)],
) -> Result<Vec<u32>> {
    let mut set = vec![false; g.n_edges()];
    for &(a, b) in steps {
        let e = g
            .edge_id(a, b)
            .ok_or(Error::NotAnEdge(a as usize, b as usize))?;
        for c in step_cancels(g, order, e, a) {
            set[c as usize] = true;
        }
    }
    Ok((0..g.n_edges() as u32).filter(|&e| set[e as usize]).collect())
}

/// True iff no step uses an edge cancelled by a strictly earlier step.
/// Prefix-closed: every prefix of a consistent sequence is consistent.
pub fn is_consistent<S: Scalar>(
    g: &LatticeGraph<S>,
    order: &EdgeOrder,
    steps: &[(u32, u32)],
) -> Result<bool> {
    let mut cancelled = vec![false; g.n_edges()];
    for &(a, b) in steps {
        let e = g
            .edge_id(a, b)
            .ok_or(Error::NotAnEdge(a as usize, b as usize))?;
        if cancelled[e as usize] {
            return Ok(false);
        }
        for c in step_cancels(g, order, e, a) {
            cancelled[c as usize] = true;
        }
    }
    Ok(true)
}

/// A consistent, edge-self-avoiding oriented walk together with its cancelled
/// edge set. The empty backbone is the degenerate `x = y` case and acts as
/// the identity for concatenation (its weight is 1 by convention).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Backbone {
    steps: Vec<(u32, u32)>,
    cancelled: Vec<u32>,
}

/// Serializable form (steps only; the cancelled set is derived).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackboneSpec {
    pub steps: Vec<(u32, u32)>,
}

impl Backbone {
    pub fn empty() -> Self {
        Backbone {
            steps: Vec::new(),
            cancelled: Vec::new(),
        }
    }

    /// Validates continuity, edge existence and consistency.
    pub fn new<S: Scalar>(
        g: &LatticeGraph<S>,
        order: &EdgeOrder,
        steps: Vec<(u32, u32)>,
    ) -> Result<Self> {
        for w in steps.windows(2) {
            if w[0].1 != w[1].0 {
                return Err(Error::InconsistentBackbone(format!(
                    "steps do not chain: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        if !is_consistent(g, order, &steps)? {
            return Err(Error::InconsistentBackbone(
                "sequence uses a previously cancelled edge".into(),
            ));
        }
        let cancelled = cancelled_edges(g, order, &steps)?;
        Ok(Backbone { steps, cancelled })
    }

    pub fn steps(&self) -> &[(u32, u32)] {
        &self.steps
    }

    /// Cancelled edge ids, sorted.
    pub fn cancelled(&self) -> &[u32] {
        &self.cancelled
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// `(start, end)` of the walk, `None` for the empty backbone.
    pub fn endpoints(&self) -> Option<(u32, u32)> {
        self.steps
            .first()
            .map(|f| (f.0, self.steps.last().unwrap().1))
    }

    /// Edge ids traversed by the walk.
    pub fn edge_ids<S: Scalar>(&self, g: &LatticeGraph<S>) -> Vec<u32> {
        self.steps
            .iter()
            .map(|&(a, b)| g.edge_id(a, b).expect("backbone edge"))
            .collect()
    }

    /// Concatenation `self ∘ other`; endpoints must chain and the combined
    /// sequence must be consistent, otherwise rejected.
    pub fn concat<S: Scalar>(
        &self,
        g: &LatticeGraph<S>,
        order: &EdgeOrder,
        other: &Backbone,
    ) -> Result<Backbone> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.endpoints().unwrap().1 != other.endpoints().unwrap().0 {
            return Err(Error::InconsistentBackbone(
                "concatenation endpoints do not match".into(),
            ));
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Backbone::new(g, order, steps)
    }

    pub fn to_spec(&self) -> BackboneSpec {
        BackboneSpec {
            steps: self.steps.clone(),
        }
    }
}

/// The backbone of a current with exactly two sources `{x, y}`: the
/// lexicographically minimal (under `order`) edge-self-avoiding walk from `x`
/// to `y` through odd-current edges, stopping at its first arrival at `y`.
///
/// Depth-first search in rank order with cancellation-aware pruning; the
/// minimal walk is consistent, so pruning never discards it (checked against
/// a brute-force minimality oracle in the tests).
pub fn extract_backbone<S: Scalar>(
    g: &LatticeGraph<S>,
    order: &EdgeOrder,
    n: &CurrentConfiguration,
) -> Result<Backbone> {
    let src = sources(g, n);
    if src.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "extract_backbone needs exactly two sources, found {:?}",
            src
        )));
    }
    let (x, y) = (src[0] as u32, src[1] as u32);
    let odd: Vec<bool> = n.values.iter().map(|&v| v % 2 == 1).collect();

    fn dfs<S: Scalar>(
        g: &LatticeGraph<S>,
        order: &EdgeOrder,
        odd: &[bool],
        v: u32,
        y: u32,
        used: &mut [bool],
        cancel_count: &mut [u32],
        steps: &mut Vec<(u32, u32)>,
    ) -> bool {
        let mut cands: Vec<(u32, u32, u32)> = g
            .neighbors(v as usize)
            .iter()
            .filter(|&&(_, e)| odd[e as usize] && !used[e as usize])
            .map(|&(w, e)| (order.rank(EdgeOrder::oriented_id(g, e, v)), w, e))
            .collect();
        cands.sort_unstable();
        for (_, w, e) in cands {
            if cancel_count[e as usize] > 0 {
                continue; // cancelled by the current prefix: prune
            }
            used[e as usize] = true;
            for c in step_cancels(g, order, e, v) {
                cancel_count[c as usize] += 1;
            }
            steps.push((v, w));
            if w == y || dfs(g, order, odd, w, y, used, cancel_count, steps) {
                return true;
            }
            steps.pop();
            for c in step_cancels(g, order, e, v) {
                cancel_count[c as usize] -= 1;
            }
            used[e as usize] = false;
        }
        false
    }

    let mut used = vec![false; g.n_edges()];
    let mut cancel_count = vec![0u32; g.n_edges()];
    let mut steps: Vec<(u32, u32)> = Vec::new();
    if dfs(g, order, &odd, x, y, &mut used, &mut cancel_count, &mut steps) {
        let cancelled = (0..g.n_edges() as u32)
            .filter(|&e| cancel_count[e as usize] > 0)
            .collect();
        Ok(Backbone { steps, cancelled })
    } else {
        Err(Error::Internal(
            "no odd-edge walk between the two sources (parity violation)".into(),
        ))
    }
}

/// All backbones from `x` to `y` in `g`: consistent edge-self-avoiding
/// oriented walks on positive-coupling edges in which `y` appears only as the
/// final vertex. Refuses graphs with more than [`BACKBONE_EDGE_BUDGET`]
/// active edges.
pub const BACKBONE_EDGE_BUDGET: usize = 16;

pub fn enumerate_backbones<S: Scalar>(
    g: &LatticeGraph<S>,
    order: &EdgeOrder,
    x: usize,
    y: usize,
) -> Result<Vec<Backbone>> {
    if g.n_active_edges() > BACKBONE_EDGE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "active edges for backbone enumeration",
            got: g.n_active_edges(),
            limit: BACKBONE_EDGE_BUDGET,
        });
    }
    if x == y {
        return Err(Error::InvalidArgument(
            "backbones need two distinct sources".into(),
        ));
    }
    let mut out = Vec::new();
    let mut used = vec![false; g.n_edges()];
    let mut cancel_count = vec![0u32; g.n_edges()];
    let mut steps: Vec<(u32, u32)> = Vec::new();

    fn dfs<S: Scalar>(
        g: &LatticeGraph<S>,
        order: &EdgeOrder,
        v: u32,
        y: u32,
        used: &mut [bool],
        cancel_count: &mut [u32],
        steps: &mut Vec<(u32, u32)>,
        out: &mut Vec<Backbone>,
    ) {
        for &(w, e) in g.neighbors(v as usize) {
            if used[e as usize]
                || cancel_count[e as usize] > 0
                || g.edges()[e as usize].coupling.is_zero()
            {
                continue;
            }
            used[e as usize] = true;
            for c in step_cancels(g, order, e, v) {
                cancel_count[c as usize] += 1;
            }
            steps.push((v, w));
            if w == y {
                let cancelled = (0..g.n_edges() as u32)
                    .filter(|&e| cancel_count[e as usize] > 0)
                    .collect();
                out.push(Backbone {
                    steps: steps.clone(),
                    cancelled,
                });
            } else {
                dfs(g, order, w, y, used, cancel_count, steps, out);
            }
            steps.pop();
            for c in step_cancels(g, order, e, v) {
                cancel_count[c as usize] -= 1;
            }
            used[e as usize] = false;
        }
    }
    dfs(
        g,
        order,
        x as u32,
        y as u32,
        &mut used,
        &mut cancel_count,
        &mut steps,
        &mut out,
    );
    Ok(out)
}

/// Source constraint for current enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceConstraint {
    Any,
    Equals(Vec<usize>),
}

/// Iterator over all currents with `n_e <= cap` on the active edges of `g`
/// (zero-coupling edges stay at 0) matching the source constraint.
pub struct CurrentIter<'a, S> {
    g: &'a LatticeGraph<S>,
    active: Vec<usize>,
    cap: u32,
    constraint: SourceConstraint,
    state: Option<Vec<u32>>, // odometer over active edges
}

pub fn enumerate_currents<'a, S: Scalar>(
    g: &'a LatticeGraph<S>,
    cap: u32,
    constraint: SourceConstraint,
) -> Result<CurrentIter<'a, S>> {
    let active: Vec<usize> = (0..g.n_edges())
        .filter(|&e| !g.edges()[e].coupling.is_zero())
        .collect();
    let count = ((cap + 1) as f64).powi(active.len() as i32);
    if count > 2e7 {
        return Err(Error::BudgetExceeded {
            what: "current configurations",
            got: count as usize,
            limit: 2e7 as usize,
        });
    }
    if let SourceConstraint::Equals(s) = &constraint {
        if s.len() % 2 == 1 {
            return Err(Error::InvalidArgument(
                "source sets have even cardinality".into(),
            ));
        }
    }
    Ok(CurrentIter {
        g,
        active,
        cap,
        constraint,
        state: Some(vec![0; 0]),
    })
}

impl<'a, S: Scalar> Iterator for CurrentIter<'a, S> {
    type Item = CurrentConfiguration;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let state = self.state.as_mut()?;
            if state.is_empty() {
                *state = vec![0; self.active.len()];
            } else {
                // odometer increment
                let mut i = 0;
                loop {
                    if i == state.len() {
                        self.state = None;
                        return None;
                    }
                    state[i] += 1;
                    if state[i] <= self.cap {
                        break;
                    }
                    state[i] = 0;
                    i += 1;
                }
            }
            let mut values = vec![0u32; self.g.n_edges()];
            for (slot, &e) in self.active.iter().enumerate() {
                values[e] = self.state.as_ref().unwrap()[slot];
            }
            let n = CurrentConfiguration { values };
            let ok = match &self.constraint {
                SourceConstraint::Any => true,
                SourceConstraint::Equals(s) => &sources(self.g, &n) == s,
            };
            if ok {
                return Some(n);
            }
        }
    }
}
