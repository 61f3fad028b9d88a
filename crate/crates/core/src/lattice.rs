//! Finite box graphs in `Z^d` with free or periodic boundary conditions,
//! plus the face/reflection geometry used by the comparison inequalities.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Boundary condition of a box graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Free,
    Periodic,
}

impl std::fmt::Display for Bc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bc::Free => write!(f, "free"),
            Bc::Periodic => write!(f, "periodic"),
        }
    }
}

/// Unoriented edge with its coupling. `u < v` by vertex index. `axis` and
/// `dir_from_u` record the lattice direction of the step `u -> v` (wrap-aware
/// for periodic boxes); they drive the oriented-edge order of the backbone
/// machinery.
#[derive(Debug, Clone)]
pub struct Edge<S> {
    pub u: u32,
    pub v: u32,
    pub coupling: S,
    pub axis: u8,
    pub dir_from_u: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Box { radii: Vec<i64>, bc: Bc },
    Custom,
}

/// Finite graph of integer-coordinate vertices with nonnegative couplings.
///
/// Vertices of box graphs are identified by the row-major linearization of
/// their coordinates (last axis fastest); that index is the canonical vertex
/// identity everywhere in this crate. Removing edges sets couplings to zero
/// but keeps the entries, so removal is idempotent and the vertex set never
/// changes.
#[derive(Debug, Clone)]
pub struct LatticeGraph<S> {
    dimension: usize,
    kind: Kind,
    coords: Vec<Vec<i64>>,
    edges: Vec<Edge<S>>,
    removed: Vec<(u32, u32)>,
    edge_ids: HashMap<(u32, u32), u32>,
    adj_offsets: Vec<u32>,
    adj: Vec<(u32, u32)>, // (neighbor vertex, edge id), sorted by neighbor
}

/// Serializable description of a box graph: enough to rebuild it exactly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphSpec {
    pub d: usize,
    pub radii: Vec<i64>,
    pub bc: Bc,
    pub removed_edges: Vec<(u32, u32)>,
}

impl<S: Scalar> LatticeGraph<S> {
    /// Builds the box `[-n_1,n_1] x ... x [-n_d,n_d]` with all couplings 1.
    ///
    /// Free boundary conditions keep exactly the nearest-neighbor pairs inside
    /// the box; periodic ones wrap every axis (and need radius >= 1 so no pair
    /// is doubled).
    pub fn build_box(dimension: usize, radii: &[i64], bc: Bc) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(dimension));
        }
        if radii.len() != dimension {
            return Err(Error::InvalidRadii(format!(
                "expected {} radii, got {}",
                dimension,
                radii.len()
            )));
        }
        if radii.iter().any(|&r| r < 0) {
            return Err(Error::InvalidRadii(format!("negative radius in {radii:?}")));
        }
        if bc == Bc::Periodic && radii.iter().any(|&r| r < 1) {
            return Err(Error::InvalidRadii(
                "periodic boundary conditions need radius >= 1 on each axis".into(),
            ));
        }
        let sides: Vec<i64> = radii.iter().map(|&r| 2 * r + 1).collect();
        let n_vertices: i64 = sides.iter().product();
        if n_vertices > (1 << 28) {
            return Err(Error::BudgetExceeded {
                what: "vertices",
                got: n_vertices as usize,
                limit: 1 << 28,
            });
        }
        let mut strides = vec![1i64; dimension];
        for i in (0..dimension.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sides[i + 1];
        }

        let n_vertices = n_vertices as usize;
        let mut coords = Vec::with_capacity(n_vertices);
        let mut x = radii.iter().map(|&r| -r).collect::<Vec<i64>>();
        for _ in 0..n_vertices {
            coords.push(x.clone());
            for axis in (0..dimension).rev() {
                x[axis] += 1;
                if x[axis] <= radii[axis] {
                    break;
                }
                x[axis] = -radii[axis];
            }
        }

        let index_of = |x: &[i64]| -> usize {
            x.iter()
                .zip(radii)
                .zip(&strides)
                .map(|((&c, &r), &s)| (c + r) * s)
                .sum::<i64>() as usize
        };

        let mut edges = Vec::new();
        for (u, xu) in coords.iter().enumerate() {
            for axis in 0..dimension {
                // only the +e_axis step from each vertex, so each pair appears once
                let mut xv = xu.clone();
                xv[axis] += 1;
                let wrapped = xv[axis] > radii[axis];
                if wrapped {
                    if bc == Bc::Free {
                        continue;
                    }
                    xv[axis] = -radii[axis];
                }
                let v = index_of(&xv);
                let (a, b, dir) = if (u as u32) < (v as u32) {
                    (u as u32, v as u32, 1i8)
                } else {
                    (v as u32, u as u32, -1i8)
                };
                edges.push(Edge {
                    u: a,
                    v: b,
                    coupling: S::one(),
                    axis: axis as u8,
                    dir_from_u: dir,
                });
            }
        }

        Ok(Self::assemble(
            dimension,
            Kind::Box {
                radii: radii.to_vec(),
                bc,
            },
            coords,
            edges,
        ))
    }

    /// Builds an arbitrary small graph from explicit coordinates and edges.
    /// Every edge must be a unit lattice step; used for the non-box fixtures
    /// of the oracle suite (plaquettes, rings, ladders).
    pub fn from_parts(
        dimension: usize,
        coords: Vec<Vec<i64>>,
        edge_pairs: &[(u32, u32)],
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(dimension));
        }
        for c in &coords {
            if c.len() != dimension {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {c:?} does not have dimension {dimension}"
                )));
            }
        }
        let mut seen = HashMap::new();
        let mut edges = Vec::new();
        for &(a, b) in edge_pairs {
            if a == b || a as usize >= coords.len() || b as usize >= coords.len() {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if seen.insert((u, v), ()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
            }
            let delta: Vec<i64> = coords[v as usize]
                .iter()
                .zip(&coords[u as usize])
                .map(|(a, b)| a - b)
                .collect();
            let nonzero: Vec<usize> = (0..dimension).filter(|&i| delta[i] != 0).collect();
            if nonzero.len() != 1 || delta[nonzero[0]].abs() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) is not a unit lattice step"
                )));
            }
            edges.push(Edge {
                u,
                v,
                coupling: S::one(),
                axis: nonzero[0] as u8,
                dir_from_u: delta[nonzero[0]] as i8,
            });
        }
        Ok(Self::assemble(dimension, Kind::Custom, coords, edges))
    }

    fn assemble(dimension: usize, kind: Kind, coords: Vec<Vec<i64>>, edges: Vec<Edge<S>>) -> Self {
        let mut edge_ids = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            edge_ids.insert((e.u, e.v), i as u32);
        }
        let n = coords.len();
        let mut degree = vec![0u32; n];
        for e in &edges {
            degree[e.u as usize] += 1;
            degree[e.v as usize] += 1;
        }
        let mut adj_offsets = vec![0u32; n + 1];
        for i in 0..n {
            adj_offsets[i + 1] = adj_offsets[i] + degree[i];
        }
        let mut adj = vec![(0u32, 0u32); adj_offsets[n] as usize];
        let mut cursor = adj_offsets.clone();
        for (i, e) in edges.iter().enumerate() {
            adj[cursor[e.u as usize] as usize] = (e.v, i as u32);
            cursor[e.u as usize] += 1;
            adj[cursor[e.v as usize] as usize] = (e.u, i as u32);
            cursor[e.v as usize] += 1;
        }
        for v in 0..n {
            adj[adj_offsets[v] as usize..adj_offsets[v + 1] as usize].sort_unstable();
        }
        LatticeGraph {
            dimension,
            kind,
            coords,
            edges,
            removed: Vec::new(),
            edge_ids,
            adj_offsets,
            adj,
        }
    }

    /// Returns a copy with the couplings of `pairs` set to zero. Rejects pairs
    /// that were never edges; zeroing an already-zero coupling is a no-op, so
    /// the operation is idempotent.
    pub fn remove_edges(&self, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut g = self.clone();
        for &(a, b) in pairs {
            let key = if a < b { (a, b) } else { (b, a) };
            let id = *g
                .edge_ids
                .get(&key)
                .ok_or(Error::NotAnEdge(key.0 as usize, key.1 as usize))?;
            if !g.edges[id as usize].coupling.is_zero() {
                g.edges[id as usize].coupling = S::zero();
                g.removed.push(key);
            }
        }
        g.removed.sort_unstable();
        Ok(g)
    }

    /// Same as [`remove_edges`](Self::remove_edges) but by edge id.
    pub fn remove_edge_ids(&self, ids: &[u32]) -> Result<Self> {
        let pairs: Vec<(u32, u32)> = ids
            .iter()
            .map(|&i| {
                let e = &self.edges[i as usize];
                (e.u, e.v)
            })
            .collect();
        self.remove_edges(&pairs)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges with coupling still nonzero.
    pub fn n_active_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.coupling.is_zero()).count()
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn coord(&self, v: usize) -> &[i64] {
        &self.coords[v]
    }

    pub fn coords(&self) -> &[Vec<i64>] {
        &self.coords
    }

    pub fn bc(&self) -> Bc {
        match &self.kind {
            Kind::Box { bc, .. } => *bc,
            Kind::Custom => Bc::Free,
        }
    }

    pub fn radii(&self) -> Option<&[i64]> {
        match &self.kind {
            Kind::Box { radii, .. } => Some(radii),
            Kind::Custom => None,
        }
    }

    /// Index of the vertex at `x`, if inside the graph.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        match &self.kind {
            Kind::Box { radii, .. } => {
                if x.len() != self.dimension {
                    return None;
                }
                let mut idx = 0i64;
                let mut stride = 1i64;
                for axis in (0..self.dimension).rev() {
                    let r = radii[axis];
                    if x[axis].abs() > r {
                        return None;
                    }
                    idx += (x[axis] + r) * stride;
                    stride *= 2 * r + 1;
                }
                Some(idx as usize)
            }
            Kind::Custom => self.coords.iter().position(|c| c == x),
        }
    }

    pub fn edge_id(&self, a: u32, b: u32) -> Option<u32> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_ids.get(&key).copied()
    }

    /// Neighbors of `v` as `(vertex, edge id)`, including zero-coupling edges.
    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_offsets[v] as usize..self.adj_offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    /// Stable fingerprint of geometry and couplings (FNV-1a).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        eat(self.dimension as u64);
        for c in &self.coords {
            for &v in c {
                eat(v as u64);
            }
        }
        for e in &self.edges {
            eat(e.u as u64);
            eat(e.v as u64);
            eat(e.coupling.to_f64().to_bits());
        }
        h
    }

    /// JSON-friendly description; only box graphs are serializable.
    pub fn to_spec(&self) -> Result<GraphSpec> {
        match &self.kind {
            Kind::Box { radii, bc } => Ok(GraphSpec {
                d: self.dimension,
                radii: radii.clone(),
                bc: *bc,
                removed_edges: self.removed.clone(),
            }),
            Kind::Custom => Err(Error::InvalidArgument(
                "custom graphs have no box description".into(),
            )),
        }
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let g = Self::build_box(spec.d, &spec.radii, spec.bc)?;
        g.remove_edges(&spec.removed_edges)
    }

    /// Short human label used in verification reports.
    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Box { radii, bc } => {
                let removed = if self.removed.is_empty() {
                    String::new()
                } else {
                    format!(" minus {} edges", self.removed.len())
                };
                format!("box d={} r={:?} {}{}", self.dimension, radii, bc, removed)
            }
            Kind::Custom => format!(
                "custom d={} v={} e={}",
                self.dimension,
                self.n_vertices(),
                self.n_edges()
            ),
        }
    }
}

/// Reflection across the hyperplane `x_axis = offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reflection {
    pub axis: usize,
    pub offset: i64,
}

impl Reflection {
    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        let mut y = x.to_vec();
        y[self.axis] = 2 * self.offset - x[self.axis];
        y
    }

    pub fn apply_edge(&self, e: (&[i64], &[i64])) -> (Vec<i64>, Vec<i64>) {
        (self.apply(e.0), self.apply(e.1))
    }
}

/// One of the `2d` faces of a box: vertices with `x_axis = sign * radius`.
#[derive(Debug, Clone)]
pub struct Face {
    pub axis: usize,
    pub sign: i8,
    pub vertices: Vec<usize>,
}

impl Face {
    /// The reflection whose fixed plane contains this face.
    pub fn reflection(&self, inner_radii: &[i64]) -> Reflection {
        Reflection {
            axis: self.axis,
            offset: self.sign as i64 * inner_radii[self.axis],
        }
    }
}

/// Boundary vertex set and face list of the box `[-m_1,m_1] x ...` inside `g`.
///
/// The boundary is every inner-box vertex with a nearest neighbor outside the
/// inner box, i.e. some coordinate at `+-m_i`. Vertices are indices into `g`.
pub fn boundary_and_faces<S: Scalar>(
    g: &LatticeGraph<S>,
    inner_radii: &[i64],
) -> Result<(Vec<usize>, Vec<Face>)> {
    let outer = g
        .radii()
        .ok_or_else(|| Error::InvalidArgument("boundary_and_faces needs a box graph".into()))?;
    if inner_radii.len() != g.dimension() {
        return Err(Error::InvalidRadii("inner radii dimension mismatch".into()));
    }
    if inner_radii
        .iter()
        .zip(outer)
        .any(|(&m, &n)| m < 0 || m > n)
    {
        return Err(Error::InvalidRadii(
            "inner box not contained in the graph's box".into(),
        ));
    }
    let d = g.dimension();
    let mut boundary = Vec::new();
    let mut faces: Vec<Face> = (0..d)
        .flat_map(|axis| {
            [1i8, -1i8].into_iter().map(move |sign| Face {
                axis,
                sign,
                vertices: Vec::new(),
            })
        })
        .collect();
    for (v, x) in g.coords().iter().enumerate() {
        if x.iter().zip(inner_radii).any(|(&c, &m)| c.abs() > m) {
            continue; // outside inner box
        }
        let mut on_boundary = false;
        for axis in 0..d {
            if x[axis] == inner_radii[axis] {
                faces[2 * axis].vertices.push(v);
                on_boundary = true;
            }
            if x[axis] == -inner_radii[axis] {
                faces[2 * axis + 1].vertices.push(v);
                on_boundary = true;
            }
        }
        if on_boundary {
            boundary.push(v);
        }
    }
    Ok((boundary, faces))
}

/// The `2d` reflected images of `y` across the planes containing the faces of
/// the box with `inner_radii`, ordered `(+axis0, -axis0, +axis1, ...)`.
pub fn reflected_images(y: &[i64], inner_radii: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(2 * inner_radii.len());
    for axis in 0..inner_radii.len() {
        for sign in [1i64, -1] {
            let r = Reflection {
                axis,
                offset: sign * inner_radii[axis],
            };
            out.push(r.apply(y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type G = LatticeGraph<f64>;

    #[test]
    fn box_2d_counts() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        assert_eq!(g.n_vertices(), 9);
        assert_eq!(g.n_edges(), 12);
    }

    #[test]
    fn path_counts() {
        let g = G::build_box(1, &[2], Bc::Free).unwrap();
        assert_eq!(g.n_vertices(), 5);
        assert_eq!(g.n_edges(), 4);
        // path endpoints have degree 1
        let ends: Vec<usize> = (0..5).filter(|&v| g.degree(v) == 1).collect();
        assert_eq!(ends.len(), 2);
    }

    #[test]
    fn periodic_3d_degrees() {
        let g = G::build_box(3, &[1, 1, 1], Bc::Periodic).unwrap();
        assert_eq!(g.n_vertices(), 27);
        assert_eq!(g.n_edges(), 81);
        for v in 0..27 {
            assert_eq!(g.degree(v), 6);
        }
        // brute-force wrap-around pairs: each (x,y) adjacent iff they differ by
        // +-1 mod 3 on exactly one axis
        let mut expected = 0;
        for u in 0..27 {
            for v in (u + 1)..27 {
                let a = g.coord(u).to_vec();
                let b = g.coord(v).to_vec();
                let diffs: Vec<i64> = a
                    .iter()
                    .zip(&b)
                    .map(|(&p, &q)| {
                        let d = (p - q).rem_euclid(3);
                        d.min(3 - d)
                    })
                    .collect();
                if diffs.iter().sum::<i64>() == 1 {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 81);
    }

    #[test]
    fn free_edge_count_formula_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let d = rng.gen_range(1..=4usize);
            let radii: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=3i64)).collect();
            let g = G::build_box(d, &radii, Bc::Free).unwrap();
            let sides: Vec<i64> = radii.iter().map(|&r| 2 * r + 1).collect();
            let expect: i64 = (0..d)
                .map(|a| {
                    2 * radii[a]
                        * (0..d)
                            .filter(|&b| b != a)
                            .map(|b| sides[b])
                            .product::<i64>()
                })
                .sum();
            assert_eq!(g.n_edges() as i64, expect, "d={d} radii={radii:?}");
        }
    }

    #[test]
    fn invalid_boxes_rejected() {
        assert!(G::build_box(0, &[], Bc::Free).is_err());
        assert!(G::build_box(2, &[1], Bc::Free).is_err());
        assert!(G::build_box(2, &[-1, 1], Bc::Free).is_err());
        assert!(G::build_box(2, &[0, 1], Bc::Periodic).is_err());
    }

    #[test]
    fn remove_edges_idempotent_and_rejects_non_edges() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let e = (g.edges()[3].u, g.edges()[3].v);
        let g1 = g.remove_edges(&[e]).unwrap();
        assert_eq!(g1.n_vertices(), g.n_vertices());
        assert_eq!(g1.n_edges(), g.n_edges());
        assert_eq!(g1.n_active_edges(), g.n_active_edges() - 1);
        let g2 = g1.remove_edges(&[e]).unwrap();
        assert_eq!(g2.n_active_edges(), g1.n_active_edges());
        assert_eq!(g2.to_spec().unwrap(), g1.to_spec().unwrap());
        // (0, 8) is a diagonal pair, never an edge
        assert!(g.remove_edges(&[(0, 8)]).is_err());
    }

    #[test]
    fn remove_no_edges_is_identity() {
        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let g1 = g.remove_edges(&[]).unwrap();
        assert_eq!(g.to_spec().unwrap(), g1.to_spec().unwrap());
    }

    #[test]
    fn reflect_examples() {
        let r = Reflection { axis: 0, offset: 0 };
        assert_eq!(r.apply(&[3, 1]), vec![-3, 1]);
        let (a, b) = r.apply_edge((&[0, 0], &[1, 0]));
        assert_eq!((a, b), (vec![0, 0], vec![-1, 0]));
    }

    #[test]
    fn spec_round_trip() {
        let g = G::build_box(2, &[2, 1], Bc::Free).unwrap();
        let g = g.remove_edges(&[(g.edges()[0].u, g.edges()[0].v)]).unwrap();
        let spec = g.to_spec().unwrap();
        let as_json = serde_json::to_string(&spec).unwrap();
        let back: GraphSpec = serde_json::from_str(&as_json).unwrap();
        let g2 = G::from_spec(&back).unwrap();
        assert_eq!(g2.fingerprint(), g.fingerprint());
    }

    #[test]
    fn boundary_faces_1d_and_2d() {
        let g = G::build_box(1, &[4], Bc::Free).unwrap();
        let (b, faces) = boundary_and_faces(&g, &[2]).unwrap();
        let coords: Vec<i64> = b.iter().map(|&v| g.coord(v)[0]).collect();
        assert_eq!(coords, vec![-2, 2]);
        assert_eq!(faces.len(), 2);

        let g = G::build_box(2, &[1, 1], Bc::Free).unwrap();
        let (b, faces) = boundary_and_faces(&g, &[1, 1]).unwrap();
        assert_eq!(b.len(), 8); // all but the center
        assert_eq!(faces.len(), 4);
        for f in &faces {
            assert_eq!(f.vertices.len(), 3);
        }
        assert!(boundary_and_faces(&g, &[2, 1]).is_err());
    }

    #[test]
    fn reflected_images_example() {
        let imgs = reflected_images(&[0, 0], &[1, 1]);
        assert_eq!(
            imgs,
            vec![vec![2, 0], vec![-2, 0], vec![0, 2], vec![0, -2]]
        );
    }

    #[test]
    fn face_planes_are_reflection_fixed_layers() {
        let g = G::build_box(2, &[2, 2], Bc::Free).unwrap();
        let (_, faces) = boundary_and_faces(&g, &[2, 2]).unwrap();
        for f in &faces {
            let r = f.reflection(&[2, 2]);
            for &v in &f.vertices {
                assert_eq!(r.apply(g.coord(v)), g.coord(v).to_vec());
            }
            // reflecting the whole box across the face plane lands outside (or on the plane)
            for x in g.coords() {
                let y = r.apply(x);
                assert!(y[f.axis] * f.sign as i64 >= 2 || x[f.axis] == f.sign as i64 * 2);
            }
        }
    }
}
