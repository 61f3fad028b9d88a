//! Small named graphs for the verification suite's instance matrix.

use ising_core::lattice::{Bc, LatticeGraph};

pub type G = LatticeGraph<f64>;

pub fn single_edge() -> G {
    G::from_parts(1, vec![vec![0], vec![1]], &[(0, 1)]).unwrap()
}

pub fn path(n_edges: usize) -> G {
    let coords = (0..=n_edges as i64).map(|i| vec![i]).collect();
    let edges: Vec<(u32, u32)> = (0..n_edges as u32).map(|i| (i, i + 1)).collect();
    G::from_parts(1, coords, &edges).unwrap()
}

pub fn square() -> G {
    G::from_parts(
        2,
        vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]],
        &[(0, 1), (0, 2), (1, 3), (2, 3)],
    )
    .unwrap()
}

pub fn square_with_leg() -> G {
    G::from_parts(
        2,
        vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]],
        &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 4)],
    )
    .unwrap()
}

pub fn grid_2x3() -> G {
    G::from_parts(
        2,
        vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![1, 1],
            vec![0, 2],
            vec![1, 2],
        ],
        &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4), (3, 5), (4, 5)],
    )
    .unwrap()
}

pub fn ladder_2x4() -> G {
    let mut coords = Vec::new();
    for y in 0..4i64 {
        for x in 0..2i64 {
            coords.push(vec![x, y]);
        }
    }
    let idx = |x: u32, y: u32| y * 2 + x;
    let mut edges = Vec::new();
    for y in 0..4 {
        edges.push((idx(0, y), idx(1, y)));
    }
    for y in 0..3 {
        edges.push((idx(0, y), idx(0, y + 1)));
        edges.push((idx(1, y), idx(1, y + 1)));
    }
    G::from_parts(2, coords, &edges).unwrap()
}

pub fn box2(r0: i64, r1: i64) -> G {
    G::build_box(2, &[r0, r1], Bc::Free).unwrap()
}
