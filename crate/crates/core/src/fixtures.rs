//! Reference complexes and a random complex generator.

use rand::Rng;

use crate::complex::SimplicialComplex;

/// Parts of the 7-node, 10-edge, 3-triangle example complex (0-based).
///
/// Filled triangles {1,2,3}, {1,2,4}, {1,5,6}; the cycle {1,3,7} is left
/// empty, so the complex has exactly one hole.
pub fn one_hole_parts() -> (usize, Vec<[usize; 2]>, Vec<[usize; 3]>) {
    let edges = vec![
        [0, 1],
        [0, 2],
        [0, 3],
        [0, 4],
        [0, 5],
        [0, 6],
        [1, 2],
        [1, 3],
        [2, 6],
        [4, 5],
    ];
    let triangles = vec![[0, 1, 2], [0, 1, 3], [0, 4, 5]];
    (7, edges, triangles)
}

pub fn one_hole() -> SimplicialComplex {
    let (n, e, t) = one_hole_parts();
    SimplicialComplex::new(n, &e, &t, &[]).expect("fixture is valid")
}

/// The one-hole complex without its triangles: the graph skeleton.
pub fn one_hole_skeleton() -> SimplicialComplex {
    let (n, e, _) = one_hole_parts();
    SimplicialComplex::new(n, &e, &[], &[]).expect("fixture is valid")
}

/// `(num_vertices, edges, triangles, cells)`.
pub type CellComplexParts = (usize, Vec<[usize; 2]>, Vec<[usize; 3]>, Vec<Vec<usize>>);

/// Cell complex with two triangles and the quadrilateral {1,2,3,7}, which
/// has no diagonal edge.
pub fn square_cell_parts() -> CellComplexParts {
    let edges = vec![
        [0, 1],
        [0, 3],
        [1, 3],
        [0, 4],
        [0, 5],
        [4, 5],
        [1, 2],
        [2, 6],
        [0, 6],
    ];
    let triangles = vec![[0, 1, 3], [0, 4, 5]];
    let cells = vec![vec![0, 1, 2, 6]];
    (7, edges, triangles, cells)
}

pub fn square_cell() -> SimplicialComplex {
    let (n, e, t, c) = square_cell_parts();
    SimplicialComplex::new(n, &e, &t, &c).expect("fixture is valid")
}

/// Erdos-Renyi skeleton on `n` vertices with each 3-clique filled with
/// probability `p_triangle`.
pub fn random_complex<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    p_edge: f64,
    p_triangle: f64,
) -> SimplicialComplex {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p_edge {
                edges.push([i, j]);
            }
        }
    }
    let skeleton = SimplicialComplex::new(n, &edges, &[], &[]).expect("valid skeleton");
    let triangles: Vec<[usize; 3]> = skeleton
        .three_cliques()
        .into_iter()
        .filter(|_| rng.random::<f64>() < p_triangle)
        .collect();
    SimplicialComplex::new(n, &edges, &triangles, &[]).expect("cliques satisfy inclusivity")
}
