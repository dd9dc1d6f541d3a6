//! Dense reference computations shared by the integration tests. Nothing
//! here goes through the spectral or filter code under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use toposig::filter::HodgeFilterSpec;
use toposig::SimplicialComplex;

pub fn dense_b1(c: &SimplicialComplex) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(c.num_vertices(), c.num_edges());
    for (e, &[a, z]) in c.edges().iter().enumerate() {
        b[(a, e)] = -1.0;
        b[(z, e)] = 1.0;
    }
    b
}

/// Triangle-only boundary, `[i,j,k] -> [j,k] - [i,k] + [i,j]`.
pub fn dense_b2(c: &SimplicialComplex) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(c.num_edges(), c.triangles().len());
    for (t, &[i, j, k]) in c.triangles().iter().enumerate() {
        b[(c.edge_index(j, k).unwrap(), t)] = 1.0;
        b[(c.edge_index(i, k).unwrap(), t)] = -1.0;
        b[(c.edge_index(i, j).unwrap(), t)] = 1.0;
    }
    b
}

/// `(L_down, L_up)` of order `k`. Simplicial complexes use the boundaries
/// above; cell complexes fall back to the library's.
pub fn dense_parts(c: &SimplicialComplex, k: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (b1, b2) = if c.is_simplicial() {
        (dense_b1(c), dense_b2(c))
    } else {
        (c.boundary_dense(1), c.boundary_dense(2))
    };
    match k {
        0 => (DMatrix::zeros(b1.nrows(), b1.nrows()), &b1 * b1.transpose()),
        1 => (b1.transpose() * &b1, &b2 * b2.transpose()),
        _ => (b2.transpose() * &b2, DMatrix::zeros(b2.ncols(), b2.ncols())),
    }
}

/// `f(A)` for symmetric `A` through its eigendecomposition.
pub fn spectral_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(&f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn poly(h: &[f64], start: usize, x: f64) -> f64 {
    h.iter()
        .enumerate()
        .skip(start)
        .map(|(t, &c)| c * x.powi(t as i32))
        .sum()
}

/// Filter matrix evaluated eigenvalue-by-eigenvalue on each Laplacian part.
pub fn oracle_filter(c: &SimplicialComplex, k: usize, spec: &HodgeFilterSpec) -> DMatrix<f64> {
    let (ld, lu) = dense_parts(c, k);
    let start = spec.start();
    let mut h = spectral_fn(&ld, |x| poly(&spec.h_down, start, x))
        + spectral_fn(&lu, |x| poly(&spec.h_up, start, x));
    if let Some(hm) = spec.harmonic {
        h += spectral_fn(&(&ld + &lu), |x| (1.0 - hm.epsilon * x).powi(hm.t_h as i32));
    }
    h
}

/// Orthogonal projector onto the kernel of symmetric `a`.
pub fn kernel_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = a.norm().max(1.0);
    spectral_fn(a, |x| if x.abs() <= 1e-9 * scale { 1.0 } else { 0.0 })
}

/// Orthogonal projector onto the column space of `a`.
pub fn range_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), a.nrows());
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let cut = 1e-10 * smax.max(1.0);
    let mut p = DMatrix::zeros(a.nrows(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            let col = u.column(i);
            p += col * col.transpose();
        }
    }
    p
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn rel_err(got: &DVector<f64>, want: &DVector<f64>) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

/// Vertex relabeling and the induced signed permutations of edges and
/// triangles: simplex `i` of `c` maps to `(index[i], sign[i])` in `relabeled`.
pub struct Relabeling {
    pub relabeled: SimplicialComplex,
    pub vertex: Vec<usize>,
    pub edge: Vec<(usize, f64)>,
    pub triangle: Vec<(usize, f64)>,
}

fn sort_sign<const N: usize>(mut v: [usize; N]) -> ([usize; N], f64) {
    let mut sign = 1.0;
    for i in 0..N {
        for j in 0..N - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (v, sign)
}

pub fn relabel(c: &SimplicialComplex, perm: &[usize]) -> Relabeling {
    let edges: Vec<[usize; 2]> = c
        .edges()
        .iter()
        .map(|&[a, b]| sort_sign([perm[a], perm[b]]).0)
        .collect();
    let tris: Vec<[usize; 3]> = c
        .triangles()
        .iter()
        .map(|&[a, b, d]| sort_sign([perm[a], perm[b], perm[d]]).0)
        .collect();
    let relabeled = SimplicialComplex::new(c.num_vertices(), &edges, &tris, &[]).unwrap();
    let edge = c
        .edges()
        .iter()
        .map(|&[a, b]| {
            let ([x, y], s) = sort_sign([perm[a], perm[b]]);
            (relabeled.edge_index(x, y).unwrap(), s)
        })
        .collect();
    let triangle = c
        .triangles()
        .iter()
        .map(|&[a, b, d]| {
            let (t, s) = sort_sign([perm[a], perm[b], perm[d]]);
            (
                relabeled.triangles().iter().position(|u| *u == t).unwrap(),
                s,
            )
        })
        .collect();
    Relabeling {
        relabeled,
        vertex: perm.to_vec(),
        edge,
        triangle,
    }
}

impl Relabeling {
    pub fn map(&self, k: usize, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(x.len());
        for i in 0..x.len() {
            let (j, s) = match k {
                0 => (self.vertex[i], 1.0),
                1 => self.edge[i],
                _ => self.triangle[i],
            };
            y[j] = s * x[i];
        }
        y
    }
}

/// Random polynomial filter; with `harmonic` the step is drawn inside the
/// stable range of `lambda_max`.
pub fn random_spec(rng: &mut impl Rng, lambda_max: f64, harmonic: bool) -> HodgeFilterSpec {
    let d = rng.random_range(0..=3);
    let u = rng.random_range(0..=3);
    let h_down = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h_up = (0..u).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut spec = HodgeFilterSpec::new(h_down, h_up);
    if harmonic && lambda_max > 0.0 {
        let eps = rng.random_range(0.1..1.9) / lambda_max;
        spec = spec.with_harmonic(eps, rng.random_range(1..=30));
    }
    spec
}
