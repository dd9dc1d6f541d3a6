//! Simplicial and cell complexes of order at most two.
//!
//! Vertices are `0..num_vertices`. Edges and triangles are stored as sorted
//! vertex tuples in lexicographic order, and that order is the canonical
//! indexing used by every [`Cochain`]. Each simplex carries the reference
//! orientation given by its sorted vertex order.
//!
//! A 2-cell (polygon) is stored as a boundary cycle that starts at its
//! smallest vertex and walks toward the smaller of that vertex's two
//! neighbours. Triangles are the 3-cycle special case, so a triangle
//! `[i, j, k]` contributes `+[i,j] - [i,k] + [j,k]` to `B2`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_check, Error, Result};
use crate::linalg::{self, Incidence, Tolerance};

/// Formats 0-based vertices as the 1-based set notation used in files.
pub(crate) fn fmt_simplex(vertices: &[usize]) -> String {
    let mut s = String::from("{");
    for (i, v) in vertices.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}", v + 1);
    }
    s.push('}');
    s
}

/// Whether 2-cells must be fillable by triangles whose edges all exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexKind {
    /// Every polygon must satisfy inclusivity once fan-triangulated.
    Simplicial,
    /// Polygons only need their boundary edges.
    Cell,
}

/// Which part of a Hodge Laplacian to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianPart {
    Full,
    Down,
    Up,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    cells: Vec<Vec<usize>>,
    edge_lookup: HashMap<[usize; 2], usize>,
    b1: Incidence,
    b2: Incidence,
}

impl SimplicialComplex {
    /// Builds a cell complex: triangles must satisfy inclusivity, polygons
    /// only need their boundary edges. Vertex indices are 0-based.
    pub fn new(
        num_vertices: usize,
        edges: &[[usize; 2]],
        triangles: &[[usize; 3]],
        cells: &[Vec<usize>],
    ) -> Result<Self> {
        Self::build(num_vertices, edges, triangles, cells, ComplexKind::Cell)
    }

    /// Builds a complex and, for [`ComplexKind::Simplicial`], additionally
    /// requires every polygon's fan triangulation to use existing edges.
    pub fn build(
        num_vertices: usize,
        edges: &[[usize; 2]],
        triangles: &[[usize; 3]],
        cells: &[Vec<usize>],
        kind: ComplexKind,
    ) -> Result<Self> {
        let check_range = |vs: &[usize]| -> Result<()> {
            for &v in vs {
                if v >= num_vertices {
                    return Err(Error::IndexOutOfRange {
                        simplex: fmt_simplex(vs),
                        index: v + 1,
                        num_vertices,
                    });
                }
            }
            Ok(())
        };

        let mut edge_set = BTreeSet::new();
        for e in edges {
            check_range(e)?;
            if e[0] == e[1] {
                return Err(Error::Malformed {
                    simplex: fmt_simplex(e),
                    reason: "edge endpoints coincide".into(),
                });
            }
            let norm = [e[0].min(e[1]), e[0].max(e[1])];
            if !edge_set.insert(norm) {
                return Err(Error::Duplicate(fmt_simplex(&norm)));
            }
        }
        let edges: Vec<[usize; 2]> = edge_set.into_iter().collect();
        let edge_lookup: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let has_edge = |a: usize, b: usize| edge_lookup.contains_key(&[a.min(b), a.max(b)]);

        let mut tri_set = BTreeSet::new();
        for t in triangles {
            check_range(t)?;
            let mut s = *t;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::Malformed {
                    simplex: fmt_simplex(t),
                    reason: "repeated vertex".into(),
                });
            }
            for (a, b) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
                if !has_edge(a, b) {
                    return Err(Error::MissingFace {
                        simplex: fmt_simplex(&s),
                        face: fmt_simplex(&[a, b]),
                    });
                }
            }
            if !tri_set.insert(s) {
                return Err(Error::Duplicate(fmt_simplex(&s)));
            }
        }
        let triangles: Vec<[usize; 3]> = tri_set.into_iter().collect();

        let mut cell_set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for cell in cells {
            check_range(cell)?;
            if cell.len() < 3 {
                return Err(Error::Malformed {
                    simplex: fmt_simplex(cell),
                    reason: "a 2-cell needs at least 3 vertices".into(),
                });
            }
            let distinct: BTreeSet<usize> = cell.iter().copied().collect();
            if distinct.len() != cell.len() {
                return Err(Error::Malformed {
                    simplex: fmt_simplex(cell),
                    reason: "repeated vertex in boundary cycle".into(),
                });
            }
            let cycle = normalize_cycle(cell);
            for i in 0..cycle.len() {
                let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                if !has_edge(a, b) {
                    return Err(Error::MissingFace {
                        simplex: fmt_simplex(&cycle),
                        face: fmt_simplex(&[a.min(b), a.max(b)]),
                    });
                }
            }
            if kind == ComplexKind::Simplicial {
                // fan from the first vertex; every diagonal must be an edge
                for i in 2..cycle.len() - 1 {
                    if !has_edge(cycle[0], cycle[i]) {
                        return Err(Error::MissingFace {
                            simplex: fmt_simplex(&cycle),
                            face: fmt_simplex(&[cycle[0].min(cycle[i]), cycle[0].max(cycle[i])]),
                        });
                    }
                }
            }
            if cycle.len() == 3
                && triangles
                    .binary_search(&[cycle[0], cycle[1], cycle[2]])
                    .is_ok()
            {
                return Err(Error::Duplicate(fmt_simplex(&cycle)));
            }
            if !cell_set.insert(cycle.clone()) {
                return Err(Error::Duplicate(fmt_simplex(&cycle)));
            }
        }
        let cells: Vec<Vec<usize>> = cell_set.into_iter().collect();

        let b1 = Incidence::new(
            num_vertices,
            edges.len(),
            edges
                .iter()
                .enumerate()
                .flat_map(|(j, e)| [(e[0], j, -1i8), (e[1], j, 1i8)])
                .collect(),
        );

        let n2 = triangles.len() + cells.len();
        let mut b2_entries = Vec::new();
        let cycles = triangles
            .iter()
            .map(|t| t.to_vec())
            .chain(cells.iter().cloned());
        for (j, cycle) in cycles.enumerate() {
            for i in 0..cycle.len() {
                let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                let row = edge_lookup[&[a.min(b), a.max(b)]];
                b2_entries.push((row, j, if a < b { 1i8 } else { -1i8 }));
            }
        }
        let b2 = Incidence::new(edges.len(), n2, b2_entries);

        Ok(Self {
            num_vertices,
            edges,
            triangles,
            cells,
            edge_lookup,
            b1,
            b2,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of 2-cells: triangles plus polygons.
    pub fn num_two_cells(&self) -> usize {
        self.triangles.len() + self.cells.len()
    }

    /// `N_k` for k in 0..=2 (zero above).
    pub fn count(&self, k: usize) -> usize {
        match k {
            0 => self.num_vertices,
            1 => self.edges.len(),
            2 => self.num_two_cells(),
            _ => 0,
        }
    }

    /// Highest order with at least one element.
    pub fn order(&self) -> usize {
        if self.num_two_cells() > 0 {
            2
        } else if !self.edges.is_empty() {
            1
        } else {
            0
        }
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Polygonal 2-cells as normalized boundary cycles.
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Every 2-cell as a boundary cycle, in `B2` column order.
    pub fn two_cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.triangles
            .iter()
            .map(|t| t.to_vec())
            .chain(self.cells.iter().cloned())
    }

    pub fn is_simplicial(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&[a.min(b), a.max(b)]).copied()
    }

    pub fn b1(&self) -> &Incidence {
        &self.b1
    }

    pub fn b2(&self) -> &Incidence {
        &self.b2
    }

    /// `B_k` for k in {1, 2}.
    pub fn incidence(&self, k: usize) -> Result<&Incidence> {
        match k {
            1 => Ok(&self.b1),
            2 => Ok(&self.b2),
            _ => Err(Error::InvalidOrder(format!(
                "incidence matrices exist for k = 1, 2, not {k}"
            ))),
        }
    }

    /// `B_k` as a dense matrix, with the zero maps `B_0` (0 x N0) and
    /// `B_3` (N2 x 0) at the ends.
    pub fn boundary_dense(&self, k: usize) -> DMatrix<f64> {
        match k {
            0 => DMatrix::zeros(0, self.num_vertices),
            1 => self.b1.to_dense(),
            2 => self.b2.to_dense(),
            _ => DMatrix::zeros(self.count(2), 0),
        }
    }

    /// Dense Hodge Laplacian of order k.
    pub fn hodge_laplacian(&self, k: usize, part: LaplacianPart) -> Result<DMatrix<f64>> {
        if k > 2 {
            return Err(Error::InvalidOrder(format!("order {k} exceeds 2")));
        }
        if k == 0 && part == LaplacianPart::Down {
            return Err(Error::InvalidOrder("L0 has no down part".into()));
        }
        if part == LaplacianPart::Up && k >= self.order().max(1) && k > 0 {
            return Err(Error::InvalidOrder(format!(
                "L{k} has no up part in a complex of order {}",
                self.order()
            )));
        }
        let down = || {
            let b = self.boundary_dense(k);
            b.transpose() * b
        };
        let up = || {
            let b = self.boundary_dense(k + 1);
            &b * b.transpose()
        };
        Ok(match part {
            LaplacianPart::Down => down(),
            LaplacianPart::Up => up(),
            LaplacianPart::Full => down() + up(),
        })
    }

    /// `L_k^(d) x` by two sparse products (zero for k = 0).
    pub fn apply_down(&self, k: usize, x: &DVector<f64>) -> DVector<f64> {
        match k {
            1 => self.b1.tr_mul_vec(&self.b1.mul_vec(x)),
            2 => self.b2.tr_mul_vec(&self.b2.mul_vec(x)),
            _ => DVector::zeros(x.len()),
        }
    }

    /// `L_k^(u) x` by two sparse products (zero for k = 2).
    pub fn apply_up(&self, k: usize, x: &DVector<f64>) -> DVector<f64> {
        match k {
            0 => self.b1.mul_vec(&self.b1.tr_mul_vec(x)),
            1 => self.b2.mul_vec(&self.b2.tr_mul_vec(x)),
            _ => DVector::zeros(x.len()),
        }
    }

    pub fn apply_laplacian(&self, k: usize, x: &DVector<f64>) -> DVector<f64> {
        self.apply_down(k, x) + self.apply_up(k, x)
    }

    /// Dirac operator with its down and up parts.
    pub fn dirac(&self) -> DiracOperator {
        let (n0, n1, n2) = (self.count(0), self.count(1), self.count(2));
        let n = n0 + n1 + n2;
        let b1 = self.b1.to_dense();
        let b2 = self.b2.to_dense();
        let mut down = DMatrix::zeros(n, n);
        down.view_mut((0, n0), (n0, n1)).copy_from(&b1);
        down.view_mut((n0, 0), (n1, n0)).copy_from(&b1.transpose());
        let mut up = DMatrix::zeros(n, n);
        up.view_mut((n0, n0 + n1), (n1, n2)).copy_from(&b2);
        up.view_mut((n0 + n1, n0), (n2, n1))
            .copy_from(&b2.transpose());
        DiracOperator {
            full: &down + &up,
            down,
            up,
        }
    }

    /// Betti numbers `(b0, b1, b2)` as Hodge kernel dimensions,
    /// `N_k - rank(B_k) - rank(B_{k+1})`.
    pub fn betti(&self) -> (usize, usize, usize) {
        self.betti_with(Tolerance::default())
    }

    pub fn betti_with(&self, tol: Tolerance) -> (usize, usize, usize) {
        let r1 = linalg::rank(&self.b1.to_dense(), tol);
        let r2 = linalg::rank(&self.b2.to_dense(), tol);
        (
            self.count(0) - r1,
            self.count(1) - r1 - r2,
            self.count(2) - r2,
        )
    }

    /// Divergence `B1 x1`.
    pub fn divergence(&self, x1: &Cochain) -> Result<Cochain> {
        self.check(x1, 1)?;
        Ok(Cochain::raw(0, self.b1.mul_vec(&x1.values)))
    }

    /// Curl `B2^T x1`.
    pub fn curl(&self, x1: &Cochain) -> Result<Cochain> {
        self.check(x1, 1)?;
        Ok(Cochain::raw(2, self.b2.tr_mul_vec(&x1.values)))
    }

    /// Gradient flow `B1^T x0`.
    pub fn gradient(&self, x0: &Cochain) -> Result<Cochain> {
        self.check(x0, 0)?;
        Ok(Cochain::raw(1, self.b1.tr_mul_vec(&x0.values)))
    }

    /// Curl flow `B2 x2`.
    pub fn curl_adjoint(&self, x2: &Cochain) -> Result<Cochain> {
        self.check(x2, 2)?;
        Ok(Cochain::raw(1, self.b2.mul_vec(&x2.values)))
    }

    /// One Dirac shift: `(B1 x1, B1^T x0 + B2 x2, B2^T x1)`.
    pub fn dirac_shift(&self, x: &ComplexSignal) -> Result<ComplexSignal> {
        x.check(self)?;
        Ok(ComplexSignal {
            x0: Cochain::raw(0, self.b1.mul_vec(&x.x1.values)),
            x1: Cochain::raw(
                1,
                self.b1.tr_mul_vec(&x.x0.values) + self.b2.mul_vec(&x.x2.values),
            ),
            x2: Cochain::raw(2, self.b2.tr_mul_vec(&x.x1.values)),
        })
    }

    /// All vertex triples that are 3-cliques of the 1-skeleton, in
    /// lexicographic order.
    pub fn three_cliques(&self) -> Vec<[usize; 3]> {
        let mut adj = vec![BTreeSet::new(); self.num_vertices];
        for e in &self.edges {
            adj[e[0]].insert(e[1]);
        }
        let mut out = Vec::new();
        for i in 0..self.num_vertices {
            for &j in &adj[i] {
                for &k in adj[i].range(j + 1..) {
                    if adj[j].contains(&k) {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out
    }

    /// Verifies that `x` is a k-cochain on this complex.
    pub fn check(&self, x: &Cochain, k: usize) -> Result<()> {
        if x.order != k {
            return Err(Error::InvalidOrder(format!(
                "expected a signal of order {k}, got order {}",
                x.order
            )));
        }
        dim_check(format!("order-{k} signal"), self.count(k), x.len())
    }

    /// Same complex with extra triangles (used by topology inference).
    pub fn with_triangles(&self, extra: &[[usize; 3]]) -> Result<Self> {
        let mut tris = self.triangles.clone();
        tris.extend_from_slice(extra);
        Self::new(self.num_vertices, &self.edges, &tris, &self.cells)
    }
}

fn normalize_cycle(cycle: &[usize]) -> Vec<usize> {
    let m = cycle.len();
    let start = (0..m).min_by_key(|&i| cycle[i]).expect("non-empty cycle");
    let next = cycle[(start + 1) % m];
    let prev = cycle[(start + m - 1) % m];
    if next <= prev {
        (0..m).map(|i| cycle[(start + i) % m]).collect()
    } else {
        (0..m).map(|i| cycle[(start + m - i) % m]).collect()
    }
}

/// Block Dirac operator and its down/up parts.
#[derive(Debug, Clone)]
pub struct DiracOperator {
    pub full: DMatrix<f64>,
    pub down: DMatrix<f64>,
    pub up: DMatrix<f64>,
}

/// A real signal on the k-simplices, indexed by canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    order: usize,
    values: DVector<f64>,
}

impl Cochain {
    pub fn new(order: usize, values: DVector<f64>) -> Result<Self> {
        if order > 2 {
            return Err(Error::InvalidOrder(format!(
                "signal order {order} exceeds 2"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at simplex {}",
                i + 1
            )));
        }
        Ok(Self { order, values })
    }

    pub fn from_vec(order: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(order, DVector::from_vec(values))
    }

    pub fn zeros(c: &SimplicialComplex, order: usize) -> Self {
        Self::raw(order, DVector::zeros(c.count(order)))
    }

    pub(crate) fn raw(order: usize, values: DVector<f64>) -> Self {
        Self { order, values }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

/// Node, edge and 2-cell signals over one complex.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub x0: Cochain,
    pub x1: Cochain,
    pub x2: Cochain,
}

impl ComplexSignal {
    pub fn new(c: &SimplicialComplex, x0: Cochain, x1: Cochain, x2: Cochain) -> Result<Self> {
        let s = Self { x0, x1, x2 };
        s.check(c)?;
        Ok(s)
    }

    pub fn zeros(c: &SimplicialComplex) -> Self {
        Self {
            x0: Cochain::zeros(c, 0),
            x1: Cochain::zeros(c, 1),
            x2: Cochain::zeros(c, 2),
        }
    }

    pub fn check(&self, c: &SimplicialComplex) -> Result<()> {
        c.check(&self.x0, 0)?;
        c.check(&self.x1, 1)?;
        c.check(&self.x2, 2)
    }

    pub fn level(&self, k: usize) -> &Cochain {
        match k {
            0 => &self.x0,
            1 => &self.x1,
            _ => &self.x2,
        }
    }

    /// `[x0; x1; x2]`
    pub fn stacked(&self) -> DVector<f64> {
        let v: Vec<f64> = self
            .x0
            .values
            .iter()
            .chain(self.x1.values.iter())
            .chain(self.x2.values.iter())
            .copied()
            .collect();
        DVector::from_vec(v)
    }

    pub fn from_stacked(c: &SimplicialComplex, v: &DVector<f64>) -> Result<Self> {
        let (n0, n1, n2) = (c.count(0), c.count(1), c.count(2));
        dim_check("stacked complex signal", n0 + n1 + n2, v.len())?;
        Ok(Self {
            x0: Cochain::new(0, v.rows(0, n0).into_owned())?,
            x1: Cochain::new(1, v.rows(n0, n1).into_owned())?,
            x2: Cochain::new(2, v.rows(n0 + n1, n2).into_owned())?,
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            x0: Cochain::raw(0, &self.x0.values * a),
            x1: Cochain::raw(1, &self.x1.values * a),
            x2: Cochain::raw(2, &self.x2.values * a),
        }
    }
}
