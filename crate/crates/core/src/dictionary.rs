//! Topological Slepians, parametric Hodge dictionaries and greedy sparse
//! coding.

use nalgebra::{DMatrix, DVector};

use crate::complex::{Cochain, SimplicialComplex};
use crate::error::{Error, Result};
use crate::filter::{self, HodgeFilter, HodgeFilterSpec};
use crate::linalg::{self, Tolerance};
use crate::spectral;

/// Anything whose columns can be used as coding atoms.
pub trait Atoms {
    fn atoms(&self) -> &DMatrix<f64>;
}

impl Atoms for DMatrix<f64> {
    fn atoms(&self) -> &DMatrix<f64> {
        self
    }
}

/// Band-limited signals maximally concentrated on a simplex set.
#[derive(Debug, Clone)]
pub struct SlepianSet {
    pub order: usize,
    pub vectors: DMatrix<f64>,
    pub concentrations: Vec<f64>,
    pub simplex_set: Vec<usize>,
    pub freq_set: Vec<usize>,
}

impl Atoms for SlepianSet {
    fn atoms(&self) -> &DMatrix<f64> {
        &self.vectors
    }
}

fn sorted_unique(what: &str, idx: &[usize], bound: usize) -> Result<Vec<usize>> {
    if idx.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} set is empty")));
    }
    let mut out = idx.to_vec();
    out.sort_unstable();
    out.dedup();
    if out.len() != idx.len() {
        return Err(Error::InvalidArgument(format!(
            "{what} set has repeated indices"
        )));
    }
    if let Some(&last) = out.last() {
        if last >= bound {
            return Err(Error::InvalidArgument(format!(
                "{what} index {} out of range 1..={bound}",
                last + 1
            )));
        }
    }
    Ok(out)
}

/// Edge Slepians: see [`slepians_on`].
pub fn slepians(
    c: &SimplicialComplex,
    simplex_set: &[usize],
    freq_set: &[usize],
    m: usize,
) -> Result<SlepianSet> {
    slepians_on(c, 1, simplex_set, freq_set, m)
}

/// Top-`m` eigenvectors of `F_F C_S F_F`, where `C_S` keeps the simplices in
/// `simplex_set` and `F_F` projects onto the frequency-table columns in
/// `freq_set` (both 0-based).
///
/// Solved in the band coordinates: with `U_F` the selected basis columns,
/// `U_F^T C_S U_F = W Λ W^T` and `ψ = U_F W`. Directions with no energy on
/// the set fill out the band with concentration 0.
pub fn slepians_on(
    c: &SimplicialComplex,
    k: usize,
    simplex_set: &[usize],
    freq_set: &[usize],
    m: usize,
) -> Result<SlepianSet> {
    let n = c.count(k);
    let s = sorted_unique("simplex", simplex_set, n)?;
    let f = sorted_unique("frequency", freq_set, n)?;
    if m == 0 || m > f.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {m} Slepians from a band of {}",
            f.len()
        )));
    }
    let basis = spectral::hodge_basis(c, k)?;
    let uf = basis.columns(&f)?;
    let us = linalg::select_rows(&uf, &s);
    let gram = us.tr_mul(&us);
    let (vals, vecs) = linalg::sym_eigen_sorted(&gram);
    let tol = Tolerance::default().absolute(1.0);

    let mut vectors = DMatrix::zeros(n, m);
    let mut concentrations = Vec::with_capacity(m);
    for dst in 0..m {
        let src = vals.len() - 1 - dst;
        let mut psi = &uf * vecs.column(src);
        linalg::fix_sign(&mut psi, tol);
        vectors.set_column(dst, &psi);
        let lam = vals[src];
        concentrations.push(if lam <= tol { 0.0 } else { lam.min(1.0) });
    }
    Ok(SlepianSet {
        order: k,
        vectors,
        concentrations,
        simplex_set: s,
        freq_set: f,
    })
}

/// Concatenation `[H_1(L_k) | … | H_P(L_k)]` of filter matrices.
#[derive(Debug, Clone)]
pub struct HodgeDictionary {
    pub order: usize,
    pub specs: Vec<HodgeFilterSpec>,
    atoms: DMatrix<f64>,
}

impl HodgeDictionary {
    pub fn num_subdictionaries(&self) -> usize {
        self.specs.len()
    }

    /// Column index of atom `j` of subdictionary `i`.
    pub fn atom_index(&self, i: usize, j: usize) -> usize {
        i * self.atoms.nrows() + j
    }
}

impl Atoms for HodgeDictionary {
    fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }
}

pub fn build_dictionary(
    c: &SimplicialComplex,
    k: usize,
    specs: &[HodgeFilterSpec],
) -> Result<HodgeDictionary> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument(
            "dictionary needs at least one filter".into(),
        ));
    }
    let n = c.count(k);
    let needs_lmax = specs.iter().any(|s| s.harmonic.is_some());
    let lmax = needs_lmax.then(|| filter::laplacian_lambda_max(c, k));
    let mut atoms = DMatrix::zeros(n, n * specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let h = HodgeFilter::with_lambda_max(c, k, spec, lmax)?.matrix();
        atoms.view_mut((0, i * n), (n, n)).copy_from(&h);
    }
    Ok(HodgeDictionary {
        order: k,
        specs: specs.to_vec(),
        atoms,
    })
}

pub const OMP_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    /// One coefficient per atom; at most `s` are nonzero.
    pub coefficients: DVector<f64>,
    /// Selected atoms in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    /// Residual norm before the first and after each selection.
    pub residual_history: Vec<f64>,
}

/// Orthogonal matching pursuit with at most `s` atoms.
pub fn sparse_code<A: Atoms + ?Sized>(dict: &A, x: &Cochain, s: usize) -> Result<SparseCode> {
    sparse_code_vec(dict.atoms(), x.values(), s)
}

pub(crate) fn sparse_code_vec(a: &DMatrix<f64>, x: &DVector<f64>, s: usize) -> Result<SparseCode> {
    crate::error::dim_check("signal length", a.nrows(), x.len())?;
    if s == 0 {
        return Err(Error::InvalidArgument("sparsity must be at least 1".into()));
    }
    let norms: Vec<f64> = a.column_iter().map(|col| col.norm()).collect();
    if norms.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument(
            "dictionary has no nonzero atom".into(),
        ));
    }

    let mut support: Vec<usize> = Vec::new();
    let mut residual = x.clone();
    let mut history = vec![residual.norm()];
    let mut coefficients = DVector::zeros(a.ncols());
    let tiny = OMP_RESIDUAL_TOL * x.norm().max(1.0);

    while support.len() < s.min(a.ncols()) && residual.norm() >= OMP_RESIDUAL_TOL {
        let mut best: Option<(usize, f64)> = None;
        for (j, &nj) in norms.iter().enumerate() {
            if nj == 0.0 || support.contains(&j) {
                continue;
            }
            let score = a.column(j).dot(&residual).abs() / nj;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        if score <= tiny {
            break;
        }
        support.push(j);
        let sub = linalg::select_columns(a, &support);
        let z = linalg::pinv_solve(&sub, x, Tolerance::default());
        residual = x - &sub * &z;
        coefficients.fill(0.0);
        for (&idx, &v) in support.iter().zip(z.iter()) {
            coefficients[idx] = v;
        }
        history.push(residual.norm());
    }
    Ok(SparseCode {
        coefficients,
        support,
        residual_norm: residual.norm(),
        residual_history: history,
    })
}
