//! Small dense/sparse helpers on top of nalgebra.
//!
//! Incidence matrices are kept as signed coordinate triplets; everything
//! spectral goes through dense decompositions.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};

static DEFAULT_BITS: AtomicU64 = AtomicU64::new(0);

/// Relative zero tolerance. The absolute threshold used against a matrix is
/// `relative * max(1, largest singular value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
}

impl Tolerance {
    pub const DEFAULT_RELATIVE: f64 = 1e-10;

    pub fn new(relative: f64) -> Self {
        Self { relative }
    }

    pub fn absolute(&self, scale: f64) -> f64 {
        self.relative * scale.max(1.0)
    }

    /// Singular values at or below this are treated as zero: a squared
    /// singular value (a frequency) must exceed `absolute(sigma_max)`.
    pub fn singular_cutoff(&self, sigma_max: f64) -> f64 {
        self.absolute(sigma_max).sqrt()
    }
}

impl Default for Tolerance {
    /// [`Tolerance::DEFAULT_RELATIVE`] unless overridden process-wide with
    /// [`Tolerance::set_process_default`].
    fn default() -> Self {
        match DEFAULT_BITS.load(Ordering::Relaxed) {
            0 => Self::new(Self::DEFAULT_RELATIVE),
            bits => Self::new(f64::from_bits(bits)),
        }
    }
}

impl Tolerance {
    /// Overrides the value returned by `Tolerance::default()` for the rest
    /// of the process. Intended for binaries, not libraries.
    pub fn set_process_default(relative: f64) -> crate::Result<()> {
        if !(relative > 0.0 && relative.is_finite()) {
            return Err(crate::Error::InvalidArgument(format!(
                "tolerance must be positive and finite, got {relative}"
            )));
        }
        DEFAULT_BITS.store(relative.to_bits(), Ordering::Relaxed);
        Ok(())
    }
}

/// Signed sparse matrix with entries in {-1, +1}, stored column-major as
/// `(row, col, sign)` triplets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incidence {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, i8)>,
}

impl Incidence {
    pub(crate) fn new(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, i8)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (c, r));
        Self {
            nrows,
            ncols,
            entries,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    /// Nonzero triplets sorted by column, then row.
    pub fn triplets(&self) -> &[(usize, usize, i8)] {
        &self.entries
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let start = self.entries.partition_point(|&(_, c, _)| c < col);
        self.entries[start..]
            .iter()
            .take_while(move |&&(_, c, _)| c == col)
            .map(|&(r, _, s)| (r, s))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, s) in &self.entries {
            m[(r, c)] = f64::from(s);
        }
        m
    }

    pub fn to_dense_int(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.ncols]; self.nrows];
        for &(r, c, s) in &self.entries {
            m[r][c] = i64::from(s);
        }
        m
    }

    /// `self * x`
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut y = DVector::zeros(self.nrows);
        for &(r, c, s) in &self.entries {
            y[r] += f64::from(s) * x[c];
        }
        y
    }

    /// `self^T * y`
    pub fn tr_mul_vec(&self, y: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(y.len(), self.nrows);
        let mut x = DVector::zeros(self.ncols);
        for &(r, c, s) in &self.entries {
            x[c] += f64::from(s) * y[r];
        }
        x
    }

    /// Exact integer product `self * other`.
    pub fn mul_int(&self, other: &Incidence) -> Vec<Vec<i64>> {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut out = vec![vec![0i64; other.ncols]; self.nrows];
        // group self by column for the inner index
        let mut by_col: Vec<Vec<(usize, i64)>> = vec![Vec::new(); self.ncols];
        for &(r, c, s) in &self.entries {
            by_col[c].push((r, i64::from(s)));
        }
        for &(k, j, s) in &other.entries {
            for &(i, a) in &by_col[k] {
                out[i][j] += a * i64::from(s);
            }
        }
        out
    }
}

/// Thin SVD with singular values sorted descending. Handles empty shapes.
pub(crate) struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn svd_sorted(m: &DMatrix<f64>) -> SortedSvd {
    let (nr, nc) = m.shape();
    let k = nr.min(nc);
    if k == 0 {
        return SortedSvd {
            u: DMatrix::zeros(nr, 0),
            singular_values: Vec::new(),
            v: DMatrix::zeros(nc, 0),
        };
    }
    let a = faer::Mat::<f64>::from_fn(nr, nc, |i, j| m[(i, j)]);
    let svd = a.thin_svd().expect("SVD of a finite matrix converges");
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    SortedSvd {
        u: DMatrix::from_fn(nr, k, |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&j| s[j]).collect(),
        v: DMatrix::from_fn(nc, k, |i, j| v[(i, order[j])]),
    }
}

/// Symmetric eigendecomposition with eigenvalues ascending.
pub(crate) fn sym_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition of a finite symmetric matrix converges");
    let (vals, vecs) = (eig.S().column_vector(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    (
        order.iter().map(|&j| vals[j]).collect(),
        DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]),
    )
}

/// Flip `v` so that its first entry with magnitude above `tol` is positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>, tol: f64) {
    if let Some(x) = v.iter().find(|x| x.abs() > tol) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>, tol: f64) {
    for j in 0..m.ncols() {
        let mut col = m.column(j).into_owned();
        fix_sign(&mut col, tol);
        m.set_column(j, &col);
    }
}

/// Minimum-norm least-squares solution of `a x = b`, dropping singular
/// values at or below the relative tolerance.
pub(crate) fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: Tolerance) -> DVector<f64> {
    let svd = svd_sorted(a);
    let cutoff = tol.absolute(svd.singular_values.first().copied().unwrap_or(0.0));
    let mut x = DVector::zeros(a.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let coef = svd.u.column(i).dot(b) / s;
            x.axpy(coef, &svd.v.column(i), 1.0);
        }
    }
    x
}

/// Numerical rank against the relative tolerance.
pub(crate) fn rank(a: &DMatrix<f64>, tol: Tolerance) -> usize {
    let svd = svd_sorted(a);
    let cutoff = tol.singular_cutoff(svd.singular_values.first().copied().unwrap_or(0.0));
    svd.singular_values.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormalize the columns of `m` (modified Gram-Schmidt, two passes),
/// after removing the span of the orthonormal `against` columns.
pub(crate) fn orthonormalize_against(m: &DMatrix<f64>, against: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..out.ncols() {
        let mut v = out.column(j).into_owned();
        for _ in 0..2 {
            for q in against {
                for i in 0..q.ncols() {
                    let c = q.column(i).dot(&v);
                    v.axpy(-c, &q.column(i), 1.0);
                }
            }
            for i in 0..j {
                let c = out.column(i).dot(&v);
                v.axpy(-c, &out.column(i), 1.0);
            }
        }
        let n = v.norm();
        if n > 0.0 {
            v /= n;
        }
        out.set_column(j, &v);
    }
    out
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
pub(crate) fn power_iteration<F>(n: usize, apply: F, rel_tol: f64, max_iter: usize) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if n == 0 {
        return 0.0;
    }
    // fixed, non-symmetric start vector so runs are reproducible
    let mut v = DVector::from_fn(n, |i, _| {
        1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract()
    });
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = apply(&v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= rel_tol * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Select columns of `m` in the given order.
pub(crate) fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

pub(crate) fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), m.ncols());
    for (dst, &src) in rows.iter().enumerate() {
        out.set_row(dst, &m.row(src));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_products_match_dense() {
        let b = Incidence::new(3, 2, vec![(0, 0, -1), (1, 0, 1), (1, 1, -1), (2, 1, 1)]);
        let x = DVector::from_vec(vec![2.0, 3.0]);
        assert_eq!(b.mul_vec(&x), b.to_dense() * &x);
        let y = DVector::from_vec(vec![1.0, -1.0, 4.0]);
        assert_eq!(b.tr_mul_vec(&y), b.to_dense().transpose() * &y);
        assert_eq!(b.column(1).collect::<Vec<_>>(), vec![(1, -1), (2, 1)]);
    }

    #[test]
    fn pinv_gives_minimum_norm_solution() {
        // underdetermined: x1 + x2 = 2 → min norm (1, 1)
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = pinv_solve(&a, &DVector::from_vec(vec![2.0]), Tolerance::default());
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_iteration_finds_top_eigenvalue() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let top = power_iteration(3, |v| &m * v, 1e-12, 10_000);
        assert!((top - (2.0 + 2f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn empty_svd_is_fine() {
        let s = svd_sorted(&DMatrix::zeros(4, 0));
        assert_eq!(s.u.shape(), (4, 0));
        assert!(s.singular_values.is_empty());
    }
}
