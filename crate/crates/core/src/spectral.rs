//! Hodge and Dirac spectra: typed bases, topological Fourier transforms and
//! the Hodge decomposition of a single signal.
//!
//! Gradient and curl bases come from the SVDs of the adjacent incidence
//! matrices rather than from an eigendecomposition of `L_k`, so every basis
//! column lies exactly in its subspace even when a gradient and a curl
//! frequency coincide. Frequencies are squared singular values, which equal
//! the quadratic variation `u^T L_k u` of each column.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::complex::{Cochain, ComplexSignal, LaplacianPart, SimplicialComplex};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrequencyType {
    Harmonic,
    Gradient,
    Curl,
}

impl FrequencyType {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrequencyType::Harmonic => "harmonic",
            FrequencyType::Gradient => "gradient",
            FrequencyType::Curl => "curl",
        }
    }
}

impl fmt::Display for FrequencyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FrequencyType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" | "harm" => Ok(FrequencyType::Harmonic),
            "gradient" | "grad" => Ok(FrequencyType::Gradient),
            "curl" => Ok(FrequencyType::Curl),
            other => Err(Error::InvalidArgument(format!(
                "unknown frequency type {other:?}"
            ))),
        }
    }
}

/// Orthonormal gradient / curl / harmonic bases for one order.
#[derive(Debug, Clone)]
pub struct HodgeBasis {
    order: usize,
    grad: DMatrix<f64>,
    curl: DMatrix<f64>,
    harm: DMatrix<f64>,
    freq_grad: Vec<f64>,
    freq_curl: Vec<f64>,
    tolerance: f64,
}

impl HodgeBasis {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.grad.nrows()
    }

    pub fn grad(&self) -> &DMatrix<f64> {
        &self.grad
    }

    pub fn curl(&self) -> &DMatrix<f64> {
        &self.curl
    }

    pub fn harm(&self) -> &DMatrix<f64> {
        &self.harm
    }

    pub fn freq_grad(&self) -> &[f64] {
        &self.freq_grad
    }

    pub fn freq_curl(&self) -> &[f64] {
        &self.freq_curl
    }

    /// Absolute zero threshold used for this basis.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Block widths `(N_g, N_c, N_h)`.
    pub fn widths(&self) -> (usize, usize, usize) {
        (self.grad.ncols(), self.curl.ncols(), self.harm.ncols())
    }

    /// Basis columns in frequency-table order: harmonic, gradient, curl.
    pub fn matrix(&self) -> DMatrix<f64> {
        let (ng, nc, nh) = self.widths();
        let mut m = DMatrix::zeros(self.dim(), nh + ng + nc);
        m.view_mut((0, 0), (self.dim(), nh)).copy_from(&self.harm);
        m.view_mut((0, nh), (self.dim(), ng)).copy_from(&self.grad);
        m.view_mut((0, nh + ng), (self.dim(), nc))
            .copy_from(&self.curl);
        m
    }

    /// Frequencies in frequency-table order.
    pub fn frequencies(&self) -> Vec<f64> {
        std::iter::repeat_n(0.0, self.harm.ncols())
            .chain(self.freq_grad.iter().copied())
            .chain(self.freq_curl.iter().copied())
            .collect()
    }

    /// Column `i` of [`HodgeBasis::matrix`].
    pub fn column(&self, i: usize) -> DVector<f64> {
        let (ng, _, nh) = self.widths();
        if i < nh {
            self.harm.column(i).into_owned()
        } else if i < nh + ng {
            self.grad.column(i - nh).into_owned()
        } else {
            self.curl.column(i - nh - ng).into_owned()
        }
    }

    /// `U_F`: the basis columns selected by frequency-table indices.
    pub fn columns(&self, indices: &[usize]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "frequency index {} out of range 1..={n}",
                    i + 1
                )));
            }
            m.set_column(j, &self.column(i));
        }
        Ok(m)
    }
}

pub fn hodge_basis(c: &SimplicialComplex, k: usize) -> Result<HodgeBasis> {
    hodge_basis_with(c, k, Tolerance::default())
}

pub fn hodge_basis_with(c: &SimplicialComplex, k: usize, tol: Tolerance) -> Result<HodgeBasis> {
    if k > 2 {
        return Err(Error::InvalidOrder(format!("order {k} exceeds 2")));
    }
    let n = c.count(k);
    let lower = linalg::svd_sorted(&c.boundary_dense(k));
    let upper = linalg::svd_sorted(&c.boundary_dense(k + 1));
    let sigma_max = lower
        .singular_values
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(upper.singular_values.first().copied().unwrap_or(0.0));
    let tau = tol.absolute(sigma_max);

    let pick = |vecs: &DMatrix<f64>, sv: &[f64]| -> (DMatrix<f64>, Vec<f64>) {
        let cutoff = tol.singular_cutoff(sv.first().copied().unwrap_or(0.0));
        let mut idx: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cutoff).collect();
        idx.sort_by(|&a, &b| (sv[a] * sv[a]).total_cmp(&(sv[b] * sv[b])));
        let mut m = linalg::select_columns(vecs, &idx);
        linalg::fix_column_signs(&mut m, tau);
        (m, idx.iter().map(|&i| sv[i] * sv[i]).collect())
    };
    let (grad, freq_grad) = pick(&lower.v, &lower.singular_values);
    let (curl, freq_curl) = pick(&upper.u, &upper.singular_values);

    let nh = n - grad.ncols() - curl.ncols();
    let harm = if nh == 0 {
        DMatrix::zeros(n, 0)
    } else {
        let lk = c.hodge_laplacian(k, LaplacianPart::Full)?;
        let (_, vecs) = linalg::sym_eigen_sorted(&lk);
        let kernel = vecs.columns(0, nh).into_owned();
        let mut h = linalg::orthonormalize_against(&kernel, &[&grad, &curl]);
        linalg::fix_column_signs(&mut h, tau);
        h
    };

    Ok(HodgeBasis {
        order: k,
        grad,
        curl,
        harm,
        freq_grad,
        freq_curl,
        tolerance: tau,
    })
}

/// Block-wise topological Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TftCoefficients {
    pub grad: DVector<f64>,
    pub curl: DVector<f64>,
    pub harm: DVector<f64>,
}

impl TftCoefficients {
    /// Coefficients in frequency-table order (harmonic, gradient, curl).
    pub fn to_table_order(&self) -> DVector<f64> {
        let v: Vec<f64> = self
            .harm
            .iter()
            .chain(self.grad.iter())
            .chain(self.curl.iter())
            .copied()
            .collect();
        DVector::from_vec(v)
    }

    pub fn energy(&self) -> f64 {
        self.grad.norm_squared() + self.curl.norm_squared() + self.harm.norm_squared()
    }
}

pub fn tft(basis: &HodgeBasis, x: &Cochain) -> Result<TftCoefficients> {
    if x.order() != basis.order {
        return Err(Error::InvalidOrder(format!(
            "basis of order {} applied to a signal of order {}",
            basis.order,
            x.order()
        )));
    }
    dim_check("signal", basis.dim(), x.len())?;
    Ok(TftCoefficients {
        grad: basis.grad.tr_mul(x.values()),
        curl: basis.curl.tr_mul(x.values()),
        harm: basis.harm.tr_mul(x.values()),
    })
}

pub fn itft(basis: &HodgeBasis, coeffs: &TftCoefficients) -> Result<Cochain> {
    let (ng, nc, nh) = basis.widths();
    dim_check("gradient coefficients", ng, coeffs.grad.len())?;
    dim_check("curl coefficients", nc, coeffs.curl.len())?;
    dim_check("harmonic coefficients", nh, coeffs.harm.len())?;
    let x = &basis.grad * &coeffs.grad + &basis.curl * &coeffs.curl + &basis.harm * &coeffs.harm;
    Cochain::new(basis.order, x)
}

/// Gradient, curl and harmonic parts of a k-signal with minimum-norm
/// potentials on the adjacent orders (absent at the ends of the complex).
#[derive(Debug, Clone)]
pub struct HodgeComponents {
    pub grad: Cochain,
    pub curl: Cochain,
    pub harm: Cochain,
    pub lower_potential: Option<Cochain>,
    pub upper_potential: Option<Cochain>,
}

pub fn hodge_decompose(c: &SimplicialComplex, x: &Cochain) -> Result<HodgeComponents> {
    hodge_decompose_with(c, x, Tolerance::default())
}

pub fn hodge_decompose_with(
    c: &SimplicialComplex,
    x: &Cochain,
    tol: Tolerance,
) -> Result<HodgeComponents> {
    let k = x.order();
    c.check(x, k)?;
    let n = x.len();
    let (grad, lower_potential) = if k >= 1 {
        let bt = c.boundary_dense(k).transpose();
        let p = linalg::pinv_solve(&bt, x.values(), tol);
        (&bt * &p, Some(Cochain::new(k - 1, p)?))
    } else {
        (DVector::zeros(n), None)
    };
    let (curl, upper_potential) = if k <= 1 {
        let b = c.boundary_dense(k + 1);
        let p = linalg::pinv_solve(&b, x.values(), tol);
        (&b * &p, Some(Cochain::new(k + 1, p)?))
    } else {
        (DVector::zeros(n), None)
    };
    let harm = x.values() - &grad - &curl;
    Ok(HodgeComponents {
        grad: Cochain::new(k, grad)?,
        curl: Cochain::new(k, curl)?,
        harm: Cochain::new(k, harm)?,
        lower_potential,
        upper_potential,
    })
}

/// One row of the typed spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyRecord {
    /// Position in the table (0-based).
    pub index: usize,
    pub kind: FrequencyType,
    pub frequency: f64,
}

/// Harmonic rows (frequency 0) first, then gradient and curl frequencies,
/// each ascending.
///
/// Frequencies are only ordered within a type: a gradient frequency measures
/// total divergence and a curl frequency total curl, so comparing magnitudes
/// across types says nothing about relative smoothness.
pub fn frequency_table(basis: &HodgeBasis) -> Vec<FrequencyRecord> {
    let (ng, nc, nh) = basis.widths();
    let kinds = std::iter::repeat_n(FrequencyType::Harmonic, nh)
        .chain(std::iter::repeat_n(FrequencyType::Gradient, ng))
        .chain(std::iter::repeat_n(FrequencyType::Curl, nc));
    kinds
        .zip(basis.frequencies())
        .enumerate()
        .map(|(index, (kind, frequency))| FrequencyRecord {
            index,
            kind,
            frequency,
        })
        .collect()
}

/// Eigenbasis of the Dirac operator grouped into joint-harmonic,
/// joint-gradient and joint-curl blocks, with signed eigenvalues.
///
/// Joint-gradient pairs are `(u, ±v, 0)/√2` for each singular triplet of
/// `B1`, with eigenvalue `±σ`; joint-curl pairs are `(0, u, ±v)/√2` from
/// `B2`. The joint-harmonic block stacks the three Hodge kernels.
#[derive(Debug, Clone)]
pub struct DiracBasis {
    vectors: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    kinds: Vec<FrequencyType>,
}

impl DiracBasis {
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn kinds(&self) -> &[FrequencyType] {
        &self.kinds
    }

    pub fn width(&self, kind: FrequencyType) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }
}

pub fn dirac_basis(c: &SimplicialComplex) -> Result<DiracBasis> {
    dirac_basis_with(c, Tolerance::default())
}

pub fn dirac_basis_with(c: &SimplicialComplex, tol: Tolerance) -> Result<DiracBasis> {
    let (n0, n1, n2) = (c.count(0), c.count(1), c.count(2));
    let n = n0 + n1 + n2;
    let offsets = [0, n0, n0 + n1];
    let mut cols: Vec<(FrequencyType, f64, DVector<f64>)> = Vec::with_capacity(n);

    for (k, &off) in offsets.iter().enumerate() {
        let hb = hodge_basis_with(c, k, tol)?;
        for j in 0..hb.harm.ncols() {
            let mut v = DVector::zeros(n);
            v.rows_mut(off, hb.dim()).copy_from(&hb.harm.column(j));
            cols.push((FrequencyType::Harmonic, 0.0, v));
        }
    }

    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (kind, b, lo, hi) in [
        (FrequencyType::Gradient, c.b1().to_dense(), 0, n0),
        (FrequencyType::Curl, c.b2().to_dense(), n0, n0 + n1),
    ] {
        let svd = linalg::svd_sorted(&b);
        let cutoff = tol.singular_cutoff(svd.singular_values.first().copied().unwrap_or(0.0));
        let mut block = Vec::new();
        for (i, &sigma) in svd.singular_values.iter().enumerate() {
            if sigma <= cutoff {
                continue;
            }
            for sign in [-1.0, 1.0] {
                let mut v = DVector::zeros(n);
                v.rows_mut(lo, b.nrows()).copy_from(&(svd.u.column(i) * s));
                v.rows_mut(hi, b.ncols())
                    .copy_from(&(svd.v.column(i) * (s * sign)));
                block.push((kind, sign * sigma, v));
            }
        }
        block.sort_by(|a, b| a.1.total_cmp(&b.1));
        cols.extend(block);
    }

    let tau = tol.absolute(1.0);
    let mut vectors = DMatrix::zeros(n, cols.len());
    let mut eigenvalues = Vec::with_capacity(cols.len());
    let mut kinds = Vec::with_capacity(cols.len());
    for (j, (kind, lambda, mut v)) in cols.into_iter().enumerate() {
        linalg::fix_sign(&mut v, tau);
        vectors.set_column(j, &v);
        eigenvalues.push(lambda);
        kinds.push(kind);
    }
    dim_check("Dirac basis width", n, vectors.ncols())?;
    Ok(DiracBasis {
        vectors,
        eigenvalues,
        kinds,
    })
}

pub fn dirac_tft(basis: &DiracBasis, x: &ComplexSignal) -> Result<DVector<f64>> {
    let v = x.stacked();
    dim_check("stacked complex signal", basis.vectors.nrows(), v.len())?;
    Ok(basis.vectors.tr_mul(&v))
}

pub fn dirac_itft(
    c: &SimplicialComplex,
    basis: &DiracBasis,
    coeffs: &DVector<f64>,
) -> Result<ComplexSignal> {
    dim_check("Dirac coefficients", basis.vectors.ncols(), coeffs.len())?;
    ComplexSignal::from_stacked(c, &(&basis.vectors * coeffs))
}
