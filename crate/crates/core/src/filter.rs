//! Convolutional Hodge filters, cross-level filterbanks, Dirac filters and
//! regularized edge-flow reconstruction.
//!
//! A filter of order k is
//!
//! ```text
//! y = Σ_t h_down[t] (L_k^d)^t x + Σ_t h_up[t] (L_k^u)^t x  [+ (I - ε L_k)^T_h x]
//! ```
//!
//! evaluated by repeated sparse shifts. Both sums carry a `t = 0` identity
//! term, so the constant gain is `h_down[0] + h_up[0]`. With the harmonic
//! term present both sums start at `t = 1` instead. For order 0 the only
//! Laplacian is the up part (`L0 = B1 B1^T`); for order 2 it is the down part.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::{Cochain, ComplexSignal, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::{self, Tolerance};
use crate::spectral::{self, FrequencyType, HodgeBasis};

/// Stability check tolerance for the power-iteration estimate of `λ_max`.
pub const LAMBDA_MAX_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub epsilon: f64,
    #[serde(rename = "T_h")]
    pub t_h: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HodgeFilterSpec {
    #[serde(default)]
    pub h_down: Vec<f64>,
    #[serde(default)]
    pub h_up: Vec<f64>,
    #[serde(default)]
    pub harmonic: Option<HarmonicTerm>,
}

impl HodgeFilterSpec {
    pub fn identity() -> Self {
        Self {
            h_down: vec![1.0],
            h_up: vec![],
            harmonic: None,
        }
    }

    pub fn new(h_down: Vec<f64>, h_up: Vec<f64>) -> Self {
        Self {
            h_down,
            h_up,
            harmonic: None,
        }
    }

    pub fn with_harmonic(mut self, epsilon: f64, t_h: usize) -> Self {
        self.harmonic = Some(HarmonicTerm { epsilon, t_h });
        self
    }

    /// First polynomial power that is summed.
    pub fn start(&self) -> usize {
        usize::from(self.harmonic.is_some())
    }

    /// `max(T_d, T_u)`: the number of hops an atom can reach.
    pub fn reach(&self) -> usize {
        self.h_down.len().max(self.h_up.len()).saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .h_down
            .iter()
            .chain(self.h_up.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidFilter("non-finite coefficient".into()));
        }
        if let Some(h) = &self.harmonic {
            if !h.epsilon.is_finite() {
                return Err(Error::InvalidFilter("non-finite epsilon".into()));
            }
        }
        Ok(())
    }

    /// Scalar response at a typed frequency.
    pub fn response(&self, kind: FrequencyType, lambda: f64) -> f64 {
        let start = self.start();
        let poly = |h: &[f64]| -> f64 {
            h.iter()
                .enumerate()
                .skip(start)
                .map(|(t, &c)| c * lambda.powi(t as i32))
                .sum()
        };
        let constant = |h: &[f64]| {
            if start == 0 {
                h.first().copied().unwrap_or(0.0)
            } else {
                0.0
            }
        };
        let base = match kind {
            FrequencyType::Harmonic => constant(&self.h_down) + constant(&self.h_up),
            FrequencyType::Gradient => poly(&self.h_down) + constant(&self.h_up),
            FrequencyType::Curl => poly(&self.h_up) + constant(&self.h_down),
        };
        let projector = self
            .harmonic
            .map(|h| (1.0 - h.epsilon * lambda).powi(h.t_h as i32))
            .unwrap_or(0.0);
        base + projector
    }

    fn is_zero(h: &[f64]) -> bool {
        h.iter().all(|&v| v == 0.0)
    }
}

/// Largest eigenvalue of `L_k`, by power iteration on sparse shifts.
pub fn laplacian_lambda_max(c: &SimplicialComplex, k: usize) -> f64 {
    linalg::power_iteration(
        c.count(k),
        |v| c.apply_laplacian(k, v),
        LAMBDA_MAX_REL_TOL,
        100_000,
    )
}

/// `Σ_{t >= start} h[t] S^t x` by repeated shifts.
fn shift_sum<F>(h: &[f64], start: usize, x: &DVector<f64>, shift: F) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut acc = DVector::zeros(x.len());
    let mut z = x.clone();
    for (t, &coef) in h.iter().enumerate() {
        if t > 0 {
            z = shift(&z);
        }
        if t >= start && coef != 0.0 {
            acc.axpy(coef, &z, 1.0);
        }
    }
    acc
}

/// A filter spec validated against one complex and order.
#[derive(Debug, Clone)]
pub struct HodgeFilter<'a> {
    complex: &'a SimplicialComplex,
    order: usize,
    spec: HodgeFilterSpec,
}

impl<'a> HodgeFilter<'a> {
    pub fn new(c: &'a SimplicialComplex, k: usize, spec: &HodgeFilterSpec) -> Result<Self> {
        Self::with_lambda_max(c, k, spec, None)
    }

    /// Like [`HodgeFilter::new`] but reuses a known `λ_max(L_k)` for the
    /// harmonic-step check.
    pub fn with_lambda_max(
        c: &'a SimplicialComplex,
        k: usize,
        spec: &HodgeFilterSpec,
        lambda_max: Option<f64>,
    ) -> Result<Self> {
        if k > 2 {
            return Err(Error::InvalidOrder(format!("order {k} exceeds 2")));
        }
        spec.validate()?;
        if let Some(h) = &spec.harmonic {
            let lmax = lambda_max.unwrap_or_else(|| laplacian_lambda_max(c, k));
            let bound = if lmax > 0.0 {
                2.0 / lmax
            } else {
                f64::INFINITY
            };
            if !(h.epsilon > 0.0 && h.epsilon < bound) {
                return Err(Error::UnstableStep {
                    epsilon: h.epsilon,
                    bound,
                });
            }
        }
        Ok(Self {
            complex: c,
            order: k,
            spec: spec.clone(),
        })
    }

    pub fn apply(&self, x: &Cochain) -> Result<Cochain> {
        self.complex.check(x, self.order)?;
        Ok(Cochain::raw(self.order, self.apply_values(x.values())))
    }

    pub(crate) fn apply_values(&self, x: &DVector<f64>) -> DVector<f64> {
        let (c, k) = (self.complex, self.order);
        let start = self.spec.start();
        let mut y = shift_sum(&self.spec.h_down, start, x, |v| c.apply_down(k, v));
        y += shift_sum(&self.spec.h_up, start, x, |v| c.apply_up(k, v));
        if let Some(h) = &self.spec.harmonic {
            let mut z = x.clone();
            for _ in 0..h.t_h {
                let lz = c.apply_laplacian(k, &z);
                z.axpy(-h.epsilon, &lz, 1.0);
            }
            y += z;
        }
        y
    }

    /// Dense matrix of the filter, one column per unit input.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.complex.count(self.order);
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            m.set_column(j, &self.apply_values(&e));
        }
        m
    }
}

pub fn apply_filter(
    c: &SimplicialComplex,
    k: usize,
    spec: &HodgeFilterSpec,
    x: &Cochain,
) -> Result<Cochain> {
    HodgeFilter::new(c, k, spec)?.apply(x)
}

/// Filter response for every row of the frequency table of `basis`.
pub fn response_on(basis: &HodgeBasis, spec: &HodgeFilterSpec) -> Vec<f64> {
    spectral::frequency_table(basis)
        .iter()
        .map(|r| spec.response(r.kind, r.frequency))
        .collect()
}

pub fn frequency_response(
    c: &SimplicialComplex,
    k: usize,
    spec: &HodgeFilterSpec,
) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(response_on(&spectral::hodge_basis(c, k)?, spec))
}

/// Edge output of a node/edge/triangle filterbank:
/// `H(L1) x1 + H(L1^d) B1^T x0 + H(L1^u) B2 x2`.
///
/// `node_to_edge` may only carry `h_down` and `triangle_to_edge` only `h_up`;
/// neither cross branch takes a harmonic term.
pub fn filterbank_edge(
    c: &SimplicialComplex,
    edge: &HodgeFilterSpec,
    node_to_edge: &HodgeFilterSpec,
    triangle_to_edge: &HodgeFilterSpec,
    x: &ComplexSignal,
) -> Result<Cochain> {
    x.check(c)?;
    node_to_edge.validate()?;
    triangle_to_edge.validate()?;
    if !HodgeFilterSpec::is_zero(&node_to_edge.h_up) || node_to_edge.harmonic.is_some() {
        return Err(Error::InvalidFilter(
            "node-to-edge branch acts on gradient flows and takes only h_down".into(),
        ));
    }
    if !HodgeFilterSpec::is_zero(&triangle_to_edge.h_down) || triangle_to_edge.harmonic.is_some() {
        return Err(Error::InvalidFilter(
            "triangle-to-edge branch acts on curl flows and takes only h_up".into(),
        ));
    }
    let mut y = HodgeFilter::new(c, 1, edge)?.apply_values(x.x1.values());
    let grad = c.b1().tr_mul_vec(x.x0.values());
    y += shift_sum(&node_to_edge.h_down, 0, &grad, |v| c.apply_down(1, v));
    let curl = c.b2().mul_vec(x.x2.values());
    y += shift_sum(&triangle_to_edge.h_up, 0, &curl, |v| c.apply_up(1, v));
    Ok(Cochain::raw(1, y))
}

/// `Σ_t h[t] D^t x` with the coefficients taken from `h_down`.
pub fn dirac_filter(
    c: &SimplicialComplex,
    spec: &HodgeFilterSpec,
    x: &ComplexSignal,
) -> Result<ComplexSignal> {
    x.check(c)?;
    spec.validate()?;
    if !HodgeFilterSpec::is_zero(&spec.h_up) || spec.harmonic.is_some() {
        return Err(Error::InvalidFilter(
            "a Dirac filter is a single polynomial; use h_down only".into(),
        ));
    }
    let mut acc = x.scale(0.0).stacked();
    let mut z = x.clone();
    for (t, &coef) in spec.h_down.iter().enumerate() {
        if t > 0 {
            z = c.dirac_shift(&z)?;
        }
        if coef != 0.0 {
            acc.axpy(coef, &z.stacked(), 1.0);
        }
    }
    ComplexSignal::from_stacked(c, &acc)
}

/// Penalty norm for a regularization term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    L1,
    L2,
}

impl Penalty {
    pub fn from_exponent(p: u8) -> Result<Self> {
        match p {
            1 => Ok(Penalty::L1),
            2 => Ok(Penalty::L2),
            other => Err(Error::InvalidArgument(format!(
                "penalty exponent must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// Weights and norms of the divergence and curl penalties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub alpha: f64,
    pub beta: f64,
    pub divergence: Penalty,
    pub curl: Penalty,
}

impl Regularization {
    pub fn quadratic(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            divergence: Penalty::L2,
            curl: Penalty::L2,
        }
    }

    /// `‖M(f - x)‖² + α‖B1 x‖_p^p + β‖B2^T x‖_q^q`
    pub fn objective(
        &self,
        c: &SimplicialComplex,
        f: &DVector<f64>,
        mask: &[bool],
        x: &DVector<f64>,
    ) -> f64 {
        let fit: f64 = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (f[i] - x[i]).powi(2))
            .sum();
        let pen = |v: DVector<f64>, p: Penalty| match p {
            Penalty::L1 => v.lp_norm(1),
            Penalty::L2 => v.norm_squared(),
        };
        fit + self.alpha * pen(c.b1().mul_vec(x), self.divergence)
            + self.beta * pen(c.b2().tr_mul_vec(x), self.curl)
    }
}

pub const PROX_REL_TOL: f64 = 1e-8;
pub const PROX_MAX_ITER: usize = 10_000;

/// Edge-flow estimate from masked observations with divergence and curl
/// penalties.
///
/// With both penalties quadratic this solves the normal equations
/// `(M + α L1^d + β L1^u) x = M f` by pseudo-inverse. With an ℓ1 penalty it
/// runs a primal-dual proximal-gradient scheme (gradient step on the
/// quadratic part with step from its Lipschitz constant, clipping prox on
/// the dual of each ℓ1 term) until the relative change drops below 1e-8.
pub fn regularized_reconstruct(
    c: &SimplicialComplex,
    f: &Cochain,
    mask: &[bool],
    reg: Regularization,
) -> Result<Cochain> {
    c.check(f, 1)?;
    crate::error::dim_check("mask", c.num_edges(), mask.len())?;
    if !(reg.alpha >= 0.0 && reg.beta >= 0.0) {
        return Err(Error::InvalidArgument(
            "penalty weights must be non-negative".into(),
        ));
    }
    let n = c.num_edges();
    let m = DVector::from_iterator(n, mask.iter().map(|&b| f64::from(u8::from(b))));
    let rhs = f.values().component_mul(&m);

    // quadratic part as a dense matrix
    let mut q = DMatrix::from_diagonal(&m);
    if reg.divergence == Penalty::L2 && reg.alpha > 0.0 {
        let b1 = c.b1().to_dense();
        q += b1.tr_mul(&b1) * reg.alpha;
    }
    if reg.curl == Penalty::L2 && reg.beta > 0.0 {
        let b2 = c.b2().to_dense();
        q += &b2 * b2.transpose() * reg.beta;
    }

    let l1_div = reg.divergence == Penalty::L1 && reg.alpha > 0.0;
    let l1_curl = reg.curl == Penalty::L1 && reg.beta > 0.0;
    if !l1_div && !l1_curl {
        let x = linalg::pinv_solve(&q, &rhs, Tolerance::default());
        return Ok(Cochain::raw(1, x));
    }

    let lipschitz = 2.0 * linalg::power_iteration(n, |v| &q * v, 1e-10, 100_000);
    let k_sq = linalg::power_iteration(
        n,
        |v| {
            let mut out = DVector::zeros(n);
            if l1_div {
                out += c.apply_down(1, v);
            }
            if l1_curl {
                out += c.apply_up(1, v);
            }
            out
        },
        1e-10,
        100_000,
    );
    let k_norm = k_sq.sqrt();
    if lipschitz / 2.0 + k_norm == 0.0 {
        return Ok(Cochain::zeros(c, 1));
    }
    let sigma = if k_norm > 0.0 { 1.0 / k_norm } else { 1.0 };
    let tau = 0.99 / (lipschitz / 2.0 + k_norm);

    let mut x = DVector::zeros(n);
    let mut y_div = DVector::zeros(c.count(0));
    let mut y_curl = DVector::zeros(c.count(2));
    let mut change = f64::INFINITY;
    for _ in 0..PROX_MAX_ITER {
        let mut grad = (&q * &x - &rhs) * 2.0;
        if l1_div {
            grad += c.b1().tr_mul_vec(&y_div);
        }
        if l1_curl {
            grad += c.b2().mul_vec(&y_curl);
        }
        let x_new = &x - grad * tau;
        let extrap = &x_new * 2.0 - &x;
        if l1_div {
            y_div += c.b1().mul_vec(&extrap) * sigma;
            y_div.apply(|v| *v = v.clamp(-reg.alpha, reg.alpha));
        }
        if l1_curl {
            y_curl += c.b2().tr_mul_vec(&extrap) * sigma;
            y_curl.apply(|v| *v = v.clamp(-reg.beta, reg.beta));
        }
        let diff = (&x_new - &x).norm();
        change = if x_new.norm() > 0.0 {
            diff / x_new.norm()
        } else {
            diff
        };
        x = x_new;
        if change < PROX_REL_TOL {
            return Ok(Cochain::raw(1, x));
        }
    }
    Err(Error::NotConverged {
        iterations: PROX_MAX_ITER,
        residual: change,
    })
}
