//! Simplicial vector autoregression and the topological LMS filter.

use std::cell::OnceCell;
use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::complex::{Cochain, ComplexSignal, SimplicialComplex};
use crate::error::{dim_check, Error, Result};
use crate::filter::{self, HodgeFilter, HodgeFilterSpec};
use crate::linalg::{self, Tolerance};

/// Filters of one lag. `Hmn` acts on level `n` before the transfer to level
/// `m`; `Gmn` acts on level `m` after it. A default spec is the zero filter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagFilters {
    /// `H00(L0)` on node history.
    #[serde(rename = "H00", default)]
    pub h00: HodgeFilterSpec,
    /// `G01(L0)` after `B1`.
    #[serde(rename = "G01", default)]
    pub g01: HodgeFilterSpec,
    /// `H01(L1)` before `B1`.
    #[serde(rename = "H01", default)]
    pub h01: HodgeFilterSpec,
    #[serde(rename = "H11", default)]
    pub h11: HodgeFilterSpec,
    /// `G10(L1)` after `B1^T`.
    #[serde(rename = "G10", default)]
    pub g10: HodgeFilterSpec,
    /// `H10(L0)` before `B1^T`.
    #[serde(rename = "H10", default)]
    pub h10: HodgeFilterSpec,
    /// `G12(L1)` after `B2`.
    #[serde(rename = "G12", default)]
    pub g12: HodgeFilterSpec,
    /// `H12(L2)` before `B2`.
    #[serde(rename = "H12", default)]
    pub h12: HodgeFilterSpec,
    /// `G21(L2)` after `B2^T`.
    #[serde(rename = "G21", default)]
    pub g21: HodgeFilterSpec,
    /// `H21(L1)` before `B2^T`.
    #[serde(rename = "H21", default)]
    pub h21: HodgeFilterSpec,
    #[serde(rename = "H22", default)]
    pub h22: HodgeFilterSpec,
}

impl LagFilters {
    fn specs(&self) -> [&HodgeFilterSpec; 11] {
        [
            &self.h00, &self.g01, &self.h01, &self.h11, &self.g10, &self.h10, &self.g12, &self.h12,
            &self.g21, &self.h21, &self.h22,
        ]
    }
}

/// SC-VAR model: `lags[p - 1]` holds the filters of lag `p`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SCVarModel {
    pub lags: Vec<LagFilters>,
}

impl SCVarModel {
    pub fn order(&self) -> usize {
        self.lags.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.lags
            .iter()
            .flat_map(|l| l.specs())
            .try_for_each(HodgeFilterSpec::validate)
    }

    /// S-VAR copy of the model with every cross-level term removed.
    pub fn without_cross_terms(&self) -> Self {
        let lags = self
            .lags
            .iter()
            .map(|l| LagFilters {
                h00: l.h00.clone(),
                h11: l.h11.clone(),
                h22: l.h22.clone(),
                ..LagFilters::default()
            })
            .collect();
        Self { lags }
    }
}

fn is_zero_spec(s: &HodgeFilterSpec) -> bool {
    s.harmonic.is_none() && s.h_down.iter().chain(&s.h_up).all(|&v| v == 0.0)
}

/// Filter evaluation with `λ_max(L_k)` computed at most once per order.
struct Evaluator<'a> {
    c: &'a SimplicialComplex,
    lmax: [OnceCell<f64>; 3],
}

impl<'a> Evaluator<'a> {
    fn new(c: &'a SimplicialComplex) -> Self {
        Self {
            c,
            lmax: Default::default(),
        }
    }

    fn apply(&self, k: usize, spec: &HodgeFilterSpec, x: &DVector<f64>) -> Result<DVector<f64>> {
        if is_zero_spec(spec) {
            return Ok(DVector::zeros(x.len()));
        }
        let lmax = spec
            .harmonic
            .map(|_| *self.lmax[k].get_or_init(|| filter::laplacian_lambda_max(self.c, k)));
        Ok(HodgeFilter::with_lambda_max(self.c, k, spec, lmax)?.apply_values(x))
    }

    /// `post(L_m) T pre(L_n) x`, skipping the work when either filter is zero.
    fn cross<F>(
        &self,
        (m, post): (usize, &HodgeFilterSpec),
        (n, pre): (usize, &HodgeFilterSpec),
        transfer: F,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>>
    where
        F: Fn(&DVector<f64>) -> DVector<f64>,
    {
        if is_zero_spec(post) || is_zero_spec(pre) {
            return Ok(DVector::zeros(self.c.count(m)));
        }
        let z = transfer(&self.apply(n, pre, x)?);
        self.apply(m, post, &z)
    }

    fn predict(
        &self,
        model: &SCVarModel,
        history: &[ComplexSignal],
        cross: bool,
    ) -> Result<ComplexSignal> {
        let c = self.c;
        let p_max = model.order();
        if history.len() < p_max {
            return Err(Error::InvalidArgument(format!(
                "history holds {} signals, the model needs {p_max}",
                history.len()
            )));
        }
        for s in history {
            s.check(c)?;
        }
        let mut y0 = DVector::zeros(c.count(0));
        let mut y1 = DVector::zeros(c.count(1));
        let mut y2 = DVector::zeros(c.count(2));
        for (p, f) in model.lags.iter().enumerate() {
            let s = &history[history.len() - 1 - p];
            let (x0, x1, x2) = (s.x0.values(), s.x1.values(), s.x2.values());
            y0 += self.apply(0, &f.h00, x0)?;
            y1 += self.apply(1, &f.h11, x1)?;
            y2 += self.apply(2, &f.h22, x2)?;
            if cross {
                y0 += self.cross((0, &f.g01), (1, &f.h01), |v| c.b1().mul_vec(v), x1)?;
                y1 += self.cross((1, &f.g10), (0, &f.h10), |v| c.b1().tr_mul_vec(v), x0)?;
                y1 += self.cross((1, &f.g12), (2, &f.h12), |v| c.b2().mul_vec(v), x2)?;
                y2 += self.cross((2, &f.g21), (1, &f.h21), |v| c.b2().tr_mul_vec(v), x1)?;
            }
        }
        Ok(ComplexSignal {
            x0: Cochain::raw(0, y0),
            x1: Cochain::raw(1, y1),
            x2: Cochain::raw(2, y2),
        })
    }
}

/// Noiseless one-step SC-VAR prediction. `history` is oldest first; the
/// last entry is lag 1.
pub fn scvar_predict(
    c: &SimplicialComplex,
    model: &SCVarModel,
    history: &[ComplexSignal],
) -> Result<ComplexSignal> {
    model.validate()?;
    Evaluator::new(c).predict(model, history, true)
}

/// As [`scvar_predict`] with every cross-level term dropped.
pub fn svar_predict(
    c: &SimplicialComplex,
    model: &SCVarModel,
    history: &[ComplexSignal],
) -> Result<ComplexSignal> {
    model.validate()?;
    Evaluator::new(c).predict(model, history, false)
}

/// Run the model forward `steps` times from `initial` (oldest first), adding
/// zero-mean Gaussian noise with standard deviation `noise_std[k]` on level
/// `k`. The returned series starts with `initial`.
pub fn simulate(
    c: &SimplicialComplex,
    model: &SCVarModel,
    initial: &[ComplexSignal],
    steps: usize,
    noise_std: [f64; 3],
    seed: u64,
) -> Result<Vec<ComplexSignal>> {
    model.validate()?;
    if noise_std.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidArgument(
            "noise levels must be finite and non-negative".into(),
        ));
    }
    let eval = Evaluator::new(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut series = initial.to_vec();
    let p = model.order().max(1);
    for _ in 0..steps {
        let start = series.len().saturating_sub(p);
        let mut next = eval.predict(model, &series[start..], true)?;
        for (k, level) in [&mut next.x0, &mut next.x1, &mut next.x2]
            .into_iter()
            .enumerate()
        {
            if noise_std[k] > 0.0 {
                let noise = DVector::from_fn(level.len(), |_, _| std_normal.sample(&mut rng));
                *level = Cochain::raw(k, level.values() + noise * noise_std[k]);
            }
        }
        series.push(next);
    }
    Ok(series)
}

/// Shape of the restricted model learned by [`scvar_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitConfig {
    pub lags: usize,
    /// Polynomial order of every learned filter.
    pub filter_order: usize,
    /// Learn the cross-level post-filters as well.
    pub cross: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: SCVarModel,
    /// Mean squared one-step prediction error per simplex, for each level.
    pub residual: [f64; 3],
    /// Condition number of each level's regressor (1 for empty levels).
    pub condition: [f64; 3],
}

/// Which coefficient a regressor column feeds.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Down(usize),
    Up(usize),
}

#[derive(Debug, Clone, Copy)]
enum Source {
    /// Same-level filter.
    Own,
    /// Post-filter after transfer from another level.
    From(usize),
}

struct Column {
    lag: usize,
    source: Source,
    slot: Slot,
}

/// Regressor columns of level `k`: powers of the level's own Laplacian parts
/// applied to its own history and, with `cross`, to transferred neighbours.
fn layout(c: &SimplicialComplex, k: usize, cfg: &FitConfig) -> Vec<Column> {
    let t = cfg.filter_order;
    let has_down = k > 0;
    let has_up = k < 2 && c.count(k + 1) > 0;
    let mut cols = Vec::new();
    for lag in 0..cfg.lags {
        let mut push = |source: Source, down: bool, up: bool| {
            cols.push(Column {
                lag,
                source,
                slot: Slot::Down(0),
            });
            for p in 1..=t {
                if down {
                    cols.push(Column {
                        lag,
                        source,
                        slot: Slot::Down(p),
                    });
                }
                if up {
                    cols.push(Column {
                        lag,
                        source,
                        slot: Slot::Up(p),
                    });
                }
            }
        };
        push(Source::Own, has_down, has_up);
        if cfg.cross {
            match k {
                0 if c.count(1) > 0 => push(Source::From(1), false, true),
                1 => {
                    push(Source::From(0), true, false);
                    if c.count(2) > 0 {
                        push(Source::From(2), false, true);
                    }
                }
                2 if c.count(2) > 0 => push(Source::From(1), true, false),
                _ => {}
            }
        }
    }
    cols
}

fn transferred(c: &SimplicialComplex, k: usize, source: Source, s: &ComplexSignal) -> DVector<f64> {
    match (k, source) {
        (_, Source::Own) => s.level(k).values().clone(),
        (0, Source::From(1)) => c.b1().mul_vec(s.x1.values()),
        (1, Source::From(0)) => c.b1().tr_mul_vec(s.x0.values()),
        (1, Source::From(2)) => c.b2().mul_vec(s.x2.values()),
        (2, Source::From(1)) => c.b2().tr_mul_vec(s.x1.values()),
        _ => unreachable!("layout only emits valid transfers"),
    }
}

fn power(c: &SimplicialComplex, k: usize, slot: Slot, x: &DVector<f64>) -> DVector<f64> {
    let mut z = x.clone();
    match slot {
        Slot::Down(p) => (0..p).for_each(|_| z = c.apply_down(k, &z)),
        Slot::Up(p) => (0..p).for_each(|_| z = c.apply_up(k, &z)),
    }
    z
}

fn spec_slot(spec: &mut HodgeFilterSpec, slot: Slot, value: f64, order: usize) {
    if spec.h_down.is_empty() {
        spec.h_down = vec![0.0; order + 1];
        spec.h_up = vec![0.0; order + 1];
    }
    match slot {
        Slot::Down(p) => spec.h_down[p] = value,
        Slot::Up(p) => spec.h_up[p] = value,
    }
}

/// Batch least-squares fit of the restricted SC-VAR model (identity
/// pre-filters, learned same-level filters and post-filters), one linear
/// problem per level. Constant terms are stored in `h_down[0]`.
pub fn scvar_fit(
    c: &SimplicialComplex,
    series: &[ComplexSignal],
    cfg: FitConfig,
) -> Result<FitResult> {
    if cfg.lags == 0 {
        return Err(Error::InvalidArgument(
            "model order must be at least 1".into(),
        ));
    }
    if series.len() <= cfg.lags + cfg.filter_order {
        return Err(Error::InvalidArgument(format!(
            "series of length {} is too short for {} lags and filter order {}",
            series.len(),
            cfg.lags,
            cfg.filter_order
        )));
    }
    for s in series {
        s.check(c)?;
    }
    let identity = HodgeFilterSpec::identity();
    let mut model = SCVarModel {
        lags: vec![LagFilters::default(); cfg.lags],
    };
    if cfg.cross {
        for l in &mut model.lags {
            if c.count(1) > 0 {
                l.h01 = identity.clone();
                l.h10 = identity.clone();
            }
            if c.count(2) > 0 {
                l.h12 = identity.clone();
                l.h21 = identity.clone();
            }
        }
    }
    let mut residual = [0.0; 3];
    let mut condition = [1.0; 3];
    let steps = series.len() - cfg.lags;
    for k in 0..=2 {
        let n = c.count(k);
        let cols = layout(c, k, &cfg);
        if n == 0 || cols.is_empty() {
            continue;
        }
        let mut a = DMatrix::zeros(steps * n, cols.len());
        let mut b = DVector::zeros(steps * n);
        for (row, t) in (cfg.lags..series.len()).enumerate() {
            b.rows_mut(row * n, n)
                .copy_from(series[t].level(k).values());
            for (j, col) in cols.iter().enumerate() {
                let src = transferred(c, k, col.source, &series[t - 1 - col.lag]);
                a.view_mut((row * n, j), (n, 1))
                    .copy_from(&power(c, k, col.slot, &src));
            }
        }
        let sv = linalg::svd_sorted(&a).singular_values;
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        let cond = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        condition[k] = cond;
        if a.nrows() < a.ncols() || smin <= Tolerance::default().absolute(smax) {
            return Err(Error::IllConditioned { condition: cond });
        }
        let theta = linalg::pinv_solve(&a, &b, Tolerance::default());
        residual[k] = (&b - &a * &theta).norm_squared() / b.len() as f64;
        for (col, &v) in cols.iter().zip(theta.iter()) {
            let lag = &mut model.lags[col.lag];
            let spec = match (k, col.source) {
                (0, Source::Own) => &mut lag.h00,
                (1, Source::Own) => &mut lag.h11,
                (_, Source::Own) => &mut lag.h22,
                (0, Source::From(_)) => &mut lag.g01,
                (1, Source::From(0)) => &mut lag.g10,
                (1, Source::From(_)) => &mut lag.g12,
                (_, Source::From(_)) => &mut lag.g21,
            };
            spec_slot(spec, col.slot, v, cfg.filter_order);
        }
    }
    Ok(FitResult {
        model,
        residual,
        condition,
    })
}

/// `X_t = [x_t, L_d x_{t-1}, …, L_d^{T_d} x_{t-T_d}, L_u x_{t-1}, …, L_u^{T_u} x_{t-T_u}]`
/// from a window of edge flows (oldest first, `x_t` last).
pub fn lms_build_regressor(
    c: &SimplicialComplex,
    window: &[Cochain],
    t_d: usize,
    t_u: usize,
) -> Result<DMatrix<f64>> {
    let need = t_d.max(t_u) + 1;
    if window.len() < need {
        return Err(Error::InvalidArgument(format!(
            "regressor needs {need} past flows, window holds {}",
            window.len()
        )));
    }
    for x in window {
        c.check(x, 1)?;
    }
    let vals: Vec<&DVector<f64>> = window.iter().map(Cochain::values).collect();
    Ok(regressor(c, &vals, t_d, t_u))
}

fn regressor(
    c: &SimplicialComplex,
    window: &[&DVector<f64>],
    t_d: usize,
    t_u: usize,
) -> DMatrix<f64> {
    let n = c.num_edges();
    let last = window.len() - 1;
    let mut x = DMatrix::zeros(n, 1 + t_d + t_u);
    x.set_column(0, window[last]);
    for m in 1..=t_d {
        x.set_column(m, &power(c, 1, Slot::Down(m), window[last - m]));
    }
    for m in 1..=t_u {
        x.set_column(t_d + m, &power(c, 1, Slot::Up(m), window[last - m]));
    }
    x
}

/// Topological LMS state. `h` follows the regressor column order.
#[derive(Debug, Clone, PartialEq)]
pub struct LmsState {
    pub h: DVector<f64>,
    pub mu: f64,
    pub t_d: usize,
    pub t_u: usize,
    window: VecDeque<DVector<f64>>,
}

impl LmsState {
    pub fn new(t_d: usize, t_u: usize, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {mu}"
            )));
        }
        Ok(Self {
            h: DVector::zeros(1 + t_d + t_u),
            mu,
            t_d,
            t_u,
            window: VecDeque::new(),
        })
    }

    pub fn with_coefficients(mut self, h: DVector<f64>) -> Result<Self> {
        dim_check("LMS coefficients", self.h.len(), h.len())?;
        self.h = h;
        Ok(self)
    }

    pub fn window_len(&self) -> usize {
        self.t_d.max(self.t_u) + 1
    }

    /// Append the newest input flow, dropping the oldest beyond the window.
    pub fn push_input(mut self, c: &SimplicialComplex, x: &Cochain) -> Result<Self> {
        c.check(x, 1)?;
        self.window.push_back(x.values().clone());
        while self.window.len() > self.window_len() {
            self.window.pop_front();
        }
        Ok(self)
    }

    pub fn is_ready(&self) -> bool {
        self.window.len() == self.window_len()
    }

    pub fn regressor(&self, c: &SimplicialComplex) -> Result<DMatrix<f64>> {
        if !self.is_ready() {
            return Err(Error::InvalidArgument(format!(
                "regressor needs {} past flows, window holds {}",
                self.window_len(),
                self.window.len()
            )));
        }
        let vals: Vec<&DVector<f64>> = self.window.iter().collect();
        Ok(regressor(c, &vals, self.t_d, self.t_u))
    }
}

/// One LMS update `h ← h + μ X^T M (y − X h)` on the current window.
/// Returns the updated state and the a-priori error `‖M(y − X h)‖²`.
pub fn lms_step(
    c: &SimplicialComplex,
    state: LmsState,
    y: &Cochain,
    mask: &[bool],
) -> Result<(LmsState, f64)> {
    c.check(y, 1)?;
    dim_check("mask", c.num_edges(), mask.len())?;
    let x = state.regressor(c)?;
    let mut e = y.values() - &x * &state.h;
    for (v, &m) in e.iter_mut().zip(mask) {
        if !m {
            *v = 0.0;
        }
    }
    let err = e.norm_squared();
    let mut next = state;
    next.h += x.tr_mul(&e) * next.mu;
    Ok((next, err))
}
