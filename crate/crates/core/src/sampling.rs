//! Bandlimited sampling and reconstruction of k-cochains.
//!
//! A signal is bandlimited to a set `F` of frequency-table rows when it lies
//! in the span of those basis columns `U_F`. Sampling keeps the entries in a
//! simplex set `S`; recovery is possible exactly when `U_F[S, :]` has full
//! column rank.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::complex::{Cochain, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::{self, Tolerance};
use crate::spectral::{self, FrequencyType, HodgeBasis};

/// One term of a frequency-set selector. Ranges and lists are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrequencySelector {
    /// Every harmonic row.
    Harmonic,
    /// The `i..=j`-th gradient frequencies in ascending order.
    Gradient(usize, usize),
    /// The `i..=j`-th curl frequencies in ascending order.
    Curl(usize, usize),
    /// Explicit frequency-table rows.
    Indices(Vec<usize>),
}

/// A union of selectors, written e.g. `harm,grad:1..3,idx:(9,10)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySet(pub Vec<FrequencySelector>);

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("bad range '{s}', expected i..j"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

impl FromStr for FrequencySelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "harm" {
            return Ok(FrequencySelector::Harmonic);
        }
        if let Some(r) = s.strip_prefix("grad:") {
            let (a, b) = parse_range(r)?;
            return Ok(FrequencySelector::Gradient(a, b));
        }
        if let Some(r) = s.strip_prefix("curl:") {
            let (a, b) = parse_range(r)?;
            return Ok(FrequencySelector::Curl(a, b));
        }
        if let Some(r) = s.strip_prefix("idx:") {
            let inner = r
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::InvalidArgument(format!("bad index list '{r}'")))?;
            let list = inner
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v),
                    _ => Err(Error::InvalidArgument(format!("bad index '{}'", t.trim()))),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(FrequencySelector::Indices(list));
        }
        Err(Error::InvalidArgument(format!(
            "unknown frequency selector '{s}' (use harm, grad:i..j, curl:i..j or idx:(list))"
        )))
    }
}

impl FromStr for FrequencySet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // split on commas outside parentheses
        let mut parts = Vec::new();
        let (mut depth, mut start) = (0i32, 0);
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&s[start..]);
        let sel = parts
            .into_iter()
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<FrequencySelector>>>()?;
        if sel.is_empty() {
            return Err(Error::InvalidArgument("empty frequency selector".into()));
        }
        Ok(FrequencySet(sel))
    }
}

impl fmt::Display for FrequencySelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencySelector::Harmonic => write!(f, "harm"),
            FrequencySelector::Gradient(a, b) => write!(f, "grad:{a}..{b}"),
            FrequencySelector::Curl(a, b) => write!(f, "curl:{a}..{b}"),
            FrequencySelector::Indices(v) => {
                let items: Vec<String> = v.iter().map(usize::to_string).collect();
                write!(f, "idx:({})", items.join(","))
            }
        }
    }
}

impl FrequencySet {
    /// 0-based frequency-table rows, sorted and deduplicated.
    pub fn resolve(&self, basis: &HodgeBasis) -> Result<Vec<usize>> {
        let (ng, nc, nh) = basis.widths();
        let n = basis.dim();
        let mut out = Vec::new();
        let typed = |kind: &str, a: usize, b: usize, width: usize, offset: usize| {
            if b > width {
                return Err(Error::InvalidArgument(format!(
                    "{kind}:{a}..{b} exceeds the {width} {kind} frequencies"
                )));
            }
            Ok((a - 1 + offset..b + offset).collect::<Vec<_>>())
        };
        for sel in &self.0 {
            match sel {
                FrequencySelector::Harmonic => out.extend(0..nh),
                FrequencySelector::Gradient(a, b) => out.extend(typed("grad", *a, *b, ng, nh)?),
                FrequencySelector::Curl(a, b) => out.extend(typed("curl", *a, *b, nc, nh + ng)?),
                FrequencySelector::Indices(v) => {
                    for &i in v {
                        if i > n {
                            return Err(Error::InvalidArgument(format!(
                                "frequency index {i} out of range 1..={n}"
                            )));
                        }
                        out.push(i - 1);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Outcome of the full-rank test on `U_F[S, :]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recoverability {
    pub recoverable: bool,
    /// Smallest singular value of the sampled sub-basis.
    pub margin: f64,
}

fn check_set(what: &str, idx: &[usize], bound: usize) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} set is empty")));
    }
    let mut seen = vec![false; bound];
    for &i in idx {
        if i >= bound {
            return Err(Error::InvalidArgument(format!(
                "{what} index {} out of range 1..={bound}",
                i + 1
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!(
                "{what} index {} repeated",
                i + 1
            )));
        }
    }
    Ok(())
}

fn sub_basis(
    c: &SimplicialComplex,
    k: usize,
    freq: &[usize],
    samples: &[usize],
) -> Result<(HodgeBasis, nalgebra::DMatrix<f64>)> {
    let n = c.count(k);
    check_set("frequency", freq, n)?;
    check_set("sample", samples, n)?;
    let basis = spectral::hodge_basis(c, k)?;
    let uf = basis.columns(freq)?;
    Ok((basis, uf))
}

fn margin_of(m: &nalgebra::DMatrix<f64>) -> Recoverability {
    let sv = linalg::svd_sorted(m).singular_values;
    let margin = if m.nrows() < m.ncols() {
        0.0
    } else {
        sv.last().copied().unwrap_or(0.0)
    };
    Recoverability {
        recoverable: m.nrows() >= m.ncols() && linalg::rank(m, Tolerance::default()) == m.ncols(),
        margin,
    }
}

pub fn is_perfectly_recoverable(
    c: &SimplicialComplex,
    k: usize,
    freq: &[usize],
    samples: &[usize],
) -> Result<Recoverability> {
    let (_, uf) = sub_basis(c, k, freq, samples)?;
    Ok(margin_of(&linalg::select_rows(&uf, samples)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub signal: Cochain,
    pub recoverable: bool,
    pub margin: f64,
}

/// Least-squares fit of `observed` (aligned with `samples`) by
/// `F`-bandlimited signals. Rank-deficient systems return the minimum-norm
/// fit with `recoverable = false`.
pub fn reconstruct_bandlimited(
    c: &SimplicialComplex,
    k: usize,
    freq: &[usize],
    samples: &[usize],
    observed: &[f64],
) -> Result<Reconstruction> {
    crate::error::dim_check("observed values", samples.len(), observed.len())?;
    if observed.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "observed values must be finite".into(),
        ));
    }
    let (_, uf) = sub_basis(c, k, freq, samples)?;
    let us = linalg::select_rows(&uf, samples);
    let rec = margin_of(&us);
    let z = linalg::pinv_solve(
        &us,
        &DVector::from_column_slice(observed),
        Tolerance::default(),
    );
    Ok(Reconstruction {
        signal: Cochain::raw(k, uf * z),
        recoverable: rec.recoverable,
        margin: rec.margin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSelection {
    /// Chosen simplices in selection order.
    pub samples: Vec<usize>,
    pub margin: f64,
}

/// Greedy sample selection maximizing the smallest singular value of the
/// sampled sub-basis at each step; ties go to the lowest simplex index.
pub fn select_samples(
    c: &SimplicialComplex,
    k: usize,
    freq: &[usize],
    m: usize,
) -> Result<SampleSelection> {
    let n = c.count(k);
    check_set("frequency", freq, n)?;
    if m < freq.len() || m > n {
        return Err(Error::InvalidArgument(format!(
            "sample count {m} must lie in {}..={n}",
            freq.len()
        )));
    }
    let uf = spectral::hodge_basis(c, k)?.columns(freq)?;
    let cutoff = Tolerance::default().singular_cutoff(1.0);
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut margin = 0.0;
    while chosen.len() < m {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|j| !chosen.contains(j)) {
            let mut rows = chosen.clone();
            rows.push(j);
            let sv = linalg::svd_sorted(&linalg::select_rows(&uf, &rows)).singular_values;
            let score = sv.last().copied().unwrap_or(0.0);
            if best.is_none_or(|(_, b)| score > b + 1e-14) {
                best = Some((j, score));
            }
        }
        let (j, score) = best.expect("m <= n leaves a candidate");
        if chosen.len() < freq.len() && score <= cutoff {
            return Err(Error::Infeasible(format!(
                "no simplex extends the {} chosen samples to a full-rank set",
                chosen.len()
            )));
        }
        chosen.push(j);
        margin = score;
    }
    Ok(SampleSelection {
        samples: chosen,
        margin,
    })
}

/// Frequency-table rows of one type, 0-based.
pub fn rows_of_kind(basis: &HodgeBasis, kind: FrequencyType) -> Vec<usize> {
    spectral::frequency_table(basis)
        .into_iter()
        .filter(|r| r.kind == kind)
        .map(|r| r.index)
        .collect()
}
