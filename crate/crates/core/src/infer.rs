//! Choosing which 3-cliques of a graph to fill from observed edge flows.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::complex::SimplicialComplex;
use crate::error::{dim_check, Error, Result};
use crate::linalg::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Add the triangle whose curl of the flows is smallest.
    MinSmoothness,
    /// Add the triangle that most increases the flow energy captured by the
    /// span of the chosen curl columns.
    MaxCurlFit,
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" | "min_smoothness" => Ok(Criterion::MinSmoothness),
            "curlfit" | "max_curl_fit" => Ok(Criterion::MaxCurlFit),
            other => Err(Error::InvalidArgument(format!(
                "unknown criterion '{other}' (use smooth or curlfit)"
            ))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::MinSmoothness => "smooth",
            Criterion::MaxCurlFit => "curlfit",
        })
    }
}

/// `(I - V V^T) F`, with `V` spanning the row space of `B1`.
pub fn project_out_gradient(c: &SimplicialComplex, flows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    dim_check("flow rows", c.num_edges(), flows.nrows())?;
    let svd = linalg::svd_sorted(&c.b1().to_dense());
    let cutoff = Tolerance::default().absolute(svd.singular_values.first().copied().unwrap_or(0.0));
    let r = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let v = svd.v.columns(0, r);
    Ok(flows - v * (v.transpose() * flows))
}

/// Squared Frobenius norm.
pub fn residual_energy(projected: &DMatrix<f64>) -> f64 {
    projected.norm_squared()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleInference {
    /// Selected triangles (0-based, sorted vertices) in selection order.
    pub triangles: Vec<[usize; 3]>,
    /// Score of each pick: the smoothness increment `Σ_r (b_t^T f_r)^2` or
    /// the captured-energy gain.
    pub scores: Vec<f64>,
    /// Running total of the scores.
    pub objective: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Boundary column of the oriented triangle `[i, j, k]`.
fn curl_column(c: &SimplicialComplex, t: &[usize; 3]) -> DVector<f64> {
    let mut b = DVector::zeros(c.num_edges());
    let [i, j, k] = *t;
    for (a, s, sign) in [(i, j, 1.0), (i, k, -1.0), (j, k, 1.0)] {
        b[c.edge_index(a, s).expect("candidate is a clique")] = sign;
    }
    b
}

/// Greedy triangle selection on the gradient-free part of `flows`
/// (`N1 × R`, one snapshot per column). Candidates are the unfilled
/// 3-cliques; near ties within a relative 1e-10 go to the lexicographically
/// smallest triangle.
pub fn infer_triangles(
    c: &SimplicialComplex,
    flows: &DMatrix<f64>,
    count: usize,
    criterion: Criterion,
) -> Result<TriangleInference> {
    let filled = c.triangles();
    let candidates: Vec<[usize; 3]> = c
        .three_cliques()
        .into_iter()
        .filter(|t| !filled.contains(t))
        .collect();
    if count > candidates.len() {
        return Err(Error::InvalidArgument(format!(
            "asked for {count} triangles but the graph has {} unfilled 3-cliques",
            candidates.len()
        )));
    }
    if flows.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("flows must be finite".into()));
    }
    let projected = project_out_gradient(c, flows)?;
    let columns: Vec<DVector<f64>> = candidates.iter().map(|t| curl_column(c, t)).collect();
    // |b^T f|^2 <= 3 |f|^2, so this bounds every score
    let scale = 3.0 * flows.norm_squared();
    let negligible = 1e-20 * scale;
    let mut warnings = Vec::new();

    let mut out = TriangleInference {
        triangles: Vec::with_capacity(count),
        scores: Vec::with_capacity(count),
        objective: Vec::with_capacity(count),
        warnings: Vec::new(),
    };
    let mut taken = vec![false; candidates.len()];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut total = 0.0;
    for step in 0..count {
        let scores: Vec<f64> = columns
            .iter()
            .map(|b| match criterion {
                Criterion::MinSmoothness => (b.transpose() * &projected).norm_squared(),
                Criterion::MaxCurlFit => {
                    let mut q = b.clone();
                    for _ in 0..2 {
                        for u in &basis {
                            let d = u.dot(&q);
                            q.axpy(-d, u, 1.0);
                        }
                    }
                    let n = q.norm();
                    if n <= 1e-10 * b.norm() {
                        0.0
                    } else {
                        (q.transpose() * &projected).norm_squared() / (n * n)
                    }
                }
            })
            .collect();
        let live: Vec<usize> = (0..candidates.len()).filter(|&i| !taken[i]).collect();
        let degenerate = live.iter().all(|&i| scores[i] <= negligible);
        if degenerate {
            warnings.push(format!(
                "step {}: all candidate scores are zero, choosing lexicographically",
                step + 1
            ));
        }
        let spread = live.iter().map(|&i| scores[i]).fold(0.0, f64::max);
        let tol = 1e-10 * spread;
        let mut best = live[0];
        for &i in &live[1..] {
            let better = match criterion {
                Criterion::MinSmoothness => scores[i] < scores[best] - tol,
                Criterion::MaxCurlFit => scores[i] > scores[best] + tol,
            };
            if better && !degenerate {
                best = i;
            }
        }
        taken[best] = true;
        let score = if degenerate { 0.0 } else { scores[best] };
        if criterion == Criterion::MaxCurlFit {
            let mut q = columns[best].clone();
            for _ in 0..2 {
                for u in &basis {
                    let d = u.dot(&q);
                    q.axpy(-d, u, 1.0);
                }
            }
            let n = q.norm();
            if n > 1e-10 * columns[best].norm() {
                basis.push(q / n);
            }
        }
        total += score;
        out.triangles.push(candidates[best]);
        out.scores.push(score);
        out.objective.push(total);
    }
    out.warnings = warnings;
    Ok(out)
}
