//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::*;
use toposig::dictionary::slepians_on;
use toposig::filter::{apply_filter, laplacian_lambda_max, HodgeFilterSpec};
use toposig::infer::{infer_triangles, Criterion as Selection};
use toposig::io;
use toposig::sampling::{
    is_perfectly_recoverable, reconstruct_bandlimited, select_samples, FrequencySet,
};
use toposig::spatiotemporal::{
    lms_step, scvar_fit, simulate, FitConfig, LagFilters, LmsState, SCVarModel,
};
use toposig::spectral::hodge_basis;
use toposig::{fixtures, Cochain, ComplexSignal, SimplicialComplex};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (
        t < limit,
        format!("{:.2} s of {} s", t.as_secs_f64(), limit.as_secs()),
    )
}

fn all_fixtures() -> Vec<(&'static str, SimplicialComplex)> {
    vec![
        ("one-hole", fixtures::one_hole()),
        ("one-hole-skeleton", fixtures::one_hole_skeleton()),
        ("square-cell", fixtures::square_cell()),
    ]
}

fn random_complexes(seed: u64, count: usize, max_vertices: usize) -> Vec<SimplicialComplex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(3..=max_vertices);
            let p = rng.random_range(0.15..0.6);
            fixtures::random_complex(&mut rng, n, p, 0.6)
        })
        .collect()
}

fn structural_identities() -> Outcome {
    let start = Instant::now();
    let mut complexes = vec![fixtures::one_hole()];
    complexes.extend(random_complexes(101, 50, 30));
    let mut exact = true;
    let mut worst = 0.0f64;
    for c in &complexes {
        exact &= c.b1().mul_int(c.b2()).iter().flatten().all(|&v| v == 0);
        let d = c.dirac().full;
        let sq = &d * &d;
        let n = d.nrows();
        let mut want = DMatrix::zeros(n, n);
        let mut off = 0;
        for k in 0..3 {
            let (ld, lu) = dense_parts(c, k);
            want.view_mut((off, off), (c.count(k), c.count(k)))
                .copy_from(&(ld + lu));
            off += c.count(k);
        }
        worst = worst.max((sq - &want).norm() / want.norm().max(f64::MIN_POSITIVE));
    }
    let (fast, time) = within(Duration::from_secs(10), start);
    outcome(
        exact && worst <= 1e-12 && fast,
        format!(
            "{} complexes, B1*B2 = 0 exactly: {exact}, max rel. error of D^2 {worst:.1e}, {time}",
            complexes.len()
        ),
    )
}

fn betti_fixture() -> Outcome {
    let c = fixtures::one_hole();
    let betti = c.betti();
    let oracle: Vec<usize> = (0..3)
        .map(|k| {
            let (ld, lu) = dense_parts(&c, k);
            SymmetricEigen::new(ld + lu)
                .eigenvalues
                .iter()
                .filter(|v| v.abs() < 1e-9)
                .count()
        })
        .collect();
    let (ld, lu) = dense_parts(&c, 1);
    let eig = SymmetricEigen::new(ld + lu);
    let i0 = eig.eigenvalues.iamin();
    let h = eig.eigenvectors.column(i0).into_owned();
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].abs().total_cmp(&h[a].abs()));
    let mut top: Vec<usize> = order[..3].to_vec();
    top.sort_unstable();
    let cycle: Vec<usize> = [(0, 2), (0, 6), (2, 6)]
        .iter()
        .map(|&(a, b)| c.edge_index(a, b).unwrap())
        .collect();
    let lib = hodge_basis(&c, 1).unwrap();
    let agree = lib.harm().ncols() == 1 && (lib.harm().column(0).dot(&h).abs() - 1.0).abs() < 1e-10;
    outcome(
        betti == (1, 1, 0) && oracle == [1, 1, 0] && top == cycle && agree,
        format!(
            "betti {betti:?} (dense kernel {oracle:?}), harmonic top-3 edges {:?}, library basis agrees: {agree}",
            top.iter().map(|&e| c.edges()[e].map(|v| v + 1)).collect::<Vec<_>>()
        ),
    )
}

fn hodge_orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    let mut widths_ok = true;
    for (_, c) in all_fixtures() {
        for k in 0..3 {
            let b = hodge_basis(&c, k).unwrap();
            let (g, cu, h) = b.widths();
            widths_ok &= g + cu + h == c.count(k);
            let blocks = [b.grad(), b.curl(), b.harm()];
            for (i, p) in blocks.iter().enumerate() {
                for q in &blocks[i + 1..] {
                    worst = worst.max(p.tr_mul(q).amax());
                }
            }
        }
    }
    outcome(
        worst <= 1e-10 && widths_ok,
        format!("3 fixtures x k=0,1,2: max cross inner product {worst:.1e}, widths sum to N_k: {widths_ok}"),
    )
}

fn filter_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    let mut trials = 0;
    while trials < 100 {
        let n = rng.random_range(4..=16);
        let p = rng.random_range(0.3..0.7);
        let c = fixtures::random_complex(&mut rng, n, p, 0.6);
        let k = rng.random_range(0..3);
        if c.count(k) == 0 {
            continue;
        }
        let (ld, lu) = dense_parts(&c, k);
        let lmax = SymmetricEigen::new(ld + lu).eigenvalues.max();
        let harmonic = rng.random_bool(0.3);
        let spec = random_spec(&mut rng, lmax, harmonic);
        let x = random_vec(&mut rng, c.count(k));
        let y = apply_filter(&c, k, &spec, &Cochain::new(k, x.clone()).unwrap()).unwrap();
        let want = oracle_filter(&c, k, &spec) * &x;
        if want.norm() > 0.0 {
            worst = worst.max(rel_err(y.values(), &want));
        } else {
            worst = worst.max(y.norm());
        }
        trials += 1;
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    outcome(
        worst <= 1e-9 && fast,
        format!("100 random triples: max rel. error {worst:.1e}, {time}"),
    )
}

fn harmonic_projector() -> Outcome {
    let c = fixtures::one_hole();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for k in 0..3 {
        let lmax = laplacian_lambda_max(&c, k);
        let spec = HodgeFilterSpec::new(vec![], vec![]).with_harmonic(1.0 / lmax, 200);
        let (ld, lu) = dense_parts(&c, k);
        let proj = kernel_projector(&(ld + lu));
        for _ in 0..20 {
            let x = random_vec(&mut rng, c.count(k));
            let y = apply_filter(&c, k, &spec, &Cochain::new(k, x.clone()).unwrap()).unwrap();
            worst = worst.max((y.values() - &proj * &x).norm() / x.norm());
        }
    }
    outcome(
        worst <= 1e-6,
        format!("eps = 1/lambda_max, T_h = 200, k = 0,1,2 on the one-hole complex: max error {worst:.1e}"),
    )
}

/// Bands with a projector that can be formed from the boundaries alone.
fn typed_bands(c: &SimplicialComplex, k: usize) -> Vec<(String, DMatrix<f64>)> {
    let b = hodge_basis(c, k).unwrap();
    let (g, cu, h) = b.widths();
    let (ld, lu) = dense_parts(c, k);
    let grad = range_projector(&ld);
    let curl = range_projector(&lu);
    let harm = kernel_projector(&(&ld + &lu));
    let mut out = Vec::new();
    if h > 0 {
        out.push(("harm".to_string(), harm.clone()));
    }
    if g > 0 {
        out.push((format!("grad:1..{g}"), grad.clone()));
    }
    if cu > 0 {
        out.push((format!("curl:1..{cu}"), curl.clone()));
        if h > 0 {
            out.push((format!("harm,curl:1..{cu}"), &harm + &curl));
        }
    }
    if g > 0 && h > 0 {
        out.push((format!("harm,grad:1..{g}"), &harm + &grad));
    }
    out
}

fn slepian_relations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut complexes: Vec<SimplicialComplex> =
        all_fixtures().into_iter().map(|(_, c)| c).collect();
    complexes.extend(random_complexes(607, 10, 12));
    let (mut eig_err, mut band_err) = (0.0f64, 0.0f64);
    let mut cases = 0;
    for c in &complexes {
        let k = 1;
        let n = c.count(k);
        if n < 2 {
            continue;
        }
        let basis = hodge_basis(c, k).unwrap();
        let mut bands = typed_bands(c, k);
        // a random partial band, projected with the library basis
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let part: Vec<usize> = idx[..rng.random_range(1..=n)].to_vec();
        let uf = basis.columns(&part).unwrap();
        let list = part
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(",");
        bands.push((format!("idx:({list})"), &uf * uf.transpose()));
        for (sel, ff) in bands {
            let freq = FrequencySet::from_str(&sel)
                .unwrap()
                .resolve(&basis)
                .unwrap();
            let mut simplices: Vec<usize> = (0..n).collect();
            simplices.shuffle(&mut rng);
            simplices.truncate(rng.random_range(1..=n));
            let set = slepians_on(c, k, &simplices, &freq, freq.len()).unwrap();
            let cs = DMatrix::from_fn(n, n, |i, j| {
                if i == j && simplices.contains(&i) {
                    1.0
                } else {
                    0.0
                }
            });
            let op = &ff * &cs * &ff;
            for (j, psi) in set.vectors.column_iter().enumerate() {
                let psi = psi.into_owned();
                eig_err = eig_err.max((&op * &psi - &psi * set.concentrations[j]).norm());
                band_err = band_err.max((&ff * &psi - &psi).norm());
            }
            cases += 1;
        }
    }
    outcome(
        eig_err <= 1e-8 && band_err <= 1e-9,
        format!("{cases} (complex, set, band) cases: eigen-relation residual {eig_err:.1e}, band leakage {band_err:.1e}"),
    )
}

fn perfect_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    let mut summary = Vec::new();
    for (name, c) in all_fixtures() {
        let k = 1;
        let n = c.count(k);
        let basis = hodge_basis(&c, k).unwrap();
        let mut trials = 0;
        let mut fixture_worst = 0.0f64;
        while trials < 100 {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut freq = idx[..rng.random_range(1..=n)].to_vec();
            freq.sort_unstable();
            let m = (freq.len() + rng.random_range(0..=2)).min(n);
            let samples = if trials % 2 == 0 {
                select_samples(&c, k, &freq, m).unwrap().samples
            } else {
                let mut s: Vec<usize> = (0..n).collect();
                s.shuffle(&mut rng);
                s.truncate(m);
                s
            };
            if !is_perfectly_recoverable(&c, k, &freq, &samples)
                .unwrap()
                .recoverable
            {
                continue;
            }
            let uf = basis.columns(&freq).unwrap();
            let x = &uf * random_vec(&mut rng, freq.len());
            let observed: Vec<f64> = samples.iter().map(|&i| x[i]).collect();
            let rec = reconstruct_bandlimited(&c, k, &freq, &samples, &observed).unwrap();
            fixture_worst = fixture_worst.max(rel_err(rec.signal.values(), &x));
            trials += 1;
        }
        worst = worst.max(fixture_worst);
        summary.push(format!("{name} {fixture_worst:.1e}"));
    }
    outcome(
        worst <= 1e-9,
        format!(
            "100 full-rank trials per fixture, max rel. error: {}",
            summary.join(", ")
        ),
    )
}

fn planted_model(rng: &mut impl Rng) -> SCVarModel {
    // constant in h_down[0]; shifts only on the parts that act at each level
    let mut spec = |scale: f64, down: bool, up: bool| {
        let mut small = |on: bool| {
            if on {
                0.02 * (rng.random::<f64>() - 0.5)
            } else {
                0.0
            }
        };
        let (d, u) = (small(down), small(up));
        HodgeFilterSpec::new(vec![scale * (rng.random::<f64>() - 0.5), d], vec![0.0, u])
    };
    let id = HodgeFilterSpec::identity();
    let lags = (0..2)
        .map(|_| LagFilters {
            h00: spec(0.6, false, true),
            h11: spec(0.6, true, true),
            h22: spec(0.6, true, false),
            g01: spec(0.2, false, true),
            h01: id.clone(),
            g10: spec(0.2, true, false),
            h10: id.clone(),
            g12: spec(0.2, false, true),
            h12: id.clone(),
            g21: spec(0.2, true, false),
            h21: id.clone(),
        })
        .collect();
    SCVarModel { lags }
}

fn random_signal(c: &SimplicialComplex, rng: &mut impl Rng) -> ComplexSignal {
    let n = c.count(0) + c.count(1) + c.count(2);
    ComplexSignal::from_stacked(c, &random_vec(rng, n)).unwrap()
}

fn coefficient_error(got: &SCVarModel, want: &SCVarModel) -> f64 {
    let specs = |l: &LagFilters| -> Vec<HodgeFilterSpec> {
        vec![
            l.h00.clone(),
            l.g01.clone(),
            l.h01.clone(),
            l.h11.clone(),
            l.g10.clone(),
            l.h10.clone(),
            l.g12.clone(),
            l.h12.clone(),
            l.g21.clone(),
            l.h21.clone(),
            l.h22.clone(),
        ]
    };
    let diff = |a: &[f64], b: &[f64]| {
        (0..a.len().max(b.len()))
            .map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max)
    };
    let mut worst = 0.0f64;
    for (g, w) in got.lags.iter().zip(&want.lags) {
        for (a, b) in specs(g).iter().zip(specs(w)) {
            worst = worst
                .max(diff(&a.h_down, &b.h_down))
                .max(diff(&a.h_up, &b.h_up));
        }
    }
    worst
}

fn scvar_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let cfg = FitConfig {
        lags: 2,
        filter_order: 1,
        cross: true,
    };
    let c = fixtures::one_hole();
    let mut coef_err = 0.0f64;
    for seed in 0..10 {
        let model = planted_model(&mut rng);
        let init = vec![random_signal(&c, &mut rng), random_signal(&c, &mut rng)];
        let series = simulate(&c, &model, &init, 60, [0.0; 3], seed).unwrap();
        let fit = scvar_fit(&c, &series, cfg).unwrap();
        coef_err = coef_err.max(coefficient_error(&fit.model, &model));
    }
    let sigma: f64 = 0.1;
    let model = planted_model(&mut rng);
    let init = vec![random_signal(&c, &mut rng), random_signal(&c, &mut rng)];
    let series = simulate(&c, &model, &init, 4000, [sigma; 3], 1).unwrap();
    let fit = scvar_fit(&c, &series, cfg).unwrap();
    let ratios: Vec<f64> = fit.residual.iter().map(|r| r / sigma.powi(2)).collect();
    let noisy_ok = ratios.iter().all(|r| (r - 1.0).abs() <= 0.15);
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(
        coef_err < 1e-6 && noisy_ok && fast,
        format!(
            "noiseless max coefficient error {coef_err:.1e} (10 plants); noisy residual / sigma^2 = [{:.3}, {:.3}, {:.3}]; {time}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn lms_convergence() -> Outcome {
    let c = fixtures::one_hole();
    let n = c.num_edges();
    let (t_d, t_u) = (1, 1);
    let (steps, tail, seeds) = (5000, 500, 50);
    let sigma = 0.1;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut tail_mse = 0.0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let h_star = DVector::from_fn(1 + t_d + t_u, |_, _| rng.random_range(-1.0..1.0));
        let draw = |rng: &mut ChaCha8Rng| {
            Cochain::new(1, DVector::from_fn(n, |_, _| normal.sample(rng))).unwrap()
        };

        // step size from the largest eigenvalue of the sample regressor correlation
        let mut probe = LmsState::new(t_d, t_u, 1.0).unwrap();
        let mut corr = DMatrix::zeros(1 + t_d + t_u, 1 + t_d + t_u);
        for _ in 0..200 {
            probe = probe.push_input(&c, &draw(&mut rng)).unwrap();
            if probe.is_ready() {
                let x = probe.regressor(&c).unwrap();
                corr += x.tr_mul(&x);
            }
        }
        let lambda_hat = SymmetricEigen::new(corr / 200.0).eigenvalues.max();
        let mut state = LmsState::new(t_d, t_u, 0.2 / lambda_hat).unwrap();

        let mask = vec![true; n];
        let mut acc = 0.0;
        let mut t = 0;
        while t < steps {
            state = state.push_input(&c, &draw(&mut rng)).unwrap();
            if !state.is_ready() {
                continue;
            }
            let x = state.regressor(&c).unwrap();
            let noise = DVector::from_fn(n, |_, _| sigma * normal.sample(&mut rng));
            let y = Cochain::new(1, &x * &h_star + noise).unwrap();
            let (next, err) = lms_step(&c, state, &y, &mask).unwrap();
            state = next;
            if t >= steps - tail {
                acc += err;
            }
            t += 1;
        }
        tail_mse += acc / tail as f64;
    }
    let mse = tail_mse / seeds as f64;
    let floor = n as f64 * sigma * sigma;
    let db = 10.0 * (mse / floor).log10();
    outcome(
        db.abs() <= 3.0,
        format!("{seeds} seeds x {steps} steps, mu = 0.2/lambda_max: smoothed MSE {mse:.4} vs noise floor {floor:.4} ({db:+.2} dB)"),
    )
}

fn triangle_inference() -> Outcome {
    let full = fixtures::one_hole();
    let skeleton = fixtures::one_hole_skeleton();
    let b1 = dense_b1(&full);
    let b2 = dense_b2(&full);
    let mut want = full.triangles().to_vec();
    want.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let snapshots = 20;
    let mut hits = 0;
    for _ in 0..100 {
        let z = DMatrix::from_fn(b2.ncols(), snapshots, |_, _| normal.sample(&mut rng));
        let w = DMatrix::from_fn(b1.nrows(), snapshots, |_, _| normal.sample(&mut rng));
        let noise = DMatrix::from_fn(b2.nrows(), snapshots, |_, _| 0.01 * normal.sample(&mut rng));
        let flows = &b2 * z + b1.transpose() * w + noise;
        let res = infer_triangles(&skeleton, &flows, 3, Selection::MaxCurlFit).unwrap();
        let mut got = res.triangles.clone();
        got.sort_unstable();
        hits += usize::from(got == want);
    }
    outcome(
        hits >= 95,
        format!("exact planted set in {hits}/100 trials at sigma = 0.01"),
    )
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Runs a fixed CLI session in `dir` and returns every output, in order.
fn cli_session(dir: &Path) -> Vec<Vec<u8>> {
    let f1 = fixture_path("one_hole.json");
    let f1 = f1.to_str().unwrap();
    let sk = fixture_path("one_hole_skeleton.json");
    let sk = sk.to_str().unwrap();
    let p = |name: &str| dir.join(name).to_str().unwrap().to_owned();

    let c = fixtures::one_hole();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let x = Cochain::new(1, random_vec(&mut rng, 10)).unwrap();
    std::fs::write(p("x.csv"), io::signal_to_csv(&x)).unwrap();
    std::fs::write(
        p("spec.json"),
        io::filter_spec_to_json(&HodgeFilterSpec::new(vec![1.0, -0.3], vec![0.2, 0.1])),
    )
    .unwrap();
    std::fs::write(p("model.json"), io::model_to_json(&planted_model(&mut rng))).unwrap();
    std::fs::write(p("set.txt"), "2 6 9\n").unwrap();
    let flows = dense_b2(&c) * DMatrix::from_fn(3, 8, |_, _| rng.random_range(-1.0..1.0));
    std::fs::write(p("flows.csv"), io::matrix_to_csv(&flows, None)).unwrap();

    let runs: Vec<Vec<String>> = vec![
        vec!["build".into(), f1.into()],
        vec!["spectrum".into(), f1.into(), "-k".into(), "1".into()],
        vec![
            "decompose".into(),
            f1.into(),
            p("x.csv"),
            "--tft".into(),
            p("tft.csv"),
        ],
        vec![
            "filter".into(),
            f1.into(),
            p("x.csv"),
            "--spec".into(),
            p("spec.json"),
            "--response".into(),
            p("resp.csv"),
        ],
        vec![
            "slepians".into(),
            f1.into(),
            "--set".into(),
            p("set.txt"),
            "--freq".into(),
            "harm,grad:1..3".into(),
            "--count".into(),
            "3".into(),
        ],
        vec![
            "dictionary".into(),
            f1.into(),
            "--specs".into(),
            p("spec.json"),
            "--code".into(),
            p("x.csv"),
        ],
        vec![
            "sample".into(),
            f1.into(),
            "--freq".into(),
            "harm,curl:1..3".into(),
            "--count".into(),
            "5".into(),
            "-o".into(),
            p("s.txt"),
        ],
        vec![
            "reconstruct".into(),
            f1.into(),
            p("x.csv"),
            "--samples".into(),
            p("s.txt"),
            "--freq".into(),
            "harm,curl:1..3".into(),
        ],
        vec![
            "reconstruct".into(),
            f1.into(),
            p("x.csv"),
            "--samples".into(),
            p("s.txt"),
            "--method".into(),
            "regularized".into(),
            "--alpha".into(),
            "0.5".into(),
            "--beta".into(),
            "0.5".into(),
            "--p".into(),
            "1".into(),
        ],
        vec![
            "--seed".into(),
            "5".into(),
            "simulate".into(),
            f1.into(),
            "--model".into(),
            p("model.json"),
            "--steps".into(),
            "120".into(),
            "--noise".into(),
            "0.1,0.1,0.1".into(),
            "-o".into(),
            p("series.csv"),
        ],
        vec![
            "fit".into(),
            f1.into(),
            p("series.csv"),
            "--lags".into(),
            "2".into(),
            "--cross".into(),
        ],
        vec![
            "forecast".into(),
            f1.into(),
            p("series.csv"),
            "--model".into(),
            p("model.json"),
            "--steps".into(),
            "4".into(),
        ],
        vec![
            "--seed".into(),
            "6".into(),
            "lms".into(),
            f1.into(),
            p("series.csv"),
            p("series.csv"),
            "--mu".into(),
            "0.001".into(),
            "--sample-prob".into(),
            "0.7".into(),
        ],
        vec![
            "infer-triangles".into(),
            sk.into(),
            p("flows.csv"),
            "--criterion".into(),
            "curlfit".into(),
            "--count".into(),
            "3".into(),
        ],
        vec!["betti".into(), f1.into()],
    ];
    let mut outputs = Vec::new();
    for args in runs {
        let out = Command::new(env!("CARGO_BIN_EXE_toposig"))
            .args(&args)
            .env_remove("TOPOSIG_TOLERANCE")
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(out.stdout);
    }
    for file in ["tft.csv", "resp.csv", "s.txt", "series.csv"] {
        outputs.push(std::fs::read(p(file)).unwrap());
    }
    outputs
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ra, rb) = (cli_session(a.path()), cli_session(b.path()));
    let same = ra == rb;
    let bytes: usize = ra.iter().map(Vec::len).sum();
    outcome(
        same,
        format!(
            "{} outputs ({bytes} bytes) byte-identical across two runs: {same}",
            ra.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("structural identities", structural_identities),
        ("Betti fixture", betti_fixture),
        ("Hodge orthogonality", hodge_orthogonality),
        ("filter spectral equivalence", filter_equivalence),
        ("harmonic projector", harmonic_projector),
        ("Slepian eigenproblem", slepian_relations),
        ("perfect reconstruction", perfect_reconstruction),
        ("SC-VAR recovery", scvar_recovery),
        ("topological LMS", lms_convergence),
        ("triangle inference", triangle_inference),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!result.pass);
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {}", i + 1, result.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
