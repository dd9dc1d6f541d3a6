//! Batch command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain or I/O error, 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{ComplexKind, ComplexSignal, SimplicialComplex};
use crate::dictionary;
use crate::error::{Error, Result};
use crate::filter::{self, Penalty, Regularization};
use crate::infer::{self, Criterion};
use crate::io::{self, fmt_real};
use crate::linalg::Tolerance;
use crate::sampling::{self, FrequencySet};
use crate::spatiotemporal::{self, FitConfig, LmsState};
use crate::spectral;

#[derive(Debug, Parser)]
#[command(
    name = "toposig",
    version,
    about = "Signal processing on simplicial and cell complexes"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative zero tolerance for rank and kernel decisions.
    #[arg(long, global = true, env = "TOPOSIG_TOLERANCE")]
    tolerance: Option<f64>,
    /// Write the main output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Cell,
    Simplicial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Bandlimited,
    Regularized,
}

#[derive(Debug, Args)]
struct Order {
    /// Simplex order k (0 nodes, 1 edges, 2 two-cells).
    #[arg(long, short = 'k', default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
    order: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a complex and write it in canonical form.
    Build {
        complex: PathBuf,
        /// Require polygons to be fillable by existing edges and triangulate them.
        #[arg(long, value_enum, default_value_t = Kind::Cell)]
        kind: Kind,
        /// Also write B1 as dense CSV.
        #[arg(long)]
        b1: Option<PathBuf>,
        /// Also write B2 as dense CSV.
        #[arg(long)]
        b2: Option<PathBuf>,
    },
    /// Typed frequency table "index,type,frequency".
    Spectrum {
        #[command(flatten)]
        order: Order,
        complex: PathBuf,
        /// Also write the basis, one column per table row.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Hodge decomposition in long format "simplex_id,component,value".
    Decompose {
        #[command(flatten)]
        order: Order,
        complex: PathBuf,
        signal: PathBuf,
        /// Also write the transform "index,type,frequency,coefficient".
        #[arg(long)]
        tft: Option<PathBuf>,
    },
    /// Apply a Hodge filter to a signal.
    Filter {
        #[command(flatten)]
        order: Order,
        #[arg(long)]
        spec: PathBuf,
        complex: PathBuf,
        signal: PathBuf,
        /// Also write the response "index,type,frequency,response".
        #[arg(long)]
        response: Option<PathBuf>,
    },
    /// Slepians concentrated on a simplex set; header fields read "conc_i=<concentration>".
    Slepians {
        #[command(flatten)]
        order: Order,
        /// Index list file with the simplex set.
        #[arg(long)]
        set: PathBuf,
        /// Frequency selector, e.g. "harm,grad:1..3".
        #[arg(long)]
        freq: String,
        #[arg(long)]
        count: usize,
        complex: PathBuf,
    },
    /// Assemble a Hodge dictionary, or sparse-code a signal with it.
    Dictionary {
        #[command(flatten)]
        order: Order,
        /// JSON file with one filter spec or an array of them.
        #[arg(long)]
        specs: PathBuf,
        complex: PathBuf,
        /// Sparse-code this signal instead of writing the atoms.
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        sparsity: usize,
    },
    /// Greedy sample selection (or a recoverability check with --check).
    Sample {
        #[command(flatten)]
        order: Order,
        #[arg(long)]
        freq: String,
        #[arg(long, required_unless_present = "check")]
        count: Option<usize>,
        /// Index list file to test instead of selecting.
        #[arg(long)]
        check: Option<PathBuf>,
        complex: PathBuf,
    },
    /// Recover a signal from the samples listed in --samples.
    Reconstruct {
        #[command(flatten)]
        order: Order,
        #[arg(long, value_enum, default_value_t = Method::Bandlimited)]
        method: Method,
        /// Index list file of observed simplices.
        #[arg(long)]
        samples: PathBuf,
        /// Frequency selector (bandlimited method).
        #[arg(long, required_if_eq("method", "bandlimited"))]
        freq: Option<String>,
        /// Divergence weight (regularized method).
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Curl weight (regularized method).
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Divergence penalty exponent, 1 or 2.
        #[arg(long, default_value_t = 2)]
        p: u8,
        /// Curl penalty exponent, 1 or 2.
        #[arg(long, default_value_t = 2)]
        q: u8,
        complex: PathBuf,
        /// Full-length signal; entries outside the sample set are ignored.
        signal: PathBuf,
    },
    /// Iterated noiseless SC-VAR (or S-VAR) forecast after the last time step.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Drop cross-level terms.
        #[arg(long)]
        svar: bool,
        complex: PathBuf,
        series: PathBuf,
    },
    /// Simulate an SC-VAR model with Gaussian noise.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        steps: usize,
        /// Noise standard deviation per level, "s0,s1,s2".
        #[arg(long, default_value = "0,0,0")]
        noise: String,
        /// Initial history; random N(0,1) signals when absent.
        #[arg(long)]
        init: Option<PathBuf>,
        complex: PathBuf,
    },
    /// Least-squares fit of a restricted SC-VAR model.
    Fit {
        #[arg(long, default_value_t = 1)]
        lags: usize,
        #[arg(long, default_value_t = 1)]
        filter_order: usize,
        /// Also learn cross-level post-filters.
        #[arg(long)]
        cross: bool,
        complex: PathBuf,
        series: PathBuf,
    },
    /// Topological LMS on edge flows; streams "t,error,h1,...".
    Lms {
        #[arg(long, default_value_t = 1)]
        td: usize,
        #[arg(long, default_value_t = 1)]
        tu: usize,
        #[arg(long)]
        mu: f64,
        /// Probability that an edge is observed at each step.
        #[arg(long, default_value_t = 1.0)]
        sample_prob: f64,
        complex: PathBuf,
        /// Input flows (level 1 of a time series).
        input: PathBuf,
        /// Observed outputs (level 1 of a time series with the same times).
        target: PathBuf,
    },
    /// Choose triangles to fill from edge flows (N1 x R matrix CSV).
    InferTriangles {
        #[arg(long, value_parser = parse_criterion)]
        criterion: Criterion,
        #[arg(long)]
        count: usize,
        /// Skip filling when the gradient-free energy is at most this.
        #[arg(long, default_value_t = 0.0)]
        min_energy: f64,
        complex: PathBuf,
        flows: PathBuf,
    },
    /// Betti numbers "b0 b1 b2".
    Betti { complex: PathBuf },
}

fn parse_criterion(s: &str) -> std::result::Result<Criterion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI on `argv` (program name first), writing to the process
/// stdout/stderr. Returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut warnings = Vec::new();
    let result = (|| {
        if let Some(t) = cli.tolerance {
            Tolerance::set_process_default(t)?;
        }
        let text = execute(&cli, &mut warnings)?;
        match &cli.output {
            Some(path) => fs::write(path, text)?,
            None => out.write_all(text.as_bytes())?,
        }
        Ok::<_, Error>(())
    })();
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn order_of(o: &Order) -> usize {
    usize::from(o.order)
}

fn frequency_rows(c: &SimplicialComplex, k: usize, selector: &str) -> Result<Vec<usize>> {
    let set: FrequencySet = selector.parse()?;
    set.resolve(&spectral::hodge_basis(c, k)?)
}

fn table_csv(basis: &spectral::HodgeBasis, extra: Option<(&str, &[f64])>) -> String {
    let mut s = String::from("index,type,frequency");
    if let Some((name, _)) = extra {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (i, r) in spectral::frequency_table(basis).iter().enumerate() {
        s.push_str(&format!(
            "{},{},{}",
            r.index + 1,
            r.kind,
            fmt_real(r.frequency)
        ));
        if let Some((_, vals)) = extra {
            s.push(',');
            s.push_str(&fmt_real(vals[i]));
        }
        s.push('\n');
    }
    s
}

fn mask_from(samples: &[usize], n: usize) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &i in samples {
        if i >= n {
            return Err(Error::InvalidArgument(format!(
                "sample {} out of range 1..={n}",
                i + 1
            )));
        }
        mask[i] = true;
    }
    Ok(mask)
}

fn execute(cli: &Cli, warnings: &mut Vec<String>) -> Result<String> {
    match &cli.command {
        Command::Build {
            complex,
            kind,
            b1,
            b2,
        } => {
            let mut c = io::load_complex(complex)?;
            if matches!(kind, Kind::Simplicial) {
                let tris: Vec<[usize; 3]> = c.triangles().to_vec();
                let cells: Vec<Vec<usize>> = c.cells().to_vec();
                c = SimplicialComplex::build(
                    c.num_vertices(),
                    c.edges(),
                    &tris,
                    &cells,
                    ComplexKind::Simplicial,
                )?;
            }
            if let Some(p) = b1 {
                io::save_matrix(p, &c.b1().to_dense(), None)?;
            }
            if let Some(p) = b2 {
                io::save_matrix(p, &c.b2().to_dense(), None)?;
            }
            Ok(io::complex_to_json(&c))
        }
        Command::Spectrum {
            order,
            complex,
            basis,
        } => {
            let c = io::load_complex(complex)?;
            let b = spectral::hodge_basis(&c, order_of(order))?;
            if let Some(p) = basis {
                let header: Vec<String> = (1..=b.dim()).map(|i| format!("u{i}")).collect();
                io::save_matrix(p, &b.matrix(), Some(&header))?;
            }
            Ok(table_csv(&b, None))
        }
        Command::Decompose {
            order,
            complex,
            signal,
            tft,
        } => {
            let c = io::load_complex(complex)?;
            let k = order_of(order);
            let x = io::load_signal(signal, &c, k)?;
            let parts = spectral::hodge_decompose(&c, &x)?;
            if let Some(p) = tft {
                let b = spectral::hodge_basis(&c, k)?;
                let coeffs = spectral::tft(&b, &x)?.to_table_order();
                fs::write(p, table_csv(&b, Some(("coefficient", coeffs.as_slice()))))?;
            }
            let mut s = String::from("simplex_id,component,value\n");
            for (name, v) in [
                ("signal", x.values()),
                ("gradient", parts.grad.values()),
                ("curl", parts.curl.values()),
                ("harmonic", parts.harm.values()),
            ] {
                for (i, val) in v.iter().enumerate() {
                    s.push_str(&format!("{},{name},{}\n", i + 1, fmt_real(*val)));
                }
            }
            Ok(s)
        }
        Command::Filter {
            order,
            spec,
            complex,
            signal,
            response,
        } => {
            let c = io::load_complex(complex)?;
            let k = order_of(order);
            let spec = io::load_filter_spec(spec)?;
            let x = io::load_signal(signal, &c, k)?;
            let y = filter::apply_filter(&c, k, &spec, &x)?;
            if let Some(p) = response {
                let b = spectral::hodge_basis(&c, k)?;
                let r = filter::response_on(&b, &spec);
                fs::write(p, table_csv(&b, Some(("response", &r))))?;
            }
            Ok(io::signal_to_csv(&y))
        }
        Command::Slepians {
            order,
            set,
            freq,
            count,
            complex,
        } => {
            let c = io::load_complex(complex)?;
            let k = order_of(order);
            let s = io::load_index_list(set)?;
            let f = frequency_rows(&c, k, freq)?;
            let sl = dictionary::slepians_on(&c, k, &s, &f, *count)?;
            let header: Vec<String> = sl
                .concentrations
                .iter()
                .enumerate()
                .map(|(i, v)| format!("conc_{}={}", i + 1, fmt_real(*v)))
                .collect();
            Ok(io::matrix_to_csv(&sl.vectors, Some(&header)))
        }
        Command::Dictionary {
            order,
            specs,
            complex,
            code,
            sparsity,
        } => {
            let c = io::load_complex(complex)?;
            let k = order_of(order);
            let specs = io::load_filter_specs(specs)?;
            let d = dictionary::build_dictionary(&c, k, &specs)?;
            match code {
                None => {
                    let header: Vec<String> = (0..specs.len())
                        .flat_map(|i| (1..=c.count(k)).map(move |j| format!("h{}_{j}", i + 1)))
                        .collect();
                    Ok(io::matrix_to_csv(
                        dictionary::Atoms::atoms(&d),
                        Some(&header),
                    ))
                }
                Some(sig) => {
                    let x = io::load_signal(sig, &c, k)?;
                    let sc = dictionary::sparse_code(&d, &x, *sparsity)?;
                    let mut s = String::from("atom_id,value\n");
                    for (i, v) in sc.coefficients.iter().enumerate() {
                        s.push_str(&format!("{},{}\n", i + 1, fmt_real(*v)));
                    }
                    warnings.push(format!(
                        "residual norm {} with {} atoms",
                        fmt_real(sc.residual_norm),
                        sc.support.len()
                    ));
                    Ok(s)
                }
            }
        }
        Command::Sample {
            order,
            freq,
            count,
            check,
            complex,
        } => {
            let c = io::load_complex(complex)?;
            let k = order_of(order);
            let f = frequency_rows(&c, k, freq)?;
            if let Some(p) = check {
                let s = io::load_index_list(p)?;
                let r = sampling::is_perfectly_recoverable(&c, k, &f, &s)?;
                return Ok(format!(
                    "recoverable,margin\n{},{}\n",
                    r.recoverable,
                    fmt_real(r.margin)
                ));
            }
            let m = count.expect("clap enforces --count without --check");
            let sel = sampling::select_samples(&c, k, &f, m)?;
            Ok(format!(
                "# margin {}\n{}",
                fmt_real(sel.margin),
                io::index_list_to_string(&sel.samples)
            ))
        }
        Command::Reconstruct {
            order,
            method,
            samples,
            freq,
            alpha,
            beta,
            p,
            q,
            complex,
            signal,
        } => {
            let c = io::load_complex(complex)?;
            let k = order_of(order);
            let s = io::load_index_list(samples)?;
            let x = io::load_signal(signal, &c, k)?;
            match method {
                Method::Bandlimited => {
                    let f = frequency_rows(&c, k, freq.as_deref().expect("clap requires --freq"))?;
                    let obs: Vec<f64> = s
                        .iter()
                        .map(|&i| x.values().get(i).copied())
                        .collect::<Option<_>>()
                        .ok_or_else(|| {
                            Error::InvalidArgument("sample index out of range".into())
                        })?;
                    let rec = sampling::reconstruct_bandlimited(&c, k, &f, &s, &obs)?;
                    if !rec.recoverable {
                        warnings.push(format!(
                            "sample set is not full rank (margin {}); output is a least-squares fit",
                            fmt_real(rec.margin)
                        ));
                    }
                    Ok(io::signal_to_csv(&rec.signal))
                }
                Method::Regularized => {
                    if k != 1 {
                        return Err(Error::InvalidOrder(
                            "regularized reconstruction acts on edge flows".into(),
                        ));
                    }
                    let reg = Regularization {
                        alpha: *alpha,
                        beta: *beta,
                        divergence: Penalty::from_exponent(*p)?,
                        curl: Penalty::from_exponent(*q)?,
                    };
                    let mask = mask_from(&s, c.num_edges())?;
                    Ok(io::signal_to_csv(&filter::regularized_reconstruct(
                        &c, &x, &mask, reg,
                    )?))
                }
            }
        }
        Command::Forecast {
            model,
            steps,
            svar,
            complex,
            series,
        } => {
            let c = io::load_complex(complex)?;
            let model = io::load_model(model)?;
            let (times, mut hist) = io::load_timed_series(series, &c)?;
            let first = hist.len();
            for _ in 0..*steps {
                let next = if *svar {
                    spatiotemporal::svar_predict(&c, &model, &hist)?
                } else {
                    spatiotemporal::scvar_predict(&c, &model, &hist)?
                };
                hist.push(next);
            }
            let t0 = times.last().map_or(0, |t| t + 1);
            Ok(io::series_to_csv(&hist[first..], t0, &[0, 1, 2]))
        }
        Command::Simulate {
            model,
            steps,
            noise,
            init,
            complex,
        } => {
            let c = io::load_complex(complex)?;
            let model = io::load_model(model)?;
            let sd: Vec<f64> = noise
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad noise levels '{noise}'")))?;
            let sd: [f64; 3] = sd
                .try_into()
                .map_err(|_| Error::InvalidArgument("noise needs three levels s0,s1,s2".into()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let initial = match init {
                Some(p) => io::load_series(p, &c)?,
                None => (0..model.order().max(1))
                    .map(|_| random_signal(&c, &mut rng))
                    .collect::<Result<Vec<_>>>()?,
            };
            let series = spatiotemporal::simulate(&c, &model, &initial, *steps, sd, rng.random())?;
            Ok(io::series_to_csv(&series, 0, &[0, 1, 2]))
        }
        Command::Fit {
            lags,
            filter_order,
            cross,
            complex,
            series,
        } => {
            let c = io::load_complex(complex)?;
            let data = io::load_series(series, &c)?;
            let cfg = FitConfig {
                lags: *lags,
                filter_order: *filter_order,
                cross: *cross,
            };
            let fit = spatiotemporal::scvar_fit(&c, &data, cfg)?;
            warnings.push(format!(
                "residual per level: {} {} {}",
                fmt_real(fit.residual[0]),
                fmt_real(fit.residual[1]),
                fmt_real(fit.residual[2])
            ));
            Ok(io::model_to_json(&fit.model))
        }
        Command::Lms {
            td,
            tu,
            mu,
            sample_prob,
            complex,
            input,
            target,
        } => {
            let c = io::load_complex(complex)?;
            if !(0.0..=1.0).contains(sample_prob) {
                return Err(Error::InvalidArgument(
                    "sample probability must lie in [0, 1]".into(),
                ));
            }
            let (times, xs) = io::load_timed_series(input, &c)?;
            let (target_times, ys) = io::load_timed_series(target, &c)?;
            if times != target_times {
                return Err(Error::InvalidArgument(
                    "input and target series have different time stamps".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut state = LmsState::new(*td, *tu, *mu)?;
            let mut s = String::from("t,error");
            for i in 1..=1 + td + tu {
                s.push_str(&format!(",h{i}"));
            }
            s.push('\n');
            for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
                state = state.push_input(&c, &x.x1)?;
                if !state.is_ready() {
                    continue;
                }
                let mask: Vec<bool> = (0..c.num_edges())
                    .map(|_| rng.random::<f64>() < *sample_prob)
                    .collect();
                let (next, e) = spatiotemporal::lms_step(&c, state, &y.x1, &mask)?;
                state = next;
                s.push_str(&format!("{},{}", times[i], fmt_real(e)));
                for h in state.h.iter() {
                    s.push(',');
                    s.push_str(&fmt_real(*h));
                }
                s.push('\n');
            }
            Ok(s)
        }
        Command::InferTriangles {
            criterion,
            count,
            min_energy,
            complex,
            flows,
        } => {
            let c = io::load_complex(complex)?;
            let f = io::load_matrix(flows)?.data;
            let energy = infer::residual_energy(&infer::project_out_gradient(&c, &f)?);
            let out = if energy <= *min_energy {
                warnings.push(format!(
                    "gradient-free energy {} does not exceed {min_energy}; no triangles filled",
                    fmt_real(energy)
                ));
                infer::TriangleInference {
                    triangles: vec![],
                    scores: vec![],
                    objective: vec![],
                    warnings: vec![],
                }
            } else {
                infer::infer_triangles(&c, &f, *count, *criterion)?
            };
            warnings.extend(out.warnings.iter().cloned());
            let list = io::TriangleList {
                criterion: criterion.to_string(),
                triangles: out.triangles.iter().map(|t| t.map(|v| v + 1)).collect(),
                scores: out.scores,
                objective: out.objective,
                residual_energy: energy,
            };
            Ok(io::triangle_list_to_json(&list))
        }
        Command::Betti { complex } => {
            let c = io::load_complex(complex)?;
            let (b0, b1, b2) = c.betti();
            Ok(format!("{b0} {b1} {b2}\n"))
        }
    }
}

fn random_signal(c: &SimplicialComplex, rng: &mut ChaCha8Rng) -> Result<ComplexSignal> {
    use rand_distr::{Distribution, StandardNormal};
    let n = c.count(0) + c.count(1) + c.count(2);
    let v = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    ComplexSignal::from_stacked(c, &v)
}
