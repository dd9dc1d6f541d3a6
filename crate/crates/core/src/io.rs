//! File formats. Every index in a file is 1-based.
//!
//! * complex: JSON `{"num_vertices", "edges", "triangles", "cells"}`
//! * signal: CSV `simplex_id,value`, one row per simplex in canonical order
//! * matrix: dense CSV with an optional header row
//! * time series: CSV `t,level,simplex_id,value`
//! * filter spec, SC-VAR model and triangle list: JSON
//! * index list: integers separated by commas or whitespace, `#` comments
//!
//! Reals are written with 17 significant digits so that a write/read cycle
//! reproduces them exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complex::{Cochain, ComplexSignal, SimplicialComplex};
use crate::error::{Error, Result};
use crate::filter::HodgeFilterSpec;
use crate::spatiotemporal::SCVarModel;

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn json_from_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        parse_err(
            format!("{origin}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- complex

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexFile {
    num_vertices: usize,
    #[serde(default)]
    edges: Vec<Vec<usize>>,
    #[serde(default)]
    triangles: Vec<Vec<usize>>,
    #[serde(default)]
    cells: Vec<Vec<usize>>,
}

fn to_zero_based(
    field: &str,
    i: usize,
    raw: &[usize],
    arity: Option<usize>,
    origin: &str,
) -> Result<Vec<usize>> {
    let loc = || format!("{origin}: {field}[{}]", i + 1);
    if let Some(n) = arity {
        if raw.len() != n {
            return Err(parse_err(
                loc(),
                format!("expected {n} vertices, found {}", raw.len()),
            ));
        }
    }
    raw.iter()
        .map(|&v| {
            v.checked_sub(1)
                .ok_or_else(|| parse_err(loc(), "vertex indices are 1-based; found 0"))
        })
        .collect()
}

pub fn parse_complex(text: &str, origin: &str) -> Result<SimplicialComplex> {
    let file: ComplexFile = json_from_str(text, origin)?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        let v = to_zero_based("edges", i, e, Some(2), origin)?;
        edges.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(file.triangles.len());
    for (i, t) in file.triangles.iter().enumerate() {
        let v = to_zero_based("triangles", i, t, Some(3), origin)?;
        triangles.push([v[0], v[1], v[2]]);
    }
    let cells = file
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| to_zero_based("cells", i, c, None, origin))
        .collect::<Result<Vec<_>>>()?;
    SimplicialComplex::new(file.num_vertices, &edges, &triangles, &cells)
}

pub fn complex_to_json(c: &SimplicialComplex) -> String {
    let one = |v: &[usize]| v.iter().map(|x| x + 1).collect::<Vec<_>>();
    json_string(&ComplexFile {
        num_vertices: c.num_vertices(),
        edges: c.edges().iter().map(|e| one(e)).collect(),
        triangles: c.triangles().iter().map(|t| one(t)).collect(),
        cells: c.cells().iter().map(|p| one(p)).collect(),
    })
}

pub fn load_complex(path: &Path) -> Result<SimplicialComplex> {
    parse_complex(&read_text(path)?, &path.display().to_string())
}

pub fn save_complex(path: &Path, c: &SimplicialComplex) -> Result<()> {
    Ok(fs::write(path, complex_to_json(c))?)
}

// ---------------------------------------------------------------- CSV helpers

struct Row {
    line: u64,
    fields: Vec<String>,
}

fn csv_rows(text: &str, origin: &str) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(format!("{origin}:{line}"), e.to_string())
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(Row {
            line,
            fields: rec.iter().map(str::to_owned).collect(),
        });
    }
    Ok(rows)
}

fn expect_header(rows: &[Row], want: &[&str], origin: &str) -> Result<()> {
    let first = rows.first().ok_or_else(|| {
        parse_err(
            format!("{origin}:1"),
            format!("missing header \"{}\"", want.join(",")),
        )
    })?;
    if first.fields != want {
        return Err(parse_err(
            format!("{origin}:{}", first.line),
            format!(
                "expected header \"{}\", found \"{}\"",
                want.join(","),
                first.fields.join(",")
            ),
        ));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(row: &Row, col: usize, name: &str, origin: &str) -> Result<T> {
    let loc = || format!("{origin}:{} field {name}", row.line);
    let raw = row
        .fields
        .get(col)
        .ok_or_else(|| parse_err(loc(), "missing value"))?;
    raw.parse()
        .map_err(|_| parse_err(loc(), format!("cannot parse '{raw}'")))
}

fn real(row: &Row, col: usize, name: &str, origin: &str) -> Result<f64> {
    let v: f64 = field(row, col, name, origin)?;
    if !v.is_finite() {
        return Err(parse_err(
            format!("{origin}:{} field {name}", row.line),
            "value is not finite",
        ));
    }
    Ok(v)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ASCII output")
}

fn write_record<I, S>(w: &mut csv::Writer<Vec<u8>>, rec: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(rec).expect("in-memory writer");
}

// ---------------------------------------------------------------- signals

pub fn parse_signal(text: &str, c: &SimplicialComplex, k: usize, origin: &str) -> Result<Cochain> {
    if k > 2 {
        return Err(Error::InvalidOrder(format!("signal order {k} exceeds 2")));
    }
    let rows = csv_rows(text, origin)?;
    expect_header(&rows, &["simplex_id", "value"], origin)?;
    let body = &rows[1..];
    let n = c.count(k);
    if body.len() != n {
        return Err(Error::DimensionMismatch {
            what: format!("rows of order-{k} signal {origin} (N_{k})"),
            expected: n,
            found: body.len(),
        });
    }
    let mut values = Vec::with_capacity(n);
    for (i, row) in body.iter().enumerate() {
        let id: usize = field(row, 0, "simplex_id", origin)?;
        if id != i + 1 {
            return Err(parse_err(
                format!("{origin}:{} field simplex_id", row.line),
                format!("expected simplex {} in canonical order, found {id}", i + 1),
            ));
        }
        values.push(real(row, 1, "value", origin)?);
    }
    Cochain::from_vec(k, values)
}

pub fn signal_to_csv(x: &Cochain) -> String {
    let mut w = csv_writer();
    write_record(&mut w, ["simplex_id", "value"]);
    for (i, v) in x.values().iter().enumerate() {
        write_record(&mut w, [(i + 1).to_string(), fmt_real(*v)]);
    }
    finish(w)
}

pub fn load_signal(path: &Path, c: &SimplicialComplex, k: usize) -> Result<Cochain> {
    parse_signal(&read_text(path)?, c, k, &path.display().to_string())
}

pub fn save_signal(path: &Path, x: &Cochain) -> Result<()> {
    Ok(fs::write(path, signal_to_csv(x))?)
}

// ---------------------------------------------------------------- matrices

/// Dense matrix with an optional header row. The first row counts as a
/// header when any of its fields is not a number.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub header: Option<Vec<String>>,
    pub data: DMatrix<f64>,
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<MatrixFile> {
    let rows = csv_rows(text, origin)?;
    let is_numeric = |r: &Row| r.fields.iter().all(|f| f.parse::<f64>().is_ok());
    let (header, body) = match rows.first() {
        Some(first) if !is_numeric(first) => (Some(first.fields.clone()), &rows[1..]),
        _ => (None, &rows[..]),
    };
    let ncols = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| body.first().map(|r| r.fields.len()))
        .unwrap_or(0);
    let mut data = DMatrix::zeros(body.len(), ncols);
    for (i, row) in body.iter().enumerate() {
        if row.fields.len() != ncols {
            return Err(parse_err(
                format!("{origin}:{}", row.line),
                format!("expected {ncols} fields, found {}", row.fields.len()),
            ));
        }
        for j in 0..ncols {
            data[(i, j)] = real(row, j, &format!("column {}", j + 1), origin)?;
        }
    }
    Ok(MatrixFile { header, data })
}

pub fn matrix_to_csv(m: &DMatrix<f64>, header: Option<&[String]>) -> String {
    let mut w = csv_writer();
    if let Some(h) = header {
        write_record(&mut w, h);
    }
    for row in m.row_iter() {
        write_record(&mut w, row.iter().map(|v| fmt_real(*v)));
    }
    finish(w)
}

pub fn load_matrix(path: &Path) -> Result<MatrixFile> {
    parse_matrix(&read_text(path)?, &path.display().to_string())
}

pub fn save_matrix(path: &Path, m: &DMatrix<f64>, header: Option<&[String]>) -> Result<()> {
    Ok(fs::write(path, matrix_to_csv(m, header))?)
}

// ---------------------------------------------------------------- time series

/// Series of complex signals keyed by `t`, ascending. A level missing from
/// the whole file is read as zeros; a partially present level is an error.
pub fn parse_series(text: &str, c: &SimplicialComplex, origin: &str) -> Result<Vec<ComplexSignal>> {
    Ok(parse_timed_series(text, c, origin)?.1)
}

/// Like [`parse_series`], also returning the time stamps.
pub fn parse_timed_series(
    text: &str,
    c: &SimplicialComplex,
    origin: &str,
) -> Result<(Vec<i64>, Vec<ComplexSignal>)> {
    let rows = csv_rows(text, origin)?;
    expect_header(&rows, &["t", "level", "simplex_id", "value"], origin)?;
    let mut frames: BTreeMap<i64, [Vec<Option<f64>>; 3]> = BTreeMap::new();
    let mut seen_level = [false; 3];
    for row in &rows[1..] {
        let t: i64 = field(row, 0, "t", origin)?;
        let level: usize = field(row, 1, "level", origin)?;
        if level > 2 {
            return Err(parse_err(
                format!("{origin}:{} field level", row.line),
                "level must be 0, 1 or 2",
            ));
        }
        let id: usize = field(row, 2, "simplex_id", origin)?;
        let n = c.count(level);
        if id == 0 || id > n {
            return Err(parse_err(
                format!("{origin}:{} field simplex_id", row.line),
                format!("simplex {id} out of range 1..={n} for level {level}"),
            ));
        }
        let v = real(row, 3, "value", origin)?;
        seen_level[level] = true;
        let frame = frames.entry(t).or_insert_with(|| {
            [
                vec![None; c.count(0)],
                vec![None; c.count(1)],
                vec![None; c.count(2)],
            ]
        });
        if frame[level][id - 1].replace(v).is_some() {
            return Err(parse_err(
                format!("{origin}:{}", row.line),
                format!("duplicate entry for t={t}, level {level}, simplex {id}"),
            ));
        }
    }
    let times: Vec<i64> = frames.keys().copied().collect();
    let mut out = Vec::with_capacity(frames.len());
    for (t, frame) in frames {
        let mut levels = Vec::with_capacity(3);
        for (k, vals) in frame.into_iter().enumerate() {
            let filled: Option<Vec<f64>> = if seen_level[k] {
                vals.into_iter().collect()
            } else {
                Some(vec![0.0; c.count(k)])
            };
            let filled = filled.ok_or_else(|| {
                parse_err(
                    origin.to_string(),
                    format!("t={t} lacks some level-{k} values"),
                )
            })?;
            levels.push(Cochain::from_vec(k, filled)?);
        }
        let x2 = levels.pop().expect("three levels");
        let x1 = levels.pop().expect("three levels");
        let x0 = levels.pop().expect("three levels");
        out.push(ComplexSignal::new(c, x0, x1, x2)?);
    }
    Ok((times, out))
}

/// Writes `series[i]` at time `t0 + i`, only for the listed levels.
pub fn series_to_csv(series: &[ComplexSignal], t0: i64, levels: &[usize]) -> String {
    let mut w = csv_writer();
    write_record(&mut w, ["t", "level", "simplex_id", "value"]);
    for (i, s) in series.iter().enumerate() {
        for &k in levels {
            for (j, v) in s.level(k).values().iter().enumerate() {
                write_record(
                    &mut w,
                    [
                        (t0 + i as i64).to_string(),
                        k.to_string(),
                        (j + 1).to_string(),
                        fmt_real(*v),
                    ],
                );
            }
        }
    }
    finish(w)
}

pub fn load_series(path: &Path, c: &SimplicialComplex) -> Result<Vec<ComplexSignal>> {
    parse_series(&read_text(path)?, c, &path.display().to_string())
}

pub fn load_timed_series(
    path: &Path,
    c: &SimplicialComplex,
) -> Result<(Vec<i64>, Vec<ComplexSignal>)> {
    parse_timed_series(&read_text(path)?, c, &path.display().to_string())
}

// ---------------------------------------------------------------- JSON documents

pub fn parse_filter_spec(text: &str, origin: &str) -> Result<HodgeFilterSpec> {
    let spec: HodgeFilterSpec = json_from_str(text, origin)?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_filter_spec(path: &Path) -> Result<HodgeFilterSpec> {
    parse_filter_spec(&read_text(path)?, &path.display().to_string())
}

pub fn filter_spec_to_json(spec: &HodgeFilterSpec) -> String {
    json_string(spec)
}

/// A filter spec file holds either one spec or an array of them.
pub fn load_filter_specs(path: &Path) -> Result<Vec<HodgeFilterSpec>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(HodgeFilterSpec),
        Many(Vec<HodgeFilterSpec>),
    }
    let origin = path.display().to_string();
    let specs = match json_from_str::<OneOrMany>(&read_text(path)?, &origin)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    };
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

pub fn parse_model(text: &str, origin: &str) -> Result<SCVarModel> {
    let model: SCVarModel = json_from_str(text, origin)?;
    model.validate()?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<SCVarModel> {
    parse_model(&read_text(path)?, &path.display().to_string())
}

pub fn model_to_json(model: &SCVarModel) -> String {
    json_string(model)
}

/// Inferred triangles as written to disk (1-based vertices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleList {
    pub criterion: String,
    pub triangles: Vec<[usize; 3]>,
    pub scores: Vec<f64>,
    pub objective: Vec<f64>,
    pub residual_energy: f64,
}

pub fn triangle_list_to_json(list: &TriangleList) -> String {
    json_string(list)
}

pub fn parse_triangle_list(text: &str, origin: &str) -> Result<TriangleList> {
    let list: TriangleList = json_from_str(text, origin)?;
    if let Some(i) = list.triangles.iter().position(|t| t.contains(&0)) {
        return Err(parse_err(
            format!("{origin}: triangles[{}]", i + 1),
            "vertex indices are 1-based; found 0",
        ));
    }
    Ok(list)
}

// ---------------------------------------------------------------- index lists

/// Parses 1-based indices and returns them 0-based, in file order.
pub fn parse_index_list(text: &str, origin: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            match tok.parse::<usize>() {
                Ok(v) if v >= 1 => out.push(v - 1),
                _ => {
                    return Err(parse_err(
                        format!("{origin}:{}", ln + 1),
                        format!("'{tok}' is not a 1-based index"),
                    ))
                }
            }
        }
    }
    Ok(out)
}

pub fn load_index_list(path: &Path) -> Result<Vec<usize>> {
    parse_index_list(&read_text(path)?, &path.display().to_string())
}

pub fn index_list_to_string(idx: &[usize]) -> String {
    let mut s: String = idx.iter().map(|i| format!("{}\n", i + 1)).collect();
    if s.is_empty() {
        s.push('\n');
    }
    s
}
