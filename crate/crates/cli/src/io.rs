//! JSON file formats.
//!
//! Complex scalars are `[re, im]`; matrices are row-major arrays of rows.
//! A colligation file is `{d, dimX, dimU, dimY, A: [A1..Ad], B: [B1..Bd], C, D}`;
//! a pair file omits `dimU`, `B` and `D`. Point files are arrays of
//! `d`-vectors. A multiplier file is a colligation file or
//! `{"builtin": "example33"}` / `{"builtin": "coordinates", "d": n}`.

use std::fs;
use std::path::{Path, PathBuf};

use arveson_core::colligation::{BallPoint, Colligation, OperatorTuple, OutputPair};
use arveson_core::kernels::SchurEvaluator;
use arveson_core::realization::example33;
use arveson_core::ComplexMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{file}: cannot read: {message}")]
    Io { file: PathBuf, message: String },
    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{file}: dimension mismatch: {message}")]
    Dimension { file: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Entry = [f64; 2];
pub type MatrixRows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColligationFile {
    pub d: usize,
    #[serde(rename = "dimX")]
    pub dim_x: usize,
    #[serde(rename = "dimU")]
    pub dim_u: usize,
    #[serde(rename = "dimY")]
    pub dim_y: usize,
    #[serde(rename = "A")]
    pub a: Vec<MatrixRows>,
    #[serde(rename = "B")]
    pub b: Vec<MatrixRows>,
    #[serde(rename = "C")]
    pub c: MatrixRows,
    #[serde(rename = "D")]
    pub d_block: MatrixRows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub d: usize,
    #[serde(rename = "dimX")]
    pub dim_x: usize,
    #[serde(rename = "dimY")]
    pub dim_y: usize,
    #[serde(rename = "A")]
    pub a: Vec<MatrixRows>,
    #[serde(rename = "C")]
    pub c: MatrixRows,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuiltinFile {
    builtin: String,
    d: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct QFile {
    #[serde(rename = "Q")]
    q: MatrixRows,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GFile {
    #[serde(rename = "G")]
    g: MatrixRows,
}

fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError::Io {
        file: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Parse {
        file: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn dim_err(path: &Path, message: impl Into<String>) -> InputError {
    InputError::Dimension {
        file: path.to_path_buf(),
        message: message.into(),
    }
}

/// Convert nested rows to a matrix of the expected shape; `name` labels the
/// block in error messages.
pub fn to_matrix(path: &Path, name: &str, rows: &MatrixRows, shape: (usize, usize)) -> Result<ComplexMatrix, InputError> {
    let (r, c) = shape;
    // a matrix with no columns may be written as [] or as r empty rows
    if c == 0 && rows.is_empty() {
        return Ok(ComplexMatrix::zeros(r, 0));
    }
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        let got_cols = rows.first().map(Vec::len).unwrap_or(0);
        return Err(dim_err(
            path,
            format!("{name}: expected {r}x{c}, got {}x{got_cols}", rows.len()),
        ));
    }
    let mut m = ComplexMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if !e[0].is_finite() || !e[1].is_finite() {
                return Err(dim_err(path, format!("{name}: non-finite entry at ({i}, {j})")));
            }
            m[(i, j)] = Complex64::new(e[0], e[1]);
        }
    }
    Ok(m)
}

pub fn from_matrix(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn tuple_blocks(path: &Path, name: &str, blocks: &[MatrixRows], d: usize, shape: (usize, usize)) -> Result<Vec<ComplexMatrix>, InputError> {
    if blocks.len() != d {
        return Err(dim_err(path, format!("{name}: expected {d} blocks, got {}", blocks.len())));
    }
    blocks
        .iter()
        .enumerate()
        .map(|(j, b)| to_matrix(path, &format!("{name}{}", j + 1), b, shape))
        .collect()
}

fn core_err(path: &Path, e: arveson_core::Error) -> InputError {
    dim_err(path, e.to_string())
}

fn pair_from_parts(path: &Path, d: usize, dim_x: usize, dim_y: usize, a: &[MatrixRows], c: &MatrixRows) -> Result<OutputPair, InputError> {
    if d == 0 {
        return Err(dim_err(path, "d must be at least 1"));
    }
    let a = tuple_blocks(path, "A", a, d, (dim_x, dim_x))?;
    let c = to_matrix(path, "C", c, (dim_y, dim_x))?;
    let tuple = OperatorTuple::new(a).map_err(|e| core_err(path, e))?;
    OutputPair::new(c, tuple).map_err(|e| core_err(path, e))
}

impl ColligationFile {
    pub fn to_colligation(&self, path: &Path) -> Result<Colligation, InputError> {
        let pair = pair_from_parts(path, self.d, self.dim_x, self.dim_y, &self.a, &self.c)?;
        let b = tuple_blocks(path, "B", &self.b, self.d, (self.dim_x, self.dim_u))?;
        let d = to_matrix(path, "D", &self.d_block, (self.dim_y, self.dim_u))?;
        Colligation::from_pair(pair, b, d).map_err(|e| core_err(path, e))
    }

    pub fn from_colligation(c: &Colligation) -> Self {
        ColligationFile {
            d: c.d(),
            dim_x: c.dim_x(),
            dim_u: c.dim_u(),
            dim_y: c.dim_y(),
            a: c.a().blocks().iter().map(from_matrix).collect(),
            b: c.b().iter().map(from_matrix).collect(),
            c: from_matrix(c.c()),
            d_block: from_matrix(c.d_block()),
        }
    }
}

impl PairFile {
    pub fn from_pair(p: &OutputPair) -> Self {
        PairFile {
            d: p.d(),
            dim_x: p.dim_x(),
            dim_y: p.dim_y(),
            a: p.a().blocks().iter().map(from_matrix).collect(),
            c: from_matrix(p.c()),
        }
    }
}

pub fn read_colligation(path: &Path) -> Result<Colligation, InputError> {
    let text = read_text(path)?;
    parse::<ColligationFile>(path, &text)?.to_colligation(path)
}

pub fn read_pair(path: &Path) -> Result<OutputPair, InputError> {
    let text = read_text(path)?;
    let f: PairFile = parse(path, &text)?;
    pair_from_parts(path, f.d, f.dim_x, f.dim_y, &f.a, &f.c)
}

pub fn read_points(path: &Path, d: usize) -> Result<Vec<BallPoint>, InputError> {
    let text = read_text(path)?;
    let rows: Vec<Vec<Entry>> = parse(path, &text)?;
    rows.iter()
        .enumerate()
        .map(|(k, row)| {
            if row.len() != d {
                return Err(dim_err(path, format!("point {k}: expected {d} coordinates, got {}", row.len())));
            }
            let coords = row.iter().map(|e| Complex64::new(e[0], e[1])).collect();
            BallPoint::new(coords).map_err(|e| dim_err(path, format!("point {k}: {e}")))
        })
        .collect()
}

/// `S(l) = [l_1, ..., l_d]`.
pub fn coordinate_function(d: usize) -> SchurEvaluator {
    SchurEvaluator::from_fn(d, "coordinates", |l: &BallPoint| Ok(ComplexMatrix::from_row_slice(1, l.d(), l.coords())))
        .expect("coordinate function is finite")
}

pub fn read_schur(path: &Path) -> Result<SchurEvaluator, InputError> {
    let text = read_text(path)?;
    let value: Value = parse(path, &text)?;
    if value.get("builtin").is_some() {
        let b: BuiltinFile = parse(path, &text)?;
        return match (b.builtin.as_str(), b.d) {
            ("example33", None) => Ok(example33::schur_function()),
            ("coordinates", Some(d)) if d >= 1 => Ok(coordinate_function(d)),
            ("coordinates", _) => Err(dim_err(path, "builtin coordinates needs d >= 1")),
            (other, _) => Err(InputError::Parse {
                file: path.to_path_buf(),
                line: 1,
                column: 1,
                message: format!("unknown builtin `{other}`"),
            }),
        };
    }
    let c = parse::<ColligationFile>(path, &text)?.to_colligation(path)?;
    Ok(SchurEvaluator::from_colligation(c))
}

pub fn read_parameter(path: &Path, shape: (usize, usize)) -> Result<ComplexMatrix, InputError> {
    let text = read_text(path)?;
    let f: QFile = parse(path, &text)?;
    to_matrix(path, "Q", &f.q, shape)
}

pub fn read_isometry(path: &Path, shape: (usize, usize)) -> Result<ComplexMatrix, InputError> {
    let text = read_text(path)?;
    let f: GFile = parse(path, &text)?;
    to_matrix(path, "G", &f.g, shape)
}

fn depth(v: &Value) -> Option<usize> {
    match v {
        Value::Array(items) => items.iter().try_fold(1, |acc, x| depth(x).map(|d| acc.max(d + 1))),
        Value::Object(_) => None,
        _ => Some(0),
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, val)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                render(val, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        // a row of entries (or anything shallower) stays on one line
        Value::Array(items) if !items.is_empty() && depth(v).is_none_or(|d| d > 2) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                render(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}

/// JSON with one matrix row per line. Numbers use the shortest decimal
/// form that parses back to the same `f64`.
pub fn to_json_text<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    render(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), InputError> {
    let text = to_json_text(value).map_err(|e| InputError::Io {
        file: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(|e| InputError::Io {
        file: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_colligation(path: &Path, c: &Colligation) -> Result<(), InputError> {
    write_json(path, &ColligationFile::from_colligation(c))
}
