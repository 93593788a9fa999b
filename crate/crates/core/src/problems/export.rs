//! On-disk problem directories.
//!
//! ```text
//! A        u64 rows, u64 cols, then rows*cols f64, row-major
//! M.diag   n f64
//! x_true   n f64
//! b_exact  m f64
//! b        m f64
//! e        m f64
//! meta     key=value lines
//! ```
//!
//! All binary values are little-endian. `x_true`, `b_exact` and `e` may be
//! absent when a directory is assembled from external data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{NoisyData, Spacing, TestProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub s1: f64,
    pub s2: f64,
    pub t1: f64,
    pub t2: f64,
    pub spacing: Spacing,
}

impl Meta {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name={}", self.name);
        let _ = writeln!(out, "m={}", self.m);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "epsilon={:e}", self.epsilon);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "s1={:e}", self.s1);
        let _ = writeln!(out, "s2={:e}", self.s2);
        let _ = writeln!(out, "t1={:e}", self.t1);
        let _ = writeln!(out, "t2={:e}", self.t2);
        let _ = writeln!(out, "spacing={}", self.spacing.as_str());
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("meta line without `=`: {line}")))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Format(format!("meta is missing `{k}`")))
        };
        fn num<T: std::str::FromStr>(k: &str, v: String) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Format(format!("meta `{k}` is not a number: {v}")))
        }
        let spacing = match fields.get("spacing").map(String::as_str) {
            None | Some("nodes") => Spacing::Nodes,
            Some("literal") => Spacing::Literal,
            Some(other) => return Err(Error::Format(format!("unknown spacing `{other}`"))),
        };
        Ok(Self {
            name: get("name")?,
            m: num("m", get("m")?)?,
            n: num("n", get("n")?)?,
            epsilon: num("epsilon", get("epsilon")?)?,
            seed: num("seed", get("seed")?)?,
            s1: num("s1", get("s1")?)?,
            s2: num("s2", get("s2")?)?,
            t1: num("t1", get("t1")?)?,
            t2: num("t2", get("t2")?)?,
            spacing,
        })
    }
}

/// Everything read back from a problem directory.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub meta: Meta,
    pub a: DMatrix<f64>,
    pub weights: DVector<f64>,
    pub x_true: Option<DVector<f64>>,
    pub b_exact: Option<DVector<f64>>,
    pub b: DVector<f64>,
    pub e: Option<DVector<f64>>,
}

pub fn write_problem_dir(dir: &Path, problem: &TestProblem, data: &NoisyData) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (m, n) = problem.a.shape();
    let (s1, s2, t1, t2) = problem.kind.domain();
    let meta = Meta {
        name: problem.kind.name().to_string(),
        m,
        n,
        epsilon: data.epsilon,
        seed: data.seed,
        s1,
        s2,
        t1,
        t2,
        spacing: problem.spacing,
    };

    write_matrix(&dir.join("A"), &problem.a)?;
    write_array(&dir.join("M.diag"), problem.weights().as_slice())?;
    write_array(&dir.join("x_true"), problem.x_true.as_slice())?;
    write_array(&dir.join("b_exact"), problem.b_exact.as_slice())?;
    write_array(&dir.join("b"), data.b.as_slice())?;
    write_array(&dir.join("e"), data.e.as_slice())?;
    fs::write(dir.join("meta"), meta.to_text())?;
    Ok(())
}

pub fn read_problem_dir(dir: &Path) -> Result<ProblemData> {
    let meta = Meta::parse(&fs::read_to_string(dir.join("meta"))?)?;
    let raw = fs::read(dir.join("A"))?;
    if raw.len() < 16 {
        return Err(Error::Format("A: missing dimension header".into()));
    }
    let rows = u64::from_le_bytes(raw[0..8].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(raw[8..16].try_into().expect("8 bytes")) as usize;
    if (rows, cols) != (meta.m, meta.n) {
        return Err(Error::Format(format!(
            "A is {rows}x{cols} but meta says {}x{}",
            meta.m, meta.n
        )));
    }
    let values = decode(&raw[16..], "A")?;
    if values.len() != rows * cols {
        return Err(Error::Format(format!(
            "A: expected {} values, found {}",
            rows * cols,
            values.len()
        )));
    }
    let a = DMatrix::from_row_slice(rows, cols, &values);

    let weights = read_vector(dir, "M.diag", cols)?;
    let b = read_vector(dir, "b", rows)?;
    let optional = |name: &str, len: usize| -> Result<Option<DVector<f64>>> {
        if dir.join(name).exists() {
            read_vector(dir, name, len).map(Some)
        } else {
            Ok(None)
        }
    };
    Ok(ProblemData {
        x_true: optional("x_true", cols)?,
        b_exact: optional("b_exact", rows)?,
        e: optional("e", rows)?,
        meta,
        a,
        weights,
        b,
    })
}

/// `u64` rows, `u64` cols, then the entries row by row, little-endian.
pub fn write_matrix(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    let (m, n) = a.shape();
    let mut bytes = Vec::with_capacity(16 + 8 * m * n);
    bytes.extend_from_slice(&(m as u64).to_le_bytes());
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    for j in 0..m {
        for i in 0..n {
            bytes.extend_from_slice(&a[(j, i)].to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Flat little-endian `f64` values.
pub fn write_array(path: &Path, values: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    Ok(())
}

fn decode(bytes: &[u8], what: &str) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Format(format!(
            "{what}: length is not a multiple of 8"
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

fn read_vector(dir: &Path, name: &str, len: usize) -> Result<DVector<f64>> {
    let values = decode(&fs::read(dir.join(name))?, name)?;
    if values.len() != len {
        return Err(Error::Format(format!(
            "{name}: expected {len} values, found {}",
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}
