//! On-disk formats.
//!
//! A grid file (`.rg`) is one ASCII line `RGRID v1 <rows> <cols>\n`
//! followed by `rows * cols` little-endian IEEE-754 doubles in row-major
//! order. Problem and recycle-space directories pair a `manifest.txt` of
//! `key=value` lines with grid payloads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linops::{psf_operator, DenseMatrix, Diagonal, PsfGrid};
use crate::nonlinear::NonlinearToy;
use crate::problems::{ProblemOperator, TestProblem};
use crate::recycle::{KTuple, RecycleSpace};

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows * cols != values.len() {
            return Err(Error::DimensionMismatch {
                context: "Grid::new",
                expected: rows * cols,
                got: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn column(values: Vec<f64>) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            values,
        }
    }
}

pub fn encode_grid(g: &Grid) -> Vec<u8> {
    let mut out = format!("RGRID v1 {} {}\n", g.rows, g.cols).into_bytes();
    out.reserve(8 * g.values.len());
    for v in &g.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8], path: &Path) -> Result<Grid> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not ASCII".into()))?;
    let parts: Vec<&str> = header.split(' ').collect();
    let [magic, version, rows, cols] = parts[..] else {
        return Err(bad(format!("malformed header `{header}`")));
    };
    if magic != "RGRID" || version != "v1" {
        return Err(bad(format!("unsupported header `{header}`")));
    }
    let rows: usize = rows.parse().map_err(|_| bad(format!("bad row count `{rows}`")))?;
    let cols: usize = cols.parse().map_err(|_| bad(format!("bad column count `{cols}`")))?;
    let payload = &bytes[nl + 1..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| bad("grid dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(bad(format!("expected {expected} payload bytes, found {}", payload.len())));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Grid { rows, cols, values })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_grid(path: &Path) -> Result<Grid> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_grid(&bytes, path)
}

pub fn write_grid(path: &Path, g: &Grid) -> Result<()> {
    fs::write(path, encode_grid(g)).map_err(io_err(path))
}

/// Ordered `key=value` manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: BTreeMap<String, String>,
    path: PathBuf,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Format {
            path: self.path.clone(),
            reason: format!("missing key `{key}`"),
        })
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Format {
            path: self.path.clone(),
            reason: format!("cannot parse `{key}={raw}`"),
        })
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                reason: format!("line {} is not key=value", lineno + 1),
            })?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            entries,
            path: path.to_path_buf(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(io_err(path))
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// The manifest a problem directory would carry.
pub fn problem_manifest(p: &TestProblem) -> Manifest {
    let mut m = Manifest::new();
    for (k, v) in &p.meta {
        m.set(k, v);
    }
    m.set("kind", p.op.kind());
    m.set("label", &p.label);
    m.set("rows", p.shape.0);
    m.set("cols", p.shape.1);
    m.set("delta", p.delta);
    if let Some(rel) = p.delta_rel() {
        m.set("delta_rel_actual", rel);
    }
    if let ProblemOperator::Convolution(c) = &p.op {
        let (cr, cc) = c.psf().center();
        m.set("psf_center", format!("{cr},{cc}"));
    }
    if let ProblemOperator::Nonlinear(f) = &p.op {
        m.set("epsilon", f.epsilon());
    }
    m
}

/// Writes `manifest.txt`, the data grids and the operator (`psf.rg` for
/// blur problems, `op.rg` otherwise).
pub fn save_problem(dir: &Path, p: &TestProblem) -> Result<()> {
    ensure_dir(dir)?;
    problem_manifest(p).write(&dir.join(MANIFEST))?;
    let (rows, cols) = p.shape;
    let as_grid = |v: &[f64]| Grid::new(rows, cols, v.to_vec());
    if let Some(x) = &p.x_true {
        write_grid(&dir.join("x_true.rg"), &as_grid(x)?)?;
    }
    if let Some(y) = &p.y_exact {
        write_grid(&dir.join("y_exact.rg"), &as_grid(y)?)?;
    }
    write_grid(&dir.join("y_delta.rg"), &as_grid(&p.y_delta)?)?;
    match &p.op {
        ProblemOperator::Convolution(c) => {
            let psf = c.psf();
            write_grid(&dir.join("psf.rg"), &Grid::new(psf.rows(), psf.cols(), psf.values().to_vec())?)
        }
        ProblemOperator::Dense(t) => write_grid(&dir.join("op.rg"), &Grid::new(t.rows(), t.cols(), t.data().to_vec())?),
        ProblemOperator::Diagonal(d) => write_grid(&dir.join("op.rg"), &Grid::new(1, d.values().len(), d.values().to_vec())?),
        ProblemOperator::Nonlinear(f) => {
            let t = f.linear_part();
            write_grid(&dir.join("op.rg"), &Grid::new(t.rows(), t.cols(), t.data().to_vec())?)
        }
    }
}

fn optional_grid(path: &Path) -> Result<Option<Vec<f64>>> {
    if path.exists() {
        Ok(Some(read_grid(path)?.values))
    } else {
        Ok(None)
    }
}

pub fn load_problem(dir: &Path) -> Result<TestProblem> {
    let mpath = dir.join(MANIFEST);
    let m = Manifest::read(&mpath)?;
    let rows: usize = m.parse("rows")?;
    let cols: usize = m.parse("cols")?;
    let bad = |reason: String| Error::Format {
        path: mpath.clone(),
        reason,
    };
    let op = match m.require("kind")? {
        "blur" => {
            let g = read_grid(&dir.join("psf.rg"))?;
            let center = m.require("psf_center")?;
            let (cr, cc) = center
                .split_once(',')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| bad(format!("bad psf_center `{center}`")))?;
            ProblemOperator::Convolution(psf_operator(PsfGrid::new(g.rows, g.cols, g.values, (cr, cc))?, rows, cols)?)
        }
        "dense" => {
            let g = read_grid(&dir.join("op.rg"))?;
            ProblemOperator::Dense(DenseMatrix::new(g.rows, g.cols, g.values)?)
        }
        "diagonal" => ProblemOperator::Diagonal(Diagonal::new(read_grid(&dir.join("op.rg"))?.values)?),
        "nonlinear" => {
            let g = read_grid(&dir.join("op.rg"))?;
            ProblemOperator::Nonlinear(NonlinearToy::new(DenseMatrix::new(g.rows, g.cols, g.values)?, m.parse("epsilon")?)?)
        }
        other => return Err(bad(format!("unknown problem kind `{other}`"))),
    };
    let y_delta = read_grid(&dir.join("y_delta.rg"))?.values;
    if y_delta.len() != op.dim_range() {
        return Err(bad(format!("y_delta has {} entries, operator range is {}", y_delta.len(), op.dim_range())));
    }
    let meta = m
        .entries()
        .filter(|(k, _)| !matches!(*k, "kind" | "label" | "rows" | "cols" | "delta" | "delta_rel_actual" | "psf_center"))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    Ok(TestProblem {
        x_true: optional_grid(&dir.join("x_true.rg"))?,
        y_exact: optional_grid(&dir.join("y_exact.rg"))?,
        y_delta,
        delta: m.parse("delta")?,
        label: m.require("label")?.to_string(),
        shape: (rows, cols),
        meta,
        op,
    })
}

/// Writes `u_000.rg, ...`, `c_000.rg, ...` (each shaped like `shape`),
/// `r.csv` and a manifest holding the dimensions plus `extra` entries.
pub fn save_space(dir: &Path, rs: &RecycleSpace, shape: (usize, usize), extra: &Manifest) -> Result<()> {
    ensure_dir(dir)?;
    let mut m = extra.clone();
    m.set("k", rs.k());
    m.set("dim_domain", rs.dim_domain());
    m.set("dim_range", rs.dim_range());
    m.set("rows", shape.0);
    m.set("cols", shape.1);
    m.write(&dir.join(MANIFEST))?;
    let grid_of = |v: &[f64]| {
        if shape.0 * shape.1 == v.len() {
            Grid::new(shape.0, shape.1, v.to_vec())
        } else {
            Ok(Grid::column(v.to_vec()))
        }
    };
    for (i, u) in rs.u().vectors().iter().enumerate() {
        write_grid(&dir.join(format!("u_{i:03}.rg")), &grid_of(u)?)?;
    }
    for (i, c) in rs.c().vectors().iter().enumerate() {
        write_grid(&dir.join(format!("c_{i:03}.rg")), &grid_of(c)?)?;
    }
    let r = rs.r();
    let csv: String = (0..r.nrows())
        .map(|i| {
            let row: Vec<String> = (0..r.ncols()).map(|j| r[(i, j)].to_string()).collect();
            row.join(",") + "\n"
        })
        .collect();
    let rpath = dir.join("r.csv");
    fs::write(&rpath, csv).map_err(io_err(&rpath))
}

pub fn load_space(dir: &Path) -> Result<(RecycleSpace, Manifest)> {
    let m = Manifest::read(&dir.join(MANIFEST))?;
    let k: usize = m.parse("k")?;
    let dd: usize = m.parse("dim_domain")?;
    let dr: usize = m.parse("dim_range")?;
    let read_all = |prefix: &str| -> Result<Vec<Vec<f64>>> {
        (0..k)
            .map(|i| read_grid(&dir.join(format!("{prefix}_{i:03}.rg"))).map(|g| g.values))
            .collect()
    };
    let u = KTuple::new(dd, read_all("u")?)?;
    let c = KTuple::new(dr, read_all("c")?)?;
    let rpath = dir.join("r.csv");
    let text = fs::read_to_string(&rpath).map_err(io_err(&rpath))?;
    let mut data = Vec::with_capacity(k * k);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        for v in line.split(',') {
            data.push(v.trim().parse::<f64>().map_err(|_| Error::Format {
                path: rpath.clone(),
                reason: format!("bad value `{v}`"),
            })?);
        }
    }
    if data.len() != k * k {
        return Err(Error::Format {
            path: rpath,
            reason: format!("expected {} entries, found {}", k * k, data.len()),
        });
    }
    let r = DMatrix::from_row_slice(k, k, &data);
    Ok((RecycleSpace::from_parts(u, c, r)?, m))
}
