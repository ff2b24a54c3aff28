//! Functional datasets, their coefficient tensors, and on-disk formats.
//!
//! A dataset directory holds a `manifest.json`, a responses file and one
//! file per covariate. Two encodings are supported:
//!
//! * `csv`: covariate file `j` has a header `x_1,...,x_n` and `N` rows;
//!   the responses file has a header `y` and `N` rows.
//! * `f64le`: a 16-byte header of two little-endian `u64` (rows, cols)
//!   followed by `rows * cols` little-endian doubles, row-major. Responses
//!   are stored as an `N × 1` matrix.
//!
//! Covariate indices in file names are 0-based.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{check_truncation, GridSample, Projector};
use crate::error::{FussoError, Result};
use crate::solver::BlockMatrix;

/// Estimated projection coefficients: rows are instances, blocks are
/// covariates and block width is the truncation `M`. Block `j` is the
/// `N × M` matrix `Ã_j`.
pub type CoefficientTensor = BlockMatrix;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    n_instances: usize,
    p: usize,
    n: usize,
    /// Layout `[covariate][instance][grid point]`.
    samples: Vec<f64>,
    responses: Vec<f64>,
}

impl FunctionalDataset {
    /// `samples` is laid out covariate-major: the sample of instance `i`,
    /// covariate `j` occupies `samples[(j * N + i) * n..][..n]`.
    pub fn new(
        n_instances: usize,
        p: usize,
        n: usize,
        samples: Vec<f64>,
        responses: Vec<f64>,
    ) -> Result<Self> {
        if n_instances == 0 || p == 0 {
            return Err(FussoError::DimensionMismatch(
                "dataset needs N >= 1 and p >= 1".into(),
            ));
        }
        if n < 2 {
            return Err(FussoError::DimensionMismatch(format!(
                "grid size n = {n} (need n >= 2)"
            )));
        }
        if samples.len() != n_instances * p * n {
            return Err(FussoError::DimensionMismatch(format!(
                "expected {} grid values for N={n_instances}, p={p}, n={n}, got {}",
                n_instances * p * n,
                samples.len()
            )));
        }
        if responses.len() != n_instances {
            return Err(FussoError::DimensionMismatch(format!(
                "expected {n_instances} responses, got {}",
                responses.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            let cell = pos / n;
            return Err(FussoError::NonFiniteSample {
                instance: cell % n_instances,
                covariate: cell / n_instances,
                point: pos % n,
            });
        }
        if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
            return Err(FussoError::NonFinite(format!("response {i}")));
        }
        Ok(FunctionalDataset {
            n_instances,
            p,
            n,
            samples,
            responses,
        })
    }

    /// Builds from an `N × p` table of grid samples.
    pub fn from_samples(samples: Vec<Vec<GridSample>>, responses: Vec<f64>) -> Result<Self> {
        let n_instances = samples.len();
        let p = samples.first().map_or(0, Vec::len);
        let n = samples
            .first()
            .and_then(|row| row.first())
            .map_or(0, GridSample::n);
        let mut flat = vec![0.0; n_instances * p * n];
        for (i, row) in samples.iter().enumerate() {
            if row.len() != p {
                return Err(FussoError::DimensionMismatch(format!(
                    "instance {i} has {} covariates, expected {p}",
                    row.len()
                )));
            }
            for (j, s) in row.iter().enumerate() {
                if s.n() != n {
                    return Err(FussoError::DimensionMismatch(format!(
                        "instance {i}, covariate {j} has {} grid points, expected {n}",
                        s.n()
                    )));
                }
                flat[(j * n_instances + i) * n..][..n].copy_from_slice(s.values());
            }
        }
        FunctionalDataset::new(n_instances, p, n, flat, responses)
    }

    pub fn n_instances(&self) -> usize {
        self.n_instances
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn sample(&self, i: usize, j: usize) -> &[f64] {
        let start = (j * self.n_instances + i) * self.n;
        &self.samples[start..start + self.n]
    }

    /// All `N × n` values of covariate `j`, instance-major.
    pub fn covariate(&self, j: usize) -> &[f64] {
        let len = self.n_instances * self.n;
        &self.samples[j * len..(j + 1) * len]
    }

    /// Same covariates with a different response vector.
    pub fn with_responses(&self, responses: Vec<f64>) -> Result<Self> {
        FunctionalDataset::new(
            self.n_instances,
            self.p,
            self.n,
            self.samples.clone(),
            responses,
        )
    }

    pub fn select_instances(&self, rows: &[usize]) -> Result<Self> {
        let mut samples = Vec::with_capacity(rows.len() * self.p * self.n);
        for j in 0..self.p {
            for &i in rows {
                samples.extend_from_slice(self.sample(i, j));
            }
        }
        let responses = rows.iter().map(|&i| self.responses[i]).collect();
        FunctionalDataset::new(rows.len(), self.p, self.n, samples, responses)
    }
}

/// Projects every `(instance, covariate)` sample onto the first `M` basis
/// functions.
pub fn build_coefficients(ds: &FunctionalDataset, m: usize) -> Result<CoefficientTensor> {
    check_truncation(ds.n, m)?;
    let projector = Projector::new(ds.n, m)?;
    let rows = ds.n_instances;
    let mut out = CoefficientTensor::zeros(rows, ds.p, m);
    // Parallel over covariates; each block is written by one task.
    let blocks: Vec<Vec<f64>> = (0..ds.p)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |cell, j| {
                let mut block = vec![0.0; rows * m];
                for i in 0..rows {
                    projector
                        .project_into(ds.sample(i, j), cell)
                        .expect("sample length fixed by dataset");
                    for (k, v) in cell.iter().enumerate() {
                        block[k * rows + i] = *v;
                    }
                }
                block
            },
        )
        .collect();
    for (j, b) in blocks.into_iter().enumerate() {
        out.block_slice_mut(j).copy_from_slice(&b);
    }
    Ok(out)
}

/// Raw grid design for the baseline that skips projection: block `j` is the
/// `N × n` matrix of covariate `j`'s samples scaled by `1/n`.
pub fn raw_grid_design(ds: &FunctionalDataset) -> BlockMatrix {
    let inv_n = 1.0 / ds.n as f64;
    BlockMatrix::from_fn(ds.n_instances, ds.p, ds.n, |i, j, k| {
        ds.sample(i, j)[k] * inv_n
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Csv,
    F64le,
}

impl Encoding {
    fn extension(self) -> &'static str {
        match self {
            Encoding::Csv => "csv",
            Encoding::F64le => "f64le",
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = FussoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Encoding::Csv),
            "f64le" => Ok(Encoding::F64le),
            other => Err(FussoError::InvalidArgument(format!(
                "unknown encoding {other:?} (expected csv or f64le)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "N")]
    pub n_instances: usize,
    pub p: usize,
    pub n: usize,
    pub grid: String,
    pub responses: String,
    /// Relative path pattern; `{j}` is replaced by the covariate index.
    pub covariates: String,
    pub encoding: Encoding,
}

pub const GRID_K_OVER_N: &str = "k_over_n";

impl Manifest {
    fn covariate_path(&self, j: usize) -> String {
        self.covariates.replace("{j}", &j.to_string())
    }
}

/// Writes `ds` into `dir` (created if missing).
pub fn save_dataset(ds: &FunctionalDataset, dir: &Path, encoding: Encoding) -> Result<Manifest> {
    let ext = encoding.extension();
    let manifest = Manifest {
        n_instances: ds.n_instances,
        p: ds.p,
        n: ds.n,
        grid: GRID_K_OVER_N.into(),
        responses: format!("responses.{ext}"),
        covariates: format!("covariates/x_{{j}}.{ext}"),
        encoding,
    };
    fs::create_dir_all(dir.join("covariates")).map_err(|e| FussoError::io(dir, e))?;
    match encoding {
        Encoding::Csv => {
            write_csv(
                &dir.join(&manifest.responses),
                &["y".to_string()],
                ds.responses(),
                1,
            )?;
            let header: Vec<String> = (1..=ds.n).map(|k| format!("x_{k}")).collect();
            for j in 0..ds.p {
                write_csv(
                    &dir.join(manifest.covariate_path(j)),
                    &header,
                    ds.covariate(j),
                    ds.n,
                )?;
            }
        }
        Encoding::F64le => {
            write_f64le(
                &dir.join(&manifest.responses),
                ds.n_instances,
                1,
                ds.responses(),
            )?;
            for j in 0..ds.p {
                write_f64le(
                    &dir.join(manifest.covariate_path(j)),
                    ds.n_instances,
                    ds.n,
                    ds.covariate(j),
                )?;
            }
        }
    }
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text).map_err(|e| FussoError::io(&path, e))?;
    Ok(manifest)
}

/// Loads a dataset from a manifest file or a directory containing one.
pub fn load_dataset(path: &Path) -> Result<FunctionalDataset> {
    let manifest_path = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    let dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let text = fs::read_to_string(&manifest_path).map_err(|e| FussoError::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| FussoError::malformed(&manifest_path, e.to_string()))?;
    if manifest.grid != GRID_K_OVER_N {
        return Err(FussoError::malformed(
            &manifest_path,
            format!("unsupported grid {:?}", manifest.grid),
        ));
    }
    let (big_n, p, n) = (manifest.n_instances, manifest.p, manifest.n);

    let resp_path = dir.join(&manifest.responses);
    let (rows, cols, responses) = match manifest.encoding {
        Encoding::Csv => read_csv(&resp_path, Some(&["y".to_string()]))?,
        Encoding::F64le => read_f64le(&resp_path)?,
    };
    if rows != big_n || cols != 1 {
        return Err(FussoError::DimensionMismatch(format!(
            "{}: manifest says N = {big_n}, responses file has {rows} rows x {cols} columns",
            resp_path.display()
        )));
    }
    if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
        return Err(FussoError::NonFinite(format!("response {i}")));
    }

    let header: Vec<String> = (1..=n).map(|k| format!("x_{k}")).collect();
    let mut samples = Vec::with_capacity(big_n * p * n);
    for j in 0..p {
        let cov_path = dir.join(manifest.covariate_path(j));
        let (rows, cols, values) = match manifest.encoding {
            Encoding::Csv => read_csv(&cov_path, Some(&header))?,
            Encoding::F64le => read_f64le(&cov_path)?,
        };
        if rows != big_n || cols != n {
            return Err(FussoError::DimensionMismatch(format!(
                "{}: expected {big_n} x {n}, found {rows} x {cols}",
                cov_path.display()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(FussoError::NonFiniteSample {
                instance: pos / n,
                covariate: j,
                point: pos % n,
            });
        }
        samples.extend_from_slice(&values);
    }
    FunctionalDataset::new(big_n, p, n, samples, responses)
}

/// Writes a row-major matrix as CSV with the given header.
pub fn write_csv(path: &Path, header: &[String], values: &[f64], cols: usize) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| FussoError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let to_err = |e: csv::Error| FussoError::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(to_err)?;
    for row in values.chunks(cols.max(1)) {
        // `{:?}` prints the shortest representation that parses back exactly.
        w.write_record(row.iter().map(|v| format!("{v:?}")))
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| FussoError::io(path, e))?;
    Ok(())
}

/// Reads a numeric CSV matrix, checking the header when one is expected.
/// Returns `(rows, cols, row-major values)`.
pub fn read_csv(path: &Path, expect_header: Option<&[String]>) -> Result<(usize, usize, Vec<f64>)> {
    let file = fs::File::open(path).map_err(|e| FussoError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let header = r
        .headers()
        .map_err(|e| FussoError::malformed(path, e.to_string()))?
        .clone();
    if let Some(expected) = expect_header {
        if header.len() != expected.len() || header.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(FussoError::malformed(
                path,
                format!(
                    "header {:?} does not match expected {}",
                    header.iter().collect::<Vec<_>>().join(","),
                    expected.join(",")
                ),
            ));
        }
    }
    let cols = header.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| FussoError::malformed(path, e.to_string()))?;
        if rec.len() != cols {
            return Err(FussoError::DimensionMismatch(format!(
                "{}: row {line} has {} fields, header has {cols}",
                path.display(),
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                FussoError::malformed(path, format!("row {line}: not a number: {field:?}"))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Ok((rows, cols, values))
}

/// Writes a row-major matrix in the binary format: `u64 rows`, `u64 cols`,
/// then the values, all little-endian.
pub fn write_f64le(path: &Path, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    debug_assert_eq!(values.len(), rows * cols);
    let file = fs::File::create(path).map_err(|e| FussoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| FussoError::io(path, e));
    put(&(rows as u64).to_le_bytes())?;
    put(&(cols as u64).to_le_bytes())?;
    for v in values {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| FussoError::io(path, e))
}

pub fn read_f64le(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let file = fs::File::open(path).map_err(|e| FussoError::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| FussoError::io(path, e))?;
    if bytes.len() < 16 {
        return Err(FussoError::malformed(
            path,
            "shorter than the 16-byte header",
        ));
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if rows.checked_mul(cols).and_then(|c| c.checked_mul(8)) != Some(body.len()) {
        return Err(FussoError::malformed(
            path,
            format!(
                "header says {rows} x {cols} but body has {} bytes",
                body.len()
            ),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}
