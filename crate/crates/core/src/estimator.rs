//! The functional sparse regression pipeline: project every covariate onto
//! the first `M` basis functions, then fit a group lasso over the
//! per-covariate coefficient blocks.
//!
//! Also holds K-fold cross-validation over `(M, λ)`, prediction, the
//! two-stage (relaxed) refit on a selected support, reconstruction of the
//! fitted regression functions `g_j`, and the raw-grid group lasso baseline.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{reconstruct, CoefficientBlock, Projector};
use crate::dataset::{
    build_coefficients, raw_grid_design, read_f64le, write_f64le, FunctionalDataset,
};
use crate::error::{FussoError, Result};
use crate::solver::{
    self, fit_path_with, lambda_max, support_of, BlockMatrix, FitResult, GroupProblem, LambdaGrid,
    SolverOptions,
};

/// A hyperparameter that is either given or chosen by cross-validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tuning<T> {
    Fixed(T),
    Cv,
}

impl<T: FromStr> FromStr for Tuning<T> {
    type Err = FussoError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("cv") {
            return Ok(Tuning::Cv);
        }
        s.parse().map(Tuning::Fixed).map_err(|_| {
            FussoError::InvalidArgument(format!("expected a number or \"cv\", got {s:?}"))
        })
    }
}

impl<T: std::fmt::Display> std::fmt::Display for Tuning<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tuning::Fixed(v) => write!(f, "{v}"),
            Tuning::Cv => f.write_str("cv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FussoConfig {
    pub m: Tuning<usize>,
    pub lambda: Tuning<f64>,
    pub cv_folds: usize,
    /// Candidate truncations for CV; [`default_m_grid`] when `None`.
    pub m_grid: Option<Vec<usize>>,
    /// λ grid for CV. Geometric grids are anchored at each candidate `M`'s
    /// full-data `λ_max`.
    pub path: LambdaGrid,
    pub solver: SolverOptions,
    pub standardize: bool,
    pub intercept: bool,
    /// Seed of the fold shuffle.
    pub cv_seed: u64,
}

impl Default for FussoConfig {
    fn default() -> Self {
        FussoConfig {
            m: Tuning::Cv,
            lambda: Tuning::Cv,
            cv_folds: 5,
            m_grid: None,
            path: LambdaGrid::default(),
            solver: SolverOptions::default(),
            standardize: false,
            intercept: false,
            cv_seed: 0,
        }
    }
}

impl FussoConfig {
    pub fn fixed(m: usize, lambda: f64) -> Self {
        FussoConfig {
            m: Tuning::Fixed(m),
            lambda: Tuning::Fixed(lambda),
            ..Default::default()
        }
    }
}

/// Odd truncations `1, 3, 5, 7, 9` (a constant plus whole cosine/sine
/// pairs) that fit under `n − 1`, plus `n − 1` itself when it is below 9.
pub fn default_m_grid(n: usize) -> Vec<usize> {
    let cap = n.saturating_sub(1);
    let mut grid: Vec<usize> = [1, 3, 5, 7, 9].into_iter().filter(|&m| m <= cap).collect();
    if (1..9).contains(&cap) && grid.last() != Some(&cap) {
        grid.push(cap);
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
}

impl From<&FitResult> for FitDiagnostics {
    fn from(f: &FitResult) -> Self {
        FitDiagnostics {
            objective: f.objective,
            iterations: f.iterations,
            kkt_residual: f.kkt_residual,
            converged: f.converged,
        }
    }
}

/// Fitted model: coefficients of each `g_j` in the basis, on the original
/// (unstandardized) scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FussoModel {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub lambda_max: f64,
    pub intercept: f64,
    /// `p · M` coefficients, block-major.
    pub beta: Vec<f64>,
    pub support: Vec<usize>,
    pub diagnostics: FitDiagnostics,
}

impl FussoModel {
    pub fn block(&self, j: usize) -> &[f64] {
        &self.beta[j * self.m..(j + 1) * self.m]
    }
}

/// Maps solutions of a centred / rescaled problem back to the original
/// columns.
#[derive(Debug, Clone)]
struct Transform {
    means: Option<Vec<f64>>,
    scales: Option<Vec<f64>>,
    y_mean: f64,
}

impl Transform {
    fn identity() -> Self {
        Transform {
            means: None,
            scales: None,
            y_mean: 0.0,
        }
    }

    fn restore(&self, beta: &[f64]) -> (Vec<f64>, f64) {
        let beta: Vec<f64> = match &self.scales {
            Some(s) => beta.iter().zip(s).map(|(b, s)| b / s).collect(),
            None => beta.to_vec(),
        };
        let intercept = match &self.means {
            Some(mu) => self.y_mean - beta.iter().zip(mu).map(|(b, m)| b * m).sum::<f64>(),
            None => 0.0,
        };
        (beta, intercept)
    }
}

struct Prepared {
    prob: GroupProblem,
    transform: Transform,
}

fn prepare(
    design: &Arc<BlockMatrix>,
    width: usize,
    y: &[f64],
    intercept: bool,
    standardize: bool,
) -> Result<Prepared> {
    if !intercept && !standardize {
        return Ok(Prepared {
            prob: GroupProblem::with_width(design.clone(), width, y.to_vec())?,
            transform: Transform::identity(),
        });
    }
    let mut x = if width == design.width() {
        (**design).clone()
    } else {
        design.truncated(width)
    };
    let rows = x.rows() as f64;
    let cols = x.blocks() * width;
    let mut means = vec![0.0; cols];
    let mut scales = vec![1.0; cols];
    x.map_columns(|j, m, col| {
        let c = j * width + m;
        if intercept {
            let mu = col.iter().sum::<f64>() / rows;
            col.iter_mut().for_each(|v| *v -= mu);
            means[c] = mu;
        }
        if standardize {
            let rms = (col.iter().map(|v| v * v).sum::<f64>() / rows).sqrt();
            if rms > 0.0 {
                col.iter_mut().for_each(|v| *v /= rms);
                scales[c] = rms;
            }
        }
    });
    let (y_vec, y_mean) = if intercept {
        let mu = y.iter().sum::<f64>() / rows;
        (y.iter().map(|v| v - mu).collect(), mu)
    } else {
        (y.to_vec(), 0.0)
    };
    Ok(Prepared {
        prob: GroupProblem::new(x, y_vec)?,
        transform: Transform {
            means: intercept.then_some(means),
            scales: standardize.then_some(scales),
            y_mean,
        },
    })
}

/// `intercept + Σ_j Σ_{m<width} A(i, j, m) β_{jm}` for the given rows.
fn predict_rows(
    design: &BlockMatrix,
    width: usize,
    beta: &[f64],
    intercept: f64,
    rows: &[usize],
) -> Vec<f64> {
    let mut out = vec![intercept; rows.len()];
    for j in support_of(beta, width) {
        for m in 0..width {
            let b = beta[j * width + m];
            if b == 0.0 {
                continue;
            }
            let col = design.column(j, m);
            for (o, &i) in out.iter_mut().zip(rows) {
                *o += col[i] * b;
            }
        }
    }
    out
}

/// Splits `0..n` into `k` folds: contiguous blocks of a seeded shuffle,
/// each sorted ascending.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(FussoError::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if k > n {
        return Err(FussoError::InvalidArgument(format!(
            "{k} folds over {n} instances would leave a fold empty"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((0..k)
        .map(|f| {
            let mut fold = perm[f * n / k..(f + 1) * n / k].to_vec();
            fold.sort_unstable();
            fold
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub lambda: f64,
    pub mean_mse: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_m: usize,
    pub best_lambda: f64,
    pub table: Vec<CvRow>,
}

/// Cross-validates over every `(M, λ)` pair on the folds of `cfg`.
pub fn cross_validate(
    ds: &FunctionalDataset,
    cfg: &FussoConfig,
    m_grid: &[usize],
    lambda_grid: &LambdaGrid,
) -> Result<CvResult> {
    if ds.n_instances() < cfg.cv_folds {
        return Err(FussoError::InvalidArgument(format!(
            "cross-validation with {} folds needs N >= {}, got N = {}",
            cfg.cv_folds,
            cfg.cv_folds,
            ds.n_instances()
        )));
    }
    let folds = make_folds(ds.n_instances(), cfg.cv_folds, cfg.cv_seed)?;
    let m_max = m_grid
        .iter()
        .copied()
        .max()
        .ok_or_else(|| FussoError::InvalidArgument("empty truncation grid".into()))?;
    let design = Arc::new(build_coefficients(ds, m_max)?);
    cross_validate_design(&design, ds.responses(), cfg, m_grid, lambda_grid, &folds)
}

/// Cross-validation on a prebuilt design whose stored block width covers
/// every candidate `M` (truncation is a prefix of the stored columns).
pub fn cross_validate_design(
    design: &Arc<BlockMatrix>,
    y: &[f64],
    cfg: &FussoConfig,
    m_grid: &[usize],
    lambda_grid: &LambdaGrid,
    folds: &[Vec<usize>],
) -> Result<CvResult> {
    let mut ms = m_grid.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() {
        return Err(FussoError::InvalidArgument("empty truncation grid".into()));
    }
    if let Some(&m) = ms.iter().find(|&&m| m == 0 || m > design.width()) {
        return Err(FussoError::InvalidArgument(format!(
            "truncation {m} outside the stored design width {}",
            design.width()
        )));
    }
    if folds.iter().any(Vec::is_empty) {
        return Err(FussoError::InvalidArgument(
            "cross-validation fold with zero instances".into(),
        ));
    }
    let big_n = design.rows();

    let lambdas: Vec<Vec<f64>> = ms
        .iter()
        .map(|&m| {
            let full = prepare(design, m, y, cfg.intercept, cfg.standardize)?;
            lambda_grid.resolve(lambda_max(&full.prob))
        })
        .collect::<Result<_>>()?;

    // [fold][m index][λ index] held-out MSE
    let fold_mse: Vec<Vec<Vec<f64>>> = folds
        .par_iter()
        .map(|test| -> Result<Vec<Vec<f64>>> {
            let mut in_test = vec![false; big_n];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..big_n).filter(|&i| !in_test[i]).collect();
            if train.is_empty() {
                return Err(FussoError::InvalidArgument(
                    "cross-validation fold leaves no training instances".into(),
                ));
            }
            let train_design = Arc::new(design.select_rows(&train));
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            ms.iter()
                .zip(&lambdas)
                .map(|(&m, lams)| {
                    let prep = prepare(&train_design, m, &y_train, cfg.intercept, cfg.standardize)?;
                    let mut errs = Vec::with_capacity(lams.len());
                    fit_path_with(
                        &prep.prob,
                        &LambdaGrid::Explicit(lams.clone()),
                        &cfg.solver,
                        |_, fit| {
                            let (beta, b0) = prep.transform.restore(&fit.beta);
                            let pred = predict_rows(design, m, &beta, b0, test);
                            let mse = pred
                                .iter()
                                .zip(&y_test)
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum::<f64>()
                                / test.len() as f64;
                            errs.push(mse);
                        },
                    )?;
                    Ok(errs)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let k = folds.len() as f64;
    let mut table = Vec::new();
    for (mi, &m) in ms.iter().enumerate() {
        for (li, &lambda) in lambdas[mi].iter().enumerate() {
            let vals: Vec<f64> = fold_mse.iter().map(|f| f[mi][li]).collect();
            let mean = vals.iter().sum::<f64>() / k;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            table.push(CvRow {
                m,
                lambda,
                mean_mse: mean,
                se: (var / k).sqrt(),
            });
        }
    }
    // Rows are ordered by M ascending, then λ descending, so the first
    // minimum prefers the smaller M and then the larger λ.
    let best = table
        .iter()
        .fold(None::<&CvRow>, |acc, row| match acc {
            Some(b) if b.mean_mse <= row.mean_mse => Some(b),
            _ => Some(row),
        })
        .expect("nonempty table");
    Ok(CvResult {
        best_m: best.m,
        best_lambda: best.lambda,
        table,
    })
}

fn model_from_fit(
    fit: &FitResult,
    transform: &Transform,
    m: usize,
    n: usize,
    lambda_max: f64,
) -> FussoModel {
    let (beta, intercept) = transform.restore(&fit.beta);
    FussoModel {
        m,
        n,
        p: fit.n_blocks(),
        lambda: fit.lambda,
        lambda_max,
        intercept,
        support: support_of(&beta, m),
        beta,
        diagnostics: FitDiagnostics::from(fit),
    }
}

/// Fits the model on `ds`, cross-validating `M` and/or `λ` when requested.
pub fn fit_fusso(ds: &FunctionalDataset, cfg: &FussoConfig) -> Result<FussoModel> {
    let (m, lambda) = match (cfg.m, cfg.lambda) {
        (Tuning::Fixed(m), Tuning::Fixed(l)) => (m, l),
        (m_choice, l_choice) => {
            let m_grid = match m_choice {
                Tuning::Fixed(m) => vec![m],
                Tuning::Cv => cfg.m_grid.clone().unwrap_or_else(|| default_m_grid(ds.n())),
            };
            let lambda_grid = match l_choice {
                Tuning::Fixed(l) => LambdaGrid::Explicit(vec![l]),
                Tuning::Cv => cfg.path.clone(),
            };
            let cv = cross_validate(ds, cfg, &m_grid, &lambda_grid)?;
            (cv.best_m, cv.best_lambda)
        }
    };
    let design = Arc::new(build_coefficients(ds, m)?);
    let prep = prepare(&design, m, ds.responses(), cfg.intercept, cfg.standardize)?;
    let lmax = lambda_max(&prep.prob);
    let fit = solver::fit(&prep.prob, lambda, None, &cfg.solver)?;
    Ok(model_from_fit(&fit, &prep.transform, m, ds.n(), lmax))
}

/// Predicts one response from the `p` covariate samples of a new instance.
/// Covariates outside the support are length-checked but not projected.
pub fn predict(model: &FussoModel, functions: &[&[f64]]) -> Result<f64> {
    if functions.len() != model.p {
        return Err(FussoError::DimensionMismatch(format!(
            "model has p = {}, got {} functions",
            model.p,
            functions.len()
        )));
    }
    if let Some(j) = functions.iter().position(|f| f.len() != model.n) {
        return Err(FussoError::DimensionMismatch(format!(
            "function {j} has {} grid points, model was trained with n = {}",
            functions[j].len(),
            model.n
        )));
    }
    let projector = Projector::new(model.n, model.m)?;
    predict_with(model, &projector, |j| functions[j])
}

fn predict_with<'a>(
    model: &FussoModel,
    projector: &Projector,
    sample: impl Fn(usize) -> &'a [f64],
) -> Result<f64> {
    let mut coef = vec![0.0; model.m];
    let mut y = model.intercept;
    for &j in &model.support {
        projector.project_into(sample(j), &mut coef)?;
        y += CoefficientBlock(coef.clone()).dot(model.block(j));
    }
    Ok(y)
}

/// Predictions for every instance of `ds`.
pub fn predict_dataset(model: &FussoModel, ds: &FunctionalDataset) -> Result<Vec<f64>> {
    if ds.n() != model.n || ds.p() != model.p {
        return Err(FussoError::DimensionMismatch(format!(
            "model expects p = {}, n = {}; dataset has p = {}, n = {}",
            model.p,
            model.n,
            ds.p(),
            ds.n()
        )));
    }
    let projector = Projector::new(model.n, model.m)?;
    (0..ds.n_instances())
        .map(|i| predict_with(model, &projector, |j| ds.sample(i, j)))
        .collect()
}

/// Refits with penalty `lambda_small` using only the blocks in `support`;
/// every other block is exactly zero.
pub fn two_stage_refit(
    ds: &FunctionalDataset,
    m: usize,
    support: &[usize],
    lambda_small: f64,
    opts: &SolverOptions,
) -> Result<FussoModel> {
    if support.is_empty() {
        return Err(FussoError::InvalidArgument(
            "two-stage refit needs a nonempty support".into(),
        ));
    }
    if let Some(&j) = support.iter().find(|&&j| j >= ds.p()) {
        return Err(FussoError::InvalidArgument(format!(
            "support index {j} >= p = {}",
            ds.p()
        )));
    }
    let full = build_coefficients(ds, m)?;
    let restricted = GroupProblem::new(full.select_blocks(support), ds.responses().to_vec())?;
    let lmax = lambda_max(&restricted);
    let fit = solver::fit(&restricted, lambda_small, None, opts)?;
    let mut beta = vec![0.0; ds.p() * m];
    for (k, &j) in support.iter().enumerate() {
        beta[j * m..(j + 1) * m].copy_from_slice(fit.block(k));
    }
    Ok(FussoModel {
        m,
        n: ds.n(),
        p: ds.p(),
        lambda: lambda_small,
        lambda_max: lmax,
        intercept: 0.0,
        support: support_of(&beta, m),
        beta,
        diagnostics: FitDiagnostics::from(&fit),
    })
}

/// Evaluates the fitted regression function `g_j` on `grid`.
pub fn recover_g(model: &FussoModel, j: usize, grid: &[f64]) -> Result<Vec<f64>> {
    if j >= model.p {
        return Err(FussoError::InvalidArgument(format!(
            "block index {j} out of range (p = {})",
            model.p
        )));
    }
    reconstruct(&CoefficientBlock(model.block(j).to_vec()), grid)
}

/// Group lasso problem on the raw grid samples (each block is covariate
/// `j`'s `N × n` sample matrix scaled by `1/n`).
pub fn ygl_problem(ds: &FunctionalDataset) -> Result<GroupProblem> {
    GroupProblem::new(raw_grid_design(ds), ds.responses().to_vec())
}

/// Raw-grid baseline: the fitted block `j` approximates `g_j` on the grid.
pub fn fit_ygl(ds: &FunctionalDataset, lambda: f64, opts: &SolverOptions) -> Result<FitResult> {
    solver::fit(&ygl_problem(ds)?, lambda, None, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
pub enum StoredBeta {
    /// All `p` blocks.
    Dense { blocks: Vec<Vec<f64>> },
    /// One block per support index, in support order.
    SupportOnly { blocks: Vec<Vec<f64>> },
    /// Support blocks in a binary sidecar (`|support| × M`, f64le).
    F64le { file: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "M")]
    pub m: usize,
    pub lambda: f64,
    pub lambda_max: f64,
    pub intercept: f64,
    pub support: Vec<usize>,
    pub beta: StoredBeta,
    pub basis: String,
    pub n: usize,
    pub p: usize,
    pub diagnostics: FitDiagnostics,
}

const DENSE_LIMIT: usize = 10_000;
const INLINE_LIMIT: usize = 100_000;

/// Writes the model as JSON; large coefficient sets go to a
/// `<name>.beta.f64le` sidecar next to it.
pub fn save_model(model: &FussoModel, path: &Path) -> Result<()> {
    let beta = if model.p * model.m <= DENSE_LIMIT {
        StoredBeta::Dense {
            blocks: (0..model.p).map(|j| model.block(j).to_vec()).collect(),
        }
    } else if model.support.len() * model.m <= INLINE_LIMIT {
        StoredBeta::SupportOnly {
            blocks: model
                .support
                .iter()
                .map(|&j| model.block(j).to_vec())
                .collect(),
        }
    } else {
        let name = format!(
            "{}.beta.f64le",
            path.file_stem().and_then(|s| s.to_str()).unwrap_or("model")
        );
        let sidecar = path.with_file_name(&name);
        let values: Vec<f64> = model
            .support
            .iter()
            .flat_map(|&j| model.block(j).iter().copied())
            .collect();
        write_f64le(&sidecar, model.support.len(), model.m, &values)?;
        StoredBeta::F64le { file: name }
    };
    let file = ModelFile {
        m: model.m,
        lambda: model.lambda,
        lambda_max: model.lambda_max,
        intercept: model.intercept,
        support: model.support.clone(),
        beta,
        basis: "trigonometric".into(),
        n: model.n,
        p: model.p,
        diagnostics: model.diagnostics,
    };
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text).map_err(|e| FussoError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<FussoModel> {
    let text = std::fs::read_to_string(path).map_err(|e| FussoError::io(path, e))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| FussoError::malformed(path, e.to_string()))?;
    if file.basis != "trigonometric" {
        return Err(FussoError::malformed(
            path,
            format!("unsupported basis {:?}", file.basis),
        ));
    }
    let (m, p) = (file.m, file.p);
    let mut beta = vec![0.0; p * m];
    let bad_block = |len: usize| {
        FussoError::malformed(
            path,
            format!("coefficient block of length {len}, expected M = {m}"),
        )
    };
    let mut put_support = |blocks: &mut dyn Iterator<Item = &[f64]>| -> Result<()> {
        for (&j, b) in file.support.iter().zip(blocks) {
            if j >= p {
                return Err(FussoError::malformed(
                    path,
                    format!("support index {j} >= p"),
                ));
            }
            if b.len() != m {
                return Err(bad_block(b.len()));
            }
            beta[j * m..(j + 1) * m].copy_from_slice(b);
        }
        Ok(())
    };
    match &file.beta {
        StoredBeta::Dense { blocks } => {
            if blocks.len() != p {
                return Err(FussoError::malformed(path, "dense beta needs p blocks"));
            }
            for (j, b) in blocks.iter().enumerate() {
                if b.len() != m {
                    return Err(bad_block(b.len()));
                }
                beta[j * m..(j + 1) * m].copy_from_slice(b);
            }
        }
        StoredBeta::SupportOnly { blocks } => {
            if blocks.len() != file.support.len() {
                return Err(FussoError::malformed(
                    path,
                    "one block per support index expected",
                ));
            }
            put_support(&mut blocks.iter().map(Vec::as_slice))?;
        }
        StoredBeta::F64le { file: name } => {
            let (rows, cols, values) = read_f64le(&path.with_file_name(name))?;
            if rows != file.support.len() || cols != m {
                return Err(FussoError::malformed(
                    path,
                    "sidecar shape does not match support x M",
                ));
            }
            put_support(&mut values.chunks_exact(m))?;
        }
    }
    Ok(FussoModel {
        m,
        n: file.n,
        p,
        lambda: file.lambda,
        lambda_max: file.lambda_max,
        intercept: file.intercept,
        support: support_of(&beta, m),
        beta,
        diagnostics: file.diagnostics,
    })
}
