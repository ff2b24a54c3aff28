//! Browser bindings for the demo page in `www/`.
//!
//! Every exported function returns a JSON string; failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use fusso::basis::{eval_basis, grid_points, project, reconstruct, GridSample};
use fusso::dataset::build_coefficients;
use fusso::metrics::{delta_for_trial, support_recovery};
use fusso::solver::{fit_path, GroupProblem, LambdaGrid, SolverOptions};
use fusso::synth::{gen_instance, stream_rng, SynthSpec};
use fusso::{FussoError, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points used to draw smooth curves.
const FINE: usize = 200;

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// Test functions offered on the page.
pub fn test_function(name: &str) -> Result<fn(f64) -> f64> {
    Ok(match name {
        "parabola" => |x| 4.0 * x * (1.0 - x),
        "sine" => |x| (2.0 * std::f64::consts::PI * x).sin(),
        "step" => |x| if x < 0.5 { -1.0 } else { 1.0 },
        "bump" => |x| (-60.0 * (x - 0.3) * (x - 0.3)).exp(),
        other => {
            return Err(FussoError::InvalidArgument(format!(
                "unknown function {other:?}"
            )));
        }
    })
}

#[derive(Debug, Serialize)]
pub struct ProjectionDemo {
    pub x_fine: Vec<f64>,
    pub truth: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub samples: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub estimate: Vec<f64>,
    /// Mean squared error of the estimate against the truth on the fine grid.
    pub mse: f64,
}

/// Samples `name` on an `n`-point grid with Gaussian noise of std `noise`,
/// projects on the first `m` basis functions and reconstructs.
pub fn projection(name: &str, n: usize, m: usize, noise: f64, seed: u64) -> Result<ProjectionDemo> {
    let f = test_function(name)?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(FussoError::InvalidArgument(format!(
            "noise must be finite and >= 0, got {noise}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let x_grid = grid_points(n);
    let samples: Vec<f64> = x_grid
        .iter()
        .map(|&x| f(x) + noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let block = project(&GridSample::new(samples.clone())?, m)?;
    let x_fine: Vec<f64> = (0..=FINE).map(|k| k as f64 / FINE as f64).collect();
    let truth: Vec<f64> = x_fine.iter().map(|&x| f(x)).collect();
    let estimate = reconstruct(&block, &x_fine)?;
    let mse = truth
        .iter()
        .zip(&estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / x_fine.len() as f64;
    Ok(ProjectionDemo {
        x_fine,
        truth,
        x_grid,
        samples,
        coefficients: block.as_slice().to_vec(),
        estimate,
        mse,
    })
}

#[derive(Debug, Serialize)]
pub struct PathDemo {
    pub lambdas: Vec<f64>,
    /// `norms[k][j]`: norm of block `j` at `lambdas[k]`.
    pub norms: Vec<Vec<f64>>,
    pub true_support: Vec<usize>,
    pub lambda_max: f64,
    pub recovered: bool,
    pub lambda_f: Option<f64>,
    pub lambda_l: Option<f64>,
    pub delta: f64,
}

/// Generates a synthetic instance and traces the warm-started path at
/// truncation `m`.
#[allow(clippy::too_many_arguments)]
pub fn regularization_path(
    p: usize,
    big_n: usize,
    n: usize,
    s: usize,
    m: usize,
    sigma_xi: f64,
    seed: u64,
    lambda_count: usize,
) -> Result<PathDemo> {
    let spec = SynthSpec {
        sigma_xi,
        ..SynthSpec::new(big_n, n, p, s, seed)
    };
    let inst = gen_instance(&spec)?;
    let design = build_coefficients(&inst.dataset, m)?;
    let prob = GroupProblem::new(design, inst.dataset.responses().to_vec())?;
    let grid = LambdaGrid::Geometric {
        count: lambda_count,
        ratio: 1e-3,
    };
    let path = fit_path(&prob, &grid, &SolverOptions::default())?;
    let outcome = support_recovery(&path, &inst.true_support);
    Ok(PathDemo {
        norms: path.fits.iter().map(|f| f.block_norms()).collect(),
        lambdas: path.lambdas,
        true_support: inst.true_support,
        lambda_max: path.lambda_max,
        recovered: outcome.recovered,
        lambda_f: outcome.lambda_f,
        lambda_l: outcome.lambda_l,
        delta: delta_for_trial(&outcome)?,
    })
}

#[derive(Debug, Serialize)]
pub struct BasisCurves {
    pub x: Vec<f64>,
    /// `curves[i]` is `φ_{i+1}` on `x`.
    pub curves: Vec<Vec<f64>>,
}

/// The first `m` basis functions on a fine grid.
pub fn basis_curves(m: usize) -> Result<BasisCurves> {
    if m == 0 {
        return Err(FussoError::InvalidArgument(
            "need at least one basis function".into(),
        ));
    }
    let x: Vec<f64> = (0..=FINE).map(|k| k as f64 / FINE as f64).collect();
    let curves = (1..=m)
        .map(|i| {
            x.iter()
                .map(|&t| eval_basis(i, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(BasisCurves { x, curves })
}

#[wasm_bindgen(js_name = projectionDemo)]
pub fn projection_demo(name: &str, n: usize, m: usize, noise: f64, seed: u32) -> String {
    to_json(projection(name, n, m, noise, seed.into()))
}

#[wasm_bindgen(js_name = pathDemo)]
#[allow(clippy::too_many_arguments)]
pub fn path_demo(
    p: usize,
    big_n: usize,
    n: usize,
    s: usize,
    m: usize,
    sigma_xi: f64,
    seed: u32,
    lambda_count: usize,
) -> String {
    to_json(regularization_path(
        p,
        big_n,
        n,
        s,
        m,
        sigma_xi,
        seed.into(),
        lambda_count,
    ))
}

#[wasm_bindgen(js_name = basisDemo)]
pub fn basis_demo(m: usize) -> String {
    to_json(basis_curves(m))
}
