//! Synthetic functional regression problems with a planted sparse support.
//!
//! Every random function is a unit-norm coefficient vector over the first
//! `M_gen` trigonometric basis functions, drawn as
//!
//! 1. `a_m ~ Unif[-1, 1]`,
//! 2. `a_m ← a_m / c_m^w` with `c_m` the Sobolev weight base (`m` for `m = 1`
//!    or even `m`, `m − 1` otherwise) and `w = gamma_weight` (2 by default),
//! 3. `a ← a / ‖a‖`.
//!
//! Covariate blocks `α^(i)_j` and the true regression blocks `β*_j` (only
//! `j < s` nonzero) use this recipe. Grid observations are the functions at
//! `k/n` plus `N(0, σ_ξ²)` noise, and `Y_i = Σ_{j<s} ⟨β*_j, α^(i)_j⟩ + ε_i`
//! with `ε_i ~ N(0, sigma_eps_sq)` (a variance).
//!
//! # Random streams
//!
//! All draws come from ChaCha8 keyed by `ChaCha8Rng::seed_from_u64(seed)`
//! with a per-purpose stream id:
//!
//! * stream `0`: the `s` true blocks `β*_0 .. β*_{s-1}`, in order;
//! * stream `1`: the `N` response noise draws, in order;
//! * stream `(j + 1) << 32 | i`: cell `(instance i, covariate j)`, first the
//!   `M_gen` uniform draws of its coefficients, then its `n` grid-noise
//!   draws.
//!
//! Benchmark trial `t` under base seed `S` uses the first output of
//! `ChaCha8Rng::seed_from_u64(S)` on stream `t` as its instance seed (see
//! [`trial_seed`]). Each cell is therefore reproducible on its own,
//! independent of generation order or thread count.

use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{sobolev_weight, BasisIndex, CoefficientBlock, Projector};
use crate::dataset::FunctionalDataset;
use crate::error::{FussoError, Result};
use crate::solver::BlockMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(rename = "N")]
    pub n_instances: usize,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    #[serde(rename = "M_gen")]
    pub m_gen: usize,
    pub sigma_xi: f64,
    pub sigma_eps_sq: f64,
    pub gamma_weight: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Defaults: `M_gen = 20`, `σ_ξ = 0.1`, response-noise variance `0.1`,
    /// damping exponent 2.
    pub fn new(n_instances: usize, n: usize, p: usize, s: usize, seed: u64) -> Self {
        SynthSpec {
            n_instances,
            n,
            p,
            s,
            m_gen: 20,
            sigma_xi: 0.1,
            sigma_eps_sq: 0.1,
            gamma_weight: 2.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FussoError::InvalidArgument(msg));
        if self.n_instances == 0 || self.p == 0 {
            return bad("N and p must be >= 1".into());
        }
        if self.n < 2 {
            return bad(format!("grid size n = {} (need n >= 2)", self.n));
        }
        if self.s > self.p {
            return bad(format!("s = {} exceeds p = {}", self.s, self.p));
        }
        if self.m_gen == 0 {
            return bad("M_gen must be >= 1".into());
        }
        for (name, v) in [
            ("sigma_xi", self.sigma_xi),
            ("sigma_eps_sq", self.sigma_eps_sq),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.gamma_weight.is_finite() {
            return bad("gamma_weight must be finite".into());
        }
        Ok(())
    }

    pub fn true_support(&self) -> Vec<usize> {
        (0..self.s).collect()
    }
}

pub const STREAM_BETA: u64 = 0;
pub const STREAM_RESPONSE: u64 = 1;

pub fn cell_stream(i: usize, j: usize) -> u64 {
    ((j as u64 + 1) << 32) | i as u64
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Instance seed for benchmark trial `t`.
pub fn trial_seed(base: u64, t: usize) -> u64 {
    stream_rng(base, t as u64).next_u64()
}

/// Damped, normalized coefficient block built from `m_gen` uniform draws
/// supplied by `draw`.
pub fn gen_coeff_block_from(
    mut draw: impl FnMut() -> f64,
    m_gen: usize,
    gamma_weight: f64,
) -> CoefficientBlock {
    let mut a: Vec<f64> = (1..=m_gen)
        .map(|m| draw() / sobolev_weight(m, 1.0).powf(gamma_weight))
        .collect();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        a.iter_mut().for_each(|v| *v /= norm);
    } else {
        a[0] = 1.0;
    }
    CoefficientBlock(a)
}

pub fn gen_coeff_block<R: Rng + ?Sized>(
    rng: &mut R,
    m_gen: usize,
    gamma_weight: f64,
) -> CoefficientBlock {
    gen_coeff_block_from(|| rng.random_range(-1.0..=1.0), m_gen, gamma_weight)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthInstance {
    pub spec: SynthSpec,
    pub dataset: FunctionalDataset,
    /// `N × p × M_gen` true coefficients.
    pub true_alpha: BlockMatrix,
    pub beta_star: Vec<CoefficientBlock>,
    pub true_support: Vec<usize>,
}

/// `φ_m(k/n)` for `m = 1..M_gen`, `k = 1..n`, laid out `[m][k]`. Unlike
/// [`Projector`] this allows `M_gen >= n` (aliased high frequencies).
fn basis_table(n: usize, m_gen: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n * m_gen);
    for m in 1..=m_gen {
        let idx = BasisIndex::new(m).expect("m >= 1");
        t.extend((1..=n).map(|k| idx.value(k as f64 / n as f64)));
    }
    t
}

fn gen_beta_star(spec: &SynthSpec) -> Vec<CoefficientBlock> {
    let mut rng = stream_rng(spec.seed, STREAM_BETA);
    let mut out: Vec<CoefficientBlock> = (0..spec.s)
        .map(|_| gen_coeff_block(&mut rng, spec.m_gen, spec.gamma_weight))
        .collect();
    out.extend((spec.s..spec.p).map(|_| CoefficientBlock::zeros(spec.m_gen)));
    out
}

/// Draws cell `(i, j)`: writes its true coefficients into `alpha` and its
/// noisy grid sample into `grid`.
fn gen_cell(
    spec: &SynthSpec,
    table: &[f64],
    i: usize,
    j: usize,
    alpha: &mut [f64],
    grid: &mut [f64],
) {
    let mut rng = stream_rng(spec.seed, cell_stream(i, j));
    let block = gen_coeff_block(&mut rng, spec.m_gen, spec.gamma_weight);
    alpha.copy_from_slice(&block.0);
    let n = spec.n;
    grid.iter_mut().for_each(|v| *v = 0.0);
    for (a, col) in alpha.iter().zip(table.chunks_exact(n)) {
        for (g, phi) in grid.iter_mut().zip(col) {
            *g += a * phi;
        }
    }
    for g in grid.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *g += spec.sigma_xi * z;
    }
}

fn add_response_noise(spec: &SynthSpec, signal: &mut [f64]) {
    let mut rng = stream_rng(spec.seed, STREAM_RESPONSE);
    let sd = spec.sigma_eps_sq.sqrt();
    for y in signal.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *y += sd * z;
    }
}

/// Per-covariate generation shared by [`gen_instance`] and [`gen_design`]:
/// returns the covariate's `N × M_gen` true coefficients (`[i][m]`), its
/// `N × n` noisy samples (`[i][k]`) and, for `j < s`, the signal
/// contributions `⟨β*_j, α^(i)_j⟩`.
fn gen_covariate(
    spec: &SynthSpec,
    table: &[f64],
    beta_star: &[CoefficientBlock],
    j: usize,
) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let (big_n, n, mg) = (spec.n_instances, spec.n, spec.m_gen);
    let mut alpha = vec![0.0; big_n * mg];
    let mut grid = vec![0.0; big_n * n];
    for i in 0..big_n {
        gen_cell(
            spec,
            table,
            i,
            j,
            &mut alpha[i * mg..(i + 1) * mg],
            &mut grid[i * n..(i + 1) * n],
        );
    }
    let signal = (j < spec.s).then(|| {
        alpha
            .chunks_exact(mg)
            .map(|a| beta_star[j].dot(a))
            .collect()
    });
    (alpha, grid, signal)
}

fn responses_from_signal(spec: &SynthSpec, signals: impl Iterator<Item = Vec<f64>>) -> Vec<f64> {
    let mut y = vec![0.0; spec.n_instances];
    for contrib in signals {
        for (yi, c) in y.iter_mut().zip(&contrib) {
            *yi += c;
        }
    }
    add_response_noise(spec, &mut y);
    y
}

/// Generates a full instance: dataset, true coefficients and planted truth.
pub fn gen_instance(spec: &SynthSpec) -> Result<SynthInstance> {
    spec.validate()?;
    let table = basis_table(spec.n, spec.m_gen);
    let beta_star = gen_beta_star(spec);
    let per_cov: Vec<_> = (0..spec.p)
        .into_par_iter()
        .map(|j| gen_covariate(spec, &table, &beta_star, j))
        .collect();

    let (big_n, mg) = (spec.n_instances, spec.m_gen);
    let mut true_alpha = BlockMatrix::zeros(big_n, spec.p, mg);
    let mut samples = Vec::with_capacity(big_n * spec.p * spec.n);
    let mut signals = Vec::with_capacity(spec.s);
    for (j, (alpha, grid, signal)) in per_cov.into_iter().enumerate() {
        for i in 0..big_n {
            for m in 0..mg {
                true_alpha.set(i, j, m, alpha[i * mg + m]);
            }
        }
        samples.extend_from_slice(&grid);
        signals.extend(signal);
    }
    let responses = responses_from_signal(spec, signals.into_iter());
    let dataset = FunctionalDataset::new(big_n, spec.p, spec.n, samples, responses)?;
    Ok(SynthInstance {
        spec: spec.clone(),
        dataset,
        true_alpha,
        beta_star,
        true_support: spec.true_support(),
    })
}

/// Which design to emit from [`gen_design`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Projection coefficients on the first `m` basis functions.
    Projected { m: usize },
    /// Raw grid samples scaled by `1/n`.
    RawGrid,
}

/// Generates the same instance as [`gen_instance`] but keeps only the
/// regression design, covariate by covariate, so the raw samples and true
/// coefficients of all `N · p` cells never coexist in memory.
///
/// The result is bit-identical to building the design from
/// `gen_instance(spec).dataset` with `build_coefficients` or
/// `raw_grid_design`.
pub fn gen_design(spec: &SynthSpec, repr: Representation) -> Result<(BlockMatrix, Vec<f64>)> {
    spec.validate()?;
    let table = basis_table(spec.n, spec.m_gen);
    let beta_star = gen_beta_star(spec);
    let (big_n, n) = (spec.n_instances, spec.n);
    let projector = match repr {
        Representation::Projected { m } => Some(Projector::new(n, m)?),
        Representation::RawGrid => None,
    };
    let width = projector.as_ref().map_or(n, Projector::m);

    let mut design = BlockMatrix::zeros(big_n, spec.p, width);
    let signals: Vec<Option<Vec<f64>>> = design
        .as_mut_slice()
        .par_chunks_mut(big_n * width)
        .enumerate()
        .map(|(j, block)| {
            let (_, grid, signal) = gen_covariate(spec, &table, &beta_star, j);
            match &projector {
                Some(proj) => {
                    let mut cell = vec![0.0; width];
                    for i in 0..big_n {
                        proj.project_into(&grid[i * n..(i + 1) * n], &mut cell)
                            .expect("grid length is n");
                        for (m, v) in cell.iter().enumerate() {
                            block[m * big_n + i] = *v;
                        }
                    }
                }
                None => {
                    let inv_n = 1.0 / n as f64;
                    for i in 0..big_n {
                        for k in 0..n {
                            block[k * big_n + i] = grid[i * n + k] * inv_n;
                        }
                    }
                }
            }
            signal
        })
        .collect();
    let responses = responses_from_signal(spec, signals.into_iter().flatten());
    Ok((design, responses))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub beta_star: Vec<Vec<f64>>,
    pub true_support: Vec<usize>,
    pub spec: SynthSpec,
}

impl SynthInstance {
    pub fn truth(&self) -> Truth {
        Truth {
            beta_star: self.beta_star.iter().map(|b| b.0.clone()).collect(),
            true_support: self.true_support.clone(),
            spec: self.spec.clone(),
        }
    }
}

pub fn save_truth(truth: &Truth, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(truth)?;
    std::fs::write(path, text).map_err(|e| FussoError::io(path, e))
}

pub fn load_truth(path: &Path) -> Result<Truth> {
    let text = std::fs::read_to_string(path).map_err(|e| FussoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| FussoError::malformed(path, e.to_string()))
}
