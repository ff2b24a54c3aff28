//! Support-recovery metrics over regularization paths, and the Monte-Carlo
//! harness that aggregates them over seeded synthetic trials.
//!
//! A trial *recovers* the support when some λ on its grid yields a fit
//! whose support is exactly the planted one. `λ_f` and `λ_l` are the
//! largest and smallest such grid values, and the trial's interval width is
//! `(λ_f − λ_l) / λ_max` (0 when nothing recovers). A benchmark row reports
//! the recovery fraction `r` and the mean width `Δ_λ`.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FussoError, Result};
use crate::estimator::{cross_validate_design, default_m_grid, make_folds, FussoConfig};
use crate::solver::{
    fit_path_with, FitResult, GroupProblem, LambdaGrid, PathResult, SolverOptions,
};
use crate::synth::{gen_design, trial_seed, Representation, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub recovered: bool,
    pub lambda_f: Option<f64>,
    pub lambda_l: Option<f64>,
    pub lambda_max: f64,
}

/// Streaming form of [`support_recovery`], fed one path point at a time.
#[derive(Debug, Clone)]
pub struct RecoveryTracker {
    truth: Vec<usize>,
    lambda_f: Option<f64>,
    lambda_l: Option<f64>,
}

impl RecoveryTracker {
    pub fn new(truth: &[usize]) -> Self {
        let mut truth = truth.to_vec();
        truth.sort_unstable();
        truth.dedup();
        RecoveryTracker {
            truth,
            lambda_f: None,
            lambda_l: None,
        }
    }

    /// `support` must be sorted ascending (as `FitResult::support` is).
    pub fn observe(&mut self, lambda: f64, support: &[usize]) {
        if support == self.truth.as_slice() {
            self.lambda_f = Some(self.lambda_f.map_or(lambda, |f| f.max(lambda)));
            self.lambda_l = Some(self.lambda_l.map_or(lambda, |l| l.min(lambda)));
        }
    }

    pub fn finish(self, lambda_max: f64) -> TrialOutcome {
        TrialOutcome {
            recovered: self.lambda_f.is_some(),
            lambda_f: self.lambda_f,
            lambda_l: self.lambda_l,
            lambda_max,
        }
    }
}

pub fn support_recovery(path: &PathResult, truth: &[usize]) -> TrialOutcome {
    let mut tracker = RecoveryTracker::new(truth);
    for (lambda, fit) in path.lambdas.iter().zip(&path.fits) {
        tracker.observe(*lambda, &fit.support);
    }
    tracker.finish(path.lambda_max)
}

pub fn delta_for_trial(outcome: &TrialOutcome) -> Result<f64> {
    match (outcome.recovered, outcome.lambda_f, outcome.lambda_l) {
        (true, Some(f), Some(l)) => {
            if outcome.lambda_max == 0.0 {
                return Err(FussoError::DegenerateLambdaMax);
            }
            Ok((f - l) / outcome.lambda_max)
        }
        _ => Ok(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Fusso,
    Ygl,
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimatorKind::Fusso => "fusso",
            EstimatorKind::Ygl => "ygl",
        })
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = FussoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fusso" => Ok(EstimatorKind::Fusso),
            "ygl" => Ok(EstimatorKind::Ygl),
            other => Err(FussoError::InvalidArgument(format!(
                "unknown estimator {other:?} (expected fusso or ygl)"
            ))),
        }
    }
}

/// How each trial picks the truncation `M` for the projected estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MSelection {
    /// K-fold CV over `grid` (default grid when `None`), minimizing held-out
    /// MSE over `(M, λ)` on a `lambda_count`-point geometric grid reaching
    /// down to `lambda_ratio · λ_max`.
    Cv {
        grid: Option<Vec<usize>>,
        folds: usize,
        lambda_count: usize,
        lambda_ratio: f64,
    },
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub trials: usize,
    pub estimator: EstimatorKind,
    pub m_selection: MSelection,
    /// Grid of the recovery path (anchored at each trial's `λ_max`).
    pub lambda_count: usize,
    pub lambda_ratio: f64,
    pub solver: SolverOptions,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            trials: 100,
            estimator: EstimatorKind::Fusso,
            m_selection: MSelection::Cv {
                grid: None,
                folds: 5,
                lambda_count: 30,
                lambda_ratio: 1e-2,
            },
            lambda_count: 100,
            lambda_ratio: 1e-3,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Truncation used on the recovery path (`n` for the raw-grid baseline).
    #[serde(rename = "M")]
    pub m: usize,
    pub outcome: TrialOutcome,
    pub delta: f64,
    /// Path fits that hit `max_iter`.
    pub unconverged_fits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub p: usize,
    #[serde(rename = "N")]
    pub n_instances: usize,
    pub n: usize,
    pub s: usize,
    pub trials: usize,
    pub estimator: EstimatorKind,
    pub r: f64,
    pub delta_lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub row: BenchmarkRow,
    pub records: Vec<TrialRecord>,
}

/// Aggregates trial records in the given order.
pub fn aggregate(
    spec: &SynthSpec,
    estimator: EstimatorKind,
    records: &[TrialRecord],
) -> BenchmarkRow {
    let t = records.len() as f64;
    let hits = records.iter().filter(|r| r.outcome.recovered).count() as f64;
    let delta_sum: f64 = records.iter().map(|r| r.delta).sum();
    BenchmarkRow {
        p: spec.p,
        n_instances: spec.n_instances,
        n: spec.n,
        s: spec.s,
        trials: records.len(),
        estimator,
        r: if t > 0.0 { hits / t } else { 0.0 },
        delta_lambda: if t > 0.0 { delta_sum / t } else { 0.0 },
        seed: spec.seed,
    }
}

fn recovery_on_path(
    prob: &GroupProblem,
    grid: &LambdaGrid,
    opts: &SolverOptions,
    truth: &[usize],
) -> Result<(TrialOutcome, usize)> {
    let mut tracker = RecoveryTracker::new(truth);
    let mut unconverged = 0;
    let (lmax, _) = fit_path_with(prob, grid, opts, |_, fit: &FitResult| {
        tracker.observe(fit.lambda, &fit.support);
        unconverged += usize::from(!fit.converged);
    })?;
    Ok((tracker.finish(lmax), unconverged))
}

/// Runs one seeded trial: generate, pick `M` if needed, trace the path and
/// score support recovery.
pub fn run_trial(spec: &SynthSpec, opts: &BenchmarkOptions, trial: usize) -> Result<TrialRecord> {
    let seed = trial_seed(spec.seed, trial);
    let tspec = SynthSpec {
        seed,
        ..spec.clone()
    };
    let truth = tspec.true_support();
    let grid = LambdaGrid::Geometric {
        count: opts.lambda_count,
        ratio: opts.lambda_ratio,
    };

    let (m, prob) = match opts.estimator {
        EstimatorKind::Ygl => {
            let (design, y) = gen_design(&tspec, Representation::RawGrid)?;
            (tspec.n, GroupProblem::new(design, y)?)
        }
        EstimatorKind::Fusso => {
            let (m_grid, cv) = match &opts.m_selection {
                MSelection::Fixed(m) => (vec![*m], None),
                MSelection::Cv {
                    grid,
                    folds,
                    lambda_count,
                    lambda_ratio,
                } => (
                    grid.clone().unwrap_or_else(|| default_m_grid(tspec.n)),
                    Some((*folds, *lambda_count, *lambda_ratio)),
                ),
            };
            let m_max = *m_grid
                .iter()
                .max()
                .ok_or_else(|| FussoError::InvalidArgument("empty truncation grid".into()))?;
            let (design, y) = gen_design(&tspec, Representation::Projected { m: m_max })?;
            let design = Arc::new(design);
            let m = match cv {
                Some((folds, lambda_count, lambda_ratio)) if m_grid.len() > 1 => {
                    let cfg = FussoConfig {
                        cv_folds: folds,
                        cv_seed: seed,
                        solver: opts.solver,
                        ..Default::default()
                    };
                    let fold_sets = make_folds(tspec.n_instances, folds, seed)?;
                    let cv_grid = LambdaGrid::Geometric {
                        count: lambda_count,
                        ratio: lambda_ratio,
                    };
                    cross_validate_design(&design, &y, &cfg, &m_grid, &cv_grid, &fold_sets)?.best_m
                }
                _ => m_max,
            };
            (m, GroupProblem::with_width(design, m, y)?)
        }
    };

    let (outcome, unconverged_fits) = recovery_on_path(&prob, &grid, &opts.solver, &truth)?;
    Ok(TrialRecord {
        trial,
        seed,
        m,
        delta: delta_for_trial(&outcome)?,
        outcome,
        unconverged_fits,
    })
}

/// Runs `opts.trials` independent trials (in parallel on the current rayon
/// pool) and aggregates them in trial order.
pub fn run_benchmark(spec: &SynthSpec, opts: &BenchmarkOptions) -> Result<BenchmarkReport> {
    if opts.trials == 0 {
        return Err(FussoError::InvalidArgument("trials must be >= 1".into()));
    }
    spec.validate()?;
    let records: Vec<TrialRecord> = (0..opts.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, opts, t))
        .collect::<Result<_>>()?;
    Ok(BenchmarkReport {
        row: aggregate(spec, opts.estimator, &records),
        records,
    })
}

pub const BENCHMARK_HEADER: [&str; 9] = [
    "p",
    "N",
    "n",
    "s",
    "trials",
    "estimator",
    "r",
    "delta_lambda",
    "seed",
];

pub fn write_benchmark_csv(rows: &[BenchmarkRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FussoError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| FussoError::io(path, std::io::Error::other(e));
    w.write_record(BENCHMARK_HEADER).map_err(to_err)?;
    for row in rows {
        w.write_record([
            row.p.to_string(),
            row.n_instances.to_string(),
            row.n.to_string(),
            row.s.to_string(),
            row.trials.to_string(),
            row.estimator.to_string(),
            format!("{:?}", row.r),
            format!("{:?}", row.delta_lambda),
            row.seed.to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| FussoError::io(path, e))
}

/// Per-trial detail table: `trial,seed,M,recovered,lambda_f,lambda_l,lambda_max,delta`.
/// Missing λ values are written as `NaN`.
pub fn write_trials_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FussoError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| FussoError::io(path, std::io::Error::other(e));
    w.write_record([
        "trial",
        "seed",
        "M",
        "recovered",
        "lambda_f",
        "lambda_l",
        "lambda_max",
        "delta",
    ])
    .map_err(to_err)?;
    let opt = |v: Option<f64>| format!("{:?}", v.unwrap_or(f64::NAN));
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.m.to_string(),
            u8::from(r.outcome.recovered).to_string(),
            opt(r.outcome.lambda_f),
            opt(r.outcome.lambda_l),
            format!("{:?}", r.outcome.lambda_max),
            format!("{:?}", r.delta),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| FussoError::io(path, e))
}
