use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use fusso::dataset::{
    build_coefficients, load_dataset, save_dataset, write_f64le, Encoding, FunctionalDataset,
};
use fusso::estimator::{
    cross_validate, default_m_grid, fit_fusso, load_model, predict_dataset, save_model,
    ygl_problem, FussoConfig, Tuning,
};
use fusso::metrics::{
    run_benchmark, write_benchmark_csv, write_trials_csv, BenchmarkOptions, EstimatorKind,
    MSelection,
};
use fusso::solver::{fit_path_with, GroupProblem, LambdaGrid, SolverOptions};
use fusso::synth::{gen_instance, save_truth, SynthSpec};
use serde::Serialize;
use serde_json::json;

use crate::config::{manifest_path, sibling, Config, RunManifest};
use crate::{
    BenchArgs, CliError, Common, CvArgs, FitArgs, PathArgs, PredictArgs, SolverFlags, SpecFlags,
    SynthArgs,
};

type Res<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathLayout {
    Dense,
    Sparse,
    Auto,
}

impl FromStr for PathLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dense" => Ok(PathLayout::Dense),
            "sparse" => Ok(PathLayout::Sparse),
            "auto" => Ok(PathLayout::Auto),
            other => Err(format!("unknown layout {other:?} (dense, sparse or auto)")),
        }
    }
}

/// Above this many covariates `auto` writes the sparse path layout.
const DENSE_PATH_MAX_P: usize = 1000;

fn setup(common: &Common) -> Res<Config> {
    let cfg = Config::load(common.config.as_deref())?;
    if let Some(t) = cfg.opt(common.threads, "threads")? {
        if t == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(cfg)
}

fn format_of(cfg: &Config, common: &Common) -> Res<Encoding> {
    Ok(cfg.parsed(common.format, "format")?.unwrap_or_default())
}

/// Writes a numeric table. Columns listed in `int_cols` hold integers
/// (indices, truncations) and are printed without a fractional part in CSV.
fn write_table(
    path: &Path,
    header: &[&str],
    int_cols: &[usize],
    values: &[f64],
    format: Encoding,
) -> Res<()> {
    let cols = header.len();
    match format {
        Encoding::Csv => {
            let io_err = |e: csv::Error| {
                CliError::Fusso(fusso::FussoError::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::other(e),
                })
            };
            let mut w = csv::Writer::from_path(path).map_err(io_err)?;
            w.write_record(header).map_err(io_err)?;
            for row in values.chunks_exact(cols) {
                w.write_record(row.iter().enumerate().map(|(c, v)| {
                    if int_cols.contains(&c) {
                        format!("{}", *v as i64)
                    } else {
                        format!("{v:?}")
                    }
                }))
                .map_err(io_err)?;
            }
            w.flush().map_err(|e| io_err(e.into()))?;
        }
        Encoding::F64le => write_f64le(path, values.len() / cols, cols, values)?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SolverSettings {
    tol: f64,
    max_iter: usize,
    lambda_count: usize,
    lambda_ratio: f64,
    folds: usize,
}

impl SolverSettings {
    fn resolve(cfg: &Config, f: &SolverFlags) -> Res<Self> {
        let d = SolverOptions::default();
        let s = SolverSettings {
            tol: cfg.or(f.tol, "tol", d.tol)?,
            max_iter: cfg.or(f.max_iter, "max_iter", d.max_iter)?,
            lambda_count: cfg.or(f.lambda_count, "lambda_count", 100)?,
            lambda_ratio: cfg.or(f.lambda_ratio, "lambda_ratio", 1e-3)?,
            folds: cfg.or(f.folds, "folds", 5)?,
        };
        if s.tol.is_nan() || s.tol <= 0.0 || s.max_iter == 0 {
            return Err(CliError::Usage(
                "--tol must be > 0 and --max-iter >= 1".into(),
            ));
        }
        Ok(s)
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        }
    }

    fn grid(&self) -> LambdaGrid {
        LambdaGrid::Geometric {
            count: self.lambda_count,
            ratio: self.lambda_ratio,
        }
    }
}

fn resolve_spec(cfg: &Config, f: &SpecFlags, seed: Option<u64>) -> Res<SynthSpec> {
    let mut spec = SynthSpec::new(
        cfg.required(f.big_n, "N")?,
        cfg.required(f.n, "n")?,
        cfg.required(f.p, "p")?,
        cfg.required(f.s, "s")?,
        cfg.or(seed, "seed", 0)?,
    );
    spec.m_gen = cfg.or(f.m_gen, "M_gen", spec.m_gen)?;
    spec.sigma_xi = cfg.or(f.sigma_xi, "sigma_xi", spec.sigma_xi)?;
    spec.sigma_eps_sq = cfg.or(f.sigma_eps_sq, "sigma_eps_sq", spec.sigma_eps_sq)?;
    spec.gamma_weight = cfg.or(f.gamma_weight, "gamma_weight", spec.gamma_weight)?;
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if spec.m_gen > spec.n - 1 {
        eprintln!(
            "warning: M_gen = {} exceeds n - 1 = {}; generated functions alias on the grid",
            spec.m_gen,
            spec.n - 1
        );
    }
    Ok(spec)
}

fn load_data(cfg: &Config, flag: &Option<PathBuf>) -> Res<(PathBuf, FunctionalDataset)> {
    let path: PathBuf = cfg.required(flag.clone(), "data")?;
    let ds = load_dataset(&path)?;
    Ok((path, ds))
}

fn flag_bool(cfg: &Config, flag: bool, key: &str) -> Res<bool> {
    cfg.or(flag.then_some(true), key, false)
}

pub fn synth(a: SynthArgs) -> Res<()> {
    let started = Instant::now();
    let cfg = setup(&a.common)?;
    let spec = resolve_spec(&cfg, &a.spec, a.common.seed)?;
    let out: PathBuf = cfg.required(a.common.out.clone(), "out")?;
    let format = format_of(&cfg, &a.common)?;

    let inst = gen_instance(&spec)?;
    save_dataset(&inst.dataset, &out, format)?;
    let truth = out.join("truth.json");
    save_truth(&inst.truth(), &truth)?;

    #[derive(Serialize)]
    struct Options<'a> {
        #[serde(flatten)]
        spec: &'a SynthSpec,
        out: &'a Path,
        format: Encoding,
    }
    RunManifest::new(
        "synth",
        Options {
            spec: &spec,
            out: &out,
            format,
        },
        Some(spec.seed),
        vec![out.join(fusso::dataset::MANIFEST_FILE), truth],
        json!({ "true_support": spec.true_support() }),
        started,
    )
    .write(&manifest_path(&out, true))
}

pub fn fit(a: FitArgs) -> Res<()> {
    let started = Instant::now();
    let cfg = setup(&a.common)?;
    let (data, ds) = load_data(&cfg, &a.data)?;
    let out: PathBuf = cfg.required(a.common.out.clone(), "out")?;
    let s = SolverSettings::resolve(&cfg, &a.solver)?;
    let m: Tuning<usize> = cfg.parsed(a.model.m, "M")?.unwrap_or(Tuning::Cv);
    let lambda: Tuning<f64> = cfg.parsed(a.model.lambda, "lambda")?.unwrap_or(Tuning::Cv);
    let m_grid: Option<Vec<usize>> = cfg.opt(a.model.m_grid.clone(), "M_grid")?;
    let standardize = flag_bool(&cfg, a.model.standardize, "standardize")?;
    let intercept = flag_bool(&cfg, a.model.intercept, "intercept")?;
    let seed = cfg.or(a.common.seed, "seed", 0)?;
    if let Tuning::Fixed(mv) = m {
        if mv == 0 || mv >= ds.n() {
            return Err(CliError::Usage(format!(
                "--M {mv} must be in 1..={}",
                ds.n() - 1
            )));
        }
    }

    let fc = FussoConfig {
        m,
        lambda,
        cv_folds: s.folds,
        m_grid: m_grid.clone(),
        path: s.grid(),
        solver: s.solver(),
        standardize,
        intercept,
        cv_seed: seed,
    };
    let model = fit_fusso(&ds, &fc)?;
    save_model(&model, &out)?;

    #[derive(Serialize)]
    struct Options<'a> {
        data: &'a Path,
        out: &'a Path,
        #[serde(rename = "M")]
        m: String,
        lambda: String,
        #[serde(rename = "M_grid")]
        m_grid: Option<Vec<usize>>,
        standardize: bool,
        intercept: bool,
        #[serde(flatten)]
        solver: &'a SolverSettings,
    }
    RunManifest::new(
        "fit",
        Options {
            data: &data,
            out: &out,
            m: m.to_string(),
            lambda: lambda.to_string(),
            m_grid,
            standardize,
            intercept,
            solver: &s,
        },
        Some(seed),
        vec![out.clone()],
        json!({
            "M": model.m,
            "lambda": model.lambda,
            "lambda_max": model.lambda_max,
            "support": model.support,
            "diagnostics": model.diagnostics,
        }),
        started,
    )
    .write(&manifest_path(&out, false))?;
    if !model.diagnostics.converged {
        return Err(CliError::NotConverged(format!(
            "solver stopped after {} sweeps with KKT residual {:e}",
            model.diagnostics.iterations, model.diagnostics.kkt_residual
        )));
    }
    Ok(())
}

pub fn path(a: PathArgs) -> Res<()> {
    let started = Instant::now();
    let cfg = setup(&a.common)?;
    let (data, ds) = load_data(&cfg, &a.data)?;
    let out: PathBuf = cfg.required(a.common.out.clone(), "out")?;
    let format = format_of(&cfg, &a.common)?;
    let s = SolverSettings::resolve(&cfg, &a.solver)?;
    let estimator = cfg
        .parsed(a.estimator, "estimator")?
        .unwrap_or(EstimatorKind::Fusso);
    let layout = cfg.parsed(a.layout, "layout")?.unwrap_or(PathLayout::Auto);
    let layout = match layout {
        PathLayout::Auto if ds.p() > DENSE_PATH_MAX_P => PathLayout::Sparse,
        PathLayout::Auto => PathLayout::Dense,
        other => other,
    };

    let (m, prob) = match estimator {
        EstimatorKind::Fusso => {
            let m: usize = cfg.required(a.m, "M")?;
            if m == 0 || m >= ds.n() {
                return Err(CliError::Usage(format!(
                    "--M {m} must be in 1..={}",
                    ds.n() - 1
                )));
            }
            let design = build_coefficients(&ds, m)?;
            (m, GroupProblem::new(design, ds.responses().to_vec())?)
        }
        EstimatorKind::Ygl => (ds.n(), ygl_problem(&ds)?),
    };

    let p = ds.p();
    let mut values = Vec::new();
    let mut unconverged = 0usize;
    let mut support_sizes = Vec::new();
    let (lambda_max, lambdas) = fit_path_with(&prob, &s.grid(), &s.solver(), |_, fit| {
        let norms = fit.block_norms();
        match layout {
            PathLayout::Dense => {
                values.push(fit.lambda);
                values.extend(norms);
            }
            _ => {
                for &j in &fit.support {
                    values.extend([fit.lambda, j as f64, norms[j]]);
                }
            }
        }
        support_sizes.push(fit.support.len());
        unconverged += usize::from(!fit.converged);
    })?;
    let dense_header: Vec<String>;
    let header: Vec<&str> = match layout {
        PathLayout::Dense => {
            dense_header = std::iter::once("lambda".to_string())
                .chain((0..p).map(|j| format!("norm_{j}")))
                .collect();
            dense_header.iter().map(String::as_str).collect()
        }
        _ => vec!["lambda", "j", "norm"],
    };
    let int_cols: &[usize] = if layout == PathLayout::Dense {
        &[]
    } else {
        &[1]
    };
    write_table(&out, &header, int_cols, &values, format)?;

    #[derive(Serialize)]
    struct Options<'a> {
        data: &'a Path,
        out: &'a Path,
        format: Encoding,
        estimator: EstimatorKind,
        #[serde(rename = "M")]
        m: usize,
        layout: PathLayout,
        #[serde(flatten)]
        solver: &'a SolverSettings,
    }
    RunManifest::new(
        "path",
        Options {
            data: &data,
            out: &out,
            format,
            estimator,
            m,
            layout,
            solver: &s,
        },
        None,
        vec![out.clone()],
        json!({
            "lambda_max": lambda_max,
            "lambdas": lambdas,
            "support_sizes": support_sizes,
            "unconverged_fits": unconverged,
        }),
        started,
    )
    .write(&manifest_path(&out, false))?;
    if unconverged > 0 {
        return Err(CliError::NotConverged(format!(
            "{unconverged} of {} path fits hit --max-iter",
            lambdas.len()
        )));
    }
    Ok(())
}

pub fn cv(a: CvArgs) -> Res<()> {
    let started = Instant::now();
    let cfg = setup(&a.common)?;
    let (data, ds) = load_data(&cfg, &a.data)?;
    let out: PathBuf = cfg.required(a.common.out.clone(), "out")?;
    let format = format_of(&cfg, &a.common)?;
    let s = SolverSettings::resolve(&cfg, &a.solver)?;
    let m_grid: Vec<usize> = cfg
        .opt(a.m_grid.clone(), "M_grid")?
        .unwrap_or_else(|| default_m_grid(ds.n()));
    if let Some(&bad) = m_grid.iter().find(|&&m| m == 0 || m >= ds.n()) {
        return Err(CliError::Usage(format!(
            "truncation {bad} must be in 1..={}",
            ds.n() - 1
        )));
    }
    let seed = cfg.or(a.common.seed, "seed", 0)?;
    let standardize = flag_bool(&cfg, a.standardize, "standardize")?;
    let intercept = flag_bool(&cfg, a.intercept, "intercept")?;
    let fc = FussoConfig {
        cv_folds: s.folds,
        solver: s.solver(),
        standardize,
        intercept,
        cv_seed: seed,
        ..Default::default()
    };
    let result = cross_validate(&ds, &fc, &m_grid, &s.grid())?;
    let values: Vec<f64> = result
        .table
        .iter()
        .flat_map(|r| [r.m as f64, r.lambda, r.mean_mse, r.se])
        .collect();
    write_table(
        &out,
        &["M", "lambda", "mean_mse", "se"],
        &[0],
        &values,
        format,
    )?;

    #[derive(Serialize)]
    struct Options<'a> {
        data: &'a Path,
        out: &'a Path,
        format: Encoding,
        #[serde(rename = "M_grid")]
        m_grid: &'a [usize],
        standardize: bool,
        intercept: bool,
        #[serde(flatten)]
        solver: &'a SolverSettings,
    }
    RunManifest::new(
        "cv",
        Options {
            data: &data,
            out: &out,
            format,
            m_grid: &m_grid,
            standardize,
            intercept,
            solver: &s,
        },
        Some(seed),
        vec![out.clone()],
        json!({ "best_M": result.best_m, "best_lambda": result.best_lambda }),
        started,
    )
    .write(&manifest_path(&out, false))
}

pub fn bench(a: BenchArgs) -> Res<()> {
    let started = Instant::now();
    let cfg = setup(&a.common)?;
    let spec = resolve_spec(&cfg, &a.spec, a.common.seed)?;
    let out: PathBuf = cfg.required(a.common.out.clone(), "out")?;
    let s = SolverSettings::resolve(&cfg, &a.solver)?;
    let trials = cfg.or(a.trials, "trials", 100)?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let estimator = cfg
        .parsed(a.estimator, "estimator")?
        .unwrap_or(EstimatorKind::Fusso);
    let m: Tuning<usize> = cfg.parsed(a.m, "M")?.unwrap_or(Tuning::Cv);
    let m_grid: Option<Vec<usize>> = cfg.opt(a.m_grid.clone(), "M_grid")?;
    let defaults = BenchmarkOptions::default();
    let (cv_count, cv_ratio) = match defaults.m_selection {
        MSelection::Cv {
            lambda_count,
            lambda_ratio,
            ..
        } => (lambda_count, lambda_ratio),
        MSelection::Fixed(_) => unreachable!("default selection is CV"),
    };
    let cv_lambda_count = cfg.or(a.cv_lambda_count, "cv_lambda_count", cv_count)?;
    let cv_lambda_ratio = cfg.or(a.cv_lambda_ratio, "cv_lambda_ratio", cv_ratio)?;
    let m_selection = match m {
        Tuning::Fixed(mv) => MSelection::Fixed(mv),
        Tuning::Cv => MSelection::Cv {
            grid: m_grid.clone(),
            folds: s.folds,
            lambda_count: cv_lambda_count,
            lambda_ratio: cv_lambda_ratio,
        },
    };
    let opts = BenchmarkOptions {
        trials,
        estimator,
        m_selection,
        lambda_count: s.lambda_count,
        lambda_ratio: s.lambda_ratio,
        solver: s.solver(),
    };
    let report = run_benchmark(&spec, &opts)?;
    write_benchmark_csv(std::slice::from_ref(&report.row), &out)?;
    let trials_path = sibling(&out, "trials.csv");
    write_trials_csv(&report.records, &trials_path)?;
    let unconverged: usize = report.records.iter().map(|r| r.unconverged_fits).sum();

    #[derive(Serialize)]
    struct Options<'a> {
        #[serde(flatten)]
        spec: &'a SynthSpec,
        out: &'a Path,
        trials: usize,
        estimator: EstimatorKind,
        #[serde(rename = "M")]
        m: String,
        #[serde(rename = "M_grid")]
        m_grid: Option<Vec<usize>>,
        cv_lambda_count: usize,
        cv_lambda_ratio: f64,
        #[serde(flatten)]
        solver: &'a SolverSettings,
    }
    RunManifest::new(
        "bench",
        Options {
            spec: &spec,
            out: &out,
            trials,
            estimator,
            m: m.to_string(),
            m_grid,
            cv_lambda_count,
            cv_lambda_ratio,
            solver: &s,
        },
        Some(spec.seed),
        vec![out.clone(), trials_path],
        json!({
            "r": report.row.r,
            "delta_lambda": report.row.delta_lambda,
            "unconverged_fits": unconverged,
        }),
        started,
    )
    .write(&manifest_path(&out, false))?;
    if unconverged > 0 {
        return Err(CliError::NotConverged(format!(
            "{unconverged} path fits hit --max-iter across the trials"
        )));
    }
    Ok(())
}

pub fn predict(a: PredictArgs) -> Res<()> {
    let started = Instant::now();
    let cfg = setup(&a.common)?;
    let model_path: PathBuf = cfg.required(a.model.clone(), "model")?;
    let (data, ds) = load_data(&cfg, &a.data)?;
    let out: PathBuf = cfg.required(a.common.out.clone(), "out")?;
    let format = format_of(&cfg, &a.common)?;
    let model = load_model(&model_path)?;
    let preds = predict_dataset(&model, &ds)?;
    let values: Vec<f64> = preds
        .iter()
        .enumerate()
        .flat_map(|(i, y)| [i as f64, *y])
        .collect();
    write_table(&out, &["index", "y_hat"], &[0], &values, format)?;

    #[derive(Serialize)]
    struct Options<'a> {
        model: &'a Path,
        data: &'a Path,
        out: &'a Path,
        format: Encoding,
    }
    RunManifest::new(
        "predict",
        Options {
            model: &model_path,
            data: &data,
            out: &out,
            format,
        },
        None,
        vec![out.clone()],
        json!({ "count": preds.len() }),
        started,
    )
    .write(&manifest_path(&out, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts_parse() {
        assert_eq!("sparse".parse::<PathLayout>().unwrap(), PathLayout::Sparse);
        assert!("wide".parse::<PathLayout>().is_err());
    }

    #[test]
    fn csv_table_keeps_integer_columns_integral() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let values = [0.5, 3.0, 0.1, 0.25, 12.0, 1e-300];
        write_table(&path, &["a", "j", "b"], &[1], &values, Encoding::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,j,b\n0.5,3,0.1\n0.25,12,1e-300\n");
    }

    #[test]
    fn binary_table_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.f64le");
        let values = [1.0, -2.5, 3.0, 4.0];
        write_table(&path, &["x", "y"], &[], &values, Encoding::F64le).unwrap();
        let (rows, cols, back) = fusso::dataset::read_f64le(&path).unwrap();
        assert_eq!((rows, cols), (2, 2));
        assert_eq!(back, values);
    }
}
