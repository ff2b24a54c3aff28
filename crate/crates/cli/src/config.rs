use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Options read from a `--config` JSON file. Flags take precedence.
///
/// A run manifest written by any command is itself a valid config: its
/// `options` object is used.
#[derive(Debug, Default)]
pub struct Config(Map<String, Value>);

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not JSON: {e}", path.display())))?;
        let mut map = match value {
            Value::Object(m) => m,
            _ => return Err(CliError::Usage("config must be a JSON object".into())),
        };
        if let Some(Value::Object(opts)) = map.remove("options") {
            map = opts;
        }
        Ok(Config(map))
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.0.get(key).filter(|v| !v.is_null())
    }

    /// Flag value, else config value, else `None`.
    pub fn opt<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                serde_json::from_value(v.clone())
                    .map_err(|e| CliError::Usage(format!("config key {key:?}: {e}")))
            })
            .transpose()
    }

    pub fn or<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn required<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.opt(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    /// Like [`Config::opt`] for values that parse from strings (`"cv"`,
    /// encodings, estimator names); config numbers are accepted as text.
    pub fn parsed<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let text = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        text.parse()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("config key {key:?}: {e}")))
    }
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub fusso: &'static str,
    pub cli: &'static str,
}

/// Written next to every output: what ran, with which resolved options,
/// and what it produced.
#[derive(Debug, Serialize)]
pub struct RunManifest<O: Serialize, R: Serialize> {
    pub command: &'static str,
    pub options: O,
    pub seed: Option<u64>,
    pub threads: usize,
    pub versions: Versions,
    pub outputs: Vec<PathBuf>,
    pub results: R,
    pub timings: Timings,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

impl<O: Serialize, R: Serialize> RunManifest<O, R> {
    pub fn new(
        command: &'static str,
        options: O,
        seed: Option<u64>,
        outputs: Vec<PathBuf>,
        results: R,
        started: Instant,
    ) -> Self {
        RunManifest {
            command,
            options,
            seed,
            threads: rayon::current_num_threads(),
            versions: Versions {
                fusso: fusso::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
            outputs,
            results,
            timings: Timings {
                wall_seconds: started.elapsed().as_secs_f64(),
            },
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(fusso::FussoError::from)?;
        std::fs::write(path, text).map_err(|e| {
            CliError::Fusso(fusso::FussoError::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })
    }
}

/// `out.csv` → `out.run.json`; a directory → `dir/run.json`.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        return out.join("run.json");
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.run.json"))
}

/// `out.csv` → `out.<suffix>`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> Config {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, json).unwrap();
        Config::load(Some(&path)).unwrap()
    }

    #[test]
    fn flags_beat_config_beat_defaults() {
        let cfg = config(r#"{"p": 7, "tol": 1e-8}"#);
        assert_eq!(cfg.or(Some(3usize), "p", 1).unwrap(), 3);
        assert_eq!(cfg.or(None::<usize>, "p", 1).unwrap(), 7);
        assert_eq!(cfg.or(None::<usize>, "N", 1).unwrap(), 1);
        assert_eq!(cfg.opt::<f64>(None, "tol").unwrap(), Some(1e-8));
    }

    #[test]
    fn manifest_options_are_used() {
        let cfg = config(r#"{"command": "fit", "options": {"M": "cv", "lambda": 0.5}}"#);
        assert_eq!(
            cfg.parsed::<String>(None, "M").unwrap().as_deref(),
            Some("cv")
        );
        assert_eq!(cfg.parsed::<f64>(None, "lambda").unwrap(), Some(0.5));
        assert!(cfg.raw("command").is_none());
    }

    #[test]
    fn missing_and_mistyped_keys_are_usage_errors() {
        let cfg = config(r#"{"p": "many", "seed": null}"#);
        assert!(matches!(
            cfg.opt::<usize>(None, "p"),
            Err(CliError::Usage(_))
        ));
        assert!(
            matches!(cfg.required::<u64>(None, "seed"), Err(CliError::Usage(m)) if m.contains("--seed"))
        );
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "[1, 2]").unwrap();
        assert!(matches!(Config::load(Some(&bad)), Err(CliError::Usage(_))));
    }

    #[test]
    fn manifest_and_sibling_paths() {
        assert_eq!(
            manifest_path(Path::new("out/b.csv"), false),
            Path::new("out/b.run.json")
        );
        assert_eq!(
            manifest_path(Path::new("data"), true),
            Path::new("data/run.json")
        );
        assert_eq!(
            sibling(Path::new("x/bench.csv"), "trials.csv"),
            Path::new("x/bench.trials.csv")
        );
    }
}
