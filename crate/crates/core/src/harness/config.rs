//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! dataset = corpus.jsonl
//! format = jsonl
//! folds = 10
//! monitor.SP_S.method = SP
//! monitor.SP_S.stop_set = S
//! monitor.SP_S.K = 0.99
//! ```
//!
//! When no `monitor.*` key is present the eight standard monitors are used.
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{CorpusFormat, DEFAULT_MIN_COUNT};
use crate::engine::{QueryStrategy, RunConfig};
use crate::error::{Error, Result};
use crate::stopping::{Method, MonitorSpec, StopSetKind, DEFAULT_EPSILON, DEFAULT_THRESHOLD, DEFAULT_WINDOW};
use crate::svm::{DistanceKind, TrainParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopwordSource {
    /// The bundled 174-entry English list.
    Builtin,
    None,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitConfig {
    KFold(usize),
    /// Documents whose ids are listed in the file (one per line) form the
    /// test side; all others train.
    Fixed { test_ids: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub format: CorpusFormat,
    /// Dataset label used in output tables; defaults to the dataset file stem.
    pub name: Option<String>,
    pub stopwords: StopwordSource,
    pub min_count: usize,
    pub split: SplitConfig,
    /// Run only the first N folds.
    pub max_folds: Option<usize>,
    /// Keep only the first N documents in id order.
    pub max_docs: Option<usize>,
    /// Restrict to these categories.
    pub tasks: Option<Vec<String>>,
    pub batch_fraction: f64,
    pub stop_set_fraction: f64,
    pub strategy: QueryStrategy,
    pub monitors: Vec<MonitorSpec>,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub distance: DistanceKind,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            format: CorpusFormat::Jsonl,
            name: None,
            stopwords: StopwordSource::Builtin,
            min_count: DEFAULT_MIN_COUNT,
            split: SplitConfig::KFold(10),
            max_folds: None,
            max_docs: None,
            tasks: None,
            batch_fraction: 0.005,
            stop_set_fraction: 0.5,
            strategy: QueryStrategy::Uncertainty,
            monitors: MonitorSpec::standard_set(),
            c: 1.0,
            tol: 1e-4,
            max_iter: 1000,
            seed: 0,
            out: PathBuf::from("out"),
            distance: DistanceKind::Geometric,
            workers: 1,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub strategy: Option<QueryStrategy>,
    pub distance: Option<DistanceKind>,
    pub batch_fraction: Option<f64>,
    pub stop_set_fraction: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&content, base)
    }

    pub fn parse(content: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = Self {
            out: base_dir.join("out"),
            ..Self::default()
        };
        let mut monitor_keys: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut monitor_order: Vec<String> = Vec::new();
        let resolve = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let mut folds: Option<usize> = None;
        let mut split_kind: Option<String> = None;
        let mut test_ids: Option<PathBuf> = None;

        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(line, format!("line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim();
            let value = value.trim();
            if let Some(rest) = key.strip_prefix("monitor.") {
                let Some((name, field)) = rest.split_once('.') else {
                    return Err(Error::config(key, "expected monitor.<name>.<key>"));
                };
                if name.is_empty() {
                    return Err(Error::config(key, "empty monitor name"));
                }
                if !monitor_keys.contains_key(name) {
                    monitor_order.push(name.to_string());
                }
                monitor_keys
                    .entry(name.to_string())
                    .or_default()
                    .insert(field.to_string(), value.to_string());
                continue;
            }
            match key {
                "dataset" => cfg.dataset = Some(resolve(value)),
                "format" => cfg.format = parse_with(key, value)?,
                "name" => cfg.name = Some(value.to_string()),
                "stopwords" => {
                    cfg.stopwords = match value {
                        "builtin" | "default" => StopwordSource::Builtin,
                        "none" => StopwordSource::None,
                        path => StopwordSource::File(resolve(path)),
                    }
                }
                "min_count" => cfg.min_count = parse_num(key, value)?,
                "split" => split_kind = Some(value.to_string()),
                "folds" => folds = Some(parse_num(key, value)?),
                "test_ids" => test_ids = Some(resolve(value)),
                "max_folds" => cfg.max_folds = Some(parse_num(key, value)?),
                "max_docs" => cfg.max_docs = Some(parse_num(key, value)?),
                "tasks" => {
                    cfg.tasks = Some(
                        value
                            .split(',')
                            .map(|t| t.trim().to_string())
                            .filter(|t| !t.is_empty())
                            .collect(),
                    )
                }
                "batch_fraction" => cfg.batch_fraction = parse_num(key, value)?,
                "stop_set_fraction" => cfg.stop_set_fraction = parse_num(key, value)?,
                "strategy" => cfg.strategy = parse_with(key, value)?,
                "C" => cfg.c = parse_num(key, value)?,
                "tol" => cfg.tol = parse_num(key, value)?,
                "max_iter" => cfg.max_iter = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "out" => cfg.out = resolve(value),
                "distance" => cfg.distance = parse_with(key, value)?,
                "workers" => cfg.workers = parse_num(key, value)?,
                other => return Err(Error::config(other, "unknown key")),
            }
        }

        cfg.split = match split_kind.as_deref() {
            None | Some("kfold") => {
                if test_ids.is_some() {
                    return Err(Error::config("test_ids", "only valid with split = fixed"));
                }
                SplitConfig::KFold(folds.unwrap_or(10))
            }
            Some("fixed") => {
                if folds.is_some() {
                    return Err(Error::config("folds", "only valid with split = kfold"));
                }
                SplitConfig::Fixed {
                    test_ids: test_ids.ok_or_else(|| Error::config("test_ids", "required with split = fixed"))?,
                }
            }
            Some(other) => return Err(Error::config("split", format!("expected kfold or fixed, got {other:?}"))),
        };

        if !monitor_order.is_empty() {
            cfg.monitors = monitor_order
                .iter()
                .map(|name| parse_monitor(name, &monitor_keys[name]))
                .collect::<Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.strategy {
            self.strategy = v;
        }
        if let Some(v) = o.distance {
            self.distance = v;
        }
        if let Some(v) = o.batch_fraction {
            self.batch_fraction = v;
        }
        if let Some(v) = o.stop_set_fraction {
            self.stop_set_fraction = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("batch_fraction", self.batch_fraction), ("stop_set_fraction", self.stop_set_fraction)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(key, format!("must be in (0, 1], got {v}")));
            }
        }
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(Error::config("C", "must be positive"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::config("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter", "must be >= 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be >= 1"));
        }
        if let SplitConfig::KFold(k) = self.split {
            if k < 2 {
                return Err(Error::config("folds", "must be >= 2"));
            }
        }
        if self.monitors.is_empty() {
            return Err(Error::config("monitor", "at least one monitor is required"));
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.monitors {
            if !names.insert(&m.name) {
                return Err(Error::config(format!("monitor.{}", m.name), "duplicate monitor name"));
            }
            m.validate().map_err(|e| match e {
                Error::Config { key, reason } => Error::config(format!("monitor.{}.{key}", m.name), reason),
                other => Error::config(format!("monitor.{}", m.name), other.to_string()),
            })?;
        }
        Ok(())
    }

    pub fn run_config(&self) -> RunConfig<f64> {
        RunConfig {
            batch_fraction: self.batch_fraction,
            stop_set_fraction: self.stop_set_fraction,
            strategy: self.strategy,
            train: TrainParams {
                c: self.c,
                tol: self.tol,
                max_iter: self.max_iter,
                seed: 0,
            },
            distance: self.distance,
        }
    }

    pub fn dataset_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        self.dataset
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }

    /// The fully resolved configuration in the same `key = value` format.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let path = |p: &Path| p.display().to_string();
        if let Some(d) = &self.dataset {
            writeln!(s, "dataset = {}", path(d)).unwrap();
        }
        writeln!(s, "format = {}", self.format).unwrap();
        writeln!(s, "name = {}", self.dataset_name()).unwrap();
        let sw = match &self.stopwords {
            StopwordSource::Builtin => "builtin".to_string(),
            StopwordSource::None => "none".to_string(),
            StopwordSource::File(p) => path(p),
        };
        writeln!(s, "stopwords = {sw}").unwrap();
        writeln!(s, "min_count = {}", self.min_count).unwrap();
        match &self.split {
            SplitConfig::KFold(k) => {
                writeln!(s, "split = kfold").unwrap();
                writeln!(s, "folds = {k}").unwrap();
            }
            SplitConfig::Fixed { test_ids } => {
                writeln!(s, "split = fixed").unwrap();
                writeln!(s, "test_ids = {}", path(test_ids)).unwrap();
            }
        }
        if let Some(v) = self.max_folds {
            writeln!(s, "max_folds = {v}").unwrap();
        }
        if let Some(v) = self.max_docs {
            writeln!(s, "max_docs = {v}").unwrap();
        }
        if let Some(t) = &self.tasks {
            writeln!(s, "tasks = {}", t.join(",")).unwrap();
        }
        writeln!(s, "batch_fraction = {}", self.batch_fraction).unwrap();
        writeln!(s, "stop_set_fraction = {}", self.stop_set_fraction).unwrap();
        writeln!(s, "strategy = {}", self.strategy).unwrap();
        writeln!(s, "C = {}", self.c).unwrap();
        writeln!(s, "tol = {}", self.tol).unwrap();
        writeln!(s, "max_iter = {}", self.max_iter).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "out = {}", path(&self.out)).unwrap();
        writeln!(s, "distance = {}", self.distance).unwrap();
        writeln!(s, "workers = {}", self.workers).unwrap();
        for m in &self.monitors {
            writeln!(s, "monitor.{}.method = {}", m.name, m.method).unwrap();
            writeln!(s, "monitor.{}.stop_set = {}", m.name, m.stop_set).unwrap();
            match m.method {
                Method::Sp => {
                    writeln!(s, "monitor.{}.k = {}", m.name, m.k).unwrap();
                    writeln!(s, "monitor.{}.K = {}", m.name, m.threshold).unwrap();
                }
                Method::Dc | Method::Nc => {
                    writeln!(s, "monitor.{}.epsilon = {}", m.name, m.epsilon).unwrap();
                }
            }
        }
        s
    }
}

fn parse_monitor(name: &str, keys: &BTreeMap<String, String>) -> Result<MonitorSpec> {
    let key = |field: &str| format!("monitor.{name}.{field}");
    let method: Method = keys
        .get("method")
        .ok_or_else(|| Error::config(key("method"), "required"))?
        .parse()
        .map_err(|e: String| Error::config(key("method"), e))?;
    let stop_set: StopSetKind = keys
        .get("stop_set")
        .ok_or_else(|| Error::config(key("stop_set"), "required"))?
        .parse()
        .map_err(|e: String| Error::config(key("stop_set"), e))?;
    let mut spec = MonitorSpec::new(method, stop_set).named(name);
    spec.k = DEFAULT_WINDOW;
    spec.threshold = DEFAULT_THRESHOLD;
    spec.epsilon = DEFAULT_EPSILON;
    for (field, value) in keys {
        match field.as_str() {
            "method" | "stop_set" => {}
            "k" => spec.k = parse_num(&key("k"), value)?,
            "K" => spec.threshold = parse_num(&key("K"), value)?,
            "epsilon" => spec.epsilon = parse_num(&key("epsilon"), value)?,
            _ => return Err(Error::config(key(field), "unknown key")),
        }
    }
    Ok(spec)
}

fn parse_num<N: std::str::FromStr>(key: &str, value: &str) -> Result<N>
where
    N::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: N::Err| Error::config(key, format!("cannot parse {value:?}: {e}")))
}

fn parse_with<N: std::str::FromStr<Err = String>>(key: &str, value: &str) -> Result<N> {
    value.parse().map_err(|e: String| Error::config(key, e))
}
