//! Experiment configuration files.
//!
//! Plain `key=value` lines; `#` starts a comment line. Every solver
//! hyperparameter accepts a comma-separated list, and the lists together
//! span a grid searched on the validation split. Relative paths are taken
//! from the directory holding the configuration file.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dszog::problems::{SplitSpec, DEFAULT_C_COV, DEFAULT_C_LOSS, DEFAULT_RHO};
use dszog::DszogConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Pairwise,
    Fairness,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Dszog,
    FullGda,
    Zopsgd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dszog => "dszog",
            Method::FullGda => "full_gda",
            Method::Zopsgd => "zopsgd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    File { path: PathBuf, dim: Option<usize>, sensitive_cols: Vec<usize> },
    Generated { n: usize, d: usize, r: usize, rho: f64, seed: u64 },
    None,
}

/// How `w0` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    /// i.i.d. `N(0, σ²)` from the run seed.
    Normal(f64),
    Constant(f64),
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::Normal(s) => write!(f, "normal:{s}"),
            Init::Constant(c) => write!(f, "{c}"),
        }
    }
}

/// Solver keys that may carry a list of values.
pub const GRID_KEYS: [&str; 12] =
    ["beta", "lambda", "mu", "q", "batch_data", "batch_cons_w", "batch_cons_p", "eta_w", "eta_p", "a", "b", "c_eps"];

const SOLVER_SCALAR_KEYS: [&str; 6] = ["max_iters", "metric_every", "time_budget_s", "diag_q", "diag_mu", "parallel"];

const EXPERIMENT_KEYS: [&str; 23] = [
    "task",
    "method",
    "dataset",
    "dataset_dim",
    "sensitive_cols",
    "subsample",
    "stratified",
    "gen_n",
    "gen_d",
    "gen_r",
    "gen_rho",
    "gen_seed",
    "analytic_case",
    "c_loss",
    "c_cov",
    "split_train",
    "split_test",
    "split_validation",
    "repeats",
    "seed",
    "out_dir",
    "zopsgd_bound",
    "w0",
];

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub task: Task,
    pub methods: Vec<Method>,
    pub source: DataSource,
    /// Rows kept per repeat, drawn afresh from each repeat's seed.
    pub subsample: Option<usize>,
    pub stratified: bool,
    pub analytic_case: Option<String>,
    pub c_loss: f64,
    pub c_cov: f64,
    pub split: SplitSpec,
    pub repeats: usize,
    pub base_seed: u64,
    pub out_dir: Option<PathBuf>,
    pub zopsgd_bound: f64,
    pub init: Init,
    /// Solver settings with the first value of every grid list.
    pub solver: DszogConfig,
    /// Grid keys given more than one value, in [`GRID_KEYS`] order.
    pub grid: Vec<(String, Vec<String>)>,
    /// The file's entries in order, for manifests.
    pub entries: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let entries = parse_entries(text)?;
        let get = |k: &str| entries.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());

        let task = match get("task") {
            Some("pairwise") => Task::Pairwise,
            Some("fairness") => Task::Fairness,
            Some("analytic") => Task::Analytic,
            Some(other) => bail!("task: unknown task `{other}` (pairwise, fairness, analytic)"),
            None => bail!("task: missing"),
        };

        let methods = match get("method") {
            None => vec![Method::Dszog],
            Some(v) => {
                let mut out = Vec::new();
                for m in split_list(v) {
                    let m = match m {
                        "dszog" => Method::Dszog,
                        "full_gda" => Method::FullGda,
                        "zopsgd" => Method::Zopsgd,
                        other => bail!("method: unknown method `{other}` (dszog, full_gda, zopsgd)"),
                    };
                    if out.contains(&m) {
                        bail!("method: `{m}` listed twice");
                    }
                    out.push(m);
                }
                out
            }
        };

        let gen_keys = ["gen_n", "gen_d", "gen_r", "gen_rho", "gen_seed"];
        let has_gen = gen_keys.iter().any(|k| get(k).is_some());
        let source = match (task, get("dataset"), has_gen) {
            (Task::Analytic, None, false) => DataSource::None,
            (Task::Analytic, _, _) => bail!("dataset: the analytic task takes no data"),
            (_, Some(_), true) => bail!("dataset: give either a file or generator parameters, not both"),
            (Task::Pairwise, None, _) => bail!("dataset: the pairwise task needs a dataset file"),
            (_, Some(p), false) => {
                let sensitive_cols = match get("sensitive_cols") {
                    None => Vec::new(),
                    Some(v) => split_list(v)
                        .map(|c| {
                            let c: usize = parse_value("sensitive_cols", c)?;
                            c.checked_sub(1).ok_or_else(|| anyhow!("sensitive_cols: columns are 1-based"))
                        })
                        .collect::<Result<_>>()?,
                };
                if task == Task::Fairness && sensitive_cols.is_empty() {
                    bail!("sensitive_cols: the fairness task on a file needs sensitive columns");
                }
                DataSource::File {
                    path: base_dir.join(p),
                    dim: get("dataset_dim").map(|v| parse_value("dataset_dim", v)).transpose()?,
                    sensitive_cols,
                }
            }
            (Task::Fairness, None, _) => DataSource::Generated {
                n: opt(&get, "gen_n", 2000)?,
                d: opt(&get, "gen_d", 100)?,
                r: opt(&get, "gen_r", 10)?,
                rho: opt(&get, "gen_rho", DEFAULT_RHO)?,
                seed: opt(&get, "gen_seed", 0)?,
            },
        };
        if task != Task::Fairness && get("sensitive_cols").is_some() {
            bail!("sensitive_cols: only the fairness task uses sensitive columns");
        }
        if task == Task::Pairwise && has_gen {
            bail!("gen_n: the generator only serves the fairness task");
        }

        let subsample = match get("subsample") {
            None if task == Task::Pairwise => Some(1000),
            None => None,
            Some(v) => match parse_value::<usize>("subsample", v)? {
                0 => None,
                k => Some(k),
            },
        };
        if task == Task::Analytic && subsample.is_some() {
            bail!("subsample: the analytic task takes no data");
        }

        let analytic_case = match (task, get("analytic_case")) {
            (Task::Analytic, Some(c)) => Some(c.to_string()),
            (Task::Analytic, None) => bail!("analytic_case: missing (one_dim, half_spaces, replicated_bounds)"),
            (_, Some(_)) => bail!("analytic_case: only used by the analytic task"),
            (_, None) => None,
        };

        let split = SplitSpec {
            train: opt(&get, "split_train", 0.5)?,
            test: opt(&get, "split_test", 0.3)?,
            validation: opt(&get, "split_validation", 0.2)?,
            seed: 0,
        };
        split.validate().map_err(|e| anyhow!("{e}"))?;

        let repeats: usize = opt(&get, "repeats", 1)?;
        if repeats == 0 {
            bail!("repeats: must be at least 1");
        }
        let zopsgd_bound: f64 = opt(&get, "zopsgd_bound", 10.0)?;
        if zopsgd_bound.is_nan() || zopsgd_bound <= 0.0 {
            bail!("zopsgd_bound: must be positive");
        }
        let init = match get("w0") {
            None => Init::Normal(0.01),
            Some(v) => match v.strip_prefix("normal:") {
                Some(s) => {
                    let s: f64 = parse_value("w0", s)?;
                    if !(s > 0.0 && s.is_finite()) {
                        bail!("w0: normal scale must be positive");
                    }
                    Init::Normal(s)
                }
                None if v == "normal" => Init::Normal(0.01),
                None => Init::Constant(parse_value("w0", v)?),
            },
        };

        let mut solver = DszogConfig::default();
        let mut grid = Vec::new();
        for key in GRID_KEYS {
            if let Some(v) = get(key) {
                let values: Vec<String> = split_list(v).map(str::to_string).collect();
                if values.is_empty() {
                    bail!("{key}: empty list");
                }
                for x in &values {
                    set_solver_field(&mut solver.clone(), key, x)?;
                }
                set_solver_field(&mut solver, key, &values[0])?;
                if values.len() > 1 {
                    grid.push((key.to_string(), values));
                }
            }
        }
        for key in SOLVER_SCALAR_KEYS {
            if let Some(v) = get(key) {
                set_solver_field(&mut solver, key, v)?;
            }
        }
        solver.validate().map_err(|e| anyhow!("{e}"))?;
        if !grid.is_empty() && task == Task::Analytic {
            bail!("{}: grid search needs a validation split; the analytic task has none", grid[0].0);
        }

        Ok(ExperimentConfig {
            task,
            methods,
            source,
            subsample,
            stratified: opt(&get, "stratified", true)?,
            analytic_case,
            c_loss: opt(&get, "c_loss", DEFAULT_C_LOSS)?,
            c_cov: opt(&get, "c_cov", DEFAULT_C_COV)?,
            split,
            repeats,
            base_seed: opt(&get, "seed", 0)?,
            out_dir: get("out_dir").map(|p| base_dir.join(p)),
            zopsgd_bound,
            init,
            solver,
            grid,
            entries,
        })
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.repeats as u64).map(|r| self.base_seed + r).collect()
    }

    /// Every grid point as its solver settings and the `(key, value)` pairs
    /// that define it. A config without lists has one point.
    pub fn grid_points(&self) -> Vec<(DszogConfig, Vec<(String, String)>)> {
        let mut points = vec![(self.solver.clone(), Vec::new())];
        for (key, values) in &self.grid {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for (cfg, label) in &points {
                for v in values {
                    let mut cfg = cfg.clone();
                    set_solver_field(&mut cfg, key, v).expect("grid values were checked when parsing");
                    let mut label = label.clone();
                    label.push((key.clone(), v.clone()));
                    next.push((cfg, label));
                }
            }
            points = next;
        }
        points
    }
}

fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !known_key(k) {
            bail!("line {}: unknown key `{k}`", i + 1);
        }
        if entries.iter().any(|(key, _)| key == k) {
            bail!("line {}: `{k}` given twice", i + 1);
        }
        entries.push((k.to_string(), v.to_string()));
    }
    Ok(entries)
}

fn known_key(k: &str) -> bool {
    GRID_KEYS.contains(&k) || SOLVER_SCALAR_KEYS.contains(&k) || EXPERIMENT_KEYS.contains(&k)
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| anyhow!("{key}: cannot parse `{v}`"))
}

fn opt<'a, T: std::str::FromStr>(get: &impl Fn(&str) -> Option<&'a str>, key: &str, default: T) -> Result<T> {
    get(key).map_or(Ok(default), |v| parse_value(key, v))
}

fn set_solver_field(cfg: &mut DszogConfig, key: &str, v: &str) -> Result<()> {
    match key {
        "beta" => cfg.beta = parse_value(key, v)?,
        "lambda" => cfg.lambda = parse_value(key, v)?,
        "mu" => cfg.mu = parse_value(key, v)?,
        "q" => cfg.q = parse_value(key, v)?,
        "batch_data" => cfg.batch_data = parse_value(key, v)?,
        "batch_cons_w" => cfg.batch_cons_w = parse_value(key, v)?,
        "batch_cons_p" => cfg.batch_cons_p = parse_value(key, v)?,
        "eta_w" => cfg.eta_w = parse_value(key, v)?,
        "eta_p" => cfg.eta_p = parse_value(key, v)?,
        "a" => cfg.a = parse_value(key, v)?,
        "b" => cfg.b = parse_value(key, v)?,
        "c_eps" => cfg.c_eps = parse_value(key, v)?,
        "max_iters" => cfg.max_iters = parse_value(key, v)?,
        "metric_every" => cfg.metric_every = parse_value(key, v)?,
        "time_budget_s" => cfg.time_budget_s = if v == "none" { None } else { Some(parse_value(key, v)?) },
        "diag_q" => cfg.diag_q = parse_value(key, v)?,
        "diag_mu" => cfg.diag_mu = parse_value(key, v)?,
        "parallel" => cfg.parallel = parse_value(key, v)?,
        _ => bail!("{key}: not a solver setting"),
    }
    let mut check = cfg.clone();
    check.seed = 0;
    check.validate().map_err(|e| anyhow!("{e}"))
}
