//! Building problems per repeat, running the methods, and writing results.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dszog::dataio::{self, Manifest};
use dszog::problems::{self, AnalyticCase, Dataset, FairnessLoss};
use dszog::{
    dszog_solve, full_batch_gda_solve, rng, zopsgd_solve, BlackBoxProblem, DszogConfig, FeasibleSet, Observer,
    RecordRow, SolveOutcome,
};

use crate::config::{DataSource, ExperimentConfig, Init, Method, Task};
use crate::report;

/// Data loaded once and shared by every repeat.
pub struct Prepared {
    data: Option<Dataset>,
}

/// One repeat's problem and held-out data.
struct Instance {
    problem: BlackBoxProblem,
    test: Option<Dataset>,
    validation: Option<Dataset>,
    optimum: Option<Vec<f64>>,
    zopsgd_set: Option<(FeasibleSet, String)>,
    parts: Vec<(&'static str, Dataset)>,
}

/// Loads data and builds the first repeat's problem, so every
/// configuration or data error surfaces before any solver runs.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let data = match &cfg.source {
        DataSource::None => None,
        DataSource::File { path, dim, sensitive_cols } => {
            let data = dataio::read_sparse_dataset(path, *dim).map_err(|e| anyhow!("dataset: {e}"))?;
            let data = if cfg.task == Task::Fairness {
                data.with_sensitive_columns(sensitive_cols).map_err(|e| anyhow!("sensitive_cols: {e}"))?
            } else {
                data
            };
            Some(data)
        }
        DataSource::Generated { n, d, r, rho, seed } => Some(
            problems::generate_fairness_dataset_with_rho(*n, *d, *r, *rho, *seed)
                .map_err(|e| anyhow!("generator: {e}"))?,
        ),
    };
    if let (Some(k), Some(d)) = (cfg.subsample, &data) {
        if k > d.n() {
            bail!("subsample: {k} rows requested but the dataset has {}", d.n());
        }
    }
    let prepared = Prepared { data };
    instance(cfg, &prepared, cfg.base_seed)?;
    Ok(prepared)
}

fn analytic_case(name: &str) -> Result<AnalyticCase> {
    let mut suite = problems::build_analytic_suite();
    let names: Vec<&str> = suite.iter().map(|c| c.name).collect();
    let at = suite
        .iter()
        .position(|c| c.name == name)
        .ok_or_else(|| anyhow!("analytic_case: unknown case `{name}` ({})", names.join(", ")))?;
    Ok(suite.swap_remove(at))
}

fn instance(cfg: &ExperimentConfig, prep: &Prepared, seed: u64) -> Result<Instance> {
    let bound = cfg.zopsgd_bound;
    if cfg.task == Task::Analytic {
        let case = analytic_case(cfg.analytic_case.as_deref().expect("checked when parsing"))?;
        let d = case.problem.dim();
        // The feasible regions of these two cases are boxes themselves.
        let zopsgd_set = match case.name {
            "one_dim" | "replicated_bounds" => Some((
                FeasibleSet::Box { lo: case.optimum.clone(), hi: vec![f64::INFINITY; d] },
                "box:constraint_region".to_string(),
            )),
            _ => None,
        };
        if zopsgd_set.is_none() && cfg.methods.contains(&Method::Zopsgd) {
            bail!("method: zopsgd needs a box-shaped feasible region, which case `{}` lacks", case.name);
        }
        return Ok(Instance {
            problem: case.problem,
            test: None,
            validation: None,
            optimum: Some(case.optimum),
            zopsgd_set,
            parts: Vec::new(),
        });
    }

    let full = prep.data.as_ref().expect("data tasks load data");
    let data = match cfg.subsample {
        Some(k) => dataio::subsample(full, k, cfg.stratified, seed).map_err(|e| anyhow!("subsample: {e}"))?,
        None => full.clone(),
    };
    let spec = problems::SplitSpec { seed, ..cfg.split };
    let (train, test, validation) = problems::split(&data, &spec).map_err(|e| anyhow!("split: {e}"))?;
    let d = train.dim();
    let (problem, zopsgd_set) = match cfg.task {
        Task::Pairwise => (
            problems::build_pairwise_problem(&train, cfg.c_loss).map_err(|e| anyhow!("pairwise problem: {e}"))?,
            (FeasibleSet::uniform_box(d, -bound, bound), format!("box:[-{bound},{bound}]")),
        ),
        Task::Fairness => {
            let problem = problems::build_fairness_problem(&train, cfg.c_cov, FairnessLoss::Hinge)
                .map_err(|e| anyhow!("fairness problem: {e}"))?;
            // Projection cannot express the covariance constraints, so the
            // baseline gets the unawareness set: no weight on sensitive columns.
            let cols = train.sensitive_columns().unwrap_or(&[]);
            let mut lo = vec![-bound; d];
            let mut hi = vec![bound; d];
            for &c in cols {
                lo[c] = 0.0;
                hi[c] = 0.0;
            }
            let label = format!("box:[-{bound},{bound}],zero_on_sensitive_columns");
            (problem, (FeasibleSet::Box { lo, hi }, label))
        }
        Task::Analytic => unreachable!("handled above"),
    };
    Ok(Instance {
        problem,
        test: Some(test.clone()),
        validation: Some(validation.clone()),
        optimum: None,
        zopsgd_set: Some(zopsgd_set),
        parts: vec![("train", train), ("test", test), ("validation", validation)],
    })
}

fn start_point(init: Init, seed: u64, dim: usize) -> Vec<f64> {
    match init {
        Init::Normal(s) => rng::normal_start(seed, dim, s),
        Init::Constant(c) => vec![c; dim],
    }
}

/// Appends held-out accuracy (data tasks) or distance to the known optimum
/// (analytic task) to every trace row, and logs rows to stderr.
struct Tracker<'a> {
    column: &'static str,
    test: Option<&'a Dataset>,
    optimum: Option<&'a [f64]>,
    label: String,
    log: bool,
}

impl Observer for Tracker<'_> {
    fn columns(&self) -> Vec<String> {
        vec![self.column.to_string()]
    }

    fn measure(&mut self, w: &[f64]) -> Vec<f64> {
        match (self.test, self.optimum) {
            (Some(t), _) => vec![problems::accuracy(w, t)],
            (None, Some(opt)) => vec![w.iter().zip(opt).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()],
            (None, None) => vec![f64::NAN],
        }
    }

    fn on_row(&mut self, row: &RecordRow) {
        if self.log {
            eprintln!(
                "{} iter {} obj {:.6e} max_viol {:.3e} {} {:.6}",
                self.label, row.iter, row.objective, row.max_violation, self.column, row.extra[0]
            );
        }
    }
}

fn solve(method: Method, inst: &Instance, cfg: &DszogConfig, w0: &[f64], obs: &mut Tracker) -> Result<SolveOutcome> {
    let out = match method {
        Method::Dszog => dszog_solve(&inst.problem, cfg, w0, obs),
        Method::FullGda => full_batch_gda_solve(&inst.problem, cfg, w0, obs),
        Method::Zopsgd => {
            let (set, _) = inst.zopsgd_set.as_ref().expect("checked when preparing");
            zopsgd_solve(&inst.problem, set, cfg, w0, obs)
        }
    };
    out.map_err(|e| anyhow!("{method}: {e}"))
}

pub fn metric_column(task: Task) -> &'static str {
    match task {
        Task::Analytic => "error",
        _ => "test_accuracy",
    }
}

/// Picks, per method, the grid point with the best validation accuracy on
/// the first repeat's split. Ties keep the earlier point.
#[allow(clippy::type_complexity)]
fn select(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    staging: &Path,
    log: bool,
) -> Result<Vec<(Method, DszogConfig, Vec<(String, String)>)>> {
    let points = cfg.grid_points();
    if points.len() == 1 {
        let (c, l) = points.into_iter().next().expect("one point");
        return Ok(cfg.methods.iter().map(|m| (*m, c.clone(), l.clone())).collect());
    }
    let inst = instance(cfg, prep, cfg.base_seed)?;
    let w0 = start_point(cfg.init, cfg.base_seed, inst.problem.dim());
    let mut csv = String::from("method,point,setting,validation_accuracy\n");
    let mut chosen = Vec::new();
    for &method in &cfg.methods {
        let mut best: Option<(f64, usize)> = None;
        for (k, (point, label)) in points.iter().enumerate() {
            let mut run_cfg = point.clone();
            run_cfg.seed = cfg.base_seed;
            let mut obs = Tracker {
                column: "validation_accuracy",
                test: inst.validation.as_ref(),
                optimum: None,
                label: format!("select {method} point {k}"),
                log,
            };
            let out = solve(method, &inst, &run_cfg, &w0, &mut obs)?;
            let acc = problems::accuracy(&out.final_w, inst.validation.as_ref().expect("data task"));
            let setting: Vec<String> = label.iter().map(|(k, v)| format!("{k}={v}")).collect();
            csv.push_str(&format!("{method},{k},{},{acc}\n", setting.join(";")));
            if best.is_none_or(|(b, _)| acc > b) {
                best = Some((acc, k));
            }
        }
        let (_, k) = best.expect("grid is nonempty");
        chosen.push((method, points[k].0.clone(), points[k].1.clone()));
    }
    let path = staging.join("selection.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    Ok(chosen)
}

/// Runs every (method, seed) pair into `staging`, then writes the summary
/// and plot data from the traces on disk.
pub fn run(cfg: &ExperimentConfig, prep: &Prepared, staging: &Path, log: bool) -> Result<()> {
    let chosen = select(cfg, prep, staging, log)?;
    let column = metric_column(cfg.task);
    let seeds = cfg.seeds();

    let mut top = Manifest::new();
    top.push("task", format!("{:?}", cfg.task).to_lowercase());
    top.push("methods", cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","));
    top.push("seeds", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    top.push("metric", column);
    top.push("metric_cadence", "every metric_every iterations; wall_s is solver time since start");
    if let Some(d) = &prep.data {
        top.push_dataset("dataset", d);
    }
    for (k, v) in &cfg.entries {
        top.push(format!("config.{k}"), v);
    }
    for (method, _, label) in &chosen {
        for (k, v) in label {
            top.push(format!("selected.{method}.{k}"), v);
        }
    }
    let path = staging.join("manifest.txt");
    fs::write(&path, top.render()).with_context(|| format!("writing {}", path.display()))?;

    for (r, &seed) in seeds.iter().enumerate() {
        let inst = instance(cfg, prep, seed)?;
        let w0 = start_point(cfg.init, seed, inst.problem.dim());
        for (method, point, label) in &chosen {
            let mut run_cfg = point.clone();
            run_cfg.seed = seed;
            let mut obs = Tracker {
                column,
                test: inst.test.as_ref(),
                optimum: inst.optimum.as_deref(),
                label: format!("{method} seed {seed}"),
                log,
            };
            let out = solve(*method, &inst, &run_cfg, &w0, &mut obs)?;

            let mut m = Manifest::new();
            m.push("method", method).push("repeat", r).push_config(&run_cfg);
            m.push("w0", cfg.init);
            for (k, v) in label {
                m.push(format!("selected.{k}"), v);
            }
            m.push("task", format!("{:?}", cfg.task).to_lowercase());
            if let Some(name) = &cfg.analytic_case {
                m.push("analytic_case", name);
            }
            for (name, part) in &inst.parts {
                m.push_dataset(name, part);
            }
            m.push("m", inst.problem.n_constraints())
                .push("n", inst.problem.n_components())
                .push("d", inst.problem.dim());
            if *method == Method::Zopsgd {
                m.push("feasible_set", &inst.zopsgd_set.as_ref().expect("checked when preparing").1);
            }
            m.push("iterations", out.iterations)
                .push("objective_calls", out.solver_calls.objective)
                .push("constraint_calls", out.solver_calls.constraint);
            if let Some(reason) = &out.abort_reason {
                m.push("abort_reason", reason);
            }

            let dir = run_dir(staging, *method, seed);
            dataio::write_run(&out.record, &out.stationarity, out.termination, &m, &dir)
                .map_err(|e| anyhow!("writing run: {e}"))?;
            let last = out.record.last().map_or(f64::NAN, |row| row.extra[0]);
            eprintln!("{method} seed {seed}: {column}={last:.6} termination={}", out.termination);
        }
    }

    report::emit_summary(staging)?;
    report::emit_plot_data(staging)?;
    Ok(())
}

pub fn run_dir(root: &Path, method: Method, seed: u64) -> PathBuf {
    root.join(method.name()).join(format!("seed_{seed}"))
}

/// Short description of what `run` would do, for `--dry-run`.
pub fn plan(cfg: &ExperimentConfig, prep: &Prepared) -> Result<String> {
    let inst = instance(cfg, prep, cfg.base_seed)?;
    Ok(format!(
        "task={} methods={} seeds={:?} grid_points={} d={} n={} m={}",
        format!("{:?}", cfg.task).to_lowercase(),
        cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
        cfg.seeds(),
        cfg.grid_points().len(),
        inst.problem.dim(),
        inst.problem.n_components(),
        inst.problem.n_constraints(),
    ))
}
