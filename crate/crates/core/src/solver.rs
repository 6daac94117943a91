//! The doubly stochastic zeroth-order gradient solver.
//!
//! One iteration, from `(w_t, p_t, z_w, z_p)`:
//!
//! 1. `w_{t+1} = w_t − η_w z_w / (√‖z_w‖ + c)`
//! 2. `p̂ = P_Δ(p_t + η_p z_p / (√‖z_p‖ + c))`, `p_{t+1} = (1 − a) p_t + a p̂`
//! 3. draw `q` Gaussian directions, a data batch `M₁` (uniform), a
//!    constraint batch `M₂ ~ p_{t+1}` (with replacement) and a constraint
//!    batch `M₃` (uniform, without replacement)
//! 4. estimate `∇_w L` and `∇_p L` at `(w_{t+1}, p_{t+1})` and fold them into
//!    `z_w`, `z_p` with moving-average weight `b`.
//!
//! `p_1` is the exact maximizer of the strongly concave inner problem at
//! `w_1` (one full constraint sweep) and `z_w`, `z_p` start from one
//! estimate each. No other step touches every constraint.

use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;

use crate::config::DszogConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, all_finite};
use crate::metrics::{self, HighAccuracy, StationarityReport};
use crate::problem::{BlackBoxProblem, OracleCounts};
use crate::record::{RecordRow, RunRecord};
use crate::rng;
use crate::simplex::{argmax_concave_p, project_simplex, CategoricalSampler, SimplexPoint};
use crate::zo_grad::{
    self, penalty_value, sample_without_replacement, squared_hinge, stoch_grad_p, zo_full_grad_w, Fanout,
    GaussianDirections,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    MaxIters,
    TimeBudget,
    NumericalAbort,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::MaxIters => "MaxIters",
            Termination::TimeBudget => "TimeBudget",
            Termination::NumericalAbort => "NumericalAbort",
        })
    }
}

/// Mutable quantities of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct DszogState {
    pub w: Vec<f64>,
    pub p: SimplexPoint,
    pub z_w: Vec<f64>,
    pub z_p: Vec<f64>,
    pub iter: usize,
    /// Solver oracle calls so far (objective plus constraint).
    pub oracle_calls: u64,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub final_w: Vec<f64>,
    pub final_p: SimplexPoint,
    pub record: RunRecord,
    /// Report at `(final_w, final_p)`.
    pub stationarity: StationarityReport,
    pub termination: Termination,
    pub iterations: usize,
    /// Oracle calls made by the algorithm itself, excluding diagnostics.
    pub solver_calls: OracleCounts,
    /// Which quantity went non-finite, for [`Termination::NumericalAbort`].
    pub abort_reason: Option<String>,
}

impl SolveOutcome {
    /// Turns a numerical abort into an error.
    pub fn into_result(self) -> Result<SolveOutcome> {
        match self.termination {
            Termination::NumericalAbort => Err(Error::numerical(
                self.abort_reason.unwrap_or_else(|| "solver state".to_string()),
            )),
            _ => Ok(self),
        }
    }
}

/// Progress hook. `columns`/`measure` add extra values to every record row
/// (for example held-out accuracy); `on_row` sees each finished row.
pub trait Observer {
    fn columns(&self) -> Vec<String> {
        Vec::new()
    }

    fn measure(&mut self, _w: &[f64]) -> Vec<f64> {
        Vec::new()
    }

    fn on_row(&mut self, _row: &RecordRow) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

/// `η·z / (√‖z‖₂ + c)`.
pub fn adaptive_step(z: &[f64], eta: f64, c_eps: f64) -> Vec<f64> {
    let scale = eta / (linalg::norm(z).sqrt() + c_eps);
    z.iter().map(|x| scale * x).collect()
}

/// `(1 − b)·z_old + b·fresh`.
pub fn ema_update(z_old: &[f64], fresh: &[f64], b: f64) -> Result<Vec<f64>> {
    linalg::ensure_same_len(z_old.len(), fresh.len(), "moving average input")?;
    Ok(z_old.iter().zip(fresh).map(|(z, g)| (1.0 - b) * z + b * g).collect())
}

/// Runs the doubly stochastic solver from `w0`.
pub fn dszog_solve(
    problem: &BlackBoxProblem,
    cfg: &DszogConfig,
    w0: &[f64],
    observer: &mut dyn Observer,
) -> Result<SolveOutcome> {
    let spec = EngineSpec { sampling: Sampling::Stochastic, momentum: Some(cfg.b), interpolate: true };
    run_engine(problem, cfg, w0, spec, observer)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sampling {
    /// `M₁` uniform, `M₂ ~ p`, `M₃` uniform.
    Stochastic,
    /// All components, the exact `p`-weighted penalty, all constraints.
    FullBatch,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct EngineSpec {
    pub sampling: Sampling,
    /// Moving-average weight; `None` replaces `z` by the fresh estimate.
    pub momentum: Option<f64>,
    /// `false` takes `p_{t+1} = p̂_{t+1}` without interpolation.
    pub interpolate: bool,
}

struct Estimator<'a> {
    problem: &'a BlackBoxProblem,
    cfg: &'a DszogConfig,
    sampling: Sampling,
    fanout: Fanout,
    dir_rng: ChaCha8Rng,
    batch_rng: ChaCha8Rng,
}

impl Estimator<'_> {
    /// Fresh `(∇_w, ∇_p)` estimates at `(w, p)`.
    fn estimate(&mut self, w: &[f64], p: &SimplexPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let (problem, cfg) = (self.problem, self.cfg);
        let dirs = GaussianDirections::sample(&mut self.dir_rng, cfg.q, problem.dim());
        match self.sampling {
            Sampling::Stochastic => {
                let m1 = sample_without_replacement(&mut self.batch_rng, problem.n_components(), cfg.batch_data);
                let mut m2 = CategoricalSampler::new(p).sample(&mut self.batch_rng, cfg.batch_cons_w);
                m2.sort_unstable();
                let m3 =
                    sample_without_replacement(&mut self.batch_rng, problem.n_constraints(), cfg.batch_cons_p);
                let g = zo_full_grad_w(problem, w, &m1, &m2, &dirs, cfg.mu, cfg.beta, self.fanout)?;
                let h = stoch_grad_p(problem, w, p, &m3, cfg.beta, cfg.lambda)?;
                Ok((g.g, h.to_dense(p)))
            }
            Sampling::FullBatch => {
                let all_n: Vec<usize> = (0..problem.n_components()).collect();
                let all_m: Vec<usize> = (0..problem.n_constraints()).collect();
                let mut g = zo_grad::zo_objective_grad(problem, w, &all_n, &dirs, cfg.mu, self.fanout)?;
                let pen = zo_grad::zo_weighted_penalty_grad(problem, w, p, &dirs, cfg.mu, self.fanout)?;
                for (gi, pi) in g.iter_mut().zip(&pen) {
                    *gi += cfg.beta * pi;
                }
                let h = stoch_grad_p(problem, w, p, &all_m, cfg.beta, cfg.lambda)?;
                Ok((g, h.to_dense(p)))
            }
        }
    }
}

/// Solver clock that excludes time spent in diagnostics and observers.
pub(crate) struct Clock {
    start: Instant,
    paused: Duration,
}

impl Clock {
    pub(crate) fn start() -> Self {
        Clock { start: Instant::now(), paused: Duration::ZERO }
    }

    pub(crate) fn over_budget(&self, budget: Option<Duration>) -> bool {
        budget.is_some_and(|b| self.solver_time() >= b)
    }

    fn solver_time(&self) -> Duration {
        self.start.elapsed().saturating_sub(self.paused)
    }
}

pub(crate) struct Recorder<'a> {
    problem: &'a BlackBoxProblem,
    record: RunRecord,
    observer: &'a mut dyn Observer,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(problem: &'a BlackBoxProblem, observer: &'a mut dyn Observer) -> Self {
        let columns = observer.columns();
        Recorder { problem, record: RunRecord::with_columns(columns), observer }
    }

    pub(crate) fn finish(self) -> RunRecord {
        self.record
    }

    pub(crate) fn row(&mut self, clock: &mut Clock, state: &DszogState, step_norm_w: f64) -> Result<()> {
        let wall = clock.solver_time().as_secs_f64();
        let t0 = Instant::now();
        let diag = self.problem.diagnostics();
        let objective = diag.objective(&state.w);
        let fvals = diag.constraint_values(&state.w);
        let penalty = fvals.iter().zip(state.p.as_slice()).map(|(f, pj)| pj * squared_hinge(*f)).sum();
        let sum_sq_violation = fvals.iter().map(|f| squared_hinge(*f)).sum();
        let max_violation = fvals.iter().fold(0.0_f64, |acc, f| acc.max(*f));
        let extra = self.observer.measure(&state.w);
        let row = RecordRow {
            iter: state.iter,
            wall_time_s: wall,
            objective,
            penalty,
            max_violation,
            sum_sq_violation,
            step_norm_w,
            ema_norm_w: linalg::norm(&state.z_w),
            ema_norm_p: linalg::norm(&state.z_p),
            extra,
        };
        self.observer.on_row(&row);
        self.record.push(row)?;
        clock.paused += t0.elapsed();
        Ok(())
    }
}

pub(crate) fn run_engine(
    problem: &BlackBoxProblem,
    cfg: &DszogConfig,
    w0: &[f64],
    spec: EngineSpec,
    observer: &mut dyn Observer,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    linalg::ensure_same_len(w0.len(), problem.dim(), "w0")?;
    linalg::ensure_finite(w0, "w0")?;

    let mut clock = Clock::start();
    let budget = cfg.time_budget_s.map(Duration::from_secs_f64);
    let calls_at_start = problem.solver_calls();
    let fanout = if cfg.parallel { Fanout::Parallel } else { Fanout::Sequential };
    let mut est = Estimator {
        problem,
        cfg,
        sampling: spec.sampling,
        fanout,
        dir_rng: rng::stream(cfg.seed, rng::DIRECTIONS),
        batch_rng: rng::stream(cfg.seed, rng::BATCHES),
    };
    let mut recorder = Recorder::new(problem, observer);

    let w = w0.to_vec();
    let phi: Vec<f64> = (0..problem.n_constraints()).map(|j| penalty_value(problem, j, &w)).collect();
    let p = argmax_concave_p(&phi, cfg.beta, cfg.lambda)?;
    let (z_w, z_p) = est.estimate(&w, &p)?;
    let mut state = DszogState { w, p, z_w, z_p, iter: 0, oracle_calls: 0 };
    state.oracle_calls = (problem.solver_calls() - calls_at_start).total();
    recorder.row(&mut clock, &state, 0.0)?;

    let mut termination = Termination::MaxIters;
    let mut abort_reason = None;
    let mut step_norm_w = 0.0;
    let mut last_recorded = 0;

    for t in 1..=cfg.max_iters {
        match advance(&mut est, &state, spec)? {
            Advance::Next { w, p, z_w, z_p } => {
                step_norm_w = state.w.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                state.w = w;
                state.p = p;
                state.z_w = z_w;
                state.z_p = z_p;
                state.iter = t;
                state.oracle_calls = (problem.solver_calls() - calls_at_start).total();
            }
            Advance::NonFinite(what) => {
                termination = Termination::NumericalAbort;
                abort_reason = Some(format!("{what} at iteration {t}"));
                break;
            }
        }
        if t % cfg.metric_every == 0 {
            recorder.row(&mut clock, &state, step_norm_w)?;
            last_recorded = t;
        }
        if clock.over_budget(budget) {
            termination = Termination::TimeBudget;
            break;
        }
    }
    if state.iter != last_recorded {
        recorder.row(&mut clock, &state, step_norm_w)?;
    }
    let solver_calls = problem.solver_calls() - calls_at_start;

    let hi = HighAccuracy { q_big: cfg.diag_q, mu_small: cfg.diag_mu, seed: cfg.seed };
    let stationarity = metrics::stationarity_report(problem, &state.w, &state.p, cfg.beta, cfg.lambda, &hi)?;
    Ok(SolveOutcome {
        final_w: state.w,
        final_p: state.p,
        record: recorder.finish(),
        stationarity,
        termination,
        iterations: state.iter,
        solver_calls,
        abort_reason,
    })
}

enum Advance {
    Next { w: Vec<f64>, p: SimplexPoint, z_w: Vec<f64>, z_p: Vec<f64> },
    NonFinite(&'static str),
}

fn advance(est: &mut Estimator<'_>, state: &DszogState, spec: EngineSpec) -> Result<Advance> {
    let cfg = est.cfg;
    let step_w = adaptive_step(&state.z_w, cfg.eta_w, cfg.c_eps);
    let w: Vec<f64> = state.w.iter().zip(&step_w).map(|(x, s)| x - s).collect();
    if !all_finite(&w) {
        return Ok(Advance::NonFinite("w"));
    }
    let step_p = adaptive_step(&state.z_p, cfg.eta_p, cfg.c_eps);
    let ascended: Vec<f64> = state.p.as_slice().iter().zip(&step_p).map(|(x, s)| x + s).collect();
    if !all_finite(&ascended) {
        return Ok(Advance::NonFinite("p"));
    }
    let p_hat = project_simplex(&ascended)?;
    let p = if spec.interpolate { state.p.interpolate(&p_hat, cfg.a)? } else { p_hat };

    let (g, h) = match est.estimate(&w, &p) {
        Ok(v) => v,
        Err(Error::Numerical { .. }) => return Ok(Advance::NonFinite("gradient estimate")),
        Err(e) => return Err(e),
    };
    let (z_w, z_p) = match spec.momentum {
        Some(b) => (ema_update(&state.z_w, &g, b)?, ema_update(&state.z_p, &h, b)?),
        None => (g, h),
    };
    if !all_finite(&z_w) || !all_finite(&z_p) {
        return Ok(Advance::NonFinite("moving-average estimate"));
    }
    Ok(Advance::Next { w, p, z_w, z_p })
}
