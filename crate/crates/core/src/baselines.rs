//! Reference methods.
//!
//! [`full_batch_gda_solve`] is the same penalty descent-ascent with the same
//! adaptive steps, but every iteration uses all objective components, the
//! exact `p`-weighted penalty over all constraints, the full `p` gradient,
//! and no moving average. Its per-iteration cost is `n(q+1) + m(q+1) + m`
//! oracle calls, against `|M₁|(q+1) + |M₂|(q+1) + |M₃|` for the doubly
//! stochastic solver.
//!
//! [`zopsgd_solve`] is projected zeroth-order SGD on the objective alone,
//! for feasible sets with a closed-form projection. Constraints of the
//! problem are only measured, never used.

use std::time::Duration;

use crate::config::DszogConfig;
use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::{self, HighAccuracy};
use crate::problem::BlackBoxProblem;
use crate::rng;
use crate::simplex::{argmax_concave_p, project_simplex, SimplexPoint};
use crate::solver::{run_engine, Clock, DszogState, EngineSpec, Observer, Recorder, Sampling, SolveOutcome, Termination};
use crate::zo_grad::{sample_without_replacement, squared_hinge, zo_objective_grad, Fanout, GaussianDirections};

/// Full-batch penalty gradient descent-ascent.
pub fn full_batch_gda_solve(
    problem: &BlackBoxProblem,
    cfg: &DszogConfig,
    w0: &[f64],
    observer: &mut dyn Observer,
) -> Result<SolveOutcome> {
    let spec = EngineSpec { sampling: Sampling::FullBatch, momentum: None, interpolate: true };
    run_engine(problem, cfg, w0, spec, observer)
}

/// Simple sets with an exact Euclidean projection.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    /// Coordinate-wise bounds `lo ≤ w ≤ hi`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// The probability simplex.
    Simplex,
}

impl FeasibleSet {
    /// The same interval `[lo, hi]` on every coordinate.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Self {
        FeasibleSet::Box { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            FeasibleSet::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::config("feasible_set", format!("box bounds must have length {dim}")));
                }
                if lo.iter().zip(hi).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
                    return Err(Error::config("feasible_set", "box needs lo ≤ hi on every coordinate"));
                }
                Ok(())
            }
            FeasibleSet::Simplex => Ok(()),
        }
    }

    pub fn project(&self, w: &[f64]) -> Result<Vec<f64>> {
        match self {
            FeasibleSet::Box { lo, hi } => {
                Ok(w.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| x.clamp(*l, *h)).collect())
            }
            FeasibleSet::Simplex => Ok(project_simplex(w)?.into_vec()),
        }
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        match self {
            FeasibleSet::Box { lo, hi } => {
                w.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)
            }
            FeasibleSet::Simplex => {
                w.iter().all(|x| *x >= -tol) && (w.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }
}

/// Projected zeroth-order SGD: `w ← Π(w − η_w G^f(w))` with the data batch
/// and direction count of `cfg`.
pub fn zopsgd_solve(
    problem: &BlackBoxProblem,
    set: &FeasibleSet,
    cfg: &DszogConfig,
    w0: &[f64],
    observer: &mut dyn Observer,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    set.validate(problem.dim())?;
    linalg::ensure_same_len(w0.len(), problem.dim(), "w0")?;
    linalg::ensure_finite(w0, "w0")?;

    let mut clock = Clock::start();
    let budget = cfg.time_budget_s.map(Duration::from_secs_f64);
    let calls_at_start = problem.solver_calls();
    let fanout = if cfg.parallel { Fanout::Parallel } else { Fanout::Sequential };
    let mut dir_rng = rng::stream(cfg.seed, rng::DIRECTIONS);
    let mut batch_rng = rng::stream(cfg.seed, rng::BATCHES);
    let mut recorder = Recorder::new(problem, observer);

    // Rows report the weighted penalty under uniform p; there is no dual.
    let m = problem.n_constraints();
    let mut state = DszogState {
        w: set.project(w0)?,
        p: SimplexPoint::uniform(m),
        z_w: vec![0.0; problem.dim()],
        z_p: vec![0.0; m],
        iter: 0,
        oracle_calls: 0,
    };
    recorder.row(&mut clock, &state, 0.0)?;

    let mut termination = Termination::MaxIters;
    let mut abort_reason = None;
    let mut step_norm_w = 0.0;
    let mut last_recorded = 0;
    for t in 1..=cfg.max_iters {
        let dirs = GaussianDirections::sample(&mut dir_rng, cfg.q, problem.dim());
        let batch = sample_without_replacement(&mut batch_rng, problem.n_components(), cfg.batch_data);
        let g = match zo_objective_grad(problem, &state.w, &batch, &dirs, cfg.mu, fanout) {
            Ok(g) => g,
            Err(Error::Numerical { .. }) => {
                termination = Termination::NumericalAbort;
                abort_reason = Some(format!("gradient estimate at iteration {t}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let stepped: Vec<f64> = state.w.iter().zip(&g).map(|(x, gi)| x - cfg.eta_w * gi).collect();
        if !linalg::all_finite(&stepped) {
            termination = Termination::NumericalAbort;
            abort_reason = Some(format!("w at iteration {t}"));
            break;
        }
        let w = set.project(&stepped)?;
        step_norm_w = state.w.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        state.w = w;
        state.z_w = g;
        state.iter = t;
        state.oracle_calls = (problem.solver_calls() - calls_at_start).total();
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

    let fvals = problem.diagnostics().constraint_values(&state.w);
    linalg::ensure_finite(&fvals, "constraint values")?;
    let phi: Vec<f64> = fvals.iter().map(|f| squared_hinge(*f)).collect();
    let p_star = argmax_concave_p(&phi, cfg.beta, cfg.lambda)?;
    let hi = HighAccuracy { q_big: cfg.diag_q, mu_small: cfg.diag_mu, seed: cfg.seed };
    let stationarity = metrics::stationarity_report(problem, &state.w, &p_star, cfg.beta, cfg.lambda, &hi)?;
    Ok(SolveOutcome {
        final_w: state.w,
        final_p: p_star,
        record: recorder.finish(),
        stationarity,
        termination,
        iterations: state.iter,
        solver_calls,
        abort_reason,
    })
}
