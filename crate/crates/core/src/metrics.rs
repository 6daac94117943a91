//! Stationarity and feasibility diagnostics.
//!
//! Every quantity here is computed from full sweeps over all objective
//! components and constraints, through the problem's diagnostic oracle
//! handle so the sweeps never count as solver work.
//!
//! Gradients in `w` are unavailable for black-box oracles, so the residuals
//! that involve them (`eps1_sq`, `grad_norm_sq_w`, `grad_norm_sq_g`) are
//! high-accuracy zeroth-order estimates with a Monte-Carlo standard error.
//! The reported squared norm is that of the mean estimate, which is biased
//! upward by roughly the squared standard error.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ensure_finite};
use crate::problem::BlackBoxProblem;
use crate::rng;
use crate::simplex::{argmax_concave_p, project_simplex, SimplexPoint};
use crate::zo_grad::{squared_hinge, GaussianDirections};

/// Settings of the zeroth-order gradient sweep used for residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HighAccuracy {
    pub q_big: usize,
    pub mu_small: f64,
    pub seed: u64,
}

impl HighAccuracy {
    fn validate(&self) -> Result<()> {
        if self.q_big < 2 {
            return Err(Error::config("diag_q", "at least two directions are needed for an error bar"));
        }
        if !(self.mu_small > 0.0 && self.mu_small.is_finite()) {
            return Err(Error::config("diag_mu", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityReport {
    /// `‖∇f0 + Σ_j α_j ∇f_j‖²`, estimated.
    pub eps1_sq: f64,
    pub eps1_stderr: f64,
    /// `Σ_j max(f_j, 0)²`.
    pub eps2_sq: f64,
    /// `Σ_j (α_j f_j)²`.
    pub eps3_sq: f64,
    pub max_violation: f64,
    /// Recovered multipliers `α_j = 2β p_j max(f_j, 0)`.
    pub alphas: Vec<f64>,
    /// `‖∇_w L(w, p)‖²`, estimated.
    pub grad_norm_sq_w: f64,
    pub grad_w_stderr: f64,
    /// `‖p − P_Δ(p + ∇_p L)‖²`, the projected-gradient residual.
    pub grad_norm_sq_p: f64,
    /// `‖∇_p L‖² = ‖βφ − λp‖²`, unprojected.
    pub grad_norm_sq_p_raw: f64,
    /// `‖∇_w L(w, p*(w))‖²` with `p*(w)` the exact inner maximizer; a
    /// surrogate for the gradient of `max_p L(w, p)`.
    pub grad_norm_sq_g: f64,
    pub grad_g_stderr: f64,
}

impl StationarityReport {
    /// `(name, value)` for every field; `alphas` is comma-joined.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let alphas = self.alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        vec![
            ("eps1_sq", self.eps1_sq.to_string()),
            ("eps1_stderr", self.eps1_stderr.to_string()),
            ("eps2_sq", self.eps2_sq.to_string()),
            ("eps3_sq", self.eps3_sq.to_string()),
            ("max_violation", self.max_violation.to_string()),
            ("alphas", alphas),
            ("grad_norm_sq_w", self.grad_norm_sq_w.to_string()),
            ("grad_w_stderr", self.grad_w_stderr.to_string()),
            ("grad_norm_sq_p", self.grad_norm_sq_p.to_string()),
            ("grad_norm_sq_p_raw", self.grad_norm_sq_p_raw.to_string()),
            ("grad_norm_sq_g", self.grad_norm_sq_g.to_string()),
            ("grad_g_stderr", self.grad_g_stderr.to_string()),
        ]
    }
}

/// `α_j = 2β p_j max(f_j, 0)` from constraint values.
pub fn multipliers_from_values(fvals: &[f64], p: &[f64], beta: f64) -> Vec<f64> {
    fvals.iter().zip(p).map(|(f, pj)| 2.0 * beta * pj * f.max(0.0)).collect()
}

/// Multipliers recovered from `(w, p)`; one full constraint sweep.
pub fn recover_multipliers(problem: &BlackBoxProblem, w: &[f64], p: &SimplexPoint, beta: f64) -> Result<Vec<f64>> {
    check_shapes(problem, w, p)?;
    let fvals = problem.diagnostics().constraint_values(w);
    ensure_finite(&fvals, "constraint values")?;
    Ok(multipliers_from_values(&fvals, p.as_slice(), beta))
}

fn violations(fvals: &[f64]) -> (f64, f64) {
    let sum_sq = fvals.iter().map(|f| squared_hinge(*f)).sum();
    let max = fvals.iter().fold(0.0_f64, |acc, f| acc.max(*f));
    (sum_sq, max)
}

/// `(Σ_j max(f_j, 0)², max_j max(f_j, 0))` over all constraints.
pub fn feasibility_residuals(problem: &BlackBoxProblem, w: &[f64]) -> Result<(f64, f64)> {
    let fvals = problem.diagnostics().constraint_values(w);
    ensure_finite(&fvals, "constraint values")?;
    Ok(violations(&fvals))
}

/// Projected-gradient and raw residuals of `∇_p L = βφ − λp`.
fn p_residuals(fvals: &[f64], p: &SimplexPoint, beta: f64, lambda: f64) -> Result<(f64, f64)> {
    let grad: Vec<f64> =
        fvals.iter().zip(p.as_slice()).map(|(f, pj)| beta * squared_hinge(*f) - lambda * pj).collect();
    let raw = linalg::norm_sq(&grad);
    let stepped: Vec<f64> = p.as_slice().iter().zip(&grad).map(|(pj, g)| pj + g).collect();
    let proj = project_simplex(&stepped)?;
    let projected = p.as_slice().iter().zip(proj.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((projected, raw))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaxResiduals {
    pub grad_norm_sq_w: f64,
    pub grad_w_stderr: f64,
    pub grad_norm_sq_p: f64,
    pub grad_norm_sq_p_raw: f64,
}

/// Residuals of the minimax stationarity conditions at `(w, p)`.
pub fn minimax_residuals(
    problem: &BlackBoxProblem,
    w: &[f64],
    p: &SimplexPoint,
    beta: f64,
    lambda: f64,
    hi: &HighAccuracy,
) -> Result<MinimaxResiduals> {
    hi.validate()?;
    check_shapes(problem, w, p)?;
    let diag = problem.diagnostics();
    let fvals = diag.constraint_values(w);
    let f0 = diag.objective(w);
    ensure_finite(&fvals, "constraint values")?;
    let (grad_norm_sq_p, grad_norm_sq_p_raw) = p_residuals(&fvals, p, beta, lambda)?;
    let lagrangian = |obj: f64, fv: &[f64]| obj + beta * weighted_penalty(fv, p.as_slice());
    let [est] = zo_sweep(problem, w, hi, f0, &fvals, [&lagrangian])?;
    Ok(MinimaxResiduals {
        grad_norm_sq_w: est.norm_sq,
        grad_w_stderr: est.stderr,
        grad_norm_sq_p,
        grad_norm_sq_p_raw,
    })
}

/// Full report at `(w, p)`.
pub fn stationarity_report(
    problem: &BlackBoxProblem,
    w: &[f64],
    p: &SimplexPoint,
    beta: f64,
    lambda: f64,
    hi: &HighAccuracy,
) -> Result<StationarityReport> {
    hi.validate()?;
    check_shapes(problem, w, p)?;
    let diag = problem.diagnostics();
    let fvals = diag.constraint_values(w);
    let f0 = diag.objective(w);
    ensure_finite(&fvals, "constraint values")?;
    if !f0.is_finite() {
        return Err(Error::numerical("objective value"));
    }

    let (eps2_sq, max_violation) = violations(&fvals);
    let alphas = multipliers_from_values(&fvals, p.as_slice(), beta);
    let eps3_sq = alphas.iter().zip(&fvals).map(|(a, f)| (a * f) * (a * f)).sum();
    let (grad_norm_sq_p, grad_norm_sq_p_raw) = p_residuals(&fvals, p, beta, lambda)?;

    let phi: Vec<f64> = fvals.iter().map(|f| squared_hinge(*f)).collect();
    let p_star = argmax_concave_p(&phi, beta, lambda)?;

    let kkt = |obj: f64, fv: &[f64]| obj + linalg::dot(&alphas, fv);
    let lagrangian = |obj: f64, fv: &[f64]| obj + beta * weighted_penalty(fv, p.as_slice());
    let envelope = |obj: f64, fv: &[f64]| obj + beta * weighted_penalty(fv, p_star.as_slice());
    let [e1, gw, gg] = zo_sweep(problem, w, hi, f0, &fvals, [&kkt, &lagrangian, &envelope])?;

    let report = StationarityReport {
        eps1_sq: e1.norm_sq,
        eps1_stderr: e1.stderr,
        eps2_sq,
        eps3_sq,
        max_violation,
        alphas,
        grad_norm_sq_w: gw.norm_sq,
        grad_w_stderr: gw.stderr,
        grad_norm_sq_p,
        grad_norm_sq_p_raw,
        grad_norm_sq_g: gg.norm_sq,
        grad_g_stderr: gg.stderr,
    };
    let scalars = [
        report.eps1_sq,
        report.eps1_stderr,
        report.eps2_sq,
        report.eps3_sq,
        report.max_violation,
        report.grad_norm_sq_w,
        report.grad_w_stderr,
        report.grad_norm_sq_p,
        report.grad_norm_sq_p_raw,
        report.grad_norm_sq_g,
        report.grad_g_stderr,
    ];
    ensure_finite(&scalars, "stationarity report")?;
    ensure_finite(&report.alphas, "multipliers")?;
    Ok(report)
}

fn weighted_penalty(fvals: &[f64], p: &[f64]) -> f64 {
    fvals.iter().zip(p).map(|(f, pj)| pj * squared_hinge(*f)).sum()
}

fn check_shapes(problem: &BlackBoxProblem, w: &[f64], p: &SimplexPoint) -> Result<()> {
    linalg::ensure_same_len(w.len(), problem.dim(), "w")?;
    linalg::ensure_same_len(p.len(), problem.n_constraints(), "p")
}

#[derive(Clone, Copy, Debug)]
struct SweepEstimate {
    norm_sq: f64,
    stderr: f64,
}

type Combo<'a> = &'a dyn Fn(f64, &[f64]) -> f64;

/// Forward-difference gradient estimates of several functions
/// `F(f0(w), f(w))` built from the same full sweeps: per direction, every
/// objective component and every constraint is evaluated once at `w + μu`.
fn zo_sweep<const K: usize>(
    problem: &BlackBoxProblem,
    w: &[f64],
    hi: &HighAccuracy,
    f0: f64,
    fvals: &[f64],
    combos: [Combo<'_>; K],
) -> Result<[SweepEstimate; K]> {
    let d = w.len();
    let mut rng: ChaCha8Rng = rng::stream(hi.seed, rng::DIAGNOSTICS);
    let diag = problem.diagnostics();
    let base: Vec<f64> = combos.iter().map(|c| c(f0, fvals)).collect();

    // Welford accumulators per combo and coordinate.
    let mut mean = vec![vec![0.0; d]; K];
    let mut m2 = vec![vec![0.0; d]; K];
    for k in 0..hi.q_big {
        let dirs = GaussianDirections::sample(&mut rng, 1, d);
        let u = &dirs.vectors()[0];
        let x: Vec<f64> = w.iter().zip(u).map(|(a, b)| a + hi.mu_small * b).collect();
        let f0x = diag.objective(&x);
        let fx = diag.constraint_values(&x);
        for c in 0..K {
            let coef = (combos[c](f0x, &fx) - base[c]) / hi.mu_small;
            for i in 0..d {
                let s = coef * u[i];
                let delta = s - mean[c][i];
                mean[c][i] += delta / (k + 1) as f64;
                m2[c][i] += delta * (s - mean[c][i]);
            }
        }
    }
    let q = hi.q_big as f64;
    let mut out = [SweepEstimate { norm_sq: 0.0, stderr: 0.0 }; K];
    for c in 0..K {
        ensure_finite(&mean[c], "zeroth-order sweep")?;
        let var_sum: f64 = m2[c].iter().map(|v| v / (q - 1.0)).sum();
        out[c] = SweepEstimate { norm_sq: linalg::norm_sq(&mean[c]), stderr: (var_sum / q).sqrt() };
    }
    Ok(out)
}
