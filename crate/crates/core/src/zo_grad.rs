//! Gradient estimators.
//!
//! For `w`, forward-difference Gaussian smoothing:
//! `G_μ(w, F, u) = [(F(w + μu) − F(w)) / μ] · u`, averaged over a batch of
//! component functions and `q` shared directions. Base values `F(w)` are
//! evaluated once per batch entry and reused across directions, so a batch
//! of size `B` costs exactly `B·(q + 1)` oracle calls.
//!
//! For `p`, the exact mini-batch gradient
//! `H = (βm/|M₃|) Σ_{j∈M₃} e_j φ_j(w) − λp`, where `φ_j = max(f_j, 0)²`.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ensure_finite;
use crate::problem::BlackBoxProblem;
use crate::simplex::SimplexPoint;

/// Whether the oracle evaluations of one estimate run on worker threads.
/// Reductions are always index-ordered, so both modes give identical bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fanout {
    #[default]
    Sequential,
    Parallel,
}

/// `q` standard-normal direction vectors in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDirections {
    dim: usize,
    u: Vec<Vec<f64>>,
}

impl GaussianDirections {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, q: usize, dim: usize) -> Self {
        let u = (0..q).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
        GaussianDirections { dim, u }
    }

    pub fn from_vectors(u: Vec<Vec<f64>>) -> Result<Self> {
        let dim = u.first().map(Vec::len).ok_or_else(|| Error::Contract("no directions".into()))?;
        if dim == 0 || u.iter().any(|v| v.len() != dim) {
            return Err(Error::Contract("directions must share a positive dimension".into()));
        }
        for v in &u {
            ensure_finite(v, "direction")?;
        }
        Ok(GaussianDirections { dim, u })
    }

    pub fn q(&self) -> usize {
        self.u.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.u
    }
}

/// Squared hinge `max(f, 0)²`, propagating NaN.
pub fn squared_hinge(f: f64) -> f64 {
    if f > 0.0 {
        f * f
    } else if f.is_nan() {
        f
    } else {
        0.0
    }
}

/// `φ_j(w) = max(f_j(w), 0)²`; one constraint-oracle call.
pub fn penalty_value(problem: &BlackBoxProblem, j: usize, w: &[f64]) -> f64 {
    squared_hinge(problem.constraint(j, w))
}

fn check_common(problem: &BlackBoxProblem, w: &[f64], dirs: &GaussianDirections, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::config("mu", format!("smoothing radius must be positive, got {mu}")));
    }
    if w.len() != problem.dim() {
        return Err(Error::Contract(format!("w has length {}, problem dimension {}", w.len(), problem.dim())));
    }
    if dirs.dim() != problem.dim() {
        return Err(Error::Contract("direction dimension differs from problem dimension".into()));
    }
    Ok(())
}

fn check_batch(batch: &[usize], bound: usize, what: &str) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::Contract(format!("{what} batch is empty")));
    }
    if let Some(i) = batch.iter().find(|i| **i >= bound) {
        return Err(Error::Contract(format!("{what} index {i} out of range 0..{bound}")));
    }
    Ok(())
}

/// Core of every `w` estimator:
/// `scale · Σ_k [Σ_s weight_s (F_s(w + μu_k) − F_s(w)) / μ] u_k`.
#[allow(clippy::too_many_arguments)]
fn forward_difference<F>(
    w: &[f64],
    dirs: &GaussianDirections,
    mu: f64,
    items: &[usize],
    weights: Option<&[f64]>,
    scale: f64,
    fanout: Fanout,
    eval: F,
) -> Vec<f64>
where
    F: Fn(usize, &[f64]) -> f64 + Sync,
{
    let shifted: Vec<Vec<f64>> =
        dirs.vectors().iter().map(|u| w.iter().zip(u).map(|(x, d)| x + mu * d).collect()).collect();
    let eval_item = |&s: &usize| -> (f64, Vec<f64>) {
        let base = eval(s, w);
        let moved = shifted.iter().map(|x| eval(s, x)).collect();
        (base, moved)
    };
    let values: Vec<(f64, Vec<f64>)> = match fanout {
        Fanout::Sequential => items.iter().map(eval_item).collect(),
        Fanout::Parallel => items.par_iter().map(eval_item).collect(),
    };

    let q = dirs.q();
    let mut coef = vec![0.0; q];
    for (idx, (base, moved)) in values.iter().enumerate() {
        let wt = weights.map_or(1.0, |ws| ws[idx]);
        for (c, v) in coef.iter_mut().zip(moved) {
            *c += wt * ((v - base) / mu);
        }
    }
    let mut g = vec![0.0; w.len()];
    for (c, u) in coef.iter().zip(dirs.vectors()) {
        for (gi, ui) in g.iter_mut().zip(u) {
            *gi += c * ui;
        }
    }
    for gi in &mut g {
        *gi *= scale;
    }
    g
}

/// Smoothed gradient of `(1/|M₁|) Σ_{i∈M₁} ℓ_i` at `w`.
pub fn zo_objective_grad(
    problem: &BlackBoxProblem,
    w: &[f64],
    batch: &[usize],
    dirs: &GaussianDirections,
    mu: f64,
    fanout: Fanout,
) -> Result<Vec<f64>> {
    check_common(problem, w, dirs, mu)?;
    check_batch(batch, problem.n_components(), "objective")?;
    let scale = 1.0 / (dirs.q() * batch.len()) as f64;
    let g = forward_difference(w, dirs, mu, batch, None, scale, fanout, |i, x| problem.objective_component(i, x));
    ensure_finite(&g, "objective gradient estimate")?;
    Ok(g)
}

/// Smoothed gradient of `(1/|M₂|) Σ_{j∈M₂} φ_j` at `w`. The caller draws
/// `M₂` from `p`; `p` itself does not enter the formula.
pub fn zo_penalty_grad(
    problem: &BlackBoxProblem,
    w: &[f64],
    batch: &[usize],
    dirs: &GaussianDirections,
    mu: f64,
    fanout: Fanout,
) -> Result<Vec<f64>> {
    check_common(problem, w, dirs, mu)?;
    check_batch(batch, problem.n_constraints(), "constraint")?;
    let scale = 1.0 / (dirs.q() * batch.len()) as f64;
    let g = forward_difference(w, dirs, mu, batch, None, scale, fanout, |j, x| penalty_value(problem, j, x));
    ensure_finite(&g, "penalty gradient estimate")?;
    Ok(g)
}

/// Smoothed gradient of the exact weighted penalty `Σ_j p_j φ_j` over all
/// `m` constraints: `m·(q + 1)` constraint calls.
pub fn zo_weighted_penalty_grad(
    problem: &BlackBoxProblem,
    w: &[f64],
    p: &SimplexPoint,
    dirs: &GaussianDirections,
    mu: f64,
    fanout: Fanout,
) -> Result<Vec<f64>> {
    check_common(problem, w, dirs, mu)?;
    if p.len() != problem.n_constraints() {
        return Err(Error::Contract("p length differs from constraint count".into()));
    }
    let all: Vec<usize> = (0..problem.n_constraints()).collect();
    let scale = 1.0 / dirs.q() as f64;
    let g = forward_difference(w, dirs, mu, &all, Some(p.as_slice()), scale, fanout, |j, x| {
        penalty_value(problem, j, x)
    });
    ensure_finite(&g, "weighted penalty gradient estimate")?;
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WGradEstimate {
    pub g: Vec<f64>,
    pub oracle_calls_used: u64,
}

/// `G^L = G^f + β·G^φ` with one shared direction set.
#[allow(clippy::too_many_arguments)]
pub fn zo_full_grad_w(
    problem: &BlackBoxProblem,
    w: &[f64],
    data_batch: &[usize],
    cons_batch: &[usize],
    dirs: &GaussianDirections,
    mu: f64,
    beta: f64,
    fanout: Fanout,
) -> Result<WGradEstimate> {
    let mut g = zo_objective_grad(problem, w, data_batch, dirs, mu, fanout)?;
    let pen = zo_penalty_grad(problem, w, cons_batch, dirs, mu, fanout)?;
    for (gi, pi) in g.iter_mut().zip(&pen) {
        *gi += beta * pi;
    }
    ensure_finite(&g, "w gradient estimate")?;
    let calls = ((data_batch.len() + cons_batch.len()) * (dirs.q() + 1)) as u64;
    Ok(WGradEstimate { g, oracle_calls_used: calls })
}

/// Mini-batch `p` gradient stored as sparse penalty terms plus the dense
/// `−λp` part, which is applied on materialization.
#[derive(Clone, Debug, PartialEq)]
pub struct PGradEstimate {
    /// `(j, βm/|M₃| · φ_j(w))` for each sampled `j`, batch order.
    pub entries: Vec<(usize, f64)>,
    pub lambda: f64,
    pub oracle_calls_used: u64,
}

impl PGradEstimate {
    /// The full `m`-vector `Σ entries − λp`.
    pub fn to_dense(&self, p: &SimplexPoint) -> Vec<f64> {
        let mut h: Vec<f64> = p.as_slice().iter().map(|x| -self.lambda * x).collect();
        for &(j, v) in &self.entries {
            h[j] += v;
        }
        h
    }
}

/// `H = (βm/|M₃|) Σ_{j∈M₃} e_j φ_j(w) − λp`; `|M₃|` constraint calls.
pub fn stoch_grad_p(
    problem: &BlackBoxProblem,
    w: &[f64],
    p: &SimplexPoint,
    batch: &[usize],
    beta: f64,
    lambda: f64,
) -> Result<PGradEstimate> {
    let m = problem.n_constraints();
    check_batch(batch, m, "constraint")?;
    if p.len() != m {
        return Err(Error::Contract("p length differs from constraint count".into()));
    }
    if w.len() != problem.dim() {
        return Err(Error::Contract("w length differs from problem dimension".into()));
    }
    let scale = beta * m as f64 / batch.len() as f64;
    let mut entries = Vec::with_capacity(batch.len());
    for &j in batch {
        let v = scale * penalty_value(problem, j, w);
        if !v.is_finite() {
            return Err(Error::numerical(format!("penalty of constraint {j}")));
        }
        entries.push((j, v));
    }
    Ok(PGradEstimate { entries, lambda, oracle_calls_used: batch.len() as u64 })
}

/// `k` distinct indices from `0..n`, uniformly, in increasing order. When
/// `k ≥ n` the whole range is returned and no randomness is consumed.
pub fn sample_without_replacement<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut idx = index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}
