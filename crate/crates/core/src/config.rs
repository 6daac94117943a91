//! Solver hyperparameters.

use crate::error::{Error, Result};
use crate::linalg;

/// Hyperparameters of the doubly stochastic solver.
///
/// `time_budget_s`, `diag_q`, `diag_mu` and `parallel` are run controls
/// rather than algorithm inputs: a wall-clock cap, the accuracy of the final
/// stationarity report, and whether estimator oracle calls fan out over
/// worker threads (results are identical either way).
#[derive(Clone, Debug, PartialEq)]
pub struct DszogConfig {
    /// Penalty weight β.
    pub beta: f64,
    /// Concavity regularizer λ on `p`.
    pub lambda: f64,
    /// Gaussian smoothing radius μ.
    pub mu: f64,
    /// Directions per gradient estimate.
    pub q: usize,
    /// Objective components per batch.
    pub batch_data: usize,
    /// Constraints drawn from `p` for the `w` gradient.
    pub batch_cons_w: usize,
    /// Constraints drawn uniformly for the `p` gradient.
    pub batch_cons_p: usize,
    pub eta_w: f64,
    pub eta_p: f64,
    /// Interpolation weight for the `p` update, in (0, 1].
    pub a: f64,
    /// Moving-average weight, in (0, 1).
    pub b: f64,
    /// Guard added to the adaptive-step denominator.
    pub c_eps: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub metric_every: usize,
    pub time_budget_s: Option<f64>,
    pub diag_q: usize,
    pub diag_mu: f64,
    pub parallel: bool,
}

impl Default for DszogConfig {
    fn default() -> Self {
        DszogConfig {
            beta: 10.0,
            lambda: 1e-6,
            mu: 1e-4,
            q: 10,
            batch_data: 128,
            batch_cons_w: 128,
            batch_cons_p: 128,
            eta_w: 1e-3,
            eta_p: 1e-2,
            a: 0.9,
            b: 0.5,
            c_eps: 1e-8,
            max_iters: 10_000,
            seed: 0,
            metric_every: 100,
            time_budget_s: None,
            diag_q: 32,
            diag_mu: 1e-5,
            parallel: false,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be a positive finite number, got {v}")))
    }
}

fn positive_count(field: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::config(field, "must be at least 1"))
    }
}

impl DszogConfig {
    pub fn validate(&self) -> Result<()> {
        positive("beta", self.beta)?;
        positive("lambda", self.lambda)?;
        positive("mu", self.mu)?;
        positive_count("q", self.q)?;
        positive_count("batch_data", self.batch_data)?;
        positive_count("batch_cons_w", self.batch_cons_w)?;
        positive_count("batch_cons_p", self.batch_cons_p)?;
        positive("eta_w", self.eta_w)?;
        positive("eta_p", self.eta_p)?;
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(Error::config("a", format!("must lie in (0, 1], got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::config("b", format!("must lie in (0, 1), got {}", self.b)));
        }
        positive("c_eps", self.c_eps)?;
        positive_count("max_iters", self.max_iters)?;
        positive_count("metric_every", self.metric_every)?;
        if let Some(t) = self.time_budget_s {
            positive("time_budget_s", t)?;
        }
        if self.diag_q < 2 {
            return Err(Error::config("diag_q", "must be at least 2"));
        }
        positive("diag_mu", self.diag_mu)?;
        Ok(())
    }

    /// Smoothing radius scaled to the starting point, `1e-4 · max(1, ‖w0‖)`.
    pub fn scaled_mu(w0: &[f64]) -> f64 {
        1e-4 * linalg::norm(w0).max(1.0)
    }

    /// Every field as a `(name, value)` pair, in declaration order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("beta", self.beta.to_string()),
            ("lambda", self.lambda.to_string()),
            ("mu", self.mu.to_string()),
            ("q", self.q.to_string()),
            ("batch_data", self.batch_data.to_string()),
            ("batch_cons_w", self.batch_cons_w.to_string()),
            ("batch_cons_p", self.batch_cons_p.to_string()),
            ("eta_w", self.eta_w.to_string()),
            ("eta_p", self.eta_p.to_string()),
            ("a", self.a.to_string()),
            ("b", self.b.to_string()),
            ("c_eps", self.c_eps.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("seed", self.seed.to_string()),
            ("metric_every", self.metric_every.to_string()),
            ("time_budget_s", self.time_budget_s.map_or_else(|| "none".to_string(), |t| t.to_string())),
            ("diag_q", self.diag_q.to_string()),
            ("diag_mu", self.diag_mu.to_string()),
            ("parallel", self.parallel.to_string()),
        ]
    }
}
