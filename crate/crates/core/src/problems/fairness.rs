use crate::error::{Error, Result};
use crate::linalg::{dot, neumaier_sum};
use crate::problem::{BlackBoxProblem, Oracles};

use super::Dataset;

pub const DEFAULT_C_COV: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FairnessLoss {
    /// `max(1 − y xᵀw, 0)`
    #[default]
    Hinge,
}

struct Fairness {
    data: Dataset,
    c_cov: f64,
    /// `z_ij − z̄_j`, row-major `n × r`.
    centered: Vec<f64>,
}

impl Fairness {
    /// `(1/n) Σ_i (z_ij − z̄_j) g(y_i, x_i)` for the first (`which = 0`) or
    /// second g function.
    fn covariance(&self, j: usize, which: usize, w: &[f64]) -> f64 {
        let (n, r) = (self.data.n(), self.data.sensitive_dim());
        let terms = (0..n).map(|i| {
            let (y, h) = (self.data.label(i), dot(self.data.row(i), w));
            let g = if which == 0 { (0.5 * (1.0 + y) * y * h).min(0.0) } else { (0.5 * (1.0 - y) * h).min(0.0) };
            self.centered[i * r + j] * g
        });
        neumaier_sum(terms) / n as f64
    }
}

impl Oracles for Fairness {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn n_components(&self) -> usize {
        self.data.n()
    }

    fn n_constraints(&self) -> usize {
        4 * self.data.sensitive_dim()
    }

    fn objective_component(&self, i: usize, w: &[f64]) -> f64 {
        (1.0 - self.data.label(i) * dot(self.data.row(i), w)).max(0.0)
    }

    fn constraint(&self, k: usize, w: &[f64]) -> f64 {
        let cov = self.covariance(k / 4, (k % 4) / 2, w);
        if k.is_multiple_of(2) {
            cov - self.c_cov
        } else {
            -cov - self.c_cov
        }
    }
}

/// Linear classification with covariance fairness constraints.
///
/// With `h = xᵀw`, `g₁ = min(0, (1+y)/2 · y·h)` and `g₂ = min(0, (1−y)/2 · h)`,
/// constraint `4j + 2s + t` for sensitive attribute `j` and `g_{s+1}` is
/// `cov − c` for `t = 0` and `−cov − c` for `t = 1`, where
/// `cov = (1/n) Σ_i (z_ij − z̄_j) g_{s+1}(y_i, x_i)`. Each constraint call is
/// one pass over the rows.
pub fn build_fairness_problem(data: &Dataset, c_cov: f64, loss: FairnessLoss) -> Result<BlackBoxProblem> {
    let FairnessLoss::Hinge = loss;
    if !(c_cov > 0.0 && c_cov.is_finite()) {
        return Err(Error::config("c_cov", "must be positive"));
    }
    if !data.has_sensitive() || data.sensitive_dim() == 0 {
        return Err(Error::Data("fairness constraints need sensitive attributes".into()));
    }
    if data.n() == 0 {
        return Err(Error::Data("fairness problem on an empty dataset".into()));
    }
    let (n, r) = (data.n(), data.sensitive_dim());
    let mut mean = vec![0.0; r];
    for i in 0..n {
        for (m, z) in mean.iter_mut().zip(data.sensitive_row(i)) {
            *m += f64::from(*z);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = (0..n)
        .flat_map(|i| data.sensitive_row(i).iter().zip(&mean).map(|(z, m)| f64::from(*z) - m))
        .collect();
    let oracles = Fairness { data: data.clone(), c_cov, centered };
    BlackBoxProblem::new("fairness", oracles)
}
