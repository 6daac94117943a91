use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::problem::{BlackBoxProblem, Oracles};

use super::Dataset;

pub const DEFAULT_C_LOSS: f64 = 1.0;

struct Pairwise {
    data: Dataset,
    c_sq: f64,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

impl Oracles for Pairwise {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn n_components(&self) -> usize {
        self.data.n()
    }

    fn n_constraints(&self) -> usize {
        self.pos.len() * self.neg.len()
    }

    fn objective_component(&self, i: usize, w: &[f64]) -> f64 {
        let r = self.data.label(i) - dot(self.data.row(i), w);
        self.c_sq * (1.0 - (-r * r / self.c_sq).exp())
    }

    fn constraint(&self, k: usize, w: &[f64]) -> f64 {
        let n_neg = self.neg.len();
        let (i, j) = (self.pos[k / n_neg], self.neg[k % n_neg]);
        dot(self.data.row(j), w) - dot(self.data.row(i), w)
    }
}

/// Linear classification with a robust squared loss
/// `ℓ_i(w) = c²(1 − exp(−(y_i − x_iᵀw)²/c²))` and one ranking constraint
/// `x_jᵀw − x_iᵀw ≤ 0` per (positive `i`, negative `j`) pair.
///
/// Constraint `k` is the pair `(k / n_neg, k mod n_neg)`, counting positives
/// and negatives separately in dataset order. Pairs are never materialized.
pub fn build_pairwise_problem(data: &Dataset, c_loss: f64) -> Result<BlackBoxProblem> {
    if !(c_loss > 0.0 && c_loss.is_finite()) {
        return Err(Error::config("c_loss", "must be positive"));
    }
    let pos: Vec<usize> = (0..data.n()).filter(|&i| data.label(i) > 0.0).collect();
    let neg: Vec<usize> = (0..data.n()).filter(|&i| data.label(i) < 0.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Data(format!(
            "pairwise constraints need both classes ({} positive, {} negative rows)",
            pos.len(),
            neg.len()
        )));
    }
    let oracles = Pairwise { data: data.clone(), c_sq: c_loss * c_loss, pos, neg };
    BlackBoxProblem::new("pairwise", oracles)
}
