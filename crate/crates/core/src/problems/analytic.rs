use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::problem::{BlackBoxProblem, FnOracles};
use crate::rng;

/// A problem with a known constrained minimizer.
pub struct AnalyticCase {
    pub name: &'static str,
    pub problem: BlackBoxProblem,
    pub optimum: Vec<f64>,
    /// Admissible Euclidean distance to `optimum`.
    pub tolerance: f64,
}

const HALF_SPACE_SEED: u64 = 20_240_601;

/// Three cases:
///
/// - `one_dim`: `min w²` s.t. `1 − w ≤ 0`, optimum `1`;
/// - `half_spaces`: `min ‖w − w̄‖²` in three dimensions under five random
///   half-spaces `aᵢᵀw ≤ bᵢ`, optimum by active-set enumeration;
/// - `replicated_bounds`: `min ‖w‖²` in ten dimensions under `m = 10⁴`
///   constraints `1/m − w_{k mod 10} ≤ 0`, optimum `wⱼ = 1/m`.
pub fn build_analytic_suite() -> Vec<AnalyticCase> {
    vec![one_dim(), half_spaces(), replicated_bounds()]
}

fn one_dim() -> AnalyticCase {
    let o = FnOracles::new(1, 1, 1, |_, w: &[f64]| w[0] * w[0], |_, w: &[f64]| 1.0 - w[0]);
    AnalyticCase {
        name: "one_dim",
        problem: BlackBoxProblem::new("one_dim", o).expect("nonzero sizes"),
        optimum: vec![1.0],
        tolerance: 1e-2,
    }
}

fn half_spaces() -> AnalyticCase {
    let (d, k) = (3, 5);
    let mut g = rng::stream(HALF_SPACE_SEED, rng::DATA);
    let mut normal = |scale: f64| -> f64 { scale * g.sample::<f64, _>(StandardNormal) };
    // Two of the half-spaces pass through an anchor point and push the
    // center out of the feasible set; the others leave slack at the anchor.
    let anchor: Vec<f64> = (0..d).map(|_| normal(1.0)).collect();
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    let mut center = anchor.clone();
    for i in 0..k {
        let row: Vec<f64> = (0..d).map(|_| normal(1.0)).collect();
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ai: Vec<f64> = row.iter().map(|x| x / norm).collect();
        let at_anchor: f64 = ai.iter().zip(&anchor).map(|(x, y)| x * y).sum();
        if i < 2 {
            let push = 0.5 + normal(0.5).abs();
            center.iter_mut().zip(&ai).for_each(|(c, x)| *c += push * x);
            b.push(at_anchor);
        } else {
            b.push(at_anchor + 0.5 + normal(0.5).abs());
        }
        a.push(ai);
    }
    let optimum = nearest_in_polyhedron(&center, &a, &b);
    let (cw, aa, bb) = (center.clone(), a.clone(), b.clone());
    let o = FnOracles::new(
        d,
        1,
        k,
        move |_, w: &[f64]| w.iter().zip(&cw).map(|(x, c)| (x - c) * (x - c)).sum(),
        move |j, w: &[f64]| aa[j].iter().zip(w).map(|(ai, x)| ai * x).sum::<f64>() - bb[j],
    );
    AnalyticCase {
        name: "half_spaces",
        problem: BlackBoxProblem::new("half_spaces", o).expect("nonzero sizes"),
        optimum,
        tolerance: 5e-2,
    }
}

fn replicated_bounds() -> AnalyticCase {
    let (d, m) = (10, 10_000);
    let floor = 1.0 / m as f64;
    let o = FnOracles::new(
        d,
        1,
        m,
        |_, w: &[f64]| w.iter().map(|x| x * x).sum(),
        move |k, w: &[f64]| floor - w[k % d],
    );
    AnalyticCase {
        name: "replicated_bounds",
        problem: BlackBoxProblem::new("replicated_bounds", o).expect("nonzero sizes"),
        optimum: vec![floor; d],
        tolerance: 1e-2,
    }
}

/// Euclidean projection of `c` onto `{w : aᵢᵀw ≤ bᵢ}` by trying every active
/// set of size at most `d` and keeping the feasible KKT point.
pub(crate) fn nearest_in_polyhedron(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let d = c.len();
    let feasible = |w: &[f64]| a.iter().zip(b).all(|(ai, bi)| ai.iter().zip(w).map(|(x, y)| x * y).sum::<f64>() <= bi + 1e-10);
    let k = a.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let active: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if active.len() > d {
            continue;
        }
        let cv = DVector::from_column_slice(c);
        let w = if active.is_empty() {
            cv
        } else {
            let am = DMatrix::from_fn(active.len(), d, |r, col| a[active[r]][col]);
            let rhs = &am * &cv - DVector::from_iterator(active.len(), active.iter().map(|&i| b[i]));
            let gram = &am * am.transpose();
            let Some(nu) = gram.lu().solve(&rhs) else { continue };
            if nu.iter().any(|v| *v < -1e-12) {
                continue;
            }
            cv - am.transpose() * nu
        };
        let w: Vec<f64> = w.iter().copied().collect();
        if !feasible(&w) {
            continue;
        }
        let dist: f64 = w.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, w));
        }
    }
    best.expect("a nonempty polyhedron has a nearest point").1
}
