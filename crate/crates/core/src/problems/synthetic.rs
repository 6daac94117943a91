use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

use super::Dataset;

pub const DEFAULT_RHO: f64 = 0.6;

/// Distance between the two class means along the separating direction.
const SEPARATION: f64 = 2.0;

/// Two Gaussian class clouds with binary sensitive attributes, using
/// [`DEFAULT_RHO`]. See [`generate_fairness_dataset_with_rho`].
pub fn generate_fairness_dataset(n: usize, d: usize, r: usize, seed: u64) -> Result<Dataset> {
    generate_fairness_dataset_with_rho(n, d, r, DEFAULT_RHO, seed)
}

/// Labels are fair coin flips. `r` of the `d` feature columns, chosen at
/// random, hold the sensitive bits: each bit copies the label indicator
/// `(1+y)/2` with probability `rho` and is a fair coin otherwise. The other
/// columns are `y·(s/2)·v + N(0, I)` for a random unit vector `v`, so the
/// classes are separated by `s = 2` along `v`.
pub fn generate_fairness_dataset_with_rho(n: usize, d: usize, r: usize, rho: f64, seed: u64) -> Result<Dataset> {
    if r > d {
        return Err(Error::config("r", format!("{r} sensitive attributes exceed dimension {d}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::config("rho", "must lie in [0, 1]"));
    }
    let mut g = rng::stream(seed, rng::DATA);
    let mut cols: Vec<usize> = (0..d).collect();
    cols.shuffle(&mut g);
    let mut sensitive_cols = cols[..r].to_vec();
    sensitive_cols.sort_unstable();
    let is_sensitive: Vec<bool> = (0..d).map(|c| sensitive_cols.contains(&c)).collect();

    let mut v: Vec<f64> = (0..d).map(|c| if is_sensitive[c] { 0.0 } else { g.sample(StandardNormal) }).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut bits = Vec::with_capacity(r);
    for _ in 0..n {
        let y = if g.random_bool(0.5) { 1.0 } else { -1.0 };
        labels.push(y);
        bits.clear();
        for _ in 0..r {
            let z = if g.random_bool(rho) { y > 0.0 } else { g.random_bool(0.5) };
            bits.push(u8::from(z));
        }
        let mut t = 0;
        for c in 0..d {
            if is_sensitive[c] {
                features.push(f64::from(bits[t]));
                t += 1;
            } else {
                let noise: f64 = g.sample(StandardNormal);
                features.push(y * 0.5 * SEPARATION * v[c] + noise);
            }
        }
    }
    Dataset::new(d, features, labels)?.with_sensitive_columns(&sensitive_cols)
}
