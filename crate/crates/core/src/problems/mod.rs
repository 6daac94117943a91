//! Benchmark problems: pairwise-constrained and fairness-constrained linear
//! classification, analytic problems with known optima, and a synthetic
//! generator for fairness data.

mod analytic;
mod fairness;
mod pairwise;
mod synthetic;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rng;

pub use analytic::{build_analytic_suite, AnalyticCase};
pub use fairness::{build_fairness_problem, FairnessLoss, DEFAULT_C_COV};
pub use pairwise::{build_pairwise_problem, DEFAULT_C_LOSS};
pub use synthetic::{generate_fairness_dataset, generate_fairness_dataset_with_rho, DEFAULT_RHO};

/// Labelled rows with optional binary sensitive attributes.
///
/// Features are dense and row-major. Labels are `−1.0` or `+1.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    r: usize,
    sensitive: Option<Vec<u8>>,
    /// Feature columns the sensitive bits were read from, if any.
    sensitive_cols: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(d: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if features.len() != n * d {
            return Err(Error::Data(format!("{} feature values for {n} rows of dimension {d}", features.len())));
        }
        if let Some(i) = labels.iter().position(|y| *y != 1.0 && *y != -1.0) {
            return Err(Error::Data(format!("label {} at row {i} is not ±1", labels[i])));
        }
        if !features.iter().all(|x| x.is_finite()) {
            return Err(Error::Data("non-finite feature value".into()));
        }
        Ok(Dataset { n, d, features, labels, r: 0, sensitive: None, sensitive_cols: None })
    }

    /// Attaches an `n × r` row-major matrix of sensitive bits.
    pub fn with_sensitive(mut self, r: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != self.n * r {
            return Err(Error::Data(format!("{} sensitive values for {} rows of width {r}", bits.len(), self.n)));
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::Data("sensitive entries must be 0 or 1".into()));
        }
        self.r = r;
        self.sensitive = Some(bits);
        self.sensitive_cols = None;
        Ok(self)
    }

    /// Uses the feature columns `cols` as sensitive attributes. Every value
    /// in those columns must be 0 or 1.
    pub fn with_sensitive_columns(self, cols: &[usize]) -> Result<Self> {
        if let Some(c) = cols.iter().find(|c| **c >= self.d) {
            return Err(Error::Data(format!("sensitive column {c} out of range for dimension {}", self.d)));
        }
        let mut bits = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            let row = self.row(i);
            for &c in cols {
                let x = row[c];
                if x == 0.0 {
                    bits.push(0);
                } else if x == 1.0 {
                    bits.push(1);
                } else {
                    return Err(Error::Data(format!("sensitive column {c} has value {x} at row {i}")));
                }
            }
        }
        let mut out = self.with_sensitive(cols.len(), bits)?;
        out.sensitive_cols = Some(cols.to_vec());
        Ok(out)
    }

    /// Feature columns holding the sensitive attributes, when they came
    /// from [`Dataset::with_sensitive_columns`].
    pub fn sensitive_columns(&self) -> Option<&[usize]> {
        self.sensitive_cols.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Number of sensitive attributes (0 when absent).
    pub fn sensitive_dim(&self) -> usize {
        self.r
    }

    pub fn has_sensitive(&self) -> bool {
        self.sensitive.is_some()
    }

    /// Sensitive bits of row `i`; empty when absent.
    pub fn sensitive_row(&self, i: usize) -> &[u8] {
        match &self.sensitive {
            Some(s) => &s[i * self.r..(i + 1) * self.r],
            None => &[],
        }
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|y| **y > 0.0).count();
        (pos, self.n - pos)
    }

    /// The rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        let mut sensitive = self.sensitive.as_ref().map(|_| Vec::with_capacity(indices.len() * self.r));
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            if let Some(s) = sensitive.as_mut() {
                s.extend_from_slice(self.sensitive_row(i));
            }
        }
        Dataset {
            n: indices.len(),
            d: self.d,
            features,
            labels,
            r: self.r,
            sensitive,
            sensitive_cols: self.sensitive_cols.clone(),
        }
    }
}

/// Train/test/validation fractions and the shuffle seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train: 0.5, test: 0.3, validation: 0.2, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("test", self.test), ("validation", self.validation)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config(format!("split.{name}"), "fraction must lie in (0, 1)"));
            }
        }
        if (self.train + self.test + self.validation - 1.0).abs() > 1e-9 {
            return Err(Error::config("split", "fractions must sum to 1"));
        }
        Ok(())
    }
}

/// Shuffled `(train, test, validation)` split. Train and test sizes are the
/// rounded fractions of `n`; validation takes the remainder.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    let n = data.n();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(spec.seed, rng::DATA));
    let n_train = ((spec.train * n as f64).round() as usize).min(n);
    let n_test = ((spec.test * n as f64).round() as usize).min(n - n_train);
    let (train, rest) = idx.split_at(n_train);
    let (test, validation) = rest.split_at(n_test);
    Ok((data.select(train), data.select(test), data.select(validation)))
}

/// Fraction of rows with `sign(xᵀw) = y`, counting `sign(0)` as `+1`.
/// An empty dataset has accuracy 0.
pub fn accuracy(w: &[f64], data: &Dataset) -> f64 {
    if data.n() == 0 {
        return 0.0;
    }
    let hits = (0..data.n())
        .filter(|&i| {
            let s = if dot(data.row(i), w) >= 0.0 { 1.0 } else { -1.0 };
            s == data.label(i)
        })
        .count();
    hits as f64 / data.n() as f64
}
