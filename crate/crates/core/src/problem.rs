//! The black-box problem abstraction seen by every solver.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Indexed scalar oracles of a constrained finite-sum problem.
///
/// `objective_component(i, w)` returns `ℓ_i(w)` and `constraint(j, w)` returns
/// `f_j(w)`; the problem is `min (1/n) Σ ℓ_i(w)` subject to `f_j(w) ≤ 0`.
/// Implementations must be pure: the same `(index, w)` always yields the same
/// value. They may be called from several threads at once.
pub trait Oracles: Send + Sync {
    fn dim(&self) -> usize;
    fn n_components(&self) -> usize;
    fn n_constraints(&self) -> usize;
    fn objective_component(&self, i: usize, w: &[f64]) -> f64;
    fn constraint(&self, j: usize, w: &[f64]) -> f64;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCounts {
    pub objective: u64,
    pub constraint: u64,
}

impl OracleCounts {
    pub fn total(&self) -> u64 {
        self.objective + self.constraint
    }
}

impl std::ops::Sub for OracleCounts {
    type Output = OracleCounts;

    fn sub(self, rhs: Self) -> Self {
        OracleCounts {
            objective: self.objective - rhs.objective,
            constraint: self.constraint - rhs.constraint,
        }
    }
}

#[derive(Debug, Default)]
struct Tally {
    objective: AtomicU64,
    constraint: AtomicU64,
}

impl Tally {
    fn snapshot(&self) -> OracleCounts {
        OracleCounts {
            objective: self.objective.load(Ordering::Relaxed),
            constraint: self.constraint.load(Ordering::Relaxed),
        }
    }
}

/// A problem instance with call-counted oracles.
///
/// Calls made through the problem itself are tallied as solver calls; calls
/// made through [`BlackBoxProblem::diagnostics`] (full sweeps for metrics and
/// stationarity reports) are tallied separately, so the query cost of an
/// algorithm can be read off exactly.
pub struct BlackBoxProblem {
    name: String,
    dim: usize,
    n_components: usize,
    n_constraints: usize,
    oracles: Box<dyn Oracles>,
    solver: Tally,
    diagnostic: Tally,
}

impl fmt::Debug for BlackBoxProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("n_components", &self.n_components)
            .field("n_constraints", &self.n_constraints)
            .finish()
    }
}

impl BlackBoxProblem {
    pub fn new(name: impl Into<String>, oracles: impl Oracles + 'static) -> Result<Self> {
        let (dim, n, m) = (oracles.dim(), oracles.n_components(), oracles.n_constraints());
        if dim == 0 {
            return Err(Error::Data("problem dimension must be positive".into()));
        }
        if n == 0 {
            return Err(Error::Data("problem needs at least one objective component".into()));
        }
        if m == 0 {
            return Err(Error::Data("problem needs at least one constraint".into()));
        }
        Ok(BlackBoxProblem {
            name: name.into(),
            dim,
            n_components: n,
            n_constraints: m,
            oracles: Box::new(oracles),
            solver: Tally::default(),
            diagnostic: Tally::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    pub fn objective_component(&self, i: usize, w: &[f64]) -> f64 {
        debug_assert!(i < self.n_components);
        self.solver.objective.fetch_add(1, Ordering::Relaxed);
        self.oracles.objective_component(i, w)
    }

    pub fn constraint(&self, j: usize, w: &[f64]) -> f64 {
        debug_assert!(j < self.n_constraints);
        self.solver.constraint.fetch_add(1, Ordering::Relaxed);
        self.oracles.constraint(j, w)
    }

    /// Oracle access whose calls are tallied as diagnostic rather than
    /// solver work.
    pub fn diagnostics(&self) -> Diagnostics<'_> {
        Diagnostics { problem: self }
    }

    pub fn solver_calls(&self) -> OracleCounts {
        self.solver.snapshot()
    }

    pub fn diagnostic_calls(&self) -> OracleCounts {
        self.diagnostic.snapshot()
    }

    pub fn total_calls(&self) -> OracleCounts {
        let s = self.solver_calls();
        let d = self.diagnostic_calls();
        OracleCounts { objective: s.objective + d.objective, constraint: s.constraint + d.constraint }
    }
}

#[derive(Clone, Copy)]
pub struct Diagnostics<'a> {
    problem: &'a BlackBoxProblem,
}

impl Diagnostics<'_> {
    pub fn objective_component(&self, i: usize, w: &[f64]) -> f64 {
        self.problem.diagnostic.objective.fetch_add(1, Ordering::Relaxed);
        self.problem.oracles.objective_component(i, w)
    }

    pub fn constraint(&self, j: usize, w: &[f64]) -> f64 {
        self.problem.diagnostic.constraint.fetch_add(1, Ordering::Relaxed);
        self.problem.oracles.constraint(j, w)
    }

    /// `f0(w) = (1/n) Σ ℓ_i(w)` over all components.
    pub fn objective(&self, w: &[f64]) -> f64 {
        let n = self.problem.n_components;
        (0..n).map(|i| self.objective_component(i, w)).sum::<f64>() / n as f64
    }

    /// All constraint values `f_j(w)`, index order.
    pub fn constraint_values(&self, w: &[f64]) -> Vec<f64> {
        (0..self.problem.n_constraints).map(|j| self.constraint(j, w)).collect()
    }
}

/// Oracles backed by two closures.
pub struct FnOracles<L, C> {
    dim: usize,
    n_components: usize,
    n_constraints: usize,
    objective: L,
    constraint: C,
}

impl<L, C> FnOracles<L, C>
where
    L: Fn(usize, &[f64]) -> f64 + Send + Sync,
    C: Fn(usize, &[f64]) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, n_components: usize, n_constraints: usize, objective: L, constraint: C) -> Self {
        FnOracles { dim, n_components, n_constraints, objective, constraint }
    }
}

impl<L, C> Oracles for FnOracles<L, C>
where
    L: Fn(usize, &[f64]) -> f64 + Send + Sync,
    C: Fn(usize, &[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_components(&self) -> usize {
        self.n_components
    }

    fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    fn objective_component(&self, i: usize, w: &[f64]) -> f64 {
        (self.objective)(i, w)
    }

    fn constraint(&self, j: usize, w: &[f64]) -> f64 {
        (self.constraint)(j, w)
    }
}
