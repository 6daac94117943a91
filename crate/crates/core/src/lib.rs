//! Doubly stochastic zeroth-order optimization for black-box problems with a
//! very large number of inequality constraints.
//!
//! The constrained problem
//!
//! ```text
//! min_w  f0(w) = (1/n) Σ_i ℓ_i(w)   s.t.  f_j(w) ≤ 0,  j = 1..m
//! ```
//!
//! is rewritten as the penalized minimax problem
//!
//! ```text
//! min_w max_{p ∈ Δ^m}  L(w, p) = f0(w) + β Σ_j p_j max(f_j(w), 0)² − (λ/2)‖p‖²
//! ```
//!
//! and solved with only function values: Gaussian-smoothing gradient
//! estimates for `w` over a data batch and a constraint batch drawn from `p`,
//! an exact stochastic gradient for `p`, exponential-moving-average momentum
//! and root-norm adaptive steps. See [`dszog_solve`].
//!
//! All oracles are indexed scalars (one `ℓ_i` or `f_j` at a time) behind
//! [`BlackBoxProblem`], which counts every call so query complexity is
//! directly observable.

pub mod baselines;
pub mod config;
pub mod dataio;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod problems;
pub mod record;
pub mod rng;
pub mod simplex;
pub mod solver;
pub mod zo_grad;

pub use baselines::{full_batch_gda_solve, zopsgd_solve, FeasibleSet};
pub use config::DszogConfig;
pub use error::{Error, Result};
pub use metrics::{HighAccuracy, StationarityReport};
pub use problem::{BlackBoxProblem, FnOracles, OracleCounts, Oracles};
pub use record::{RecordRow, RunRecord};
pub use simplex::{argmax_concave_p, project_simplex, CategoricalSampler, SimplexPoint};
pub use solver::{dszog_solve, DszogState, NoObserver, Observer, SolveOutcome, Termination};
pub use zo_grad::{Fanout, GaussianDirections, PGradEstimate, WGradEstimate};
