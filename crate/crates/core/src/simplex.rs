//! The probability simplex: points, Euclidean projection, categorical
//! sampling, and the closed-form maximizer of the strongly concave inner
//! problem.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::neumaier_sum;

/// Tolerance on `Σ p_j = 1` for a constructed point.
pub const SUM_TOL: f64 = 1e-12;

/// A probability vector over `m ≥ 1` constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates `p` (finite, each entry in `[0, 1]`, sum within
    /// [`SUM_TOL`] of one) and renormalizes it.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Contract("simplex point needs at least one entry".into()));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0 || **x > 1.0) {
            return Err(Error::Contract(format!("simplex entry {x} outside [0, 1]")));
        }
        let s = neumaier_sum(p.iter().copied());
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::Contract(format!("simplex entries sum to {s}")));
        }
        Ok(Self::normalized(p))
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform simplex point over zero entries");
        SimplexPoint(vec![1.0 / m as f64; m])
    }

    /// Scales nonnegative weights with a positive sum onto the simplex.
    fn normalized(mut p: Vec<f64>) -> Self {
        if p.len() == 1 {
            return SimplexPoint(vec![1.0]);
        }
        let s = lane_sum(&p);
        debug_assert!(s > 0.0 && s.is_finite());
        // Points already summing to one within a few ulps are left untouched,
        // which keeps renormalization idempotent.
        if (s - 1.0).abs() > 4.0 * f64::EPSILON {
            for x in &mut p {
                *x /= s;
            }
        }
        SimplexPoint(p)
    }

    /// `(1 − a)·self + a·other`, renormalized.
    pub fn interpolate(&self, other: &SimplexPoint, a: f64) -> Result<SimplexPoint> {
        if self.len() != other.len() {
            return Err(Error::Contract("interpolating simplex points of different length".into()));
        }
        let v = self.0.iter().zip(&other.0).map(|(p, q)| (1.0 - a) * p + a * q).collect();
        Ok(Self::normalized(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for SimplexPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

// Four-accumulator sum; vectorizes, unlike compensated summation.
fn lane_sum(v: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = v.chunks_exact(4);
    let tail: f64 = chunks.remainder().iter().sum();
    for c in chunks {
        for (a, x) in acc.iter_mut().zip(c) {
            *a += x;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Euclidean projection of `v` onto the probability simplex.
///
/// Uses Condat's single-pass pivot scheme, which finds the threshold `τ`
/// with `Σ max(v_j − τ, 0) = 1` in linear time on average; the result is
/// `max(v − τ, 0)`.
pub fn project_simplex(v: &[f64]) -> Result<SimplexPoint> {
    let tau = simplex_threshold(v)?;
    Ok(SimplexPoint::normalized(v.iter().map(|x| (x - tau).max(0.0)).collect()))
}

fn check_input(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Contract("cannot project an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("simplex projection input"));
    }
    Ok(())
}

// The candidate set is tracked by its sum `s` and size `k`, so the pivot is
// `ρ = (s − 1)/k` and each test `x > ρ` becomes `x·k > s − 1`.
//
// Entries at or below `max − 1` can never be in the support, since `τ ≥ max − 1`;
// dropping them first makes sparse inputs cheap.
fn simplex_threshold(y: &[f64]) -> Result<f64> {
    check_input(y)?;
    let floor = y.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x)) - 1.0;
    let candidates: Vec<f64> = y.iter().copied().filter(|x| *x > floor).collect();
    // Full support is common near the uniform point and needs no pivoting.
    let (total, k) = (lane_sum(&candidates), candidates.len() as f64);
    if candidates.iter().all(|x| x * k > total - 1.0) {
        return Ok((total - 1.0) / k);
    }
    let mut active: Vec<f64> = Vec::with_capacity(candidates.len());
    let mut parked: Vec<f64> = Vec::new();
    active.push(candidates[0]);
    let mut s = candidates[0];
    for &x in &candidates[1..] {
        let k = active.len() as f64;
        if x * k > s - 1.0 {
            if s + x - 1.0 > (x - 1.0) * (k + 1.0) {
                active.push(x);
                s += x;
            } else {
                parked.append(&mut active);
                active.push(x);
                s = x;
            }
        }
    }
    for &x in &parked {
        if x * active.len() as f64 > s - 1.0 {
            active.push(x);
            s += x;
        }
    }
    loop {
        let before = active.len();
        let mut i = 0;
        while i < active.len() {
            let x = active[i];
            if x * active.len() as f64 <= s - 1.0 {
                active.swap_remove(i);
                s -= x;
            } else {
                i += 1;
            }
        }
        if active.len() == before {
            break;
        }
    }
    Ok((s - 1.0) / active.len() as f64)
}

/// Sort-and-threshold projection onto the simplex, `O(m log m)`.
///
/// Kept as an independent route for checking [`project_simplex`].
pub fn project_simplex_sorted(v: &[f64]) -> Result<SimplexPoint> {
    check_input(v)?;
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = u[0] - 1.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    Ok(SimplexPoint::normalized(v.iter().map(|x| (x - tau).max(0.0)).collect()))
}

/// Maximizer over the simplex of `β Σ_j p_j φ_j − (λ/2)‖p‖²`, which is the
/// projection of `β·φ/λ`.
pub fn argmax_concave_p(phi: &[f64], beta: f64, lambda: f64) -> Result<SimplexPoint> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config("lambda", format!("must be positive, got {lambda}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::config("beta", format!("must be nonnegative, got {beta}")));
    }
    if phi.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::numerical("penalty values must be finite and nonnegative"));
    }
    let v: Vec<f64> = phi.iter().map(|x| beta * x / lambda).collect();
    project_simplex(&v)
}

/// Prefix-sum sampler for a categorical distribution over `0..m`.
#[derive(Clone, Debug)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(p: &SimplexPoint) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = p
            .as_slice()
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        // Pin the top of the last positive-mass entry (and any zero-mass tail)
        // to exactly one.
        let last_pos = p.as_slice().iter().rposition(|x| *x > 0.0).unwrap_or(cumulative.len() - 1);
        for c in &mut cumulative[last_pos..] {
            *c = 1.0;
        }
        CategoricalSampler { cumulative }
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|c| *c <= u).min(self.cumulative.len() - 1)
    }

    /// `k` independent draws with replacement, 0-based indices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Vec<usize> {
        (0..k).map(|_| self.sample_one(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn vertex_is_fixed() {
        assert_eq!(project_simplex(&[1.0, 0.0, 0.0]).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn one_dimensional_simplex_is_a_point() {
        for v in [-3.0, 0.0, 0.2, 1e9] {
            assert_eq!(project_simplex(&[v]).unwrap().as_slice(), &[1.0]);
        }
    }

    #[test]
    fn known_interior_projection() {
        let p = project_simplex(&[0.5, 0.5, 1.0]).unwrap();
        assert!(close(p.as_slice(), &[1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1e-15));
    }

    #[test]
    fn rejects_nonfinite() {
        assert!(matches!(project_simplex(&[1.0, f64::NAN]), Err(Error::Numerical { .. })));
        assert!(matches!(project_simplex_sorted(&[f64::INFINITY]), Err(Error::Numerical { .. })));
    }

    #[test]
    fn two_routes_agree_on_ties_and_spread() {
        let cases: [&[f64]; 5] = [
            &[0.3, 0.3, 0.3, 0.3],
            &[5.0, -5.0, 5.0],
            &[1e-9, 2e-9, 0.0, 1.0 - 3e-9],
            &[-1.0, -2.0, -3.0],
            &[100.0, 99.5, 0.0, 99.9],
        ];
        for v in cases {
            let a = project_simplex(v).unwrap();
            let b = project_simplex_sorted(v).unwrap();
            // both routes round the threshold sum, whose size grows with |v|
            let scale = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            let tol = 4.0 * v.len() as f64 * f64::EPSILON * scale;
            assert!(close(a.as_slice(), b.as_slice(), tol), "{v:?}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn simplex_point_validation() {
        assert!(SimplexPoint::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
        let third = 1.0 / 3.0;
        let p = SimplexPoint::new(vec![third; 3]).unwrap();
        assert!((neumaier_sum(p.as_slice().iter().copied()) - 1.0).abs() <= SUM_TOL);
    }

    #[test]
    fn interpolation_stays_on_simplex() {
        let p = SimplexPoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let q = SimplexPoint::uniform(3);
        let r = p.interpolate(&q, 0.3).unwrap();
        assert!(close(r.as_slice(), &[0.8, 0.1, 0.1], 1e-15));
        assert_eq!(p.interpolate(&q, 1.0).unwrap(), q);
    }

    #[test]
    fn degenerate_sampling() {
        let mut rng = rng::stream(7, 0);
        let s = CategoricalSampler::new(&SimplexPoint::new(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!(s.sample(&mut rng, 5), vec![0; 5]);
        let s = CategoricalSampler::new(&SimplexPoint::new(vec![0.0, 1.0]).unwrap());
        assert_eq!(s.sample(&mut rng, 3), vec![1; 3]);
    }

    #[test]
    fn cumulative_ends_at_one() {
        let p = SimplexPoint::new(vec![0.1, 0.2, 0.7, 0.0]).unwrap();
        let s = CategoricalSampler::new(&p);
        assert_eq!(*s.cumulative().last().unwrap(), 1.0);
        assert!(s.cumulative().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn argmax_zero_penalty_is_uniform() {
        let p = argmax_concave_p(&[0.0; 4], 3.0, 1e-6).unwrap();
        assert!(close(p.as_slice(), &[0.25; 4], 1e-15));
        assert_eq!(argmax_concave_p(&[7.0], 1.0, 1.0).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn argmax_single_violated_constraint() {
        let p = argmax_concave_p(&[0.0, 4.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn argmax_rejects_bad_lambda() {
        assert_eq!(argmax_concave_p(&[1.0], 1.0, 0.0).unwrap_err().config_field(), Some("lambda"));
        assert!(argmax_concave_p(&[1.0], 1.0, -1.0).is_err());
    }
}
