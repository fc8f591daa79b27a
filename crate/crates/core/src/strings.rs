//! Strings of constraint indices and their weighted averaging.
//!
//! An index vector `t = (t_1, …, t_q)` names a *string operator*
//! `P[t] = P_{t_q} ∘ … ∘ P_{t_1}`, the composition of the individual
//! projections applied in order `t_1` first. An *amalgamator* `(Ω, w)` is a
//! fit finite set of index vectors with strictly positive weights summing to
//! one; applying it convex-combines the string end points:
//! `P_{Ω,w}(x) = Σ_t w(t) · P[t](x)`.

use crate::error::{Error, Result};
use crate::sets::Problem;
use crate::vector::{check_input, Vector};

/// Largest deviation of a weight sum from 1 that constructors repair by
/// renormalizing; larger deviations are rejected as user error.
pub const WEIGHT_SUM_SLACK: f64 = 1e-9;

/// An ordered tuple of constraint indices, 1-based, repeats allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexVector(Vec<usize>);

impl IndexVector {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidIndexVector("length must be ≥ 1".into()));
        }
        if indices.contains(&0) {
            return Err(Error::InvalidIndexVector("indices are 1-based".into()));
        }
        Ok(Self(indices))
    }

    /// String length `ℓ(t)`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// All entries lie in `{1, …, m}`.
    pub fn in_range(&self, m: usize) -> bool {
        self.0.iter().all(|&i| i >= 1 && i <= m)
    }
}

/// True iff every index of `{1, …, m}` occurs in at least one string.
pub fn is_fit(strings: &[IndexVector], m: usize) -> bool {
    (1..=m).all(|i| strings.iter().any(|t| t.indices().contains(&i)))
}

/// True iff `strings` is fit for the problem and every string contains at
/// least one index whose set provably lies inside `B(0, M)`.
///
/// Only sets with a computable enclosing radius count as bounded witnesses,
/// so the check is conservative: `true` is always sound, `false` may simply
/// mean "could not verify".
pub fn is_m_fit(strings: &[IndexVector], problem: &Problem, m_bound: f64) -> bool {
    if !is_fit(strings, problem.num_sets()) {
        return false;
    }
    strings.iter().all(|t| {
        t.indices().iter().any(|&i| {
            problem
                .set(i)
                .and_then(|s| s.enclosing_radius())
                .is_some_and(|r| r <= m_bound)
        })
    })
}

/// A fit set of strings `Ω` with a positive weight function summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Amalgamator {
    strings: Vec<IndexVector>,
    weights: Vec<f64>,
}

impl Amalgamator {
    /// Validates fitness against `m`, positivity of the weights, and a weight
    /// sum within [`WEIGHT_SUM_SLACK`] of 1 (repaired by renormalization).
    pub fn new(strings: Vec<IndexVector>, weights: Vec<f64>, m: usize) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::InvalidAmalgamator("Ω must be nonempty".into()));
        }
        if strings.len() != weights.len() {
            return Err(Error::InvalidAmalgamator(format!(
                "{} strings but {} weights",
                strings.len(),
                weights.len()
            )));
        }
        for t in &strings {
            if !t.in_range(m) {
                return Err(Error::InvalidAmalgamator(format!(
                    "string {:?} has an index outside 1..={m}",
                    t.indices()
                )));
            }
        }
        if !is_fit(&strings, m) {
            return Err(Error::InvalidAmalgamator(format!(
                "Ω is not fit: some index of 1..={m} appears in no string"
            )));
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidAmalgamator(
                "weights must be strictly positive".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
            return Err(Error::InvalidAmalgamator(format!(
                "weights must sum to 1 (got {sum})"
            )));
        }
        let weights = if sum == 1.0 {
            weights
        } else {
            weights.iter().map(|w| w / sum).collect()
        };
        Ok(Self { strings, weights })
    }

    /// Single string, weight 1.
    pub fn singleton(t: IndexVector, m: usize) -> Result<Self> {
        Self::new(vec![t], vec![1.0], m)
    }

    pub fn strings(&self) -> &[IndexVector] {
        &self.strings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_strings(&self) -> usize {
        self.strings.len()
    }

    pub fn max_string_len(&self) -> usize {
        self.strings.iter().map(IndexVector::len).max().unwrap_or(0)
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Bounds defining the admissible class of amalgamators: string lengths at
/// most `q_bar` and weights at least `delta`, with `0 < Δ < 1/m` and `q̄ ≥ m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MStarParams {
    pub delta: f64,
    pub q_bar: usize,
    pub m: usize,
}

impl MStarParams {
    pub fn new(delta: f64, q_bar: usize, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParams("m must be ≥ 1".into()));
        }
        if !(delta > 0.0 && delta < 1.0 / m as f64) {
            return Err(Error::InvalidParams(format!(
                "delta must satisfy 0 < Δ < 1/m (m = {m}, got {delta})"
            )));
        }
        if q_bar < m {
            return Err(Error::InvalidParams(format!(
                "q_bar must satisfy q̄ ≥ m (m = {m}, got {q_bar})"
            )));
        }
        Ok(Self { delta, q_bar, m })
    }

    /// Defaults that admit the cyclic and simultaneous special cases:
    /// `Δ = 1/(2m)`, `q̄ = m`.
    pub fn defaults(m: usize) -> Result<Self> {
        Self::new(0.5 / m as f64, m, m)
    }

    /// True iff the amalgamator is fit for `m`, its weights sum to 1, every
    /// weight is ≥ Δ and every string length is ≤ q̄.
    pub fn admits(&self, a: &Amalgamator) -> bool {
        self.why_rejected(a).is_none()
    }

    /// `None` when admitted, otherwise the first violated constraint.
    pub fn why_rejected(&self, a: &Amalgamator) -> Option<String> {
        if let Some(t) = a.strings().iter().find(|t| !t.in_range(self.m)) {
            return Some(format!(
                "string {:?} has an index outside 1..={}",
                t.indices(),
                self.m
            ));
        }
        if !is_fit(a.strings(), self.m) {
            return Some(format!("Ω is not fit for m = {}", self.m));
        }
        let sum: f64 = a.weights().iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
            return Some(format!("weights sum to {sum}, expected 1"));
        }
        if let Some(w) = a.weights().iter().find(|&&w| w < self.delta) {
            return Some(format!("weight {w} below Δ = {}", self.delta));
        }
        if let Some(t) = a.strings().iter().find(|t| t.len() > self.q_bar) {
            return Some(format!(
                "string length {} exceeds q̄ = {}",
                t.len(),
                self.q_bar
            ));
        }
        None
    }
}

/// Applies the string operator `P[t]`: projections composed in order,
/// `t_1` first, `t_q` last.
pub fn apply_string(problem: &Problem, t: &IndexVector, x: &Vector) -> Result<Vector> {
    check_input(x, problem.dim())?;
    let mut y = x.clone();
    for &i in t.indices() {
        let set = problem.set(i).ok_or_else(|| {
            Error::InvalidIndexVector(format!(
                "index {i} out of range 1..={}",
                problem.num_sets()
            ))
        })?;
        y = set.project(&y)?;
    }
    Ok(y)
}

/// Applies `P_{Ω,w}`: the convex combination `Σ_t w(t) · P[t](x)`.
///
/// End points are accumulated sequentially in the stored string order so that
/// repeated evaluations are bit-identical.
pub fn apply_amalgamator(problem: &Problem, a: &Amalgamator, x: &Vector) -> Result<Vector> {
    let mut acc = Vector::zeros(problem.dim());
    for (t, &w) in a.strings().iter().zip(a.weights()) {
        let end = apply_string(problem, t, x)?;
        acc += end * w;
    }
    Ok(acc)
}
