//! Dynamic string-averaging projections (DSAP).
//!
//! Each iteration applies one amalgamator emitted by a scheduler:
//! `x^{k} = P_{Ω_k,w_k}(x^{k-1})`, optionally displaced by a norm-controlled
//! perturbation to exercise resilience to computational errors. The run stops
//! when the proximity `max_i d(x, C_i)` falls to `eps` or the budget is
//! exhausted.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{iteration_rng, unit_direction};
use crate::sets::Problem;
use crate::strings::{apply_amalgamator, Amalgamator, IndexVector, MStarParams};
use crate::vector::{check_input, Vector};

/// Per-iteration choice of strings and weights.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheduler {
    /// One string `(1, 2, …, m)` with weight 1: classical cyclic projections.
    CyclicSingleton,
    /// `m` singleton strings with equal weights: simultaneous projections.
    FullySimultaneous,
    /// A fixed list of amalgamators applied cyclically.
    FixedPlan { plan: Vec<Amalgamator> },
    /// A fresh fit partition of a random permutation each iteration, with
    /// equal weights; a deterministic function of `(seed, k)`.
    RandomDynamic { seed: u64, params: MStarParams },
}

impl Scheduler {
    pub fn fixed_plan(plan: Vec<Amalgamator>) -> Result<Self> {
        if plan.is_empty() {
            return Err(Error::InvalidParams("fixed plan must be nonempty".into()));
        }
        Ok(Self::FixedPlan { plan })
    }

    pub fn random_dynamic(seed: u64, params: MStarParams) -> Self {
        Self::RandomDynamic { seed, params }
    }

    /// The admissibility class every emission is validated against.
    pub fn params_for(&self, m: usize) -> Result<MStarParams> {
        match self {
            Self::CyclicSingleton | Self::FullySimultaneous => MStarParams::defaults(m),
            Self::FixedPlan { plan } => {
                let longest = plan.iter().map(Amalgamator::max_string_len).max().unwrap_or(1);
                let min_w = plan
                    .iter()
                    .map(Amalgamator::min_weight)
                    .fold(f64::INFINITY, f64::min);
                MStarParams::new(min_w.min(0.5 / m as f64), longest.max(m), m)
            }
            Self::RandomDynamic { params, .. } => {
                if params.m != m {
                    return Err(Error::InvalidParams(format!(
                        "scheduler params built for m = {}, problem has m = {m}",
                        params.m
                    )));
                }
                Ok(*params)
            }
        }
    }

    /// The amalgamator used to produce iterate `k` (`k ≥ 1`).
    pub fn emit(&self, k: usize, m: usize) -> Result<Amalgamator> {
        match self {
            Self::CyclicSingleton => {
                Amalgamator::singleton(IndexVector::new((1..=m).collect())?, m)
            }
            Self::FullySimultaneous => {
                let strings = (1..=m)
                    .map(|i| IndexVector::new(vec![i]))
                    .collect::<Result<Vec<_>>>()?;
                Amalgamator::new(strings, vec![1.0 / m as f64; m], m)
            }
            Self::FixedPlan { plan } => Ok(plan[(k - 1) % plan.len()].clone()),
            Self::RandomDynamic { seed, params } => {
                let mut rng = iteration_rng(*seed, k as u64);
                let mut perm: Vec<usize> = (1..=m).collect();
                // Fisher-Yates, high to low, driven by the iteration stream.
                for i in (1..m).rev() {
                    let j = rng.gen_range(0..=i);
                    perm.swap(i, j);
                }
                let mut strings = Vec::new();
                let mut i = 0;
                while i < m {
                    let max_len = params.q_bar.min(m - i);
                    let len = rng.gen_range(1..=max_len);
                    strings.push(IndexVector::new(perm[i..i + len].to_vec())?);
                    i += len;
                }
                let n = strings.len();
                let equal = 1.0 / n as f64;
                let clipped: Vec<f64> =
                    vec![equal.max(params.delta); n];
                let total: f64 = clipped.iter().sum();
                let weights = clipped.iter().map(|w| w / total).collect();
                Amalgamator::new(strings, weights, m)
            }
        }
    }
}

/// Norm sequence rule for controlled perturbations, `γ_k ∈ (0, 1]`,
/// monotone nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaRule {
    /// `γ_k = min(1, scale / (k + 1))`
    Harmonic { scale: f64 },
    /// `γ_k = min(1, scale / (k + 1)^exponent)`, `exponent ∈ (0, 1]`
    PowerLaw { scale: f64, exponent: f64 },
    /// Caller-supplied values for `k = 1, 2, …`; must cover the whole run.
    Explicit { values: Vec<f64> },
}

impl GammaRule {
    pub fn harmonic(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidPerturbation("scale must be positive".into()));
        }
        Ok(Self::Harmonic { scale })
    }

    pub fn power_law(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidPerturbation("scale must be positive".into()));
        }
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::InvalidPerturbation(
                "exponent must lie in (0, 1]".into(),
            ));
        }
        Ok(Self::PowerLaw { scale, exponent })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPerturbation("explicit list is empty".into()));
        }
        if values.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
            return Err(Error::InvalidPerturbation(
                "explicit values must lie in (0, 1]".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidPerturbation(
                "explicit values must be nonincreasing".into(),
            ));
        }
        Ok(Self::Explicit { values })
    }

    /// `γ_k` for `k ≥ 1`.
    pub fn gamma(&self, k: usize) -> Result<f64> {
        match self {
            Self::Harmonic { scale } => Ok((scale / (k + 1) as f64).min(1.0)),
            Self::PowerLaw { scale, exponent } => {
                Ok((scale / ((k + 1) as f64).powf(*exponent)).min(1.0))
            }
            Self::Explicit { values } => values.get(k - 1).copied().ok_or_else(|| {
                Error::InvalidPerturbation(format!(
                    "explicit gamma list has {} entries, iteration {k} requested",
                    values.len()
                ))
            }),
        }
    }
}

/// Controlled displacement injected after every projection step: a seeded
/// uniform direction of norm exactly `γ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPlan {
    pub gamma: GammaRule,
    pub noise_seed: u64,
}

impl PerturbationPlan {
    pub fn new(gamma: GammaRule, noise_seed: u64) -> Self {
        Self { gamma, noise_seed }
    }

    /// The displacement added to iterate `k`.
    pub fn displacement(&self, k: usize, dim: usize) -> Result<Vector> {
        let g = self.gamma.gamma(k)?;
        let mut rng = iteration_rng(self.noise_seed, k as u64);
        Ok(unit_direction(&mut rng, dim) * g)
    }
}

/// Extension of an iteration record for minimization runs.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Step size used to produce this iterate (0 at `k = 0`).
    pub alpha: f64,
    /// Objective value at this iterate.
    pub phi: f64,
    /// Norm of the selected subgradient (0 on the zero branch).
    pub subgrad_norm: f64,
    /// Whether the zero-subgradient branch fired.
    pub zero_branch: bool,
    /// Pre-projection point whose string average produced this iterate.
    pub displaced: Vector,
}

/// One completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vector,
    /// `d(x, C_i)` for every set, in problem order.
    pub set_distances: Vec<f64>,
    /// `max_i d(x, C_i)`.
    pub proximity: f64,
    /// Wall time since the start of the run.
    pub elapsed: Duration,
    /// Present on minimization runs.
    pub step: Option<StepRecord>,
}

/// Full per-iteration history of a run, record `k = 0` first.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    /// Whether the proximity target was reached within the budget.
    pub converged: bool,
    /// The proximity target of the run.
    pub eps: f64,
}

impl RunTrace {
    pub fn terminal(&self) -> &IterationRecord {
        self.records.last().expect("trace has a k = 0 record")
    }

    /// Number of completed iterations (records minus the initial point).
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    /// First iteration whose proximity is ≤ `eps`, if any.
    pub fn first_hit(&self, eps: f64) -> Option<usize> {
        self.records.iter().find(|r| r.proximity <= eps).map(|r| r.k)
    }
}

/// `d(x, C_i)` for all sets in order.
pub fn per_set_distances(problem: &Problem, x: &Vector) -> Result<Vec<f64>> {
    problem.sets().iter().map(|s| s.distance(x)).collect()
}

/// The feasibility-violation measure `max_i d(x, C_i)`; zero exactly on the
/// intersection.
pub fn proximity(problem: &Problem, x: &Vector) -> Result<f64> {
    Ok(per_set_distances(problem, x)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// One projection iteration: applies the amalgamator to `x`.
pub fn dsap_step(problem: &Problem, a: &Amalgamator, x: &Vector) -> Result<Vector> {
    apply_amalgamator(problem, a, x)
}

fn make_record(
    problem: &Problem,
    k: usize,
    x: Vector,
    start: Instant,
    step: Option<StepRecord>,
) -> Result<IterationRecord> {
    let set_distances = per_set_distances(problem, &x)?;
    let proximity = set_distances.iter().copied().fold(0.0, f64::max);
    Ok(IterationRecord {
        k,
        x,
        set_distances,
        proximity,
        elapsed: start.elapsed(),
        step,
    })
}

/// Runs DSAP from `x0` until `proximity ≤ eps` or `max_iters` iterations.
///
/// With a perturbation plan, iterate `k` is displaced from the projection
/// output by a seeded direction of norm exactly `γ_k`; such runs require the
/// problem to carry a bounded-set witness (the resilience guarantees assume
/// one constraint set lies in a known ball).
pub fn dsap_run(
    problem: &Problem,
    scheduler: &Scheduler,
    x0: &Vector,
    max_iters: usize,
    eps: f64,
    perturbation: Option<&PerturbationPlan>,
) -> Result<RunTrace> {
    check_input(x0, problem.dim())?;
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParams("eps must be finite and ≥ 0".into()));
    }
    if perturbation.is_some() && problem.bounded_witness().is_none() {
        return Err(Error::Precondition(
            "perturbed runs require a problem with a bounded-set witness".into(),
        ));
    }
    let m = problem.num_sets();
    let params = scheduler.params_for(m)?;
    let start = Instant::now();

    let mut records = vec![make_record(problem, 0, x0.clone(), start, None)?];
    if records[0].proximity <= eps {
        return Ok(RunTrace { records, converged: true, eps });
    }

    let mut x = x0.clone();
    let mut converged = false;
    for k in 1..=max_iters {
        let a = scheduler.emit(k, m)?;
        if let Some(reason) = params.why_rejected(&a) {
            return Err(Error::ScheduleInvalid {
                iteration: k,
                reason,
                partial: Box::new(RunTrace { records, converged: false, eps }),
            });
        }
        x = apply_amalgamator(problem, &a, &x)?;
        if let Some(plan) = perturbation {
            x += plan.displacement(k, problem.dim())?;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIterate {
                iteration: k,
                partial: Box::new(RunTrace { records, converged: false, eps }),
            });
        }
        records.push(make_record(problem, k, x.clone(), start, None)?);
        if records.last().unwrap().proximity <= eps {
            converged = true;
            break;
        }
    }
    Ok(RunTrace { records, converged, eps })
}
