//! Declarative problem files and run manifests.
//!
//! A problem file is one JSON object naming the dimension, the constraint
//! sets, an optional objective, the scheduler, step sizes, the start point,
//! budgets and an optional perturbation. `docs/problem-schema.md` in the
//! repository documents every field. Validation reports *all* violations at
//! once, each naming the offending field and the broken constraint.

use serde::{Deserialize, Serialize};

use crate::dsap::{GammaRule, PerturbationPlan, Scheduler};
use crate::error::Error;
use crate::objective::{AffinePiece, Objective};
use crate::rng::derive_seed;
use crate::sapsm::StepSizeRule;
use crate::sets::{ConvexSet, Problem};
use crate::strings::{Amalgamator, IndexVector, MStarParams};
use crate::vector::Vector;

/// Problem-file parsing and validation failures.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration:\n  {}", errors.join("\n  "))]
    Invalid { errors: Vec<String> },
}

/// One constraint set record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { scale: f64 },
}

impl SetSpec {
    fn build(&self, dimension: usize) -> Result<ConvexSet, Error> {
        let vec = |v: &[f64]| Vector::from_column_slice(v);
        let set = match self {
            Self::Halfspace { normal, offset } => ConvexSet::halfspace(vec(normal), *offset)?,
            Self::Hyperplane { normal, offset } => ConvexSet::hyperplane(vec(normal), *offset)?,
            Self::Box { lo, hi } => ConvexSet::boxed(vec(lo), vec(hi))?,
            Self::Ball { center, radius } => ConvexSet::ball(vec(center), *radius)?,
            Self::Simplex { scale } => ConvexSet::simplex(dimension, *scale)?,
        };
        if set.dim() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: set.dim(),
            });
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

/// Objective record; absent in pure feasibility files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Linear { cost: Vec<f64> },
    Quadratic { matrix: Vec<Vec<f64>>, cost: Vec<f64> },
    MaxAffine { pieces: Vec<PieceSpec> },
    OneNorm { weights: Vec<f64> },
}

impl ObjectiveSpec {
    fn build(&self, dimension: usize) -> Result<Objective, Error> {
        let vec = |v: &[f64]| Vector::from_column_slice(v);
        let obj = match self {
            Self::Linear { cost } => Objective::linear(vec(cost))?,
            Self::Quadratic { matrix, cost } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidObjective("matrix must be square".into()));
                }
                let m = nalgebra::DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                Objective::quadratic(m, vec(cost))?
            }
            Self::MaxAffine { pieces } => Objective::max_affine(
                pieces
                    .iter()
                    .map(|p| AffinePiece {
                        gradient: vec(&p.gradient),
                        offset: p.offset,
                    })
                    .collect(),
            )?,
            Self::OneNorm { weights } => Objective::one_norm(vec(weights))?,
        };
        if obj.dim() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: obj.dim(),
            });
        }
        Ok(obj)
    }
}

/// Strings plus weights of one amalgamator, 1-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmalgamatorSpec {
    pub strings: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl AmalgamatorSpec {
    fn build(&self, m: usize) -> Result<Amalgamator, Error> {
        let strings = self
            .strings
            .iter()
            .map(|s| IndexVector::new(s.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Amalgamator::new(strings, self.weights.clone(), m)
    }
}

/// Scheduler record: the variant plus its admissibility bounds. `delta` and
/// `q_bar` default to `1/(2m)` and the longest needed string when omitted;
/// `random-dynamic` requires both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SchedulerSpec {
    CyclicSingleton,
    FullySimultaneous,
    FixedPlan {
        plan: Vec<AmalgamatorSpec>,
    },
    RandomDynamic {
        delta: f64,
        q_bar: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl SchedulerSpec {
    fn build(&self, m: usize, master_seed: u64) -> Result<Scheduler, Error> {
        match self {
            Self::CyclicSingleton => Ok(Scheduler::CyclicSingleton),
            Self::FullySimultaneous => Ok(Scheduler::FullySimultaneous),
            Self::FixedPlan { plan } => {
                let plan = plan
                    .iter()
                    .map(|a| a.build(m))
                    .collect::<Result<Vec<_>, _>>()?;
                Scheduler::fixed_plan(plan)
            }
            Self::RandomDynamic { delta, q_bar, seed } => {
                let params = MStarParams::new(*delta, *q_bar, m)?;
                let seed = seed.unwrap_or_else(|| derive_seed(master_seed, "scheduler"));
                Ok(Scheduler::random_dynamic(seed, params))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepSizeSpec {
    Harmonic { scale: f64 },
    PowerLaw { scale: f64, exponent: f64 },
    Explicit { values: Vec<f64> },
}

impl StepSizeSpec {
    fn build(&self) -> Result<StepSizeRule, Error> {
        match self {
            Self::Harmonic { scale } => StepSizeRule::harmonic(*scale),
            Self::PowerLaw { scale, exponent } => StepSizeRule::power_law(*scale, *exponent),
            Self::Explicit { values } => StepSizeRule::explicit(values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaSpec {
    Harmonic { scale: f64 },
    PowerLaw { scale: f64, exponent: f64 },
    Explicit { values: Vec<f64> },
}

impl GammaSpec {
    fn build(&self) -> Result<GammaRule, Error> {
        match self {
            Self::Harmonic { scale } => GammaRule::harmonic(*scale),
            Self::PowerLaw { scale, exponent } => GammaRule::power_law(*scale, *exponent),
            Self::Explicit { values } => GammaRule::explicit(values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub gamma: GammaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_seed: Option<u64>,
}

/// A parsed problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub sets: Vec<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    pub scheduler: SchedulerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<StepSizeSpec>,
    pub x0: Vec<f64>,
    pub max_iters: usize,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    /// Master seed; component streams are derived from it unless given
    /// explicitly. Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Everything needed to run, built from a validated [`ProblemFile`].
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: Problem,
    pub scheduler: Scheduler,
    pub objective: Option<Objective>,
    pub step_rule: Option<StepSizeRule>,
    pub x0: Vector,
    pub max_iters: usize,
    pub eps: f64,
    pub perturbation: Option<PerturbationPlan>,
    pub master_seed: u64,
}

/// Parses and fully validates a problem file, reporting either the
/// configuration or every validation error at once.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile, ConfigError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let errors = file.validation_errors();
    if errors.is_empty() {
        Ok(file)
    } else {
        Err(ConfigError::Invalid { errors })
    }
}

impl ProblemFile {
    /// All semantic violations, each naming field and constraint.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.dimension == 0 {
            errors.push("dimension: must be ≥ 1".to_string());
        }
        if self.sets.is_empty() {
            errors.push("sets: at least one set is required".to_string());
        }
        for (i, s) in self.sets.iter().enumerate() {
            if let Err(e) = s.build(self.dimension) {
                errors.push(format!("sets[{i}]: {e}"));
            }
        }
        if self.x0.len() != self.dimension {
            errors.push(format!(
                "x0: length {} does not match dimension {}",
                self.x0.len(),
                self.dimension
            ));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            errors.push("x0: coordinates must be finite".to_string());
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            errors.push("eps: must be finite and ≥ 0".to_string());
        }
        if let Some(obj) = &self.objective {
            if let Err(e) = obj.build(self.dimension) {
                errors.push(format!("objective: {e}"));
            }
        }
        if let Some(rule) = &self.step_size {
            if let Err(e) = rule.build() {
                errors.push(format!("step_size: {e}"));
            }
        }
        if let Some(p) = &self.perturbation {
            if let Err(e) = p.gamma.build() {
                errors.push(format!("perturbation.gamma: {e}"));
            }
        }
        let m = self.sets.len();
        match &self.scheduler {
            SchedulerSpec::RandomDynamic { delta, q_bar, .. } if m > 0 => {
                if !(*delta > 0.0 && *delta < 1.0 / m as f64) {
                    errors.push(format!(
                        "scheduler.delta: must satisfy 0 < Δ < 1/m (m = {m}, got {delta})"
                    ));
                }
                if *q_bar < m {
                    errors.push(format!(
                        "scheduler.q_bar: must satisfy q̄ ≥ m (m = {m}, got {q_bar})"
                    ));
                }
            }
            SchedulerSpec::FixedPlan { plan } => {
                if plan.is_empty() {
                    errors.push("scheduler.plan: must be nonempty".to_string());
                }
                for (j, a) in plan.iter().enumerate() {
                    if let Err(e) = a.build(m) {
                        errors.push(format!("scheduler.plan[{j}]: {e}"));
                    }
                }
            }
            _ => {}
        }
        errors
    }

    /// Builds the runtime components. Validates first.
    pub fn build(&self) -> Result<Instance, ConfigError> {
        let errors = self.validation_errors();
        if !errors.is_empty() {
            return Err(ConfigError::Invalid { errors });
        }
        let build_err = |field: &str, e: Error| ConfigError::Invalid {
            errors: vec![format!("{field}: {e}")],
        };
        let sets = self
            .sets
            .iter()
            .map(|s| s.build(self.dimension))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| build_err("sets", e))?;
        let problem = Problem::new(sets).map_err(|e| build_err("sets", e))?;
        let master_seed = self.seed.unwrap_or(0);
        let scheduler = self
            .scheduler
            .build(problem.num_sets(), master_seed)
            .map_err(|e| build_err("scheduler", e))?;
        let objective = match &self.objective {
            Some(o) => Some(o.build(self.dimension).map_err(|e| build_err("objective", e))?),
            None => None,
        };
        let step_rule = match &self.step_size {
            Some(r) => Some(r.build().map_err(|e| build_err("step_size", e))?),
            None => None,
        };
        let perturbation = match &self.perturbation {
            Some(p) => {
                let gamma = p.gamma.build().map_err(|e| build_err("perturbation", e))?;
                let noise_seed = p
                    .noise_seed
                    .unwrap_or_else(|| derive_seed(master_seed, "perturbation"));
                Some(PerturbationPlan::new(gamma, noise_seed))
            }
            None => None,
        };
        Ok(Instance {
            problem,
            scheduler,
            objective,
            step_rule,
            x0: Vector::from_column_slice(&self.x0),
            max_iters: self.max_iters,
            eps: self.eps,
            perturbation,
            master_seed,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema types serialize")
    }
}

/// Terminal statistics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub converged: bool,
    pub terminal_proximity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_phi: Option<f64>,
    pub zero_branch_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_hit: Option<usize>,
}

/// Everything needed to reproduce and audit one run. Re-running from the
/// embedded configuration reproduces the trace file byte for byte (manifests
/// themselves differ in their timestamps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub library_version: String,
    pub algorithm: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    /// Whether wall times were written into the trace (trades away byte
    /// reproducibility).
    pub timings: bool,
    /// Trace file name, relative to the manifest's directory.
    pub trace_file: String,
    pub config: ProblemFile,
    pub summary: RunSummary,
}
