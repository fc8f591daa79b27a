//! Independent reference computations.
//!
//! These routines certify expected values for tests and benchmarks: a
//! Dykstra projector realizing the exact nearest point of the intersection,
//! a classical projected subgradient baseline that projects onto the full
//! intersection every iteration, and a brute-force grid minimizer for small
//! instances. None of them share iteration machinery with the
//! string-averaging solvers they are used to check.

use std::time::Instant;

use crate::dsap::{proximity, RunTrace};
use crate::error::{Error, Result};
use crate::objective::{Objective, DEFAULT_ZERO_TOL};
use crate::sapsm::{minimization_record, select_best, MinimizationResult, StepOutcome, StepSizeRule};
use crate::sets::Problem;
use crate::vector::{check_input, Vector};

/// Result of projecting onto the whole intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionProjection {
    pub point: Vector,
    /// Full passes over the sets that were needed.
    pub sweeps: usize,
}

/// Nearest point of `C = ∩ C_i` by Dykstra's alternating scheme.
///
/// Unlike plain cyclic projections, the correction terms make the limit the
/// exact metric projection. Convergence is declared when a full sweep moves
/// the point by at most `tol` and its proximity is at most `tol`.
pub fn project_intersection(
    problem: &Problem,
    x: &Vector,
    tol: f64,
    max_sweeps: usize,
) -> Result<IntersectionProjection> {
    check_input(x, problem.dim())?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParams("tol must be positive".into()));
    }
    let m = problem.num_sets();
    let mut y = x.clone();
    let mut corrections = vec![Vector::zeros(problem.dim()); m];
    for sweep in 1..=max_sweeps {
        let before = y.clone();
        for (i, set) in problem.sets().iter().enumerate() {
            let shifted = &y + &corrections[i];
            let projected = set.project(&shifted)?;
            corrections[i] = shifted - &projected;
            y = projected;
        }
        if (&y - before).norm() <= tol && proximity(problem, &y)? <= tol {
            return Ok(IntersectionProjection { point: y, sweeps: sweep });
        }
    }
    Err(Error::ProjectorStalled {
        tol,
        sweeps: max_sweeps,
        proximity: proximity(problem, &y)?,
        best: Box::new(y),
    })
}

/// Sweep budget of the per-iteration projections in [`classical_psm`].
const PSM_MAX_SWEEPS: usize = 50_000;

/// Classical projected subgradient baseline.
///
/// Every iteration projects onto the full intersection (to `proj_tol` via
/// Dykstra) instead of string averaging:
/// `x^{k+1} = P_C(x^k − α_k s^k/‖s^k‖)`, with the same normalized step and
/// zero-subgradient branch as the string-averaging minimizer, so budgets are
/// comparable step for step.
pub fn classical_psm(
    problem: &Problem,
    obj: &Objective,
    rule: &StepSizeRule,
    x0: &Vector,
    max_iters: usize,
    proj_tol: f64,
) -> Result<MinimizationResult> {
    check_input(x0, problem.dim())?;
    if obj.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: obj.dim(),
        });
    }
    let start = Instant::now();
    let mut records = Vec::with_capacity(max_iters + 1);
    records.push(minimization_record(problem, obj, 0, x0.clone(), start, 0.0, {
        StepOutcome {
            zero_branch: false,
            subgrad_norm: 0.0,
            displaced: x0.clone(),
        }
    })?);

    let mut x = x0.clone();
    let mut zero_branch_count = 0;
    for k in 0..max_iters {
        let alpha = rule.alpha(k)?;
        let outcome = if obj.has_zero_subgradient(&x, DEFAULT_ZERO_TOL)? {
            zero_branch_count += 1;
            StepOutcome {
                zero_branch: true,
                subgrad_norm: 0.0,
                displaced: x.clone(),
            }
        } else {
            let s = obj.subgradient(&x)?;
            let norm = s.norm();
            if norm == 0.0 {
                return Err(Error::ZeroSubgradientInDescent);
            }
            StepOutcome {
                zero_branch: false,
                subgrad_norm: norm,
                displaced: &x - s * (alpha / norm),
            }
        };
        x = project_intersection(problem, &outcome.displaced, proj_tol, PSM_MAX_SWEEPS)?.point;
        records.push(minimization_record(
            problem,
            obj,
            k + 1,
            x.clone(),
            start,
            alpha,
            outcome,
        )?);
    }

    let threshold = 10.0 * records.last().unwrap().proximity;
    let best = select_best(&records, threshold);
    Ok(MinimizationResult {
        trace: RunTrace { records, converged: false, eps: 0.0 },
        final_iterate: x,
        best,
        report_threshold: threshold,
        zero_branch_count,
    })
}

/// Axis-aligned search window for the brute-force minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBounds {
    pub lo: Vector,
    pub hi: Vector,
}

impl GridBounds {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        check_input(&lo, hi.len())?;
        if lo.iter().zip(hi.iter()).any(|(l, h)| l >= h) {
            return Err(Error::InvalidParams("bounds require lo < hi".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `[-R, R]^J` from the tightest bounded set of the problem, when any.
    pub fn from_problem(problem: &Problem) -> Option<Self> {
        let w = problem.bounded_witness()?;
        let r = w.radius;
        Some(Self {
            lo: Vector::from_element(problem.dim(), -r),
            hi: Vector::from_element(problem.dim(), r),
        })
    }
}

/// A certified minimizer of `φ` over the intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub minimizer: Vector,
    pub min_value: f64,
    /// How the certificate was produced.
    pub method: String,
    /// Final grid resolution.
    pub accuracy: f64,
    /// Whether the near-optimal grid points collapsed to a single cell.
    pub unique: bool,
}

/// Proximity a certified minimizer must satisfy.
const ORACLE_FEASIBILITY: f64 = 1e-8;

/// Exhaustive grid search with local refinement, for `J ≤ 3`.
///
/// Each round scans the lattice of the current window; every point near the
/// feasible set (proximity within two grid steps) is projected onto the
/// intersection and the objective is evaluated *at the projected point*, so
/// all candidates compare on the set itself and feasibility slop cannot bias
/// the values. The window then shrinks around the incumbent and the step
/// divides by 10. The certificate is flagged unique only if, in every round,
/// the near-optimal candidates stayed within ten grid steps of each other;
/// genuinely flat solution segments fail that in the coarse rounds.
pub fn brute_force_minimize(
    problem: &Problem,
    obj: &Objective,
    bounds: &GridBounds,
    grid_step: f64,
    refine_rounds: usize,
) -> Result<OracleSolution> {
    const EVAL_PROJ_TOL: f64 = 1e-10;
    let dim = problem.dim();
    if dim > 3 {
        return Err(Error::Unsupported(format!(
            "brute-force minimization supports J ≤ 3, got {dim}"
        )));
    }
    check_input(&bounds.lo, dim)?;
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidParams("grid step must be positive".into()));
    }

    let mut lo = bounds.lo.clone();
    let mut hi = bounds.hi.clone();
    let mut step = grid_step;
    let mut best_point = Vector::zeros(dim);
    let mut unique = true;

    for round in 0..=refine_rounds {
        let mut counts = Vec::with_capacity(dim);
        for j in 0..dim {
            counts.push(((hi[j] - lo[j]) / step).floor() as usize + 1);
        }
        let total: usize = counts.iter().product();
        let mut best_value = f64::INFINITY;
        let mut ties: Vec<Vector> = Vec::new();
        let tie_tol = |v: f64| 1e-12_f64.max(1e-9 * v.abs());

        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let p = Vector::from_fn(dim, |j, _| lo[j] + idx[j] as f64 * step);
            // Odometer advance.
            for j in 0..dim {
                idx[j] += 1;
                if idx[j] < counts[j] {
                    break;
                }
                idx[j] = 0;
            }
            if proximity(problem, &p)? > 2.0 * step {
                continue;
            }
            let q = project_intersection(problem, &p, EVAL_PROJ_TOL, PSM_MAX_SWEEPS)?.point;
            let v = obj.evaluate(&q)?;
            if best_value.is_infinite() || v < best_value - tie_tol(best_value) {
                best_value = v;
                best_point = q.clone();
                ties.clear();
                ties.push(q);
            } else if v <= best_value + tie_tol(best_value) {
                ties.push(q);
            }
        }
        if best_value.is_infinite() {
            return Err(Error::NoFeasibleGridPoint);
        }
        let tie_diameter = ties
            .iter()
            .flat_map(|a| ties.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        if tie_diameter > 10.0 * step {
            unique = false;
        }

        if round < refine_rounds {
            let margin = 2.0 * step;
            for j in 0..dim {
                lo[j] = (best_point[j] - margin).max(bounds.lo[j]);
                hi[j] = (best_point[j] + margin).min(bounds.hi[j]);
            }
            step /= 10.0;
        }
    }

    if proximity(problem, &best_point)? > ORACLE_FEASIBILITY {
        return Err(Error::Precondition(
            "minimizer failed the feasibility certificate".into(),
        ));
    }
    let min_value = obj.evaluate(&best_point)?;
    Ok(OracleSolution {
        minimizer: best_point,
        min_value,
        method: format!(
            "feasible-grid(step={grid_step})+refine(rounds={refine_rounds}), final step {step}"
        ),
        accuracy: step,
        unique,
    })
}

/// Distance to the solution set for instances whose certified minimizer is a
/// singleton: `‖x − minimizer‖`.
///
/// The certificate is revalidated: the minimizer must be feasible to `1e-8`
/// and its stored value must match a fresh evaluation to `value_tol`.
pub fn distance_to_solution_set(
    oracle: &OracleSolution,
    obj: &Objective,
    problem: &Problem,
    x: &Vector,
    value_tol: f64,
) -> Result<f64> {
    if !oracle.unique {
        return Err(Error::NonUniqueMinimizer);
    }
    check_input(x, problem.dim())?;
    if proximity(problem, &oracle.minimizer)? > ORACLE_FEASIBILITY {
        return Err(Error::Precondition(
            "certificate minimizer is not feasible to 1e-8".into(),
        ));
    }
    if (obj.evaluate(&oracle.minimizer)? - oracle.min_value).abs() > value_tol {
        return Err(Error::Precondition(
            "certificate value does not match a fresh evaluation".into(),
        ));
    }
    Ok((x - &oracle.minimizer).norm())
}

/// Brute-force membership of the origin in the convex hull of 2-D points:
/// tries every point, segment and nondegenerate triangle. Independent of the
/// feasibility-solve route used by the objective catalog.
pub fn origin_in_hull_2d(points: &[Vector]) -> Result<bool> {
    const EPS: f64 = 1e-10;
    for p in points {
        check_input(p, 2)?;
    }
    if points.iter().any(|p| p.norm() <= EPS) {
        return Ok(true);
    }
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if segment_distance_to_origin(a, b) <= EPS {
                return Ok(true);
            }
        }
    }
    let cross = |u: &Vector, v: &Vector| u[0] * v[1] - u[1] * v[0];
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate().skip(i + 1) {
            for c in &points[j + 1..] {
                let ab = b - a;
                let ac = c - a;
                if cross(&ab, &ac).abs() <= EPS {
                    continue; // degenerate; the segment pass covers it
                }
                let d1 = cross(&(b - a), &(-a));
                let d2 = cross(&(c - b), &(-b));
                let d3 = cross(&(a - c), &(-c));
                let has_neg = d1 < -EPS || d2 < -EPS || d3 < -EPS;
                let has_pos = d1 > EPS || d2 > EPS || d3 > EPS;
                if !(has_neg && has_pos) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

fn segment_distance_to_origin(a: &Vector, b: &Vector) -> f64 {
    let d = b - a;
    let len_sq = d.norm_squared();
    if len_sq == 0.0 {
        return a.norm();
    }
    let t = (-a.dot(&d) / len_sq).clamp(0.0, 1.0);
    (a + d * t).norm()
}
