//! Closed convex sets in `R^J` with exact metric projections.
//!
//! Every variant in the catalog admits a closed-form or `O(J log J)` exact
//! nearest-point map, so "simple to project onto" holds by construction.

use crate::error::{Error, Result};
use crate::vector::{check_finite, check_input, Vector};

/// Default membership tolerance used when callers have no better scale.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// A closed convex subset of `R^J`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// `{ x : ⟨normal, x⟩ ≤ offset }` with `‖normal‖ > 0`.
    Halfspace { normal: Vector, offset: f64 },
    /// `{ x : ⟨normal, x⟩ = offset }` with `‖normal‖ > 0`.
    Hyperplane { normal: Vector, offset: f64 },
    /// `{ x : lo ≤ x ≤ hi }` componentwise.
    Box { lo: Vector, hi: Vector },
    /// `{ x : ‖x − center‖ ≤ radius }` with `radius > 0`.
    Ball { center: Vector, radius: f64 },
    /// `{ x : x ≥ 0, Σ x_j = scale }` with `scale > 0`.
    Simplex { dim: usize, scale: f64 },
}

impl ConvexSet {
    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        check_finite(&normal)?;
        if !offset.is_finite() {
            return Err(Error::InvalidSet("halfspace offset must be finite".into()));
        }
        if normal.norm() == 0.0 {
            return Err(Error::InvalidSet(
                "halfspace normal must have positive norm".into(),
            ));
        }
        Ok(Self::Halfspace { normal, offset })
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        check_finite(&normal)?;
        if !offset.is_finite() {
            return Err(Error::InvalidSet("hyperplane offset must be finite".into()));
        }
        if normal.norm() == 0.0 {
            return Err(Error::InvalidSet(
                "hyperplane normal must have positive norm".into(),
            ));
        }
        Ok(Self::Hyperplane { normal, offset })
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        check_finite(&lo)?;
        check_finite(&hi)?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::InvalidSet("box requires lo ≤ hi componentwise".into()));
        }
        Ok(Self::Box { lo, hi })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        check_finite(&center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet("ball radius must be positive".into()));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn simplex(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSet("simplex dimension must be ≥ 1".into()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidSet("simplex scale must be positive".into()));
        }
        Ok(Self::Simplex { dim, scale })
    }

    /// Ambient dimension `J`.
    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace { normal, .. } | Self::Hyperplane { normal, .. } => normal.len(),
            Self::Box { lo, .. } => lo.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Simplex { dim, .. } => *dim,
        }
    }

    /// Exact metric projection: the nearest point of the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_input(x, self.dim())?;
        Ok(match self {
            Self::Halfspace { normal, offset } => {
                let viol = normal.dot(x) - offset;
                if viol <= 0.0 {
                    x.clone()
                } else {
                    x - normal * (viol / normal.norm_squared())
                }
            }
            Self::Hyperplane { normal, offset } => {
                let gap = normal.dot(x) - offset;
                x - normal * (gap / normal.norm_squared())
            }
            Self::Box { lo, hi } => {
                Vector::from_fn(x.len(), |j, _| x[j].clamp(lo[j], hi[j]))
            }
            Self::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center + d * (radius / n)
                }
            }
            Self::Simplex { scale, .. } => project_simplex(x, *scale),
        })
    }

    /// Distance `d(x, set) = ‖x − project(x)‖`. Zero exactly on members.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    /// True iff `d(x, set) ≤ tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        if tol < 0.0 {
            return Err(Error::InvalidParams("membership tolerance must be ≥ 0".into()));
        }
        Ok(self.distance(x)? <= tol)
    }

    /// Smallest computable `M` with `set ⊆ B(0, M)`, or `None` when the set
    /// is unbounded.
    pub fn enclosing_radius(&self) -> Option<f64> {
        match self {
            Self::Halfspace { .. } | Self::Hyperplane { .. } => None,
            Self::Ball { center, radius } => Some(center.norm() + radius),
            Self::Box { lo, hi } => {
                // The farthest point of a box is the corner of max norm.
                let corner_sq: f64 = lo
                    .iter()
                    .zip(hi.iter())
                    .map(|(l, h)| l.powi(2).max(h.powi(2)))
                    .sum();
                Some(corner_sq.sqrt())
            }
            // Vertices scale·e_i realize the max norm; ‖x‖₂ ≤ ‖x‖₁ = scale.
            Self::Simplex { scale, .. } => Some(*scale),
        }
    }
}

/// Sort-and-threshold projection onto `{x ≥ 0, Σx = scale}`.
///
/// The threshold is the standard cumulative-sum rule: take the largest prefix
/// of the descending sort whose running mean excess stays below the entries.
fn project_simplex(x: &Vector, scale: f64) -> Vector {
    let mut u: Vec<f64> = x.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut found = false;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - scale) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
            found = true;
        }
    }
    // At least the largest entry always clears the threshold.
    debug_assert!(found);
    Vector::from_fn(x.len(), |j, _| (x[j] - theta).max(0.0))
}

/// Index and enclosing radius of a set known to lie inside `B(0, M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedWitness {
    /// 1-based constraint index `s`.
    pub index: usize,
    /// Enclosing radius `M` of that set.
    pub radius: f64,
}

/// An ordered family `C_1, …, C_m` whose intersection is the feasible region.
///
/// The intersection is assumed nonempty; the solvers never verify this and
/// callers building pathological instances get non-converging runs, not
/// errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    sets: Vec<ConvexSet>,
    dim: usize,
    witness: Option<BoundedWitness>,
}

impl Problem {
    /// Builds a problem from at least one set of equal dimension. If any set
    /// is bounded, the one with the smallest enclosing radius (lowest index on
    /// ties) becomes the bounded-set witness.
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidProblem("at least one set is required".into()))?;
        let dim = first.dim();
        for (i, s) in sets.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::InvalidProblem(format!(
                    "set {} has dimension {}, expected {}",
                    i + 1,
                    s.dim(),
                    dim
                )));
            }
        }
        let witness = sets
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.enclosing_radius().map(|r| (i + 1, r)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite radii"))
            .map(|(index, radius)| BoundedWitness { index, radius });
        Ok(Self { sets, dim, witness })
    }

    /// Overrides the bounded-set witness with a specific constraint index.
    pub fn with_witness(mut self, index: usize) -> Result<Self> {
        let set = self.set(index).ok_or_else(|| {
            Error::InvalidProblem(format!("witness index {index} out of range"))
        })?;
        let radius = set.enclosing_radius().ok_or_else(|| {
            Error::InvalidProblem(format!("set {index} is unbounded and cannot witness"))
        })?;
        self.witness = Some(BoundedWitness { index, radius });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sets `m`.
    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    /// The set `C_i`, 1-based.
    pub fn set(&self, i: usize) -> Option<&ConvexSet> {
        if i == 0 {
            None
        } else {
            self.sets.get(i - 1)
        }
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn bounded_witness(&self) -> Option<BoundedWitness> {
        self.witness
    }
}
