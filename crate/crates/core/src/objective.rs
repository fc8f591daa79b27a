//! Convex objective functions with subgradient selection.
//!
//! Each variant supplies exact values, a deterministic subgradient choice at
//! kinks, a decidable zero-subgradient test, and a closed-form Lipschitz
//! bound on centered balls.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lp;
use crate::vector::{check_input, Vector};

/// Default tolerance of the zero-subgradient test.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Lipschitz bounds are floored strictly above 1.
const LIPSCHITZ_FLOOR: f64 = 1.0 + 1e-9;

/// Residual tolerance of the hull-membership feasibility solve.
const HULL_LP_TOL: f64 = 1e-9;

/// One affine piece `x ↦ ⟨gradient, x⟩ + offset` of a max-affine function.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub gradient: Vector,
    pub offset: f64,
}

/// A convex function `φ: R^J → R`.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `φ(x) = ⟨cost, x⟩`
    Linear { cost: Vector },
    /// `φ(x) = ½ xᵀ Q x + ⟨cost, x⟩` with `Q` symmetric PSD.
    Quadratic { matrix: DMatrix<f64>, cost: Vector },
    /// `φ(x) = max_i ⟨a_i, x⟩ + b_i`
    MaxAffine { pieces: Vec<AffinePiece> },
    /// `φ(x) = Σ_j weights_j |x_j|` with `weights ≥ 0`.
    OneNorm { weights: Vector },
}

impl Objective {
    pub fn linear(cost: Vector) -> Result<Self> {
        crate::vector::check_finite(&cost)?;
        Ok(Self::Linear { cost })
    }

    /// Validates symmetry and positive semidefiniteness (eigenvalue floor of
    /// `-1e-10`).
    pub fn quadratic(matrix: DMatrix<f64>, cost: Vector) -> Result<Self> {
        let n = cost.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidObjective(format!(
                "matrix is {}x{}, expected {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObjective("matrix entries must be finite".into()));
        }
        let scale = matrix.iter().fold(1.0_f64, |a, &v| a.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidObjective("matrix must be symmetric".into()));
                }
            }
        }
        let eigs = matrix.clone().symmetric_eigen().eigenvalues;
        if eigs.iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidObjective(format!(
                "matrix must be positive semidefinite (smallest eigenvalue {})",
                eigs.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        crate::vector::check_finite(&cost)?;
        Ok(Self::Quadratic { matrix, cost })
    }

    pub fn max_affine(pieces: Vec<AffinePiece>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::InvalidObjective("max-affine needs ≥ 1 piece".into()))?;
        let dim = first.gradient.len();
        for p in &pieces {
            crate::vector::check_finite(&p.gradient)?;
            if !p.offset.is_finite() {
                return Err(Error::InvalidObjective("piece offset must be finite".into()));
            }
            if p.gradient.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.gradient.len(),
                });
            }
        }
        Ok(Self::MaxAffine { pieces })
    }

    pub fn one_norm(weights: Vector) -> Result<Self> {
        crate::vector::check_finite(&weights)?;
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidObjective("one-norm weights must be ≥ 0".into()));
        }
        Ok(Self::OneNorm { weights })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Linear { cost } => cost.len(),
            Self::Quadratic { cost, .. } => cost.len(),
            Self::MaxAffine { pieces } => pieces[0].gradient.len(),
            Self::OneNorm { weights } => weights.len(),
        }
    }

    /// Exact function value.
    pub fn evaluate(&self, x: &Vector) -> Result<f64> {
        check_input(x, self.dim())?;
        Ok(match self {
            Self::Linear { cost } => cost.dot(x),
            Self::Quadratic { matrix, cost } => 0.5 * (matrix * x).dot(x) + cost.dot(x),
            Self::MaxAffine { pieces } => pieces
                .iter()
                .map(|p| p.gradient.dot(x) + p.offset)
                .fold(f64::NEG_INFINITY, f64::max),
            Self::OneNorm { weights } => {
                x.iter().zip(weights.iter()).map(|(v, w)| w * v.abs()).sum()
            }
        })
    }

    /// One element of `∂φ(x)`, chosen deterministically: the lowest-index
    /// maximizing piece for max-affine functions and the sign vector (zero on
    /// zero coordinates) for weighted one-norms.
    pub fn subgradient(&self, x: &Vector) -> Result<Vector> {
        check_input(x, self.dim())?;
        Ok(match self {
            Self::Linear { cost } => cost.clone(),
            Self::Quadratic { matrix, cost } => matrix * x + cost,
            Self::MaxAffine { pieces } => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, p) in pieces.iter().enumerate() {
                    let v = p.gradient.dot(x) + p.offset;
                    if v > best_val {
                        best_val = v;
                        best = i;
                    }
                }
                pieces[best].gradient.clone()
            }
            Self::OneNorm { weights } => Vector::from_fn(x.len(), |j, _| {
                if x[j] > 0.0 {
                    weights[j]
                } else if x[j] < 0.0 {
                    -weights[j]
                } else {
                    0.0
                }
            }),
        })
    }

    /// Decides `0 ∈ ∂φ(x)` up to `tol`.
    ///
    /// For smooth variants this is a gradient-norm test. For one-norms every
    /// positively weighted coordinate must sit at its kink. For max-affine
    /// functions the test is whether the origin lies in the convex hull of the
    /// active-piece gradients (activity window `tol`), decided by a small
    /// exact feasibility solve.
    pub fn has_zero_subgradient(&self, x: &Vector, tol: f64) -> Result<bool> {
        if tol < 0.0 {
            return Err(Error::InvalidParams("zero-subgradient tol must be ≥ 0".into()));
        }
        check_input(x, self.dim())?;
        Ok(match self {
            Self::Linear { cost } => cost.norm() <= tol,
            Self::Quadratic { matrix, cost } => (matrix * x + cost).norm() <= tol,
            Self::OneNorm { weights } => x
                .iter()
                .zip(weights.iter())
                .all(|(v, &w)| w == 0.0 || v.abs() <= tol),
            Self::MaxAffine { pieces } => {
                let values: Vec<f64> =
                    pieces.iter().map(|p| p.gradient.dot(x) + p.offset).collect();
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let active: Vec<&AffinePiece> = pieces
                    .iter()
                    .zip(&values)
                    .filter(|(_, &v)| v >= max - tol)
                    .map(|(p, _)| p)
                    .collect();
                origin_in_hull(&active, x.len())
            }
        })
    }

    /// A number `L > 1` with `|φ(z¹) − φ(z²)| ≤ L‖z¹ − z²‖` on `B(0, radius)`.
    pub fn lipschitz_on_ball(&self, radius: f64) -> Result<LipschitzBound> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParams("ball radius must be positive".into()));
        }
        let raw = match self {
            Self::Linear { cost } => cost.norm(),
            Self::Quadratic { matrix, cost } => {
                let spec = matrix
                    .clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .fold(0.0_f64, |a, &l| a.max(l.abs()));
                spec * radius + cost.norm()
            }
            Self::MaxAffine { pieces } => pieces
                .iter()
                .map(|p| p.gradient.norm())
                .fold(0.0, f64::max),
            Self::OneNorm { weights } => weights.sum(),
        };
        Ok(LipschitzBound {
            value: raw.max(LIPSCHITZ_FLOOR),
            ball_radius: radius,
        })
    }
}

/// Certified Lipschitz constant of an objective on `B(0, ball_radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBound {
    /// The constant, strictly greater than 1.
    pub value: f64,
    pub ball_radius: f64,
}

/// `0 ∈ conv{gradients}` decided by phase-1 simplex: find λ ≥ 0 with
/// `Σ λ_i g_i = 0` and `Σ λ_i = 1`.
fn origin_in_hull(active: &[&AffinePiece], dim: usize) -> bool {
    let cols = active.len();
    let mut rows: Vec<Vec<f64>> = (0..dim)
        .map(|j| active.iter().map(|p| p.gradient[j]).collect())
        .collect();
    rows.push(vec![1.0; cols]);
    let mut rhs = vec![0.0; dim];
    rhs.push(1.0);
    lp::equality_feasible(&rows, &rhs, HULL_LP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    fn abs_x1() -> Objective {
        Objective::max_affine(vec![
            AffinePiece { gradient: dvector![1.0, 0.0], offset: 0.0 },
            AffinePiece { gradient: dvector![-1.0, 0.0], offset: 0.0 },
        ])
        .unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let lin = Objective::linear(dvector![1.0, 1.0]).unwrap();
        assert_eq!(lin.evaluate(&dvector![2.0, 3.0]).unwrap(), 5.0);

        assert_eq!(abs_x1().evaluate(&dvector![2.0, 0.0]).unwrap(), 2.0);

        let quad =
            Objective::quadratic(DMatrix::identity(2, 2), dvector![0.0, 0.0]).unwrap();
        assert_eq!(quad.evaluate(&dvector![1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn quadratic_gradient_matches_central_differences() {
        let q = dmatrix![2.0, 0.5; 0.5, 1.0];
        let obj = Objective::quadratic(q, dvector![0.3, -1.0]).unwrap();
        let x = dvector![0.7, -0.4];
        let g = obj.subgradient(&x).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd =
                (obj.evaluate(&xp).unwrap() - obj.evaluate(&xm).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(g[j], fd, epsilon = 1e-5 * (1.0 + g[j].abs()));
        }
    }

    #[test]
    fn subgradient_selection() {
        let lin = Objective::linear(dvector![3.0, -2.0]).unwrap();
        assert_eq!(lin.subgradient(&dvector![9.0, 9.0]).unwrap(), dvector![3.0, -2.0]);

        let onenorm = Objective::one_norm(dvector![1.0, 1.0]).unwrap();
        assert_eq!(onenorm.subgradient(&dvector![0.0, 2.0]).unwrap(), dvector![0.0, 1.0]);

        // Tied pieces: the first-listed one wins.
        assert_eq!(
            abs_x1().subgradient(&dvector![0.0, 5.0]).unwrap(),
            dvector![1.0, 0.0]
        );
    }

    #[test]
    fn zero_subgradient_examples() {
        let zero = Objective::linear(dvector![0.0, 0.0]).unwrap();
        assert!(zero.has_zero_subgradient(&dvector![4.0, -7.0], 0.0).unwrap());

        // Hull of (1,0) and (-1,0) contains the origin along the kink.
        assert!(abs_x1()
            .has_zero_subgradient(&dvector![0.0, 123.0], 1e-12)
            .unwrap());
        assert!(!abs_x1()
            .has_zero_subgradient(&dvector![0.5, 0.0], 1e-12)
            .unwrap());

        let lin = Objective::linear(dvector![1.0, 1.0]).unwrap();
        assert!(!lin.has_zero_subgradient(&dvector![0.0, 0.0], 1e-6).unwrap());

        let onenorm = Objective::one_norm(dvector![1.0, 0.0]).unwrap();
        // Second coordinate has zero weight and counts as free.
        assert!(onenorm.has_zero_subgradient(&dvector![0.0, 3.0], 0.0).unwrap());
        assert!(!onenorm.has_zero_subgradient(&dvector![0.1, 0.0], 1e-3).unwrap());
    }

    #[test]
    fn lipschitz_bounds() {
        let lin = Objective::linear(dvector![3.0, 4.0]).unwrap();
        assert_eq!(lin.lipschitz_on_ball(10.0).unwrap().value, 5.0);

        let zero = Objective::linear(dvector![0.0, 0.0]).unwrap();
        let b = zero.lipschitz_on_ball(1.0).unwrap();
        assert!(b.value > 1.0 && b.value < 1.0 + 1e-8);

        let ma = Objective::max_affine(vec![
            AffinePiece { gradient: dvector![1.0, 0.0], offset: 0.5 },
            AffinePiece { gradient: dvector![0.0, 2.0], offset: -0.5 },
        ])
        .unwrap();
        assert_eq!(ma.lipschitz_on_ball(3.0).unwrap().value, 2.0);

        assert!(lin.lipschitz_on_ball(0.0).is_err());
    }

    #[test]
    fn invalid_objectives_rejected() {
        assert!(Objective::quadratic(dmatrix![1.0, 0.0; 0.0, -1.0], dvector![0.0, 0.0]).is_err());
        assert!(Objective::quadratic(dmatrix![1.0, 0.5; -0.5, 1.0], dvector![0.0, 0.0]).is_err());
        assert!(Objective::quadratic(DMatrix::identity(3, 3), dvector![0.0, 0.0]).is_err());
        assert!(Objective::max_affine(vec![]).is_err());
        assert!(Objective::one_norm(dvector![1.0, -0.1]).is_err());
    }
}
