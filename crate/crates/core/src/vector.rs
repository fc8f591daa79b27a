//! The iterate type and shared input checks.

use crate::error::{Error, Result};

/// A point in `R^J`, dense real coordinates.
pub type Vector = nalgebra::DVector<f64>;

/// Rejects vectors containing NaN or infinite coordinates.
pub fn check_finite(x: &Vector) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Rejects vectors whose length differs from `dim`.
pub fn check_dim(x: &Vector, dim: usize) -> Result<()> {
    if x.len() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        })
    }
}

pub(crate) fn check_input(x: &Vector, dim: usize) -> Result<()> {
    check_dim(x, dim)?;
    check_finite(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn finite_check_rejects_nan_and_inf() {
        assert!(check_finite(&dvector![0.0, 1.0]).is_ok());
        assert!(check_finite(&dvector![f64::NAN]).is_err());
        assert!(check_finite(&dvector![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn dim_check() {
        assert!(check_dim(&dvector![1.0, 2.0], 2).is_ok());
        assert!(matches!(
            check_dim(&dvector![1.0], 2),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
