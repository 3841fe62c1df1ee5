use crate::error::{Error, Result};
use crate::matrix::{Matrix, SpdMatrix};

/// Inverse-Wishart hyperparameters `(Λ, ν)`; `Σ^{-1} ~ Wishart_d(ν - d - 1, Λ^{-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartPrior {
    lambda: SpdMatrix,
    nu: f64,
}

impl WishartPrior {
    /// A proper prior: `Λ` SPD and `ν > 2d`.
    pub fn new(lambda: SpdMatrix, nu: f64) -> Result<Self> {
        let d = lambda.dim() as f64;
        if !(nu > 2.0 * d) || !nu.is_finite() {
            return Err(Error::domain(format!(
                "inverse-Wishart shape must satisfy nu > 2d = {}, got {nu}",
                2.0 * d
            )));
        }
        Ok(WishartPrior { lambda, nu })
    }

    /// Hyperparameters outside the proper region, for limiting-case
    /// evaluations of the test statistic (e.g. `Λ -> 0`, `ν = d + 1`).
    pub fn relaxed(lambda: SpdMatrix, nu: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::domain("nu must be finite"));
        }
        Ok(WishartPrior { lambda, nu })
    }

    pub fn dim(&self) -> usize {
        self.lambda.dim()
    }

    pub fn lambda(&self) -> &SpdMatrix {
        &self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_proper(&self) -> bool {
        self.nu > 2.0 * self.dim() as f64
    }

    /// `E[Σ] = Λ / (ν - 2d - 2)`, defined for `ν > 2d + 2`.
    pub fn mean_covariance(&self) -> Option<Matrix> {
        let denom = self.nu - 2.0 * self.dim() as f64 - 2.0;
        (denom > 0.0).then(|| self.lambda.matrix().scale(1.0 / denom))
    }
}

/// Inverse-gamma hyperparameters of the scalar-variance model:
/// `1/σ² ~ Gamma(shape s, rate r)`, so `2r/σ² ~ χ²(2s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplePrior {
    rate: f64,
    shape: f64,
}

impl SimplePrior {
    pub fn new(rate: f64, shape: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite() && shape > 0.0 && shape.is_finite()) {
            return Err(Error::domain(format!(
                "simple prior needs r > 0 and s > 0, got r = {rate}, s = {shape}"
            )));
        }
        Ok(SimplePrior { rate, shape })
    }

    /// Allows the `r = s = 0` limit, which turns the shrinkage statistic into
    /// the ordinary one.
    pub fn relaxed(rate: f64, shape: f64) -> Result<Self> {
        if !(rate >= 0.0 && shape >= 0.0 && rate.is_finite() && shape.is_finite()) {
            return Err(Error::domain("simple prior needs r >= 0 and s >= 0"));
        }
        Ok(SimplePrior { rate, shape })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Wishart(WishartPrior),
    Simple(SimplePrior),
}

impl Prior {
    pub fn as_wishart(&self) -> Option<&WishartPrior> {
        match self {
            Prior::Wishart(w) => Some(w),
            Prior::Simple(_) => None,
        }
    }

    pub fn as_simple(&self) -> Option<&SimplePrior> {
        match self {
            Prior::Simple(s) => Some(s),
            Prior::Wishart(_) => None,
        }
    }
}

impl From<WishartPrior> for Prior {
    fn from(p: WishartPrior) -> Self {
        Prior::Wishart(p)
    }
}

impl From<SimplePrior> for Prior {
    fn from(p: SimplePrior) -> Self {
        Prior::Simple(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_floor_enforced() {
        let l = SpdMatrix::identity(2);
        assert!(WishartPrior::new(l.clone(), 4.0).is_err());
        assert!(WishartPrior::new(l.clone(), 4.01).is_ok());
        assert!(WishartPrior::relaxed(l, 3.0).is_ok());
    }

    #[test]
    fn prior_mean() {
        let l = SpdMatrix::identity(2).scale(3.0).unwrap();
        let p = WishartPrior::new(l, 9.0).unwrap();
        assert_eq!(p.mean_covariance().unwrap(), Matrix::identity(2));
        let p = WishartPrior::new(SpdMatrix::identity(2), 5.0).unwrap();
        assert!(p.mean_covariance().is_none());
    }

    #[test]
    fn simple_prior_validation() {
        assert!(SimplePrior::new(0.0, 1.0).is_err());
        assert!(SimplePrior::relaxed(0.0, 0.0).is_ok());
        assert!(SimplePrior::relaxed(-1.0, 0.0).is_err());
    }
}
