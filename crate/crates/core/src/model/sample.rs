use crate::error::{Error, Result};
use crate::matrix::{cholesky, Matrix};

/// One gene's complete-case replicate vectors with their summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSample {
    id: String,
    obs: Matrix,
    mean: Vec<f64>,
    crossprod: Matrix,
}

impl GeneSample {
    /// `obs` is `n x d`, one replicate vector per row. Needs `n >= 2`.
    pub fn new(id: impl Into<String>, obs: Matrix) -> Result<Self> {
        let id = id.into();
        let (n, d) = (obs.rows(), obs.cols());
        if n < 2 {
            return Err(Error::DegenerateGene {
                gene: id,
                reason: format!("{n} complete replicate(s), need at least 2"),
            });
        }
        if d == 0 {
            return Err(Error::DegenerateGene {
                gene: id,
                reason: "zero conditions".into(),
            });
        }
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, y) in mean.iter_mut().zip(obs.row(i)) {
                *m += y;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut crossprod = Matrix::zeros(d, d);
        let mut centered = vec![0.0; d];
        for i in 0..n {
            for ((c, y), m) in centered.iter_mut().zip(obs.row(i)).zip(&mean) {
                *c = y - m;
            }
            for j in 0..d {
                for k in 0..=j {
                    crossprod[(j, k)] += centered[j] * centered[k];
                }
            }
        }
        for j in 0..d {
            for k in 0..j {
                crossprod[(k, j)] = crossprod[(j, k)];
            }
        }
        Ok(GeneSample {
            id,
            obs,
            mean,
            crossprod,
        })
    }

    pub fn from_rows(id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(id, Matrix::from_rows(rows)?)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn obs(&self) -> &Matrix {
        &self.obs
    }

    /// Replicate count `n_g`.
    pub fn n(&self) -> usize {
        self.obs.rows()
    }

    pub fn dim(&self) -> usize {
        self.obs.cols()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// `A_g = Σ_i (Y_i - Ȳ)(Y_i - Ȳ)'`.
    pub fn crossprod(&self) -> &Matrix {
        &self.crossprod
    }

    /// Unbiased covariance `S_g = A_g / (n_g - 1)`.
    pub fn covariance(&self) -> Matrix {
        self.crossprod.scale(1.0 / (self.n() as f64 - 1.0))
    }

    /// `Y'Y`: sum of squares of every observation.
    pub fn total_sum_squares(&self) -> f64 {
        self.obs.as_slice().iter().map(|y| y * y).sum()
    }

    /// `R_g = trace(A_g)`, the pooled within-condition sum of squares.
    pub fn residual_sum_squares(&self) -> f64 {
        self.crossprod.trace()
    }

    /// True when `A_g` is not positive definite (too few replicates or
    /// collinear rows).
    pub fn is_degenerate(&self) -> bool {
        cholesky(&self.crossprod).is_err()
    }

    /// Applies `y -> M y` to every replicate (`M` is `q x d`).
    pub fn transform(&self, m: &Matrix) -> Result<GeneSample> {
        if m.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.cols(),
            });
        }
        GeneSample::new(self.id.clone(), &self.obs * &m.transpose())
    }

    /// Multiplies every observation by `c`.
    pub fn scaled(&self, c: f64) -> GeneSample {
        GeneSample::new(self.id.clone(), self.obs.scale(c)).expect("same shape as a valid sample")
    }
}
