//! Linear hypotheses `M μ = 0` and their action on samples and priors.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{sym_eigen, Matrix, SpdMatrix};
use crate::model::{GeneSample, WishartPrior};

/// Relative singular-value floor below which a contrast is rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContrastKind {
    ZeroMeans,
    EqualMeans,
    NoTrend,
    Custom,
}

impl ContrastKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContrastKind::ZeroMeans => "zero.means",
            ContrastKind::EqualMeans => "equal.means",
            ContrastKind::NoTrend => "no.trend",
            ContrastKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ContrastKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContrastKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero.means" => Ok(ContrastKind::ZeroMeans),
            "equal.means" => Ok(ContrastKind::EqualMeans),
            "no.trend" => Ok(ContrastKind::NoTrend),
            "custom" => Ok(ContrastKind::Custom),
            other => Err(Error::domain(format!("unknown hypothesis '{other}'"))),
        }
    }
}

/// A `q x d` contrast matrix with declared rank `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contrast {
    matrix: Matrix,
    rank: usize,
    kind: ContrastKind,
}

fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let gram = m * &m.transpose();
    let (vals, _) = sym_eigen(&gram)?;
    Ok(vals.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

fn numerical_rank(m: &Matrix) -> Result<usize> {
    let sv = singular_values(m)?;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > RANK_TOL * largest).count())
}

// Greedy Gram-Schmidt over the rows: keeps each row that adds a new
// direction. Returns the kept row indices and an orthonormal basis.
fn independent_rows(m: &Matrix) -> (Vec<usize>, Vec<Vec<f64>>) {
    let scale = (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut kept = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..m.rows() {
        let mut v = m.row(i).to_vec();
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_TOL * scale.max(f64::MIN_POSITIVE) {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            kept.push(i);
        }
    }
    (kept, basis)
}

impl Contrast {
    /// A contrast whose rank must numerically equal `rank`.
    pub fn new(matrix: Matrix, rank: usize, kind: ContrastKind) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::domain("contrast matrix must be non-empty"));
        }
        if rank == 0 || rank > matrix.rows() || rank > matrix.cols() {
            return Err(Error::domain(format!(
                "declared rank {rank} invalid for a {}x{} contrast",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let numerical = numerical_rank(&matrix)?;
        if numerical != rank {
            return Err(Error::RankDeficiency {
                declared: rank,
                numerical,
            });
        }
        Ok(Contrast { matrix, rank, kind })
    }

    /// A user-supplied matrix; its rank is measured, not declared.
    pub fn custom(matrix: Matrix) -> Result<Self> {
        let rank = numerical_rank(&matrix)?;
        if rank == 0 {
            return Err(Error::RankDeficiency {
                declared: matrix.rows(),
                numerical: 0,
            });
        }
        Self::new(matrix, rank, ContrastKind::Custom)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind(&self) -> ContrastKind {
        self.kind
    }

    /// Number of conditions `d` the contrast applies to.
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    /// `r` linearly independent rows of the matrix (all rows when `q = r`).
    pub fn reduced(&self) -> Result<Matrix> {
        let m = if self.matrix.rows() == self.rank {
            self.matrix.clone()
        } else {
            let (kept, _) = independent_rows(&self.matrix);
            self.matrix.select_rows(&kept[..self.rank.min(kept.len())])
        };
        let sv = singular_values(&m)?;
        let largest = sv.iter().cloned().fold(0.0, f64::max);
        let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if m.rows() != self.rank || !(smallest >= RANK_TOL * largest) {
            return Err(Error::RankDeficiency {
                declared: self.rank,
                numerical: numerical_rank(&m)?,
            });
        }
        Ok(m)
    }

    /// The same hypothesis with orthonormal rows spanning the same row space.
    pub fn orthonormalized(&self) -> Result<Contrast> {
        let reduced = self.reduced()?;
        let (_, basis) = independent_rows(&reduced);
        let m = Matrix::from_rows(&basis)?;
        Contrast::new(m, self.rank, self.kind)
    }

    /// Multiplies every row by `c` (non-zero).
    pub fn scaled(&self, c: f64) -> Result<Contrast> {
        Contrast::new(self.matrix.scale(c), self.rank, self.kind)
    }
}

/// The three named hypotheses for `d` conditions.
pub fn make_contrast(kind: ContrastKind, d: usize) -> Result<Contrast> {
    if d == 0 {
        return Err(Error::domain("need at least one condition"));
    }
    match kind {
        ContrastKind::ZeroMeans => Contrast::new(Matrix::identity(d), d, kind),
        ContrastKind::EqualMeans => {
            if d < 2 {
                return Err(Error::domain("equal.means needs d >= 2"));
            }
            // Helmert rows: k ones, then -k, normalized
            let mut m = Matrix::zeros(d - 1, d);
            for k in 1..d {
                let norm = ((k * (k + 1)) as f64).sqrt();
                for j in 0..k {
                    m[(k - 1, j)] = 1.0 / norm;
                }
                m[(k - 1, k)] = -(k as f64) / norm;
            }
            Contrast::new(m, d - 1, kind)
        }
        ContrastKind::NoTrend => {
            if d <= 2 {
                return Err(Error::domain(format!("no.trend needs d > 2, got d = {d}")));
            }
            // slope row of (u'u)^{-1} u' for u = [1, (0..d-1)']
            let xbar = (d as f64 - 1.0) / 2.0;
            let sxx: f64 = (0..d).map(|i| (i as f64 - xbar).powi(2)).sum();
            let row: Vec<f64> = (0..d).map(|i| (i as f64 - xbar) / sxx).collect();
            Contrast::new(Matrix::from_rows(&[row])?, 1, kind)
        }
        ContrastKind::Custom => Err(Error::domain("custom contrasts are loaded from a matrix")),
    }
}

/// Maps a sample (and optionally a prior over its covariance) through the
/// contrast: `Ȳ -> MȲ`, `A -> MAM'`, `Λ -> MΛM'`. The shape parameter becomes
/// `ν - 2(d - r)`, the exact law of `MΣM'` when `Σ ~ InvWishart_d(ν, Λ)`.
pub fn apply_contrast(
    sample: &GeneSample,
    prior: Option<&WishartPrior>,
    c: &Contrast,
) -> Result<(GeneSample, Option<WishartPrior>)> {
    if c.dim() != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: sample.dim(),
            found: c.dim(),
        });
    }
    let m = c.reduced()?;
    let transformed = sample.transform(&m)?;
    let prior = match prior {
        None => None,
        Some(p) => Some(transform_prior(p, &m)?),
    };
    Ok((transformed, prior))
}

pub(crate) fn transform_prior(p: &WishartPrior, m: &Matrix) -> Result<WishartPrior> {
    if m.cols() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: m.cols(),
        });
    }
    let lambda = SpdMatrix::from_symmetrized(m.congruence(p.lambda().matrix()))?;
    let nu = p.nu() - 2.0 * (p.dim() - m.rows()) as f64;
    if p.is_proper() {
        WishartPrior::new(lambda, nu)
    } else {
        WishartPrior::relaxed(lambda, nu)
    }
}
