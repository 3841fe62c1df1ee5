//! Small dense matrices and the symmetric positive-definite kernels used
//! throughout the crate (Cholesky, log-determinant, inverse, symmetric square
//! root, quadratic forms).
//!
//! Dimensions are tiny (d <= 8), so everything is stored row-major in a flat
//! `Vec<f64>` and all determinant/inverse work goes through Cholesky.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

/// Absolute asymmetry accepted when constructing an [`SpdMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length must match columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self * m * self'`, the congruence used for contrast transforms.
    pub fn congruence(&self, m: &Matrix) -> Matrix {
        let mut out = &(self * m) * &self.transpose();
        out.symmetrize();
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by `(m + m') / 2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// Rows `idx` of `self`, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Symmetric permutation `P m P'` with `perm[i]` the source index of row i.
    pub fn permute_sym(&self, perm: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(perm[i], perm[j])];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Lower-triangular Cholesky factor `L` with `L L' = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular(Matrix);

impl LowerTriangular {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    /// `2 * sum(log diag(L))`.
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.0[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut s = b[i];
            for k in 0..i {
                s -= self.0[(i, k)] * b[k];
            }
            b[i] = s / self.0[(i, i)];
        }
    }

    /// Solves `L' x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let d = self.dim();
        for i in (0..d).rev() {
            let mut s = b[i];
            for k in (i + 1)..d {
                s -= self.0[(k, i)] * b[k];
            }
            b[i] = s / self.0[(i, i)];
        }
    }

    /// `L v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.0.mul_vec(v)
    }
}

/// In-place Cholesky of a row-major `d x d` buffer. Only the lower triangle
/// is read; on success the lower triangle holds `L` and the upper is zeroed.
pub fn cholesky_in_place(buf: &mut [f64], d: usize) -> Result<()> {
    for j in 0..d {
        let mut diag = buf[j * d + j];
        for k in 0..j {
            diag -= buf[j * d + k] * buf[j * d + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        buf[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = buf[i * d + j];
            for k in 0..j {
                s -= buf[i * d + k] * buf[j * d + k];
            }
            buf[i * d + j] = s / ljj;
        }
        for k in (j + 1)..d {
            buf[j * d + k] = 0.0;
        }
    }
    Ok(())
}

/// Log-determinant of a row-major SPD buffer, destroying the buffer.
pub fn logdet_in_place(buf: &mut [f64], d: usize) -> Result<f64> {
    cholesky_in_place(buf, d)?;
    Ok(2.0 * (0..d).map(|i| buf[i * d + i].ln()).sum::<f64>())
}

fn check_square(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: m.cols,
        });
    }
    Ok(())
}

pub fn cholesky(m: &Matrix) -> Result<LowerTriangular> {
    check_square(m)?;
    let mut work = m.clone();
    work.symmetrize();
    cholesky_in_place(&mut work.data, m.rows)?;
    Ok(LowerTriangular(work))
}

pub fn logdet(m: &Matrix) -> Result<f64> {
    Ok(cholesky(m)?.logdet())
}

pub fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    let l = cholesky(m)?;
    let d = m.rows;
    let mut inv = Matrix::zeros(d, d);
    let mut col = vec![0.0; d];
    for j in 0..d {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[j] = 1.0;
        l.solve_lower_in_place(&mut col);
        l.solve_upper_in_place(&mut col);
        for i in 0..d {
            inv[(i, j)] = col[i];
        }
    }
    inv.symmetrize();
    Ok(inv)
}

/// `v' m^{-1} v` through a Cholesky solve.
pub fn quadform(v: &[f64], m: &Matrix) -> Result<f64> {
    if v.len() != m.rows {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: v.len(),
        });
    }
    let l = cholesky(m)?;
    let mut z = v.to_vec();
    l.solve_lower_in_place(&mut z);
    Ok(z.iter().map(|x| x * x).sum())
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (ascending) and the matching eigenvectors as columns.
pub fn sym_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    check_square(m)?;
    let d = m.rows;
    let mut a = m.clone();
    a.symmetrize();
    let mut v = Matrix::identity(d);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..d {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    Ok((values, vectors))
}

/// Symmetric square root `Q D^{1/2} Q'`.
pub fn sym_sqrt(m: &Matrix) -> Result<Matrix> {
    // Cholesky first so non-PD input fails with the same error everywhere.
    cholesky(m)?;
    let (values, q) = sym_eigen(m)?;
    let d = m.rows;
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = (0..d)
                .map(|k| q[(i, k)] * values[k].max(0.0).sqrt() * q[(j, k)])
                .sum();
        }
    }
    out.symmetrize();
    Ok(out)
}

/// A validated symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: Matrix,
    chol: LowerTriangular,
}

impl SpdMatrix {
    /// Validates symmetry (within [`SYMMETRY_TOL`]) and positive definiteness;
    /// the stored matrix is the symmetrized input.
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m)?;
        let asym = m.max_abs_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::domain(format!(
                "matrix is not symmetric (max |m_ij - m_ji| = {asym:e})"
            )));
        }
        Self::from_symmetrized(m)
    }

    /// Like [`SpdMatrix::new`] but symmetrizes first, for matrices built by
    /// accumulation where round-off breaks exact symmetry.
    pub fn from_symmetrized(mut m: Matrix) -> Result<Self> {
        check_square(&m)?;
        m.symmetrize();
        let chol = cholesky(&m)?;
        Ok(SpdMatrix { m, chol })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_symmetrized(Matrix::identity(dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.m.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn cholesky(&self) -> &LowerTriangular {
        &self.chol
    }

    pub fn logdet(&self) -> f64 {
        self.chol.logdet()
    }

    pub fn inverse(&self) -> SpdMatrix {
        let inv = spd_inverse(&self.m).expect("inverse of an SPD matrix");
        SpdMatrix::from_symmetrized(inv).expect("inverse of an SPD matrix is SPD")
    }

    pub fn sqrt(&self) -> SpdMatrix {
        SpdMatrix::from_symmetrized(sym_sqrt(&self.m).expect("SPD"))
            .expect("square root of an SPD matrix is SPD")
    }

    pub fn quadform(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim());
        let mut z = v.to_vec();
        self.chol.solve_lower_in_place(&mut z);
        z.iter().map(|x| x * x).sum()
    }

    pub fn scale(&self, c: f64) -> Result<SpdMatrix> {
        SpdMatrix::from_symmetrized(self.m.scale(c))
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }
}
