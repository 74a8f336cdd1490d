//! Small dense symmetric-positive-definite linear algebra and Gaussian
//! sampling shared by every planner.
//!
//! Dimensions here are tiny (d is around 10), so everything is dense and
//! refactored from scratch whenever it is needed. Storage is backed by
//! `nalgebra`; the public surface speaks plain `&[f64]` / `Vec<f64>`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Relative symmetry tolerance accepted by [`SpdMatrix::from_row_slice`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Iteration cap for [`max_eigenvalue`].
pub const POWER_ITERATION_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not positive definite (pivot {index} = {value:e})")]
    NotPositiveDefinite { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// A symmetric matrix that is expected to be positive definite.
///
/// Positive definiteness is only verified by [`cholesky_factor`]; the
/// constructors enforce symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    inner: DMatrix<f64>,
}

impl SpdMatrix {
    /// `scale * I_dim`.
    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim) * scale,
        }
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(NumericsError::EmptyMatrix);
        }
        if entries.len() != dim * dim {
            return Err(NumericsError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let inner = DMatrix::from_row_slice(dim, dim, entries);
        Self::from_matrix(inner)
    }

    pub fn from_matrix(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 {
            return Err(NumericsError::EmptyMatrix);
        }
        if inner.nrows() != inner.ncols() {
            return Err(NumericsError::DimensionMismatch {
                expected: inner.nrows(),
                got: inner.ncols(),
            });
        }
        let n = inner.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (inner[(i, j)], inner[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                    return Err(NumericsError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// `self += weight * v vᵀ`. Symmetric by construction.
    pub fn add_outer(&mut self, v: &[f64], weight: f64) -> Result<()> {
        check_len(self.dim(), v.len())?;
        for i in 0..v.len() {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..v.len() {
                self.inner[(i, j)] += weight * v[i] * v[j];
            }
        }
        Ok(())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        let n = self.dim();
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.inner[(i, j)] * v[j]).sum())
            .collect())
    }

    /// `self - shift * I`, used to probe the regularization floor.
    pub fn shifted(&self, shift: f64) -> SpdMatrix {
        let n = self.dim();
        Self {
            inner: &self.inner - DMatrix::identity(n, n) * shift,
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SpdMatrix) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: DMatrix<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.lower * self.lower.transpose()
    }

    /// `vᵀ M⁻¹ v`, computed as `‖L⁻¹ v‖²`.
    pub fn inverse_quadratic_form(&self, v: &[f64]) -> Result<f64> {
        check_len(self.dim(), v.len())?;
        let rhs = DVector::from_column_slice(v);
        let y = self
            .lower
            .solve_lower_triangular(&rhs)
            .expect("cholesky diagonal is strictly positive");
        Ok(y.norm_squared())
    }

    /// `M⁻¹` as a dense matrix.
    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let y = self
            .lower
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("cholesky diagonal is strictly positive");
        self.lower
            .transpose()
            .solve_upper_triangular(&y)
            .expect("cholesky diagonal is strictly positive")
    }
}

/// Factor `m = L Lᵀ`. Fails with the first non-positive pivot.
pub fn cholesky_factor(m: &SpdMatrix) -> Result<CholeskyFactor> {
    let n = m.dim();
    let a = &m.inner;
    let mut lower = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= lower[(j, k)] * lower[(j, k)];
        }
        if !(pivot > 0.0) {
            return Err(NumericsError::NotPositiveDefinite {
                index: j,
                value: pivot,
            });
        }
        let diag = pivot.sqrt();
        lower[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= lower[(i, k)] * lower[(j, k)];
            }
            lower[(i, j)] = s / diag;
        }
    }
    Ok(CholeskyFactor { lower })
}

/// Solve `M x = rhs` given the factor of `M`.
pub fn solve_spd(factor: &CholeskyFactor, rhs: &[f64]) -> Result<Vec<f64>> {
    check_len(factor.dim(), rhs.len())?;
    let b = DVector::from_column_slice(rhs);
    let y = factor
        .lower
        .solve_lower_triangular(&b)
        .expect("cholesky diagonal is strictly positive");
    let x = factor
        .lower
        .transpose()
        .solve_upper_triangular(&y)
        .expect("cholesky diagonal is strictly positive");
    Ok(x.iter().copied().collect())
}

/// Draw from `N(mean, scale² M⁻¹)` where `factor` is the Cholesky factor of
/// the precision `M`: returns `mean + scale · L⁻ᵀ z`.
///
/// The standard normal vector is always drawn (even for `scale == 0`) so the
/// stream position does not depend on the scale.
pub fn sample_gaussian<R: Rng + ?Sized>(
    mean: &[f64],
    factor: &CholeskyFactor,
    scale: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_len(factor.dim(), mean.len())?;
    let z: Vec<f64> = (0..mean.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    if scale == 0.0 {
        return Ok(mean.to_vec());
    }
    let z = DVector::from_vec(z);
    let x = factor
        .lower
        .transpose()
        .solve_upper_triangular(&z)
        .expect("cholesky diagonal is strictly positive");
    Ok(mean
        .iter()
        .zip(x.iter())
        .map(|(m, xi)| m + scale * xi)
        .collect())
}

/// Largest eigenvalue of a positive definite matrix by power iteration,
/// started from the normalized all-ones vector.
///
/// Stops once successive Rayleigh quotients agree to relative `tol`.
pub fn max_eigenvalue(m: &SpdMatrix, tol: f64) -> Result<f64> {
    let n = m.dim();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = (v.transpose() * &m.inner * &v)[(0, 0)];
    for _ in 0..POWER_ITERATION_CAP {
        let w = &m.inner * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w / norm;
        let next = (v.transpose() * &m.inner * &v)[(0, 0)];
        if (next - estimate).abs() <= tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(NumericsError::NoConvergence {
        iterations: POWER_ITERATION_CAP,
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(NumericsError::DimensionMismatch { expected, got })
    }
}
