//! Dense linear-algebra kernel.
//!
//! Matrices are stored row-major. LU factorization and singular values are
//! delegated to `faer`, always run with sequential parallelism so results are
//! bit-for-bit reproducible; everything else (products, norms, triangular
//! solves) is plain loops over the row-major storage.

use std::fmt;
use std::ops::{Deref, Index};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor as lu_impl;
use faer::linalg::svd;
use faer::{MatMut, MatRef, Par};
use thiserror::Error;

/// Relative pivot magnitude below which a factorization is declared singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-14;

/// Largest dimension accepted by [`extreme_singular_values`].
pub const MAX_SVD_DIM: usize = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is numerically singular (pivot {pivot})")]
    SingularMatrix { pivot: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("singular value iteration did not converge")]
    ConvergenceFailure,
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

fn check_finite(values: &[f64]) -> Result<(), LinalgError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(LinalgError::NonFinite { index }),
        None => Ok(()),
    }
}

/// A real vector whose entries are all finite.
#[derive(Clone, PartialEq, Default)]
pub struct RealVector {
    data: Vec<f64>,
}

impl RealVector {
    pub fn new(data: Vec<f64>) -> Result<Self, LinalgError> {
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn from_slice(data: &[f64]) -> Result<Self, LinalgError> {
        Self::new(data.to_vec())
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n] }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        assert!(value.is_finite(), "fill value must be finite");
        Self { data: vec![value; n] }
    }

    /// Wraps already-validated data. Arithmetic inside the crate produces
    /// finite values from finite inputs except on overflow, which callers
    /// detect through their own residual checks.
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        two_norm(&self.data)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn abs(&self) -> RealVector {
        Self::from_raw(self.data.iter().map(|v| v.abs()).collect())
    }

    pub fn dot(&self, other: &RealVector) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &RealVector) -> RealVector {
        assert_eq!(self.len(), other.len());
        Self::from_raw(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &RealVector) -> RealVector {
        assert_eq!(self.len(), other.len());
        Self::from_raw(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &RealVector) -> RealVector {
        assert_eq!(self.len(), other.len());
        Self::from_raw(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    pub fn scaled(&self, alpha: f64) -> RealVector {
        Self::from_raw(self.data.iter().map(|v| alpha * v).collect())
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl fmt::Debug for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data).finish()
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = LinalgError;

    fn try_from(data: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(data)
    }
}

/// Dense row-major matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows, all of which must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(diag.iter().all(|d| d.is_finite()));
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
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

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        two_norm(&self.data)
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self::from_raw(self.rows, self.cols, data)
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|v| alpha * v).collect())
    }

    /// `self + shift * I`
    pub fn shifted(&self, shift: f64) -> DenseMatrix {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out.data[i * self.cols + i] += shift;
        }
        out
    }

    /// `self * diag(scale)`: column `j` multiplied by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> DenseMatrix {
        assert_eq!(scale.len(), self.cols);
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.cols) {
            for (v, s) in row.iter_mut().zip(scale) {
                *v *= s;
            }
        }
        out
    }

    /// `self + other * diag(scale)` without materializing the product.
    pub fn add_scaled_columns(&self, other: &DenseMatrix, scale: &[f64]) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        assert_eq!(scale.len(), self.cols);
        let mut out = self.clone();
        for (row, orow) in out
            .data
            .chunks_exact_mut(self.cols)
            .zip(other.data.chunks_exact(self.cols))
        {
            for ((v, o), s) in row.iter_mut().zip(orow).zip(scale) {
                *v += o * s;
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Per-column maximum absolute entry.
    pub fn column_max_abs(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.cols];
        for row in self.data.chunks_exact(self.cols.max(1)) {
            for (m, v) in out.iter_mut().zip(row) {
                *m = m.max(v.abs());
            }
        }
        out
    }

    fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?},", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Packed partial-pivoting LU factorization `P A = L U`.
///
/// `L` is unit lower triangular and stored below the diagonal, `U` on and
/// above it. Row `i` of `P A` is row `perm[i]` of `A`.
#[derive(Clone)]
pub struct LuFactorization {
    n: usize,
    packed: Vec<f64>,
    perm: Vec<usize>,
    parity: i8,
}

impl fmt::Debug for LuFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LuFactorization")
            .field("n", &self.n)
            .field("parity", &self.parity)
            .finish_non_exhaustive()
    }
}

impl LuFactorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Sign of the row permutation, `+1` or `-1`.
    pub fn parity(&self) -> i8 {
        self.parity
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseMatrix {
        let n = self.n;
        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l.data[i * n + j] = self.packed[i * n + j];
            }
        }
        l
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.n;
        let mut u = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                u.data[i * n + j] = self.packed[i * n + j];
            }
        }
        u
    }

    pub fn pivot(&self, k: usize) -> f64 {
        self.packed[k * self.n + k]
    }

    /// `P^T L U`, the matrix this factorization represents.
    pub fn reconstruct(&self) -> DenseMatrix {
        let lu = self.lower().matmul(&self.upper()).expect("square factors");
        let n = self.n;
        let mut out = DenseMatrix::zeros(n, n);
        for (i, &src) in self.perm.iter().enumerate() {
            out.data[src * n..(src + 1) * n].copy_from_slice(lu.row(i));
        }
        out
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.packed[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.packed[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.packed[i * n + i];
        }
    }
}

/// Factorization result before the singularity screen is applied.
struct RawLu {
    lu: LuFactorization,
    /// `|u_kk| / max_i |a_ik|` for every pivot.
    relative_pivots: Vec<f64>,
}

impl RawLu {
    fn first_singular_pivot(&self) -> Option<usize> {
        self.relative_pivots.iter().position(|&r| !(r > SINGULAR_PIVOT_TOL))
    }
}

fn factor_raw(a: &DenseMatrix) -> Result<RawLu, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let col_max = a.column_max_abs();
    let mut packed = a.data.clone();
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let par = Par::Seq;
    let transpositions = {
        let view = MatMut::from_row_major_slice_mut(&mut packed, n, n);
        let mut buf = MemBuffer::new(lu_impl::lu_in_place_scratch::<usize, f64>(
            n,
            n,
            par,
            Default::default(),
        ));
        let stack = MemStack::new(&mut buf);
        let (info, _) =
            lu_impl::lu_in_place(view, &mut perm, &mut perm_inv, par, stack, Default::default());
        info.transposition_count
    };
    let relative_pivots = (0..n)
        .map(|k| {
            let p = packed[k * n + k].abs();
            if col_max[k] > 0.0 {
                p / col_max[k]
            } else {
                0.0
            }
        })
        .collect();
    let parity = if transpositions % 2 == 0 { 1 } else { -1 };
    Ok(RawLu {
        lu: LuFactorization {
            n,
            packed,
            perm,
            parity,
        },
        relative_pivots,
    })
}

/// Partial-pivoting LU factorization.
///
/// Fails with [`LinalgError::SingularMatrix`] when some pivot is at most
/// `1e-14` times the largest magnitude in the corresponding input column.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactorization, LinalgError> {
    let raw = factor_raw(a)?;
    match raw.first_singular_pivot() {
        Some(pivot) => Err(LinalgError::SingularMatrix { pivot }),
        None => Ok(raw.lu),
    }
}

pub fn lu_solve(f: &LuFactorization, rhs: &RealVector) -> Result<RealVector, LinalgError> {
    if rhs.len() != f.n {
        return Err(LinalgError::DimensionMismatch {
            expected: f.n,
            found: rhs.len(),
        });
    }
    let mut x: Vec<f64> = f.perm.iter().map(|&p| rhs[p]).collect();
    f.solve_in_place(&mut x);
    Ok(RealVector::from_raw(x))
}

/// Factor and solve in one call.
pub fn solve(a: &DenseMatrix, rhs: &RealVector) -> Result<RealVector, LinalgError> {
    lu_solve(&lu_factor(a)?, rhs)
}

/// Sign and log-magnitude of a determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    /// `-1`, `0` or `+1`; zero exactly when the factorization is singular.
    pub sign: i8,
    /// `ln |det|`, `-inf` when `sign == 0`.
    pub log_abs: f64,
}

impl Determinant {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }
}

pub fn determinant_sign(a: &DenseMatrix) -> Result<Determinant, LinalgError> {
    Ok(determinant_and_margin(a)?.0)
}

/// Smallest relative pivot `|u_kk| / max_i |a_ik|` of the partial-pivoting
/// factorization; values at or below [`SINGULAR_PIVOT_TOL`] mean singular.
pub fn singularity_margin(a: &DenseMatrix) -> Result<f64, LinalgError> {
    Ok(determinant_and_margin(a)?.1)
}

/// Determinant and singularity margin from a single factorization.
pub fn determinant_and_margin(a: &DenseMatrix) -> Result<(Determinant, f64), LinalgError> {
    let raw = factor_raw(a)?;
    let margin = raw
        .relative_pivots
        .iter()
        .fold(f64::INFINITY, |m, &r| if r.is_nan() { 0.0 } else { m.min(r) });
    if raw.first_singular_pivot().is_some() {
        let det = Determinant {
            sign: 0,
            log_abs: f64::NEG_INFINITY,
        };
        return Ok((det, margin));
    }
    let mut sign = raw.lu.parity;
    let mut log_abs = 0.0;
    for k in 0..raw.lu.n {
        let p = raw.lu.pivot(k);
        if p < 0.0 {
            sign = -sign;
        }
        log_abs += p.abs().ln();
    }
    Ok((Determinant { sign, log_abs }, margin))
}

/// `(sigma_min, sigma_max)` of a square matrix.
pub fn extreme_singular_values(a: &DenseMatrix) -> Result<(f64, f64), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    if n > MAX_SVD_DIM {
        return Err(LinalgError::DimensionTooLarge {
            dim: n,
            max: MAX_SVD_DIM,
        });
    }
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let par = Par::Seq;
    let mut s = faer::diag::Diag::<f64>::zeros(n);
    let mut buf = MemBuffer::new(svd::svd_scratch::<f64>(
        n,
        n,
        svd::ComputeSvdVectors::No,
        svd::ComputeSvdVectors::No,
        par,
        Default::default(),
    ));
    let stack = MemStack::new(&mut buf);
    svd::svd(a.as_faer(), s.as_mut(), None, None, par, stack, Default::default())
        .map_err(|_| LinalgError::ConvergenceFailure)?;
    let values = s.column_vector();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let v = values[i].abs();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Euclidean norm, scaled so that it neither overflows nor underflows.
pub fn two_norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    // Rescaling costs a division per entry; skip it when squares are safe.
    if (1e-100..1e100).contains(&scale) {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let ss: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * ss.sqrt()
}

pub fn mat_vec(a: &DenseMatrix, v: &[f64]) -> Result<RealVector, LinalgError> {
    if a.cols != v.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.cols,
            found: v.len(),
        });
    }
    Ok(RealVector::from_raw(mat_vec_raw(a, v)))
}

pub(crate) fn mat_vec_raw(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    a.data
        .chunks_exact(a.cols.max(1))
        .take(a.rows)
        .map(|row| dot(row, v))
        .collect()
}

/// Dot product with four independent accumulators so the loop vectorizes.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        // diagonal shift keeps the test matrices well conditioned
        DenseMatrix::from_row_major(n, n, data).unwrap().shifted(n as f64)
    }

    fn naive_mat_vec(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.rows()];
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                out[i] += a[(i, j)] * v[j];
            }
        }
        out
    }

    #[test]
    fn construction_rejects_non_finite() {
        assert_eq!(
            DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { index: 1 })
        );
        assert!(RealVector::new(vec![f64::INFINITY]).is_err());
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn lu_identity() {
        let f = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.lower(), DenseMatrix::identity(3));
        assert_eq!(f.upper(), DenseMatrix::identity(3));
        assert_eq!(f.parity(), 1);
    }

    #[test]
    fn lu_permutation_matrix_swaps_once() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.parity(), -1);
        assert_eq!(f.reconstruct(), a);
    }

    #[test]
    fn lu_reconstructs_random_matrix() {
        let a = random_matrix(8, 3);
        let f = lu_factor(&a).unwrap();
        let err = f.reconstruct().sub(&a).norm_fro();
        assert!(err <= 1e-12 * a.norm_fro(), "err = {err}");
    }

    #[test]
    fn lu_reports_singular_pivot() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(lu_factor(&a), Err(LinalgError::SingularMatrix { pivot: 1 })));
        let z = DenseMatrix::zeros(3, 3);
        assert!(matches!(lu_factor(&z), Err(LinalgError::SingularMatrix { pivot: 0 })));
        assert!(matches!(
            lu_factor(&DenseMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn lu_solve_small_cases() {
        let b = RealVector::from_slice(&[1.5, -2.0, 7.0]).unwrap();
        let f = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(lu_solve(&f, &b).unwrap(), b);

        let d = DenseMatrix::from_diagonal(&[2.0, 4.0]);
        let x = solve(&d, &RealVector::from_slice(&[2.0, 8.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);

        assert!(matches!(
            lu_solve(&f, &RealVector::zeros(2)),
            Err(LinalgError::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn lu_solve_random_residual() {
        let a = random_matrix(10, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rhs = RealVector::new((0..10).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let x = solve(&a, &rhs).unwrap();
        let r = RealVector::from_raw(naive_mat_vec(&a, &x)).sub(&rhs).norm();
        assert!(r <= 1e-10 * (a.norm_fro() * x.norm() + rhs.norm()));
    }

    #[test]
    fn determinant_fixtures() {
        let d = determinant_sign(&DenseMatrix::identity(5)).unwrap();
        assert_eq!(d.sign, 1);
        assert_eq!(d.log_abs, 0.0);

        let singular = DenseMatrix::from_rows(&[[2.0, -2.0], [-2.0, 2.0]]).unwrap();
        let d = determinant_sign(&singular).unwrap();
        assert_eq!(d.sign, 0);
        assert_eq!(d.log_abs, f64::NEG_INFINITY);

        // 2000 * 1000 - (-990) * (-1989) = 30890
        let a = DenseMatrix::from_rows(&[[2000.0, -990.0], [-1989.0, 1000.0]]).unwrap();
        let d = determinant_sign(&a).unwrap();
        assert_eq!(d.sign, 1);
        assert!((d.log_abs - 30890f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn determinant_flips_with_row_swaps() {
        let a = random_matrix(6, 5);
        let base = determinant_sign(&a).unwrap();
        let mut rows: Vec<Vec<f64>> = (0..6).map(|i| a.row(i).to_vec()).collect();
        let mut expected = base.sign;
        for (i, j) in [(0, 3), (1, 2), (4, 5)] {
            rows.swap(i, j);
            expected = -expected;
            let d = determinant_sign(&DenseMatrix::from_rows(&rows).unwrap()).unwrap();
            assert_eq!(d.sign, expected);
            assert!((d.log_abs - base.log_abs).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_values_diagonal() {
        assert_eq!(extreme_singular_values(&DenseMatrix::identity(4)).unwrap(), (1.0, 1.0));
        let (lo, hi) = extreme_singular_values(&DenseMatrix::from_diagonal(&[3.0, -5.0])).unwrap();
        assert!((lo - 3.0).abs() < 1e-12 && (hi - 5.0).abs() < 1e-12);
    }

    #[test]
    fn norms_and_products() {
        assert_eq!(two_norm(&[3.0, 4.0]), 5.0);
        assert_eq!(two_norm(&[]), 0.0);
        let big = two_norm(&[3e200, 4e200]);
        assert!((big / 5e200 - 1.0).abs() < 1e-15);
        let tiny = two_norm(&[3e-200, 4e-200]);
        assert!((tiny / 5e-200 - 1.0).abs() < 1e-15);

        let v = [1.0, -2.0, 0.5];
        assert_eq!(mat_vec(&DenseMatrix::identity(3), &v).unwrap().as_slice(), &v);
        assert!(mat_vec(&DenseMatrix::identity(2), &v).is_err());

        let a = random_matrix(7, 8);
        let w: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        let fast = mat_vec(&a, &w).unwrap();
        for (x, y) in fast.iter().zip(naive_mat_vec(&a, &w)) {
            assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0));
        }
    }
}
