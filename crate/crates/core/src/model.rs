//! Problem data: GAVE `A x + B |x| = b` and HLCP `M z - N w = q`
//! instances, the residual, the smoothed system `H(mu, x)`, the reduced
//! Newton matrix and the conversions between the two problem classes.

use thiserror::Error;

use crate::linalg::{self, DenseMatrix, LinalgError, RealVector};
use crate::smoothing::{self, SmoothingError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix {name} is {rows}x{cols}, expected {n}x{n}")]
    BadShape {
        name: &'static str,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("B is identically zero")]
    ZeroB,
    #[error(transparent)]
    Smoothing(#[from] SmoothingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_shape(name: &'static str, m: &DenseMatrix, n: usize) -> Result<(), ModelError> {
    if m.rows() != n || m.cols() != n {
        return Err(ModelError::BadShape {
            name,
            rows: m.rows(),
            cols: m.cols(),
            n,
        });
    }
    Ok(())
}

fn check_len(v: &[f64], n: usize) -> Result<(), ModelError> {
    if v.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// A generalized absolute value equation `A x + B |x| - b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaveProblem {
    a: DenseMatrix,
    b_mat: DenseMatrix,
    rhs: RealVector,
    degenerate_b: bool,
}

impl GaveProblem {
    /// Rejects `B = 0`; use [`hlcp_to_gave`] for HLCP data where `M = N`.
    pub fn new(a: DenseMatrix, b_mat: DenseMatrix, rhs: RealVector) -> Result<Self, ModelError> {
        let p = Self::new_allow_zero_b(a, b_mat, rhs)?;
        if p.degenerate_b {
            return Err(ModelError::ZeroB);
        }
        Ok(p)
    }

    fn new_allow_zero_b(
        a: DenseMatrix,
        b_mat: DenseMatrix,
        rhs: RealVector,
    ) -> Result<Self, ModelError> {
        let n = rhs.len();
        check_shape("A", &a, n)?;
        check_shape("B", &b_mat, n)?;
        let degenerate_b = b_mat.is_zero();
        Ok(Self {
            a,
            b_mat,
            rhs,
            degenerate_b,
        })
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b_mat(&self) -> &DenseMatrix {
        &self.b_mat
    }

    pub fn rhs(&self) -> &RealVector {
        &self.rhs
    }

    /// True when `B = 0`, i.e. the equation is linear.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_b
    }

    /// `A x + B v - b` for an arbitrary `v` standing in for `|x|`.
    pub(crate) fn affine_raw(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| linalg::dot(self.a.row(i), x) + linalg::dot(self.b_mat.row(i), v) - self.rhs[i])
            .collect()
    }
}

/// A horizontal linear complementarity problem
/// `M z - N w = q, z >= 0, w >= 0, z^T w = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HlcpProblem {
    m_mat: DenseMatrix,
    n_mat: DenseMatrix,
    q: RealVector,
}

impl HlcpProblem {
    pub fn new(m_mat: DenseMatrix, n_mat: DenseMatrix, q: RealVector) -> Result<Self, ModelError> {
        let n = q.len();
        check_shape("M", &m_mat, n)?;
        check_shape("N", &n_mat, n)?;
        Ok(Self { m_mat, n_mat, q })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn m_mat(&self) -> &DenseMatrix {
        &self.m_mat
    }

    pub fn n_mat(&self) -> &DenseMatrix {
        &self.n_mat
    }

    pub fn q(&self) -> &RealVector {
        &self.q
    }

    /// `‖M z - N w - q‖`.
    pub fn residual(&self, z: &[f64], w: &[f64]) -> Result<f64, ModelError> {
        check_len(z, self.n())?;
        check_len(w, self.n())?;
        let mz = linalg::mat_vec(&self.m_mat, z)?;
        let nw = linalg::mat_vec(&self.n_mat, w)?;
        Ok(mz.sub(&nw).sub(&self.q).norm())
    }
}

/// A point `z = (mu, x)` of the smoothed system.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub mu: f64,
    pub x: RealVector,
}

impl Iterate {
    pub fn new(mu: f64, x: RealVector) -> Self {
        Self { mu, x }
    }
}

/// `H(mu, x) = (mu, A x + B Phi(mu, x) - b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HValue {
    pub mu_component: f64,
    pub lower_block: RealVector,
}

impl HValue {
    /// `‖H‖^2`, the merit function.
    pub fn merit(&self) -> f64 {
        let l = self.lower_block.norm();
        self.mu_component * self.mu_component + l * l
    }

    pub fn norm(&self) -> f64 {
        linalg::two_norm(&[self.mu_component, self.lower_block.norm()])
    }
}

/// A pair `(z, w)` candidate for an HLCP.
#[derive(Debug, Clone, PartialEq)]
pub struct HlcpSolution {
    pub z: RealVector,
    pub w: RealVector,
}

impl HlcpSolution {
    /// Sign and complementarity conditions within `tol`.
    pub fn is_complementary(&self, tol: f64) -> bool {
        let nonneg = self.z.iter().chain(self.w.iter()).all(|&v| v >= -tol);
        let gap = self.z.dot(&self.w).abs();
        nonneg && gap <= tol * (1.0 + self.z.norm() * self.w.norm())
    }
}

/// `‖A x + B |x| - b‖₂`.
pub fn residual(p: &GaveProblem, x: &[f64]) -> Result<f64, ModelError> {
    check_len(x, p.n())?;
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    Ok(linalg::two_norm(&p.affine_raw(x, &abs)))
}

pub fn h_eval(p: &GaveProblem, z: &Iterate) -> Result<HValue, ModelError> {
    check_len(&z.x, p.n())?;
    Ok(h_eval_raw(p, z.mu, &z.x))
}

pub(crate) fn h_eval_raw(p: &GaveProblem, mu: f64, x: &[f64]) -> HValue {
    let phi = smoothing::phi_vec(mu, x);
    HValue {
        mu_component: mu,
        lower_block: RealVector::from_raw(p.affine_raw(x, &phi)),
    }
}

/// The lower-right Jacobian block `A + B diag(v2)`.
pub fn reduced_newton_matrix(p: &GaveProblem, z: &Iterate) -> Result<DenseMatrix, ModelError> {
    check_len(&z.x, p.n())?;
    let parts = smoothing::jacobian_parts(z.mu, &z.x)?;
    Ok(p.a.add_scaled_columns(&p.b_mat, &parts.v2_diag))
}

/// `A = M + N`, `B = M - N`, `b = q`. `M = N` yields a flagged linear problem.
pub fn hlcp_to_gave(h: &HlcpProblem) -> GaveProblem {
    let a = h.m_mat.add(&h.n_mat);
    let b_mat = h.m_mat.sub(&h.n_mat);
    GaveProblem::new_allow_zero_b(a, b_mat, h.q.clone())
        .expect("HLCP shapes were validated at construction")
}

/// `z = |x| + x`, `w = |x| - x`, so that `x = (z - w) / 2` and
/// `M z - N w = (M + N) x + (M - N) |x|`.
pub fn gave_solution_to_hlcp(x: &[f64]) -> HlcpSolution {
    let z = x.iter().map(|&v| v.abs() + v).collect();
    let w = x.iter().map(|&v| v.abs() - v).collect();
    HlcpSolution {
        z: RealVector::from_raw(z),
        w: RealVector::from_raw(w),
    }
}
