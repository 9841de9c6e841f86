//! Unique-solvability checks for GAVE / HLCP data and an exhaustive
//! sign-pattern solver for small instances.
//!
//! `A + B D` is nonsingular for every diagonal `D` with entries in `[-1, 1]`
//! exactly when `{A + B, A - B}` has the column W-property. Since
//! `det(A + B D)` is affine in each `d_i` separately, its sign is constant
//! over the whole box iff it is constant (and nonzero) at the `2^n`
//! vertices, which are the column representatives of `{A + B, A - B}`. That
//! makes the vertex sweep in [`column_w_property`] an exact test; the
//! sampling in [`bd_nonsingularity_sample`] is a cheap statistical
//! complement for sizes where the sweep is out of reach.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, DenseMatrix, LinalgError, RealVector};
use crate::model::{self, GaveProblem};

/// Largest dimension for the `2^n` representative sweep.
pub const MAX_W_SWEEP_DIM: usize = 22;
/// Largest dimension for the sign-enumeration oracle.
pub const MAX_ORACLE_DIM: usize = 15;

/// Sign consistency slack: `s_i x_i >= -SIGN_SLACK`.
const SIGN_SLACK: f64 = 1e-12;
/// Oracle solutions closer than this (max-norm) are merged.
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("dimension {dim} exceeds the limit {max} for this check")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("matrices must be square and of equal size")]
    ShapeMismatch,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_pair(m: &DenseMatrix, n: &DenseMatrix) -> Result<usize, VerifyError> {
    if !m.is_square() || m.rows() != n.rows() || m.cols() != n.cols() {
        return Err(VerifyError::ShapeMismatch);
    }
    Ok(m.rows())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WPropertyReport {
    pub holds: bool,
    /// `2^n`.
    pub n_representatives: u64,
    /// Common determinant sign when the property holds.
    pub sign: Option<i8>,
    /// Column choice of the first offending representative: `+1` takes the
    /// column from the first matrix, `-1` from the second.
    pub witness: Option<Vec<i8>>,
}

/// Column representative selected by the bits of `mask` (bit `j` set takes
/// column `j` from `n`).
fn representative(m: &DenseMatrix, n: &DenseMatrix, mask: u64) -> DenseMatrix {
    let dim = m.cols();
    let mut out = m.clone();
    let data = out.as_mut_slice();
    for j in 0..dim {
        if mask >> j & 1 == 1 {
            for i in 0..dim {
                data[i * dim + j] = n[(i, j)];
            }
        }
    }
    out
}

fn mask_to_pattern(mask: u64, dim: usize) -> Vec<i8> {
    (0..dim).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect()
}

/// Exact column W-property test over all `2^n` column representatives.
pub fn column_w_property(m: &DenseMatrix, n: &DenseMatrix) -> Result<WPropertyReport, VerifyError> {
    let dim = check_pair(m, n)?;
    if dim > MAX_W_SWEEP_DIM {
        return Err(VerifyError::DimensionTooLarge {
            dim,
            max: MAX_W_SWEEP_DIM,
        });
    }
    let total = 1u64 << dim;
    let mut reference = None;
    for mask in 0..total {
        let det = linalg::determinant_sign(&representative(m, n, mask))?;
        let consistent = det.sign != 0 && reference.is_none_or(|s| s == det.sign);
        if !consistent {
            return Ok(WPropertyReport {
                holds: false,
                n_representatives: total,
                sign: None,
                witness: Some(mask_to_pattern(mask, dim)),
            });
        }
        reference = Some(det.sign);
    }
    Ok(WPropertyReport {
        holds: true,
        n_representatives: total,
        sign: reference,
        witness: None,
    })
}

/// Column W-property of `{A + B, A - B}`, i.e. nonsingularity of every
/// `A + B D` with `D` in the unit box.
pub fn gave_w_property(p: &GaveProblem) -> Result<WPropertyReport, VerifyError> {
    column_w_property(&p.a().add(p.b_mat()), &p.a().sub(p.b_mat()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub samples: usize,
    /// Smallest relative pivot seen; at or below `1e-14` means singular.
    pub worst_margin: f64,
    /// Diagonal of the `D` attaining `worst_margin`.
    pub worst_d: Vec<f64>,
    pub singular_found: bool,
    /// Whether `det(A + B D)` took both signs; by continuity the box then
    /// contains a singular member even if no sample hit it.
    pub sign_change: bool,
}

/// Samples `D = diag(d)`, `d_i` uniform in `[-1, 1]`, after first checking
/// `D = 0`, and records the worst singularity margin of `A + B D`.
pub fn bd_nonsingularity_sample(
    a: &DenseMatrix,
    b: &DenseMatrix,
    samples: usize,
    seed: u64,
) -> Result<SampleReport, VerifyError> {
    let dim = check_pair(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SampleReport {
        samples: 0,
        worst_margin: f64::INFINITY,
        worst_d: vec![0.0; dim],
        singular_found: false,
        sign_change: false,
    };
    let mut seen_sign = 0i8;
    let mut d = vec![0.0; dim];
    for s in 0..=samples {
        if s > 0 {
            d.iter_mut().for_each(|v| *v = rng.random_range(-1.0..=1.0));
        }
        let (det, margin) = linalg::determinant_and_margin(&a.add_scaled_columns(b, &d))?;
        report.samples += 1;
        if s == 0 || margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_d.clone_from(&d);
        }
        if det.sign == 0 {
            report.singular_found = true;
        } else if seen_sign == 0 {
            seen_sign = det.sign;
        } else if det.sign != seen_sign {
            report.sign_change = true;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReport {
    /// `sigma_min(A) > sigma_max(B)`.
    pub holds: bool,
    pub sigma_min_a: f64,
    pub sigma_max_b: f64,
    /// `sigma_min(A) - sigma_max(B)`; the check is robust when this exceeds
    /// `1e-10`.
    pub margin: f64,
}

impl SigmaReport {
    pub fn holds_robustly(&self) -> bool {
        self.margin > 1e-10
    }
}

/// The singular-value sufficient condition `sigma_min(A) > sigma_max(B)`.
pub fn sigma_sufficient_condition(a: &DenseMatrix, b: &DenseMatrix) -> Result<SigmaReport, VerifyError> {
    check_pair(a, b)?;
    let (sigma_min_a, _) = linalg::extreme_singular_values(a)?;
    let (_, sigma_max_b) = linalg::extreme_singular_values(b)?;
    Ok(SigmaReport {
        holds: sigma_min_a > sigma_max_b,
        sigma_min_a,
        sigma_max_b,
        margin: sigma_min_a - sigma_max_b,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleSolution {
    pub solutions: Vec<RealVector>,
    /// Sign pattern `s` that produced each solution.
    pub sign_patterns: Vec<Vec<i8>>,
    /// Patterns whose system `A + B diag(s)` was singular.
    pub singular_patterns: usize,
}

/// Solves `(A + B diag(s)) x = b` for every `s` in `{-1, 1}^n` and keeps the
/// sign-consistent solutions, which are exactly the solutions of the GAVE.
pub fn sign_enumeration_oracle(p: &GaveProblem) -> Result<OracleSolution, VerifyError> {
    let dim = p.n();
    if dim > MAX_ORACLE_DIM {
        return Err(VerifyError::DimensionTooLarge {
            dim,
            max: MAX_ORACLE_DIM,
        });
    }
    let mut out = OracleSolution::default();
    let mut scale = vec![0.0; dim];
    for mask in 0..1u64 << dim {
        let pattern = mask_to_pattern(mask, dim);
        for (s, &v) in scale.iter_mut().zip(&pattern) {
            *s = f64::from(v);
        }
        let system = p.a().add_scaled_columns(p.b_mat(), &scale);
        let x = match linalg::solve(&system, p.rhs()) {
            Ok(x) => x,
            Err(LinalgError::SingularMatrix { .. }) => {
                out.singular_patterns += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let consistent = x.iter().zip(&scale).all(|(xi, si)| si * xi >= -SIGN_SLACK);
        if !consistent {
            continue;
        }
        let duplicate = out
            .solutions
            .iter()
            .any(|y| y.iter().zip(x.iter()).all(|(a, b)| (a - b).abs() <= DEDUP_TOL));
        if !duplicate {
            out.solutions.push(x);
            out.sign_patterns.push(pattern);
        }
    }
    Ok(out)
}

/// Residual scale used to judge oracle solutions: `‖A‖‖x‖ + ‖B‖‖x‖ + ‖b‖`.
pub fn residual_scale(p: &GaveProblem, x: &[f64]) -> f64 {
    let xn = linalg::two_norm(x);
    (p.a().norm_fro() + p.b_mat().norm_fro()) * xn + p.rhs().norm()
}

/// Whether `x` solves `p` to `tol` relative to [`residual_scale`].
pub fn is_solution(p: &GaveProblem, x: &[f64], tol: f64) -> bool {
    model::residual(p, x).is_ok_and(|r| r <= tol * residual_scale(p, x).max(1.0))
}
