//! Benchmark instance generators.
//!
//! Two HLCP families on an `m x m` grid (`n = m^2`) with
//! `M = A_hat + xi I` and `N = B_hat + zeta I`, where `B_hat` is
//! block-diagonal in a tridiagonal block `S` and `A_hat` adds off-diagonal
//! coupling blocks:
//!
//! | family | `S` bands (sub, diag, super) | couplings (sub, super) |
//! |--------|------------------------------|------------------------|
//! | 1      | `-1, 4, -1`                  | `-I, -I`               |
//! | 2      | `-1.5, 4, -0.5`              | `-1.5 I, -0.5 I`       |
//!
//! The right-hand side is `q = M z* - N w*` for the alternating
//! complementary pair `z* = (0, 1, 0, 1, ...)`, `w* = (1, 0, 1, 0, ...)`.
//!
//! Random instances use `ChaCha8Rng::seed_from_u64(seed)` with the stream
//! selected by `set_stream`, drawing `B` (row-major), then `R` (row-major),
//! then `b`, each entry through `random_range` on a half-open interval.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, DenseMatrix, LinalgError, RealVector};
use crate::model::{self, GaveProblem, HlcpProblem, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemsError {
    #[error("invalid example: {0}")]
    InvalidSpec(String),
    #[error("dimension {0} is odd; the alternating solution needs an even size")]
    OddDimension(usize),
    #[error("no instance satisfying sigma_min(A) > sigma_max(B) after {0} attempts")]
    GenerationFailure(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Symmetric blocks, `-1` off-diagonals and `-I` couplings.
    Symmetric,
    /// Nonsymmetric blocks, `-1.5 / -0.5` off-diagonals and couplings.
    Nonsymmetric,
}

impl Family {
    pub fn number(self) -> u8 {
        match self {
            Family::Symmetric => 1,
            Family::Nonsymmetric => 2,
        }
    }

    pub fn from_number(k: u8) -> Option<Self> {
        match k {
            1 => Some(Family::Symmetric),
            2 => Some(Family::Nonsymmetric),
            _ => None,
        }
    }

    /// `(sub, super)` values shared by the `S` bands and the coupling blocks.
    fn off_diagonals(self) -> (f64, f64) {
        match self {
            Family::Symmetric => (-1.0, -1.0),
            Family::Nonsymmetric => (-1.5, -0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleSpec {
    pub family: Family,
    /// Block dimension `m`; the problem size is `m^2`.
    pub block_dim: usize,
    pub xi: f64,
    pub zeta: f64,
}

impl ExampleSpec {
    pub fn new(family: Family, block_dim: usize, xi: f64, zeta: f64) -> Result<Self, ProblemsError> {
        let spec = Self {
            family,
            block_dim,
            xi,
            zeta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.block_dim * self.block_dim
    }

    pub fn validate(&self) -> Result<(), ProblemsError> {
        if self.block_dim < 2 {
            return Err(ProblemsError::InvalidSpec(format!(
                "block dimension {} must be at least 2",
                self.block_dim
            )));
        }
        if !self.n().is_multiple_of(2) {
            return Err(ProblemsError::OddDimension(self.n()));
        }
        for (name, v) in [("xi", self.xi), ("zeta", self.zeta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ProblemsError::InvalidSpec(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// `m x m` matrix with `sub`, `diag`, `sup` on the three central bands.
pub fn tridiag(m: usize, sub: f64, diag: f64, sup: f64) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m, m);
    let data = out.as_mut_slice();
    for i in 0..m {
        data[i * m + i] = diag;
        if i > 0 {
            data[i * m + i - 1] = sub;
        }
        if i + 1 < m {
            data[i * m + i + 1] = sup;
        }
    }
    out
}

/// Writes the `S` block on the block diagonal of a zeroed `n x n` matrix and,
/// when `couple` is set, the scaled identity couplings.
fn fill_blocks(out: &mut DenseMatrix, spec: &ExampleSpec, couple: bool, shift: f64) {
    let m = spec.block_dim;
    let n = spec.n();
    let (sub, sup) = spec.family.off_diagonals();
    let s = tridiag(m, sub, 4.0, sup);
    let data = out.as_mut_slice();
    for blk in 0..m {
        for i in 0..m {
            let row = blk * m + i;
            for j in 0..m {
                data[row * n + blk * m + j] = s[(i, j)];
            }
            data[row * n + row] += shift;
            if couple {
                if blk > 0 {
                    data[row * n + row - m] = sub;
                }
                if blk + 1 < m {
                    data[row * n + row + m] = sup;
                }
            }
        }
    }
}

/// The HLCP `(M, N, q)` of a benchmark family.
pub fn example_hlcp(spec: &ExampleSpec) -> Result<HlcpProblem, ProblemsError> {
    spec.validate()?;
    let n = spec.n();
    let mut m_mat = DenseMatrix::zeros(n, n);
    fill_blocks(&mut m_mat, spec, true, spec.xi);
    let mut n_mat = DenseMatrix::zeros(n, n);
    fill_blocks(&mut n_mat, spec, false, spec.zeta);
    let (z_star, w_star) = known_solution(n)?;
    let mz = linalg::mat_vec(&m_mat, &z_star)?;
    let nw = linalg::mat_vec(&n_mat, &w_star)?;
    let q = mz.sub(&nw);
    Ok(HlcpProblem::new(m_mat, n_mat, q)?)
}

/// The benchmark family converted to GAVE form (`A = M + N`, `B = M - N`).
pub fn example_gave(spec: &ExampleSpec) -> Result<GaveProblem, ProblemsError> {
    Ok(model::hlcp_to_gave(&example_hlcp(spec)?))
}

/// `z* = (0, 1, 0, 1, ...)`, `w* = (1, 0, 1, 0, ...)`.
pub fn known_solution(n: usize) -> Result<(RealVector, RealVector), ProblemsError> {
    if !n.is_multiple_of(2) {
        return Err(ProblemsError::OddDimension(n));
    }
    let z = (0..n).map(|i| (i % 2) as f64).collect();
    let w = (0..n).map(|i| ((i + 1) % 2) as f64).collect();
    Ok((RealVector::from_raw(z), RealVector::from_raw(w)))
}

/// The GAVE solution `x* = (z* - w*) / 2` matching [`known_solution`].
pub fn known_gave_solution(n: usize) -> Result<RealVector, ProblemsError> {
    let (z, w) = known_solution(n)?;
    Ok(z.sub(&w).scaled(0.5))
}

/// Attempts allowed before [`random_solvable_gave`] gives up.
pub const MAX_GENERATION_ATTEMPTS: usize = 100;

/// Random GAVE with `sigma_min(A) > sigma_max(B)`, hence uniquely solvable
/// for every right-hand side.
///
/// `B` has entries uniform in `[-1, 1)`, `A = t R + (sigma_max(B) + 1) I`
/// with `R` uniform in `[-0.3, 0.3)` and `t` halved until the singular value
/// condition is verified; `b` is uniform in `[-5, 5)`.
pub fn random_solvable_gave(n: usize, seed: u64) -> Result<GaveProblem, ProblemsError> {
    random_solvable_gave_stream(n, seed, 0)
}

/// [`random_solvable_gave`] on an independent stream of the same seed.
pub fn random_solvable_gave_stream(n: usize, seed: u64, stream: u64) -> Result<GaveProblem, ProblemsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut draw = |count: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..count).map(|_| rng.random_range(lo..hi)).collect()
    };
    let b_mat = DenseMatrix::from_row_major(n, n, draw(n * n, -1.0, 1.0))?;
    let r = DenseMatrix::from_row_major(n, n, draw(n * n, -0.3, 0.3))?;
    let rhs = RealVector::new(draw(n, -5.0, 5.0))?;
    let (_, sigma_max_b) = linalg::extreme_singular_values(&b_mat)?;
    let mut scale = 1.0;
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let a = r.scaled(scale).shifted(sigma_max_b + 1.0);
        let (sigma_min_a, _) = linalg::extreme_singular_values(&a)?;
        if sigma_min_a > sigma_max_b {
            return Ok(GaveProblem::new(a, b_mat, rhs)?);
        }
        scale *= 0.5;
    }
    Err(ProblemsError::GenerationFailure(MAX_GENERATION_ATTEMPTS))
}

/// A benchmark table: one family and `(xi, zeta)` pair over the reference
/// grid sizes, with the iteration counts reported for the non-monotone
/// solver under the default configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTable {
    pub id: u8,
    pub family: Family,
    pub xi: f64,
    pub zeta: f64,
    pub block_dims: [usize; 4],
    pub iterations: [usize; 4],
}

impl ReferenceTable {
    pub fn specs(&self) -> impl Iterator<Item = ExampleSpec> + '_ {
        self.block_dims.iter().map(|&m| ExampleSpec {
            family: self.family,
            block_dim: m,
            xi: self.xi,
            zeta: self.zeta,
        })
    }
}

pub const REFERENCE_TABLES: [ReferenceTable; 6] = [
    ReferenceTable {
        id: 1,
        family: Family::Symmetric,
        xi: 0.0,
        zeta: 0.0,
        block_dims: [16, 32, 48, 64],
        iterations: [5, 5, 6, 6],
    },
    ReferenceTable {
        id: 2,
        family: Family::Symmetric,
        xi: 0.0,
        zeta: 4.0,
        block_dims: [16, 32, 48, 64],
        iterations: [5, 6, 7, 7],
    },
    ReferenceTable {
        id: 3,
        family: Family::Symmetric,
        xi: 4.0,
        zeta: 0.0,
        block_dims: [16, 32, 48, 64],
        iterations: [3, 3, 3, 3],
    },
    ReferenceTable {
        id: 4,
        family: Family::Nonsymmetric,
        xi: 0.0,
        zeta: 0.0,
        block_dims: [16, 32, 48, 64],
        iterations: [4, 5, 6, 6],
    },
    ReferenceTable {
        id: 5,
        family: Family::Nonsymmetric,
        xi: 0.0,
        zeta: 4.0,
        block_dims: [16, 32, 48, 64],
        iterations: [6, 7, 7, 8],
    },
    ReferenceTable {
        id: 6,
        family: Family::Nonsymmetric,
        xi: 4.0,
        zeta: 0.0,
        block_dims: [16, 32, 48, 64],
        iterations: [3, 3, 3, 3],
    },
];
