//! Non-monotone smoothing Newton solver.
//!
//! The smoothed system `H(mu, x) = (mu, A x + B Phi(mu, x) - b)` is driven to
//! zero by Newton steps on the perturbed system `H'(z) dz = -H(z) + beta e1`.
//! A step is taken in full when it contracts `‖H‖` by `theta`; otherwise a
//! backtracking search accepts `alpha = delta^l` once the merit
//! `‖H‖^2` drops below the running average `C` minus `gamma ‖alpha dz‖^2`.
//! `C` is then updated as `(C + 1) M / (M + 1)` and `beta = gamma C`.
//!
//! The first row of `H'` is `[1, 0]`, so `d_mu = beta - mu` and only the
//! `n x n` block `A + B V2` has to be factorized.
//!
//! The smoothing component of a trial point is formed as
//! `(1 - alpha) mu + alpha beta` rather than `mu + alpha d_mu`; the two agree
//! in exact arithmetic, but the former cannot round to zero or below when
//! `beta` is many orders of magnitude smaller than `mu`.

mod trace;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::linalg::{self, LinalgError, RealVector};
use crate::model::{self, GaveProblem, HValue, Iterate, ModelError};
use crate::smoothing;

pub use trace::{check_trace, read_trace_csv, write_trace_csv, TraceError, TRACE_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NsnaError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("singular Newton matrix: {0}")]
    SingularJacobian(LinalgError),
    #[error("line search exceeded {max_backtracks} backtracks")]
    LineSearchStalled { max_backtracks: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How `gamma` is chosen at start-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `gamma = min{mu0 / (C0 + 1), 1 / (mu0 + 1), 1e-12}`.
    Reference,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Contraction factor for accepting a full Newton step.
    pub theta: f64,
    /// Backtracking factor.
    pub delta: f64,
    pub mu0: f64,
    pub gamma: GammaRule,
    /// Stop once `‖A x + B|x| - b‖ <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Use the current merit instead of the running average `C` in the
    /// line-search test.
    pub monotone: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: 0.2,
            delta: 0.8,
            mu0: 0.01,
            gamma: GammaRule::Reference,
            tol: 1e-7,
            max_iter: 100,
            max_backtracks: 50,
            monotone: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), NsnaError> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.theta) {
            return Err(NsnaError::InvalidConfig(format!("theta = {} not in (0, 1)", self.theta)));
        }
        if !open_unit(self.delta) {
            return Err(NsnaError::InvalidConfig(format!("delta = {} not in (0, 1)", self.delta)));
        }
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return Err(NsnaError::InvalidConfig(format!("mu0 = {} must be positive", self.mu0)));
        }
        if !(self.tol > 0.0) {
            return Err(NsnaError::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        if let GammaRule::Fixed(g) = self.gamma {
            if !open_unit(g) {
                return Err(NsnaError::InvalidConfig(format!("gamma = {g} not in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Solver state at iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub z: Iterate,
    /// `‖H(z)‖^2`.
    pub merit: f64,
    /// Running merit average `C`.
    pub c_avg: f64,
    /// Perturbation `beta = gamma C`.
    pub beta: f64,
    pub gamma: f64,
    h: HValue,
}

impl SolverState {
    pub fn h(&self) -> &HValue {
        &self.h
    }
}

/// Newton direction `(d_mu, d_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub d_mu: f64,
    pub d_x: RealVector,
}

impl Direction {
    pub fn norm(&self) -> f64 {
        linalg::two_norm(&[self.d_mu, self.d_x.norm()])
    }
}

/// An evaluated trial point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub alpha: f64,
    pub z: Iterate,
    pub merit: f64,
    h: HValue,
}

fn evaluate_trial(p: &GaveProblem, s: &SolverState, d: &Direction, alpha: f64) -> Trial {
    let mu = (1.0 - alpha) * s.z.mu + alpha * s.beta;
    let x = s.z.x.axpy(alpha, &d.d_x);
    let h = model::h_eval_raw(p, mu, &x);
    Trial {
        alpha,
        merit: h.merit(),
        z: Iterate::new(mu, x),
        h,
    }
}

/// Sets up `z0 = (mu0, x0)`, `C0 = M(z0)`, `gamma` and `beta0 = gamma C0`.
pub fn init_state(p: &GaveProblem, cfg: &SolverConfig, x0: &RealVector) -> Result<SolverState, NsnaError> {
    cfg.validate()?;
    let z = Iterate::new(cfg.mu0, x0.clone());
    let h = model::h_eval(p, &z)?;
    let c0 = h.merit();
    let gamma = match cfg.gamma {
        GammaRule::Reference => (cfg.mu0 / (c0 + 1.0)).min(1.0 / (cfg.mu0 + 1.0)).min(1e-12),
        GammaRule::Fixed(g) => g,
    };
    let beta = gamma * c0;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(NsnaError::InvalidConfig(format!("gamma = {gamma} not in (0, 1)")));
    }
    if !(beta < cfg.mu0) {
        return Err(NsnaError::InvalidConfig(format!(
            "gamma * C0 = {beta} must be below mu0 = {}",
            cfg.mu0
        )));
    }
    if !(gamma * cfg.mu0 < 1.0) {
        return Err(NsnaError::InvalidConfig(format!("gamma * mu0 = {} must be below 1", gamma * cfg.mu0)));
    }
    Ok(SolverState {
        k: 0,
        z,
        merit: c0,
        c_avg: c0,
        beta,
        gamma,
        h,
    })
}

/// Solves the perturbed Newton system through its reduced block:
/// `d_mu = beta - mu` and `(A + B V2) d_x = -lower - (B v1) d_mu`.
pub fn newton_direction(p: &GaveProblem, s: &SolverState) -> Result<Direction, NsnaError> {
    let parts = smoothing::jacobian_parts(s.z.mu, &s.z.x).map_err(ModelError::from)?;
    let d_mu = s.beta - s.z.mu;
    let jac = p.a().add_scaled_columns(p.b_mat(), &parts.v2_diag);
    let lu = linalg::lu_factor(&jac).map_err(NsnaError::SingularJacobian)?;
    let b_v1 = linalg::mat_vec(p.b_mat(), &parts.v1).map_err(ModelError::from)?;
    let rhs = RealVector::from_raw(
        s.h.lower_block
            .iter()
            .zip(b_v1.iter())
            .map(|(l, c)| -l - c * d_mu)
            .collect(),
    );
    let d_x = linalg::lu_solve(&lu, &rhs).map_err(ModelError::from)?;
    Ok(Direction { d_mu, d_x })
}

/// Evaluates `z + dz`; returns the trial when `‖H(z + dz)‖ <= theta ‖H(z)‖`.
pub fn try_full_step(p: &GaveProblem, s: &SolverState, d: &Direction, theta: f64) -> Option<Trial> {
    let trial = evaluate_trial(p, s, d, 1.0);
    (trial.h.norm() <= theta * s.h.norm()).then_some(trial)
}

/// Largest `alpha` in `1, delta, delta^2, ...` with
/// `M(z + alpha dz) <= C - gamma ‖alpha dz‖^2` (or `M(z)` in place of `C`
/// in monotone mode).
pub fn line_search(
    p: &GaveProblem,
    s: &SolverState,
    d: &Direction,
    cfg: &SolverConfig,
) -> Result<Trial, NsnaError> {
    let reference = if cfg.monotone { s.merit } else { s.c_avg };
    let dz_sq = {
        let n = d.norm();
        n * n
    };
    let mut alpha = 1.0;
    for _ in 0..=cfg.max_backtracks {
        let trial = evaluate_trial(p, s, d, alpha);
        if trial.merit <= reference - s.gamma * alpha * alpha * dz_sq {
            return Ok(trial);
        }
        alpha *= cfg.delta;
    }
    Err(NsnaError::LineSearchStalled {
        max_backtracks: cfg.max_backtracks,
    })
}

/// Accepts `z_next`: `C' = (C + 1) M' / (M' + 1)`, `beta' = gamma C'`.
pub fn update_averages(s: &SolverState, next: Trial) -> SolverState {
    let m = next.merit;
    let c_avg = (s.c_avg + 1.0) * m / (m + 1.0);
    SolverState {
        k: s.k + 1,
        z: next.z,
        merit: m,
        c_avg,
        beta: s.gamma * c_avg,
        gamma: s.gamma,
        h: next.h,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Full,
    LineSearch,
    /// Final record of a run; no step was taken from it.
    Stop,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Full => "full",
            StepKind::LineSearch => "line_search",
            StepKind::Stop => "stop",
        }
    }
}

/// One row of the iteration trace: the state at `k` plus the step taken
/// from it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub mu: f64,
    pub merit: f64,
    pub c_avg: f64,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub step_kind: StepKind,
    pub res: f64,
    pub direction_norm: Option<f64>,
}

/// Which run-time invariant failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    MuNotPositive,
    BetaNotBelowMu,
    MeritAboveAverage,
    AverageNotDecreasing,
    MuNotDecreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchStalled,
    SingularJacobian,
    /// A state violated `mu > 0`, `beta < mu`, `M <= C` or the strict decrease
    /// of `C` and `mu`; the offending record is attached.
    InvariantViolation {
        kind: InvariantKind,
        record: IterationRecord,
    },
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, SolveStatus::Converged)
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::LineSearchStalled => "line_search_stalled",
            SolveStatus::SingularJacobian => "singular_jacobian",
            SolveStatus::InvariantViolation { .. } => "invariant_violation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterate: Iterate,
    pub res: f64,
    /// Number of Newton iterations performed.
    pub iterations: usize,
    pub gamma: f64,
    pub trace: Vec<IterationRecord>,
    pub wall_time: Duration,
}

fn state_invariant(s: &SolverState) -> Option<InvariantKind> {
    if !(s.z.mu > 0.0) {
        Some(InvariantKind::MuNotPositive)
    } else if !(s.beta < s.z.mu) {
        Some(InvariantKind::BetaNotBelowMu)
    } else if !(s.merit <= s.c_avg) {
        Some(InvariantKind::MeritAboveAverage)
    } else {
        None
    }
}

fn record(s: &SolverState, res: f64) -> IterationRecord {
    IterationRecord {
        k: s.k,
        mu: s.z.mu,
        merit: s.merit,
        c_avg: s.c_avg,
        beta: s.beta,
        alpha: None,
        step_kind: StepKind::Stop,
        res,
        direction_norm: None,
    }
}

/// Runs the solver from `x0` until the residual drops to `cfg.tol`, the
/// iteration cap is hit, or the step computation breaks down.
pub fn solve(p: &GaveProblem, cfg: &SolverConfig, x0: &RealVector) -> Result<SolveReport, NsnaError> {
    let start = Instant::now();
    let mut state = init_state(p, cfg, x0)?;
    let mut trace = Vec::new();
    let finish = |status, state: SolverState, res, trace, gamma| SolveReport {
        status,
        iterations: state.k,
        iterate: state.z,
        res,
        gamma,
        trace,
        wall_time: start.elapsed(),
    };
    let gamma = state.gamma;
    loop {
        let res = model::residual(p, &state.z.x)?;
        let mut rec = record(&state, res);
        if let Some(kind) = state_invariant(&state) {
            trace.push(rec.clone());
            let status = SolveStatus::InvariantViolation { kind, record: rec };
            return Ok(finish(status, state, res, trace, gamma));
        }
        if res <= cfg.tol {
            trace.push(rec);
            return Ok(finish(SolveStatus::Converged, state, res, trace, gamma));
        }
        if state.k >= cfg.max_iter {
            trace.push(rec);
            return Ok(finish(SolveStatus::MaxIterations, state, res, trace, gamma));
        }
        let dir = match newton_direction(p, &state) {
            Ok(d) => d,
            Err(NsnaError::SingularJacobian(_)) => {
                trace.push(rec);
                return Ok(finish(SolveStatus::SingularJacobian, state, res, trace, gamma));
            }
            Err(e) => return Err(e),
        };
        rec.direction_norm = Some(dir.norm());
        let trial = match try_full_step(p, &state, &dir, cfg.theta) {
            Some(t) => {
                rec.step_kind = StepKind::Full;
                t
            }
            None => match line_search(p, &state, &dir, cfg) {
                Ok(t) => {
                    rec.step_kind = StepKind::LineSearch;
                    t
                }
                Err(NsnaError::LineSearchStalled { .. }) => {
                    trace.push(rec);
                    return Ok(finish(SolveStatus::LineSearchStalled, state, res, trace, gamma));
                }
                Err(e) => return Err(e),
            },
        };
        rec.alpha = Some(trial.alpha);
        let next = update_averages(&state, trial);
        let decrease = if !(next.c_avg < state.c_avg) {
            Some(InvariantKind::AverageNotDecreasing)
        } else if !(next.z.mu < state.z.mu) {
            Some(InvariantKind::MuNotDecreasing)
        } else {
            None
        };
        trace.push(rec);
        if let Some(kind) = decrease {
            let res = model::residual(p, &next.z.x)?;
            let bad = record(&next, res);
            trace.push(bad.clone());
            let status = SolveStatus::InvariantViolation { kind, record: bad };
            return Ok(finish(status, next, res, trace, gamma));
        }
        state = next;
    }
}
