mod common;

use gave_core::linalg::{self, DenseMatrix, RealVector};
use gave_core::nsna::{self, IterationRecord, StepKind};
use gave_core::smoothing::{jacobian_parts, phi, phi_partials, phi_vec};
use proptest::prelude::*;

fn finite(scale: f64) -> impl Strategy<Value = f64> {
    -scale..scale
}

fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-5.0..5.0f64, n * n)
        .prop_map(move |d| DenseMatrix::from_row_major(n, n, d).unwrap())
}

/// Diagonally dominant, hence comfortably nonsingular.
fn well_conditioned(n: usize) -> impl Strategy<Value = DenseMatrix> {
    matrix(n).prop_map(move |m| m.shifted(5.0 * n as f64 + 1.0))
}

const SLACK: f64 = 4.0 * f64::EPSILON;

proptest! {
    #[test]
    fn phi_recovers_abs_at_zero(x in prop_oneof![finite(1e3), finite(1e-200), finite(1e300)]) {
        prop_assert_eq!(phi(0.0, x), x.abs());
    }

    #[test]
    fn phi_bounds(mu in 0.0..100.0f64, x in finite(1e3)) {
        let v = phi(mu, x);
        let scale = SLACK * (mu + x.abs());
        prop_assert!(v <= x.abs() + scale);
        prop_assert!(v >= x.abs() - mu - scale);
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn phi_lipschitz_two(a in (finite(50.0), finite(50.0)), b in (finite(50.0), finite(50.0))) {
        let lhs = (phi(a.0, a.1) - phi(b.0, b.1)).abs();
        let dist = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        prop_assert!(lhs <= 2.0 * dist + SLACK * 200.0);
    }

    #[test]
    fn phi_midpoint_convex(a in (finite(50.0), finite(50.0)), b in (finite(50.0), finite(50.0))) {
        let mid = phi(0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        prop_assert!(mid <= 0.5 * (phi(a.0, a.1) + phi(b.0, b.1)) + SLACK * 200.0);
    }

    #[test]
    fn partials_are_unit_bounded(mu in 1e-6..10.0f64, x in finite(100.0)) {
        let (dm, dx) = phi_partials(mu, x).unwrap();
        prop_assert!(dm <= 0.0 && dm > -1.0 - SLACK);
        prop_assert!(dx.abs() <= 1.0);
        prop_assert!((dm + 1.0).powi(2) + dx * dx <= 1.0 + 1e-12);
    }

    #[test]
    fn phi_vec_is_componentwise(mu in 0.0..5.0f64, x in proptest::collection::vec(finite(10.0), 0..20)) {
        let v = phi_vec(mu, &x);
        for (vi, &xi) in v.iter().zip(&x) {
            prop_assert_eq!(*vi, phi(mu, xi));
        }
    }

    #[test]
    fn jacobian_parts_follow_formulas(mu in 1e-3..10.0f64, x in proptest::collection::vec(finite(10.0), 1..10)) {
        let parts = jacobian_parts(mu, &x).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            let r = (mu * mu + xi * xi).sqrt();
            prop_assert!((parts.v1[i] - (mu / r - 1.0)).abs() <= 1e-14);
            prop_assert!((parts.v2_diag[i] - xi / r).abs() <= 1e-14);
        }
    }

    #[test]
    fn lu_solve_residual(a in well_conditioned(7), b in proptest::collection::vec(finite(10.0), 7)) {
        let rhs = RealVector::new(b).unwrap();
        let x = linalg::solve(&a, &rhs).unwrap();
        let r = linalg::mat_vec(&a, &x).unwrap().sub(&rhs);
        prop_assert!(r.norm() <= 1e-12 * (a.norm_fro() * x.norm() + rhs.norm()));
    }

    #[test]
    fn lu_reconstructs(a in matrix(6)) {
        prop_assume!(common::gauss_det(&common::to_rows(&a)).abs() > 1e-6);
        let f = linalg::lu_factor(&a).unwrap();
        let pa: Vec<f64> = f.permutation().iter().flat_map(|&r| a.row(r).to_vec()).collect();
        let lu = f.lower().matmul(&f.upper()).unwrap();
        let tol = 1e-12 * a.max_abs().max(1.0);
        for (p, q) in pa.iter().zip(lu.as_slice()) {
            prop_assert!((p - q).abs() <= tol);
        }
        for (p, q) in a.as_slice().iter().zip(f.reconstruct().as_slice()) {
            prop_assert!((p - q).abs() <= tol);
        }
    }

    #[test]
    fn row_swap_flips_determinant_sign(a in matrix(5), i in 0usize..5, j in 0usize..5) {
        prop_assume!(i != j);
        let det = common::gauss_det(&common::to_rows(&a));
        prop_assume!(det.abs() > 1e-6);
        let mut rows = common::to_rows(&a);
        rows.swap(i, j);
        let swapped = DenseMatrix::from_rows(&rows).unwrap();
        let d1 = linalg::determinant_sign(&a).unwrap();
        let d2 = linalg::determinant_sign(&swapped).unwrap();
        prop_assert_eq!(d1.sign, -d2.sign);
        prop_assert_eq!(f64::from(d1.sign), det.signum());
        prop_assert!((d1.log_abs - det.abs().ln()).abs() <= 1e-10 * det.abs().ln().abs().max(1.0));
    }

    #[test]
    fn inverse_reciprocates_singular_values(a in well_conditioned(5)) {
        let (smin, smax) = linalg::extreme_singular_values(&a).unwrap();
        let inv_cols: Vec<Vec<f64>> = (0..5)
            .map(|j| {
                let mut e = vec![0.0; 5];
                e[j] = 1.0;
                linalg::solve(&a, &RealVector::new(e).unwrap()).unwrap().into_vec()
            })
            .collect();
        let inv = DenseMatrix::from_rows(&inv_cols).unwrap().transpose();
        let (imin, imax) = linalg::extreme_singular_values(&inv).unwrap();
        prop_assert!((smin * imax - 1.0).abs() <= 1e-10);
        prop_assert!((smax * imin - 1.0).abs() <= 1e-10);
        let (emin, emax) = common::singular_extremes(&common::to_rows(&a));
        prop_assert!((smin - emin).abs() <= 1e-9 * smax);
        prop_assert!((smax - emax).abs() <= 1e-9 * smax);
    }

    #[test]
    fn two_norm_matches_naive_and_scales(v in proptest::collection::vec(finite(1e3), 0..30), k in -250i32..250) {
        let naive = common::norm(&v);
        prop_assert!((linalg::two_norm(&v) - naive).abs() <= 1e-14 * naive.max(1e-300));
        let s = 2f64.powi(k);
        let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
        prop_assert!((linalg::two_norm(&scaled) - naive * s).abs() <= 1e-14 * naive * s);
    }

    #[test]
    fn averaging_keeps_merit_below_c(c in 1e-12..1e6f64, frac in 0.0..1.0f64) {
        // M' < C implies M' < C' < C.
        let m = c * frac;
        let c_next = (c + 1.0) * m / (m + 1.0);
        prop_assert!(m <= c_next);
        prop_assert!(c_next < c);
    }

    #[test]
    fn trace_checker_accepts_consistent_traces(
        c0 in 1.0..1e4f64,
        gamma in 1e-12..1e-6f64,
        steps in proptest::collection::vec((0.01..1.0f64, 0.0..0.99f64, any::<bool>()), 1..8),
    ) {
        let mut mu = 0.01f64;
        let mut c = c0;
        let mut trace = Vec::new();
        for (k, &(frac, alpha_raw, full)) in steps.iter().enumerate() {
            let alpha = if full { 1.0 } else { 0.8f64.powi((alpha_raw * 20.0) as i32 + 1) };
            let beta = gamma * c;
            prop_assume!(beta < mu);
            trace.push(IterationRecord {
                k,
                mu,
                merit: c * frac,
                c_avg: c,
                beta,
                alpha: Some(alpha),
                step_kind: if full { StepKind::Full } else { StepKind::LineSearch },
                res: 1.0,
                direction_norm: Some(1.0),
            });
            let m_next = c * frac * 0.5;
            mu = (1.0 - alpha) * mu + alpha * beta;
            c = (c + 1.0) * m_next / (m_next + 1.0);
        }
        let beta = gamma * c;
        prop_assume!(beta < mu);
        trace.push(IterationRecord {
            k: steps.len(),
            mu,
            merit: c * 0.5,
            c_avg: c,
            beta,
            alpha: None,
            step_kind: StepKind::Stop,
            res: 0.0,
            direction_norm: None,
        });
        prop_assert!(nsna::check_trace(&trace).is_ok());
        let mut buf = Vec::new();
        nsna::write_trace_csv(&mut buf, &trace).unwrap();
        prop_assert_eq!(nsna::read_trace_csv(&buf[..]).unwrap(), trace);
    }
}
