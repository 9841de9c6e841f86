//! Test-side oracles written independently of the library kernels.

#![allow(dead_code, clippy::needless_range_loop)]

use gave_core::{DenseMatrix, GaveProblem, RealVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Gaussian elimination with partial pivoting on a copy.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k] == 0.0 {
            return None;
        }
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

/// Determinant by elimination (sign-tracking, no logarithms).
pub fn gauss_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(k, p);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn phi(mu: f64, x: f64) -> f64 {
    (mu * mu + x * x).sqrt() - mu
}

/// Lower block `A x + B Phi(mu, x) - b` from the textbook formula.
pub fn lower_block(p: &GaveProblem, mu: f64, x: &[f64]) -> Vec<f64> {
    let a = to_rows(p.a());
    let b = to_rows(p.b_mat());
    let ph: Vec<f64> = x.iter().map(|&xi| phi(mu, xi)).collect();
    let ax = mat_vec(&a, x);
    let bp = mat_vec(&b, &ph);
    (0..x.len()).map(|i| ax[i] + bp[i] - p.rhs()[i]).collect()
}

pub fn merit(p: &GaveProblem, mu: f64, x: &[f64]) -> f64 {
    let l = lower_block(p, mu, x);
    mu * mu + l.iter().map(|v| v * v).sum::<f64>()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(s: &[Vec<f64>]) -> Vec<f64> {
    let n = s.len();
    let mut a = s.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(sigma_min, sigma_max)` from the eigenvalues of `A^T A`.
pub fn singular_extremes(a: &[Vec<f64>]) -> (f64, f64) {
    let n = a.len();
    let ata: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[k][i] * a[k][j]).sum()).collect())
        .collect();
    let ev = jacobi_eigenvalues(&ata);
    (ev[0].max(0.0).sqrt(), ev[n - 1].max(0.0).sqrt())
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DenseMatrix {
    let data = (0..n * n).map(|_| rng.random_range(lo..hi)).collect();
    DenseMatrix::from_row_major(n, n, data).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> RealVector {
    RealVector::new((0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Every GAVE solution found by trying all `2^n` sign patterns, written
/// without the library oracle.
pub fn brute_force_solutions(p: &GaveProblem) -> Vec<Vec<f64>> {
    let n = p.n();
    let a = to_rows(p.a());
    let b = to_rows(p.b_mat());
    let mut found: Vec<Vec<f64>> = Vec::new();
    for mask in 0..1usize << n {
        let s: Vec<f64> = (0..n).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] + b[i][j] * s[j]).collect())
            .collect();
        let Some(x) = gauss_solve(&m, p.rhs()) else { continue };
        if x.iter().zip(&s).all(|(xi, si)| si * xi >= -1e-12)
            && !found.iter().any(|y| y.iter().zip(&x).all(|(u, v)| (u - v).abs() <= 1e-9))
        {
            found.push(x);
        }
    }
    found
}

/// Central differences of the lower block: the `x` columns and the `mu`
/// column.
pub fn fd_jacobian(p: &GaveProblem, mu: f64, x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len();
    let mut jx = vec![vec![0.0; n]; n];
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let lp = lower_block(p, mu, &xp);
        let lm = lower_block(p, mu, &xm);
        for i in 0..n {
            jx[i][j] = (lp[i] - lm[i]) / (2.0 * h);
        }
    }
    let h = 1e-6 * mu.max(1e-3);
    let lp = lower_block(p, mu + h, x);
    let lm = lower_block(p, mu - h, x);
    let jmu = lp.iter().zip(&lm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    (jx, jmu)
}

/// Solves the full `(n + 1)` system
/// `[1 0; B v1  A + B V2] (dmu, dx) = (beta - mu, -lower)`.
pub fn stacked_direction(p: &GaveProblem, mu: f64, x: &[f64], beta: f64) -> Vec<f64> {
    let n = x.len();
    let a = to_rows(p.a());
    let b = to_rows(p.b_mat());
    let r: Vec<f64> = x.iter().map(|xi| (mu * mu + xi * xi).sqrt()).collect();
    let v1: Vec<f64> = r.iter().map(|ri| mu / ri - 1.0).collect();
    let v2: Vec<f64> = x.iter().zip(&r).map(|(xi, ri)| xi / ri).collect();
    let bv1 = mat_vec(&b, &v1);
    let mut full = vec![vec![0.0; n + 1]; n + 1];
    full[0][0] = 1.0;
    for i in 0..n {
        full[i + 1][0] = bv1[i];
        for j in 0..n {
            full[i + 1][j + 1] = a[i][j] + b[i][j] * v2[j];
        }
    }
    let mut rhs = vec![beta - mu];
    rhs.extend(lower_block(p, mu, x).iter().map(|l| -l));
    gauss_solve(&full, &rhs).expect("stacked system is nonsingular")
}
