//! Brute-force and closed-form references for cross-checking the solvers.
//! Nothing here calls into `fem`; inputs are plain dense matrices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DENSE_MAX_DIM: usize = 200;
pub const DILUTE_MAX_RADIUS: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub oracle: String,
    pub computed: Vec<f64>,
    pub expected: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleResult {
    /// Entrywise relative comparison, `|c - e| <= tol * max(|e|, 1e-300)`.
    pub fn relative(oracle: &str, computed: Vec<f64>, expected: Vec<f64>, tolerance: f64) -> Self {
        let passed = computed.len() == expected.len()
            && computed
                .iter()
                .zip(&expected)
                .all(|(c, e)| (c - e).abs() <= tolerance * e.abs().max(1e-300));
        Self {
            oracle: oracle.to_owned(),
            computed,
            expected,
            tolerance,
            passed,
        }
    }

    pub fn absolute(oracle: &str, computed: Vec<f64>, expected: Vec<f64>, tolerance: f64) -> Self {
        let passed =
            computed.len() == expected.len() && computed.iter().zip(&expected).all(|(c, e)| (c - e).abs() <= tolerance);
        Self {
            oracle: oracle.to_owned(),
            computed,
            expected,
            tolerance,
            passed,
        }
    }
}

fn oracle_err(oracle: &str, message: impl Into<String>) -> Error {
    Error::Oracle {
        oracle: oracle.to_owned(),
        message: message.into(),
    }
}

fn dense(oracle: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.len(),
        });
    }
    if n == 0 {
        return Err(oracle_err(oracle, "empty matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Gaussian elimination with partial pivoting. A pivot below `1e-13` times
/// the largest entry is treated as singular.
pub fn dense_solve_oracle(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if n > DENSE_MAX_DIM {
        return Err(oracle_err(
            "dense-solve",
            format!("dimension {n} exceeds {DENSE_MAX_DIM}"),
        ));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let m = dense("dense-solve", a)?;
    let scale = m.amax();
    let lu = m.lu();
    let u = lu.u();
    if let Some(k) = (0..n).find(|&k| !(u[(k, k)].abs() > 1e-13 * scale)) {
        return Err(Error::Singular(k));
    }
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::Singular(n))
}

/// `k-th` Laplace-Beltrami eigenvalue `k^2 / R^2` on a circle of radius `R`.
pub fn circle_spectrum_oracle(radius: f64, k: u32) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(oracle_err(
            "circle-spectrum",
            format!("radius must be positive, got {radius}"),
        ));
    }
    Ok(f64::from(k).powi(2) / (radius * radius))
}

/// Effective conductivity of a dilute square array of insulating discs,
/// `(1 - f) / (1 + f)` with `f = pi r^2`.
pub fn dilute_limit_oracle(radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius <= DILUTE_MAX_RADIUS) {
        return Err(oracle_err(
            "dilute-limit",
            format!("radius {radius} outside the dilute range (0, {DILUTE_MAX_RADIUS}]"),
        ));
    }
    let f = PI * radius * radius;
    Ok((1.0 - f) / (1.0 + f))
}

/// Eigenvalues of `A x = lambda M x` for symmetric `A` and SPD `M`, ascending.
pub fn generalized_eigenvalues(a: &[Vec<f64>], m: &[Vec<f64>]) -> Result<Vec<f64>> {
    let a = dense("generalized-eigen", a)?;
    let m = dense("generalized-eigen", m)?;
    if a.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: m.nrows(),
        });
    }
    let l = m
        .cholesky()
        .ok_or_else(|| Error::NotSpd("mass matrix has no Cholesky factor".into()))?
        .l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotSpd("singular Cholesky factor".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest eigenvalue of `A x = lambda M x` above `1e-9` times the largest.
pub fn smallest_nonzero_generalized_eigenvalue(a: &[Vec<f64>], m: &[Vec<f64>]) -> Result<f64> {
    let ev = generalized_eigenvalues(a, m)?;
    let top = ev.last().copied().unwrap_or(0.0).abs();
    ev.into_iter()
        .find(|&l| l > 1e-9 * top)
        .ok_or_else(|| oracle_err("generalized-eigen", "no nonzero eigenvalue"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_system_returns_rhs() {
        let n = 5;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        let b = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(dense_solve_oracle(&a, &b).unwrap(), b);
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n = 50;
        let g: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = dense_solve_oracle(&a, &b).unwrap();
        let res = (0..n)
            .map(|i| (a[i].iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - b[i]).abs())
            .fold(0.0, f64::max);
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn pivoting_and_singular() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(dense_solve_oracle(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
        let s = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(dense_solve_oracle(&s, &[1.0, 1.0]), Err(Error::Singular(_))));
        let big = vec![vec![0.0; 201]; 201];
        assert!(dense_solve_oracle(&big, &[0.0; 201]).is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(circle_spectrum_oracle(0.25, 0).unwrap(), 0.0);
        assert_eq!(circle_spectrum_oracle(0.25, 1).unwrap(), 16.0);
        assert_eq!(circle_spectrum_oracle(1.0, 3).unwrap(), 9.0);
        assert!(circle_spectrum_oracle(0.0, 1).is_err());

        let f = PI * 0.01;
        assert_eq!(dilute_limit_oracle(0.1).unwrap(), (1.0 - f) / (1.0 + f));
        assert!((dilute_limit_oracle(0.1).unwrap() - 0.93906).abs() < 5e-5);
        assert!((dilute_limit_oracle(1e-8).unwrap() - 1.0).abs() < 1e-12);
        let f = PI * 0.0225;
        assert!((dilute_limit_oracle(0.15).unwrap() - (1.0 - f) / (1.0 + f)).abs() < 1e-15);
        assert!(dilute_limit_oracle(0.2).is_err());
        assert!(dilute_limit_oracle(0.0).is_err());
    }

    #[test]
    fn generalized_eigen_of_diagonal_pencil() {
        let a = vec![vec![0.0, 0.0, 0.0], vec![0.0, 6.0, 0.0], vec![0.0, 0.0, 2.0]];
        let m = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.5]];
        let ev = generalized_eigenvalues(&a, &m).unwrap();
        assert!((ev[0]).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14 && (ev[2] - 4.0).abs() < 1e-14);
        assert!((smallest_nonzero_generalized_eigenvalue(&a, &m).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn result_comparisons() {
        assert!(OracleResult::relative("x", vec![16.05], vec![16.0], 5e-3).passed);
        assert!(!OracleResult::relative("x", vec![16.1], vec![16.0], 5e-3).passed);
        assert!(OracleResult::absolute("x", vec![1.0, 2.0], vec![1.0, 2.0 + 1e-9], 1e-8).passed);
        assert!(!OracleResult::absolute("x", vec![1.0], vec![1.0, 2.0], 1.0).passed);
    }
}
