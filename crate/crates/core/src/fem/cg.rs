//! Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::fem::sparse::SparseOperator;

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Target for `||b - A x|| / ||b||`.
    pub rel_tol: f64,
    /// Iteration cap; `None` means `50 * dim`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for SPD `A` with `rel_tol` and no initial guess.
pub fn solve_spd(a: &SparseOperator, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let opts = CgOptions {
        rel_tol,
        ..CgOptions::default()
    };
    Ok(conjugate_gradient(a, b, None, &opts, |_, _| {})?.solution)
}

/// PCG with a diagonal preconditioner. `observer` sees every iterate with
/// its iteration index. The returned residual is recomputed from scratch, and
/// the iteration restarts from the current iterate when the recurrence has
/// drifted from it.
pub fn conjugate_gradient(
    a: &SparseOperator,
    b: &[f64],
    initial: Option<&[f64]>,
    opts: &CgOptions,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<CgOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if let Some(x0) = initial {
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x0.len(),
            });
        }
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::NotSpd(format!("diagonal entry {i} is {}", diag[i])));
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let max_iter = opts.max_iter.unwrap_or(50 * n.max(1));
    let target = opts.rel_tol * bnorm;

    let mut x = initial.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    let true_residual = |x: &[f64], ax: &mut [f64], r: &mut [f64]| {
        a.mul_into(x, ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
        norm(r)
    };

    let mut restarts = 0;
    loop {
        let mut rnorm = true_residual(&x, &mut ax, &mut r);
        if rnorm <= target {
            return Ok(CgOutcome {
                solution: x,
                iterations,
                relative_residual: rnorm / bnorm,
            });
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while rnorm > target && iterations < max_iter {
            a.mul_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::NotSpd(format!(
                    "search direction curvature {pap:e} at iteration {iterations}"
                )));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            observer(iterations, &x);
            rnorm = norm(&r);
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let actual = true_residual(&x, &mut ax, &mut r);
        if actual <= target {
            return Ok(CgOutcome {
                solution: x,
                iterations,
                relative_residual: actual / bnorm,
            });
        }
        if iterations >= max_iter || restarts >= 3 {
            return Err(Error::NotConverged {
                iterations,
                residual: actual / bnorm,
                target: opts.rel_tol,
            });
        }
        restarts += 1;
    }
}
