//! Preconditioned conjugate gradients and full GMRES.
//!
//! Both solvers start from the zero guess and stop at a relative residual of
//! 1e-7 by default. PCG measures the true residual `b - A x`; GMRES is left
//! preconditioned and measures the preconditioned residual (the report also
//! carries the true one at exit). Identical inputs give bit-identical
//! reports: every reduction runs in a fixed order.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::precond::Preconditioner;
use crate::sparse::SparseMatrix;

pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    /// Defaults to `min(n, 500)` when absent.
    pub max_iterations: Option<usize>,
    /// Record the iterates (diagnostics; off by default).
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_iterations: None,
            record_iterates: false,
        }
    }
}

impl SolveOptions {
    fn max_iterations_for(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or_else(|| n.min(500))
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual per iteration, starting at 1 for the zero guess.
    /// True residuals for PCG, preconditioned residuals for GMRES.
    pub residual_history: Vec<f64>,
    /// `||b - A x|| / ||b||` at exit.
    pub final_true_residual: f64,
    /// Final preconditioned relative residual (GMRES only).
    pub final_preconditioned_residual: Option<f64>,
    pub solution: Vec<f64>,
    pub wall_time: Duration,
    pub iterates: Option<Vec<Vec<f64>>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn true_relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64], b_norm: f64) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = b
        .iter()
        .zip(&ax)
        .map(|(bi, yi)| (bi - yi) * (bi - yi))
        .sum::<f64>()
        .sqrt();
    r / b_norm
}

/// Preconditioned conjugate gradient method for symmetric positive definite
/// systems. Stops when the true relative residual drops below `tol`.
pub fn pcg(
    a: &SparseMatrix,
    b: &[f64],
    p: &Preconditioner,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n || p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "pcg: matrix {} x {}, rhs {}, preconditioner {}",
            a.n_rows(),
            a.n_cols(),
            b.len(),
            p.n()
        )));
    }
    let start = Instant::now();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(SolveReport {
            iterations: 0,
            converged: true,
            residual_history: vec![0.0],
            final_true_residual: 0.0,
            final_preconditioned_residual: None,
            solution: x,
            wall_time: start.elapsed(),
            iterates: opts.record_iterates.then(Vec::new),
        });
    }

    let max_iterations = opts.max_iterations_for(n);
    let mut history = vec![1.0];
    let mut iterates = opts.record_iterates.then(Vec::new);
    let mut r = b.to_vec();
    let mut z = p.apply_inverse(&r);
    let mut rho = dot(&r, &z);
    if rho <= 0.0 {
        return Err(Error::Breakdown(format!(
            "nonpositive r' z = {rho:e} at startup (indefinite preconditioner?)"
        )));
    }
    let mut direction = z.clone();
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=max_iterations {
        let ap = a.matvec(&direction);
        let denom = dot(&direction, &ap);
        if denom <= 0.0 {
            return Err(Error::Breakdown(format!(
                "nonpositive p' A p = {denom:e} at iteration {k} (matrix not positive definite?)"
            )));
        }
        let alpha = rho / denom;
        for i in 0..n {
            x[i] += alpha * direction[i];
            r[i] -= alpha * ap[i];
        }
        if let Some(list) = iterates.as_mut() {
            list.push(x.clone());
        }
        let rel = true_relative_residual(a, &x, b, b_norm);
        history.push(rel);
        iterations = k;
        if rel <= opts.tol {
            converged = true;
            break;
        }
        z = p.apply_inverse(&r);
        let rho_next = dot(&r, &z);
        if rho_next <= 0.0 {
            return Err(Error::Breakdown(format!(
                "nonpositive r' z = {rho_next:e} at iteration {k}"
            )));
        }
        let beta = rho_next / rho;
        rho = rho_next;
        for i in 0..n {
            direction[i] = z[i] + beta * direction[i];
        }
    }

    let final_true = *history.last().unwrap();
    Ok(SolveReport {
        iterations,
        converged,
        residual_history: history,
        final_true_residual: final_true,
        final_preconditioned_residual: None,
        solution: x,
        wall_time: start.elapsed(),
        iterates,
    })
}

/// Full (non-restarted) GMRES on the left-preconditioned system, with
/// Arnoldi via modified Gram-Schmidt and Givens rotations on the Hessenberg
/// matrix. Stops on the preconditioned relative residual.
pub fn pgmres(
    a: &SparseMatrix,
    b: &[f64],
    p: &Preconditioner,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n || p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "pgmres: matrix {} x {}, rhs {}, preconditioner {}",
            a.n_rows(),
            a.n_cols(),
            b.len(),
            p.n()
        )));
    }
    let start = Instant::now();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(SolveReport {
            iterations: 0,
            converged: true,
            residual_history: vec![0.0],
            final_true_residual: 0.0,
            final_preconditioned_residual: Some(0.0),
            solution: vec![0.0; n],
            wall_time: start.elapsed(),
            iterates: opts.record_iterates.then(Vec::new),
        });
    }

    let max_iterations = opts.max_iterations_for(n);
    let r0 = p.apply_inverse(b);
    let beta = norm(&r0);
    if beta == 0.0 {
        return Err(Error::Breakdown(
            "preconditioned right-hand side vanished".into(),
        ));
    }

    let mut basis: Vec<Vec<f64>> = vec![r0.iter().map(|v| v / beta).collect()];
    // Column-major Hessenberg: h[k] holds column k (k+2 entries).
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut lucky = false;
    let mut iterations = 0;

    for k in 0..max_iterations {
        let mut w = p.apply_inverse(&a.matvec(&basis[k]));
        let mut column = Vec::with_capacity(k + 2);
        for v in basis.iter().take(k + 1) {
            let hik = dot(v, &w);
            column.push(hik);
            for i in 0..n {
                w[i] -= hik * v[i];
            }
        }
        let w_norm = norm(&w);
        column.push(w_norm);

        // Apply the accumulated rotations, then zero the subdiagonal.
        for i in 0..k {
            let t = cs[i] * column[i] + sn[i] * column[i + 1];
            column[i + 1] = -sn[i] * column[i] + cs[i] * column[i + 1];
            column[i] = t;
        }
        let (c, s) = givens(column[k], column[k + 1]);
        cs.push(c);
        sn.push(s);
        column[k] = c * column[k] + s * column[k + 1];
        column[k + 1] = 0.0;
        g.push(-s * g[k]);
        g[k] *= c;
        h.push(column);

        iterations = k + 1;
        let rel = g[k + 1].abs() / beta;
        history.push(rel);
        if rel <= opts.tol {
            converged = true;
            break;
        }
        if w_norm == 0.0 {
            // Lucky breakdown: the Krylov space is invariant, the projected
            // solution is exact.
            converged = true;
            lucky = true;
            break;
        }
        basis.push(w.iter().map(|v| v / w_norm).collect());
    }

    // Back substitution on the triangularized Hessenberg system.
    let k = iterations;
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in (i + 1)..k {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut x = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        for i in 0..n {
            x[i] += yj * basis[j][i];
        }
    }

    let final_true = true_relative_residual(a, &x, b, b_norm);
    let final_prec = if lucky {
        let res = p.apply_inverse(
            &b.iter()
                .zip(a.matvec(&x))
                .map(|(bi, yi)| bi - yi)
                .collect::<Vec<f64>>(),
        );
        norm(&res) / beta
    } else {
        *history.last().unwrap()
    };
    Ok(SolveReport {
        iterations,
        converged,
        residual_history: history,
        final_true_residual: final_true,
        final_preconditioned_residual: Some(final_prec),
        solution: x,
        wall_time: start.elapsed(),
        iterates: opts.record_iterates.then(Vec::new),
    })
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}
