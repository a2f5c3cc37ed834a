//! Dense linear-algebra helpers for the spectral diagnostics.
//!
//! Everything here is meant for desk-scale verification; callers go through
//! [`check_dense_size`] so oversized requests fail early instead of thrashing.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};

/// Largest order accepted by the dense eigensolver-based diagnostics.
pub const DENSE_CEILING: usize = 4096;

pub fn check_dense_size(n: usize) -> Result<()> {
    if n > DENSE_CEILING {
        Err(Error::TooLarge {
            n,
            limit: DENSE_CEILING,
        })
    } else {
        Ok(())
    }
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut eigs: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

pub fn sym_extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let eigs = sym_eigenvalues(m);
    (eigs[0], *eigs.last().unwrap())
}

/// Generalized eigenvalues of the symmetric pair (A, P) with P positive
/// definite, computed from the congruent form `L^-1 A L^-T` where `P = L L^T`.
pub fn generalized_sym_eigenvalues(a: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = Cholesky::new(p.clone()).ok_or_else(|| {
        Error::NotPositiveDefinite("dense Cholesky failed in generalized eigensolver".into())
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let m = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let sym = (&m + m.transpose()) * 0.5;
    Ok(sym_eigenvalues(&sym))
}

/// Complex eigenvalues of a general real matrix, sorted by real then
/// imaginary part.
pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut eigs: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    eigs
}

/// Symmetric square root and inverse square root via eigendecomposition.
/// Fails when the matrix is not positive definite.
pub fn sym_sqrt_and_inv_sqrt(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite(
            "matrix square root requested for an indefinite matrix".into(),
        ));
    }
    let q = &eig.eigenvectors;
    let sqrt_l = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt_l = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok((q * sqrt_l * q.transpose(), q * inv_sqrt_l * q.transpose()))
}

/// Spectral condition number of a symmetric positive definite matrix.
pub fn cond2_spd(m: &DMatrix<f64>) -> Result<f64> {
    let (min, max) = sym_extreme_eigenvalues(m);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "condition number requested with minimal eigenvalue {min:e}"
        )));
    }
    Ok(max / min)
}

/// Condition number of a general complex matrix from its singular values.
pub fn cond2_complex(m: &DMatrix<Complex<f64>>) -> Result<f64> {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite(
            "singular matrix in condition number".into(),
        ));
    }
    Ok(max / min)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    assert!(points.len() >= 2, "slope fit needs at least two points");
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_eigenvalues_of_2x2() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let eigs = sym_eigenvalues(&m);
        assert_relative_eq!(eigs[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(eigs[1], 3.0, max_relative = 1e-12);
        assert_relative_eq!(cond2_spd(&m).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn generalized_pair_reduces_to_ratio_for_diagonals() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 6.0]));
        let p = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0]));
        let eigs = generalized_sym_eigenvalues(&a, &p).unwrap();
        assert_relative_eq!(eigs[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(eigs[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn complex_eigenvalues_of_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let eigs = complex_eigenvalues(&m);
        assert_relative_eq!(eigs[0].im, -1.0, max_relative = 1e-12);
        assert_relative_eq!(eigs[1].im, 1.0, max_relative = 1e-12);
        assert!(eigs[0].re.abs() < 1e-12);
    }

    #[test]
    fn sqrt_pair_inverts() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let (s, si) = sym_sqrt_and_inv_sqrt(&m).unwrap();
        let id = &s * &si;
        assert_relative_eq!(id[(0, 0)], 1.0, max_relative = 1e-12);
        assert_relative_eq!(id[(0, 1)], 0.0, epsilon = 1e-12);
        let back = &s * &s;
        assert_relative_eq!(back[(0, 1)], 1.0, max_relative = 1e-10);
    }

    #[test]
    fn slope_of_pure_power_law() {
        let points: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, (k as f64).powi(2))).collect();
        assert_relative_eq!(loglog_slope(&points), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn dense_guard() {
        assert!(check_dense_size(4096).is_ok());
        assert!(matches!(
            check_dense_size(4097),
            Err(Error::TooLarge { .. })
        ));
    }
}
