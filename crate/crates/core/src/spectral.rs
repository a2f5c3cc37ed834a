//! Spectral diagnostics: splitting into symmetric and skew parts, dense
//! preconditioned spectra with outlier counts, eigenvector conditioning of
//! the constant-coefficient preconditioned operator, and growth scans of the
//! convection skew part.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::assembly::{assemble_convection, assemble_diffusion};
use crate::coeff::{ScalarField, VectorField};
use crate::dense::{
    check_dense_size, complex_eigenvalues, cond2_complex, cond2_spd, generalized_sym_eigenvalues,
    loglog_slope, sym_sqrt_and_inv_sqrt,
};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::precond::Preconditioner;
use crate::sparse::SparseMatrix;

/// Epsilon grid used for outlier counting.
pub const OUTLIER_EPSILONS: [f64; 2] = [0.1, 0.05];

/// Splits `A` into its symmetric part `(A + A^T)/2` and skew-symmetric part
/// `(A - A^T)/2`; the two add back to `A` exactly.
pub fn hss_split(a: &SparseMatrix) -> (SparseMatrix, SparseMatrix) {
    let at = a.transpose();
    let h = a.add_scaled(&at, 1.0).expect("square input").scale(0.5);
    let s = a.add_scaled(&at, -1.0).expect("square input").scale(0.5);
    (h, s)
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Eigenvalues sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Cluster center the outliers are counted against.
    pub center: Complex<f64>,
    /// (epsilon, count of eigenvalues with |lambda - center| >= epsilon).
    pub outliers: Vec<(f64, usize)>,
    pub min_re: f64,
    pub max_re: f64,
    pub max_abs_im: f64,
}

impl SpectrumReport {
    fn from_eigenvalues(eigenvalues: Vec<Complex<f64>>, center: Complex<f64>) -> SpectrumReport {
        let outliers = OUTLIER_EPSILONS
            .iter()
            .map(|&eps| {
                let count = eigenvalues
                    .iter()
                    .filter(|l| (*l - center).norm() >= eps)
                    .count();
                (eps, count)
            })
            .collect();
        let min_re = eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::INFINITY, f64::min);
        let max_re = eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let max_abs_im = eigenvalues.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        SpectrumReport {
            eigenvalues,
            center,
            outliers,
            min_re,
            max_re,
            max_abs_im,
        }
    }

    pub fn outliers_at(&self, eps: f64) -> usize {
        self.outliers
            .iter()
            .find(|(e, _)| *e == eps)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| {
                self.eigenvalues
                    .iter()
                    .filter(|l| (*l - self.center).norm() >= eps)
                    .count()
            })
    }
}

/// Spectrum of `P^{-1} A` clustered against `center`. Symmetric inputs go
/// through the generalized symmetric eigensolver (the congruent
/// `P^{-1/2} A P^{-1/2}` form); nonsymmetric ones through the dense
/// nonsymmetric eigensolver applied to the explicitly preconditioned matrix.
pub fn preconditioned_spectrum(
    a: &SparseMatrix,
    p: &Preconditioner,
    center: Complex<f64>,
) -> Result<SpectrumReport> {
    let n = a.n_rows();
    check_dense_size(n)?;
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "spectrum of {} x {} with preconditioner of order {}",
            a.n_rows(),
            a.n_cols(),
            p.n()
        )));
    }
    let eigenvalues = if a.is_symmetric() {
        generalized_sym_eigenvalues(&a.to_dense(), &p.to_dense())?
            .into_iter()
            .map(|l| Complex::new(l, 0.0))
            .collect()
    } else {
        let dense = a.to_dense();
        let mut m = DMatrix::zeros(n, n);
        for col in 0..n {
            let rhs: Vec<f64> = (0..n).map(|row| dense[(row, col)]).collect();
            let out = p.apply_inverse(&rhs);
            for row in 0..n {
                m[(row, col)] = out[row];
            }
        }
        complex_eigenvalues(&m)
    };
    Ok(SpectrumReport::from_eigenvalues(eigenvalues, center))
}

#[derive(Clone, Copy, Debug)]
pub struct ConditioningRow {
    pub m: u32,
    pub n: usize,
    pub h: f64,
    /// Condition number of the constructed eigenvector matrix.
    pub k2_v: f64,
    /// `sqrt` of the condition number of the unit stiffness matrix.
    pub k2_theta_sqrt: f64,
    /// Largest deviation of `Q^H Q` from the identity.
    pub unitarity_defect: f64,
}

#[derive(Clone, Debug)]
pub struct ConditioningReport {
    pub rows: Vec<ConditioningRow>,
    /// Fitted log-log slope of `K2(V)` against h.
    pub slope: f64,
}

/// Conditioning of the eigenvector matrix of the preconditioned operator for
/// constant coefficients. The operator is `I + Theta(1)^{-1/2} W
/// Theta(1)^{1/2}` with a skew-symmetric `W`, so `V = Theta(1)^{-1/2} Q` with
/// unitary `Q` diagonalizes it and `K2(V) = sqrt(K2(Theta(1)))`.
pub fn eigenvector_conditioning(
    meshes: &[Mesh],
    a_value: f64,
    b_value: [f64; 2],
) -> Result<ConditioningReport> {
    if a_value <= 0.0 {
        return Err(Error::InvalidParameter(
            "constant diffusion coefficient must be positive".into(),
        ));
    }
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let n = mesh.n_interior();
        check_dense_size(n)?;
        let theta_one = assemble_diffusion(mesh, &ScalarField::Constant(1.0))?;
        let psi = assemble_convection(mesh, &VectorField::Constant(b_value))?;
        let theta_dense = theta_one.to_dense();
        let (theta_sqrt, theta_inv_sqrt) = sym_sqrt_and_inv_sqrt(&theta_dense)?;

        // W = a^{-1} Theta^{-1/2} Psi Theta^{-1/2}, forced exactly skew.
        let w = &theta_inv_sqrt * psi.to_dense() * &theta_inv_sqrt / a_value;
        let w = (&w - w.transpose()) * 0.5;
        // i W is Hermitian; its unitary eigenvector matrix diagonalizes W.
        let herm = DMatrix::from_fn(n, n, |r, c| Complex::new(0.0, w[(r, c)]));
        let eig = herm.symmetric_eigen();
        let q = eig.eigenvectors;
        let qhq = q.adjoint() * &q;
        let mut unitarity_defect = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                unitarity_defect = unitarity_defect.max((qhq[(r, c)] - target).norm());
            }
        }

        let theta_inv_sqrt_c = theta_inv_sqrt.map(|v| Complex::new(v, 0.0));
        let v = &theta_inv_sqrt_c * &q;
        let k2_v = cond2_complex(&v)?;
        let k2_theta_sqrt = cond2_spd(&theta_dense)?.sqrt();

        // Sanity: V diag(1 - i lambda) V^{-1} reconstructs the
        // preconditioned operator, V^{-1} = Q^H Theta^{1/2}.
        let theta_sqrt_c = theta_sqrt.map(|v| Complex::new(v, 0.0));
        let d = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex::new(1.0, -eig.eigenvalues[r])
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let reconstructed = &v * d * q.adjoint() * &theta_sqrt_c;
        let direct = DMatrix::from_fn(n, n, |r, c| {
            let target = if r == c { 1.0 } else { 0.0 };
            Complex::new(target + w[(r, c)], 0.0)
        });
        let direct = &theta_inv_sqrt_c * direct * &theta_sqrt_c;
        let defect = (&reconstructed - &direct).norm();
        if defect > 1e-6 * (1.0 + direct.norm()) {
            return Err(Error::Breakdown(format!(
                "eigenvector reconstruction defect {defect:e}"
            )));
        }

        let m = match mesh.family() {
            crate::mesh::MeshFamily::HexStructured(m) | crate::mesh::MeshFamily::SquareFk(m) => m,
            _ => 0,
        };
        rows.push(ConditioningRow {
            m,
            n,
            h: mesh.h(),
            k2_v,
            k2_theta_sqrt,
            unitarity_defect,
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.k2_v)).collect();
    let slope = if rows.len() >= 2 {
        loglog_slope(&points)
    } else {
        f64::NAN
    };
    Ok(ConditioningReport { rows, slope })
}

#[derive(Clone, Copy, Debug)]
pub struct SkewNormRow {
    pub m: u32,
    pub n: usize,
    pub h: f64,
    pub inf_norm: f64,
    pub two_norm_est: f64,
}

#[derive(Clone, Debug)]
pub struct SkewNormReport {
    pub rows: Vec<SkewNormRow>,
    /// Fitted log-log slope of the infinity norm against h.
    pub slope: f64,
}

/// Norms of the symmetric part of the convection matrix across refinements;
/// they shrink like h^2 for smooth velocity fields.
pub fn skew_norm_scan(meshes: &[Mesh], b: &VectorField) -> Result<SkewNormReport> {
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let psi = assemble_convection(mesh, b)?;
        let e = psi
            .add_scaled(&psi.transpose(), 1.0)
            .expect("square")
            .scale(0.5);
        let m = match mesh.family() {
            crate::mesh::MeshFamily::HexStructured(m) | crate::mesh::MeshFamily::SquareFk(m) => m,
            _ => 0,
        };
        rows.push(SkewNormRow {
            m,
            n: psi.n_rows(),
            h: mesh.h(),
            inf_norm: e.inf_norm(),
            two_norm_est: e.two_norm_est(50, 1e-8),
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.inf_norm > 0.0)
        .map(|r| (r.h, r.inf_norm))
        .collect();
    let slope = if points.len() >= 2 {
        loglog_slope(&points)
    } else {
        f64::NAN
    };
    Ok(SkewNormReport { rows, slope })
}
