//! Finite element toolkit for 2D diffusion and convection-diffusion
//! equations on triangulated domains, built around the
//! diagonal-times-Toeplitz preconditioning of the constant-coefficient
//! operator.
//!
//! The crate covers the full experiment pipeline:
//!
//! * [`mesh`] — structured hexagonal and Friedrichs-Keller meshes, midpoint
//!   refinement, Triangle-format import/export, seeded perturbation;
//! * [`assembly`] — linear elements with one-point barycentric quadrature,
//!   Dirichlet elimination at assembly;
//! * [`structure`] — two-level Toeplitz matrices from generating functions
//!   and the lattice embeddings of the hexagonal mesh;
//! * [`precond`] — the exact preconditioner `D^{1/2} A_1 D^{1/2}` and its
//!   projected-Toeplitz surrogate for unstructured meshes;
//! * [`krylov`] — preconditioned CG and full GMRES with relative-residual
//!   stopping;
//! * [`spectral`] — dense spectra of preconditioned operators, cluster and
//!   outlier reports, eigenvector conditioning.
//!
//! Element assembly and matrix-vector products run data parallel under the
//! default `parallel` feature and fall back to sequential loops without it;
//! both paths produce bit-identical results.

pub mod assembly;
pub mod cholesky;
pub mod coeff;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod market;
pub mod mesh;
pub mod mesh_io;
pub mod precond;
pub mod sparse;
pub mod spectral;
pub mod structure;

pub use coeff::{ScalarField, VectorField};
pub use error::{Error, Result};
pub use mesh::{Mesh, MeshFamily, Point};
pub use num_complex::Complex;
pub use precond::{PrecondKind, Preconditioner};
pub use sparse::SparseMatrix;
