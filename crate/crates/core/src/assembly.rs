//! Element matrices and global assembly over interior nodes.
//!
//! Integrals use the one-point barycentric quadrature rule (exact on linear
//! integrands): the diffusion entry on a triangle K is
//! `a(b_K) |K| (grad phi_j . grad phi_i)` and the convection entry is
//! `-(|K|/3) (b(b_K) . grad phi_i)`, independent of the column index.
//!
//! Boundary basis functions are excluded at assembly, so the system order is
//! the number of interior nodes. Element computation parallelizes over
//! triangles and value accumulation over rows; within a row, contributions
//! are always added in triangle-index order, so parallel and sequential
//! assembly produce bit-identical matrices.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::coeff::{ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::mesh::{signed_area2, Mesh, Point};
use crate::sparse::SparseMatrix;

/// Local matrices of one triangle together with its global node map.
#[derive(Clone, Debug)]
pub struct ElementMatrix {
    pub triangle: usize,
    pub stiffness: [[f64; 3]; 3],
    pub convection: [[f64; 3]; 3],
    pub nodes: [usize; 3],
}

/// Constant gradients of the linear nodal basis and the triangle area.
fn p1_gradients(points: &[Point; 3]) -> Result<([[f64; 2]; 3], f64)> {
    let area2 = signed_area2(points[0], points[1], points[2]);
    if area2 <= 0.0 {
        return Err(Error::DegenerateElement {
            index: 0,
            area: area2 / 2.0,
        });
    }
    let [p0, p1, p2] = points;
    let grads = [
        [(p1.y - p2.y) / area2, (p2.x - p1.x) / area2],
        [(p2.y - p0.y) / area2, (p0.x - p2.x) / area2],
        [(p0.y - p1.y) / area2, (p1.x - p0.x) / area2],
    ];
    Ok((grads, area2 / 2.0))
}

fn barycenter(points: &[Point; 3]) -> Point {
    Point::new(
        (points[0].x + points[1].x + points[2].x) / 3.0,
        (points[0].y + points[1].y + points[2].y) / 3.0,
    )
}

#[allow(clippy::needless_range_loop)]
fn stiffness_from_value(grads: &[[f64; 2]; 3], area: f64, a_value: f64) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = a_value * area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
        }
    }
    k
}

fn convection_from_value(grads: &[[f64; 2]; 3], area: f64, b_value: [f64; 2]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        let flux = -(area / 3.0) * (b_value[0] * grads[i][0] + b_value[1] * grads[i][1]);
        for j in 0..3 {
            c[i][j] = flux;
        }
    }
    c
}

/// Local stiffness matrix of a single triangle.
pub fn element_stiffness(points: &[Point; 3], a: &ScalarField) -> Result<[[f64; 3]; 3]> {
    let (grads, area) = p1_gradients(points)?;
    let bc = barycenter(points);
    Ok(stiffness_from_value(&grads, area, a.eval(bc.x, bc.y)))
}

/// Local convection matrix of a single triangle; its columns are identical
/// because every nodal basis function equals 1/3 at the barycenter.
pub fn element_convection(points: &[Point; 3], b: &VectorField) -> Result<[[f64; 3]; 3]> {
    let (grads, area) = p1_gradients(points)?;
    let bc = barycenter(points);
    Ok(convection_from_value(&grads, area, b.eval(bc.x, bc.y)))
}

/// Sparsity pattern of the interior-node system: entry (i, j) is present
/// exactly when the nodes share a triangle.
#[allow(clippy::needless_range_loop)]
fn interior_pattern(mesh: &Mesh) -> Vec<Vec<usize>> {
    let n = mesh.n_interior();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in mesh.triangles() {
        let idx: Vec<Option<usize>> = tri.iter().map(|&v| mesh.interior_index(v)).collect();
        for a in 0..3 {
            if let Some(r) = idx[a] {
                for b in 0..3 {
                    if let Some(c) = idx[b] {
                        neighbors[r].push(c);
                    }
                }
            }
        }
    }
    for row in &mut neighbors {
        row.sort_unstable();
        row.dedup();
    }
    neighbors
}

fn incident_triangles(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            lists[v].push(t);
        }
    }
    lists
}

fn map_triangles<T: Send, F: Fn(usize) -> Result<T> + Sync + Send>(
    n: usize,
    parallel: bool,
    f: F,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        if parallel && n >= 512 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

fn gather_rows<F: Fn(usize) -> Vec<(usize, f64)> + Sync + Send>(
    n: usize,
    parallel: bool,
    f: F,
) -> Vec<Vec<(usize, f64)>> {
    #[cfg(feature = "parallel")]
    {
        if parallel && n >= 512 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Scatters per-element 3x3 matrices into the interior-node system. The
/// element extractor runs per triangle; accumulation is row-major in
/// triangle-index order.
fn assemble_from_elements(mesh: &Mesh, elements: &[[[f64; 3]; 3]], parallel: bool) -> SparseMatrix {
    let n = mesh.n_interior();
    let pattern = interior_pattern(mesh);
    let incident = incident_triangles(mesh);
    let interior = mesh.interior_nodes();
    let triangles = mesh.triangles();

    let rows = gather_rows(n, parallel, |r| {
        let cols = &pattern[r];
        let mut vals = vec![0.0; cols.len()];
        let node = interior[r];
        for &t in &incident[node] {
            let tri = triangles[t];
            let local_r = tri.iter().position(|&v| v == node).unwrap();
            for (local_c, &v) in tri.iter().enumerate() {
                if let Some(c) = mesh.interior_index(v) {
                    let slot = cols.binary_search(&c).unwrap();
                    vals[slot] += elements[t][local_r][local_c];
                }
            }
        }
        cols.iter().copied().zip(vals).collect()
    });
    SparseMatrix::from_rows(n, n, rows)
}

fn diffusion_elements(mesh: &Mesh, a: &ScalarField, parallel: bool) -> Result<Vec<[[f64; 3]; 3]>> {
    map_triangles(mesh.n_triangles(), parallel, |t| {
        let points = mesh.triangle_points(t);
        let (grads, area) = p1_gradients(&points).map_err(|_| Error::DegenerateElement {
            index: t,
            area: mesh.triangle_area(t),
        })?;
        let bc = barycenter(&points);
        let a_value = a.eval(bc.x, bc.y);
        if a_value <= 0.0 {
            return Err(Error::NonPositiveCoefficient {
                x: bc.x,
                y: bc.y,
                value: a_value,
            });
        }
        Ok(stiffness_from_value(&grads, area, a_value))
    })
}

fn convection_elements(mesh: &Mesh, b: &VectorField, parallel: bool) -> Result<Vec<[[f64; 3]; 3]>> {
    map_triangles(mesh.n_triangles(), parallel, |t| {
        let points = mesh.triangle_points(t);
        let (grads, area) = p1_gradients(&points).map_err(|_| Error::DegenerateElement {
            index: t,
            area: mesh.triangle_area(t),
        })?;
        let bc = barycenter(&points);
        Ok(convection_from_value(&grads, area, b.eval(bc.x, bc.y)))
    })
}

/// Stiffness matrix over interior nodes; symmetric positive definite for
/// admissible coefficients.
pub fn assemble_diffusion(mesh: &Mesh, a: &ScalarField) -> Result<SparseMatrix> {
    let elements = diffusion_elements(mesh, a, true)?;
    Ok(assemble_from_elements(mesh, &elements, true))
}

/// Sequential reference path for [`assemble_diffusion`].
pub fn assemble_diffusion_seq(mesh: &Mesh, a: &ScalarField) -> Result<SparseMatrix> {
    let elements = diffusion_elements(mesh, a, false)?;
    Ok(assemble_from_elements(mesh, &elements, false))
}

/// Convection matrix over interior nodes; nonsymmetric in general.
pub fn assemble_convection(mesh: &Mesh, b: &VectorField) -> Result<SparseMatrix> {
    let elements = convection_elements(mesh, b, true)?;
    Ok(assemble_from_elements(mesh, &elements, true))
}

/// Sequential reference path for [`assemble_convection`].
pub fn assemble_convection_seq(mesh: &Mesh, b: &VectorField) -> Result<SparseMatrix> {
    let elements = convection_elements(mesh, b, false)?;
    Ok(assemble_from_elements(mesh, &elements, false))
}

/// Full system matrix: diffusion plus optional convection.
pub fn system_matrix(
    mesh: &Mesh,
    a: &ScalarField,
    b: Option<&VectorField>,
) -> Result<SparseMatrix> {
    let theta = assemble_diffusion(mesh, a)?;
    match b {
        None => Ok(theta),
        Some(b) => theta.add_scaled(&assemble_convection(mesh, b)?, 1.0),
    }
}

/// Load vector: entry i sums `(|K|/3) f(b_K)` over the triangles containing
/// interior node i.
pub fn assemble_rhs(mesh: &Mesh, f: &ScalarField) -> Vec<f64> {
    let incident = incident_triangles(mesh);
    let interior = mesh.interior_nodes();
    interior
        .iter()
        .map(|&node| {
            let mut sum = 0.0;
            for &t in &incident[node] {
                let points = mesh.triangle_points(t);
                let bc = barycenter(&points);
                sum += mesh.triangle_area(t) / 3.0 * f.eval(bc.x, bc.y);
            }
            sum
        })
        .collect()
}
