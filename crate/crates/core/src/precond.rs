//! Diagonal-times-constant-coefficient preconditioners.
//!
//! The exact preconditioner is `P = D^{1/2} A_1 D^{1/2}` where `A_1` is the
//! unit-coefficient stiffness matrix of the same mesh and `D` rescales its
//! diagonal onto the diagonal of the variable-coefficient matrix. For meshes
//! without usable structure, the surrogate replaces `A_1` by a principal
//! submatrix of the triangular-lattice Toeplitz matrix, with mesh nodes
//! greedily matched to lattice sites.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use crate::assembly::assemble_diffusion;
use crate::cholesky::SpdFactor;
use crate::coeff::ScalarField;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, SQRT3};
use crate::sparse::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecondKind {
    /// `D^{1/2} A_1 D^{1/2}` with the assembled unit-coefficient core.
    Exact,
    /// Same scaling around a projected Toeplitz core.
    Surrogate,
    /// No preconditioning.
    Identity,
}

impl PrecondKind {
    pub fn id(&self) -> &'static str {
        match self {
            PrecondKind::Exact => "exact",
            PrecondKind::Surrogate => "surrogate",
            PrecondKind::Identity => "none",
        }
    }
}

#[derive(Clone, Debug)]
struct Core {
    matrix: SparseMatrix,
    factor: SpdFactor,
}

#[derive(Clone, Debug)]
pub struct Preconditioner {
    kind: PrecondKind,
    d_half: Vec<f64>,
    core: Option<Core>,
}

/// Diagonal scaling `D` with `D_ii = diag(theta_a)_i / diag(a_one)_i`.
pub fn scaling_diagonal(theta_a: &SparseMatrix, a_one: &SparseMatrix) -> Result<Vec<f64>> {
    if theta_a.n_rows() != a_one.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "scaling diagonal of orders {} and {}",
            theta_a.n_rows(),
            a_one.n_rows()
        )));
    }
    theta_a
        .diagonal()
        .iter()
        .zip(a_one.diagonal())
        .enumerate()
        .map(|(i, (&num, den))| {
            if num <= 0.0 || den <= 0.0 {
                Err(Error::NotPositiveDefinite(format!(
                    "diagonal entry {i}: {num} / {den}"
                )))
            } else {
                Ok(num / den)
            }
        })
        .collect()
}

impl Preconditioner {
    pub fn identity(n: usize) -> Preconditioner {
        Preconditioner {
            kind: PrecondKind::Identity,
            d_half: vec![1.0; n],
            core: None,
        }
    }

    /// Exact preconditioner for a mesh and diffusion coefficient.
    pub fn exact(mesh: &Mesh, a: &ScalarField) -> Result<Preconditioner> {
        let theta_a = assemble_diffusion(mesh, a)?;
        let a_one = assemble_diffusion(mesh, &ScalarField::Constant(1.0))?;
        let d = scaling_diagonal(&theta_a, &a_one)?;
        let factor = SpdFactor::new(&a_one)?;
        Ok(Preconditioner {
            kind: PrecondKind::Exact,
            d_half: d.iter().map(|v| v.sqrt()).collect(),
            core: Some(Core {
                matrix: a_one,
                factor,
            }),
        })
    }

    /// Surrogate preconditioner: interior nodes are matched to the sites of
    /// an equilateral lattice with spacing equal to the mean interior edge
    /// length, and the core is the corresponding principal submatrix of the
    /// lattice Toeplitz matrix. When more nodes than sites turn up, the
    /// lattice is refined (spacing halved) and matching retried, three times
    /// at most.
    pub fn surrogate(mesh: &Mesh, a: &ScalarField) -> Result<Preconditioner> {
        let theta_a = assemble_diffusion(mesh, a)?;
        let interior = mesh.interior_nodes();
        let points: Vec<Point> = interior.iter().map(|&k| mesh.node(k)).collect();

        let mut spacing = mesh.mean_interior_edge_length();
        let mut sites = None;
        let mut last_counts = (points.len(), 0usize);
        for _ in 0..=3 {
            match assign_lattice_sites(&points, spacing) {
                Ok(found) => {
                    sites = Some(found);
                    break;
                }
                Err(site_count) => {
                    last_counts = (points.len(), site_count);
                    spacing /= 2.0;
                }
            }
        }
        let sites = sites.ok_or(Error::LatticeAssignment {
            retries: 3,
            nodes: last_counts.0,
            sites: last_counts.1,
        })?;

        let core_matrix = lattice_submatrix(&sites);
        let diag = theta_a.diagonal();
        let d_half: Vec<f64> = diag
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v <= 0.0 {
                    Err(Error::NotPositiveDefinite(format!(
                        "diagonal entry {i}: {v}"
                    )))
                } else {
                    Ok((v / (2.0 * SQRT3)).sqrt())
                }
            })
            .collect::<Result<_>>()?;
        let factor = SpdFactor::new(&core_matrix)?;
        Ok(Preconditioner {
            kind: PrecondKind::Surrogate,
            d_half,
            core: Some(Core {
                matrix: core_matrix,
                factor,
            }),
        })
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.d_half.len()
    }

    /// Entries of `D^{1/2}`.
    pub fn d_half(&self) -> &[f64] {
        &self.d_half
    }

    /// The factored core matrix, when one exists.
    pub fn core_matrix(&self) -> Option<&SparseMatrix> {
        self.core.as_ref().map(|c| &c.matrix)
    }

    /// `P^{-1} v = D^{-1/2} core^{-1} D^{-1/2} v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n(), "preconditioner dimension mismatch");
        match &self.core {
            None => v.to_vec(),
            Some(core) => {
                let scaled: Vec<f64> = v.iter().zip(&self.d_half).map(|(x, d)| x / d).collect();
                let solved = core.factor.solve(&scaled);
                solved
                    .iter()
                    .zip(&self.d_half)
                    .map(|(x, d)| x / d)
                    .collect()
            }
        }
    }

    /// `P v = D^{1/2} core D^{1/2} v`.
    pub fn multiply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n(), "preconditioner dimension mismatch");
        match &self.core {
            None => v.to_vec(),
            Some(core) => {
                let scaled: Vec<f64> = v.iter().zip(&self.d_half).map(|(x, d)| x * d).collect();
                let prod = core.matrix.matvec(&scaled);
                prod.iter().zip(&self.d_half).map(|(x, d)| x * d).collect()
            }
        }
    }

    /// Dense form for spectral diagnostics.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        match &self.core {
            None => DMatrix::identity(n, n),
            Some(core) => {
                let mut m = core.matrix.to_dense();
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] *= self.d_half[i] * self.d_half[j];
                    }
                }
                m
            }
        }
    }
}

/// Assigns each point a distinct lattice site by greedy nearest-site
/// matching in point order. Returns the per-point sites, or the number of
/// available sites when the lattice index box cannot host all points.
fn assign_lattice_sites(
    points: &[Point],
    spacing: f64,
) -> std::result::Result<Vec<(i64, i64)>, usize> {
    // Anchor the lattice at the centroid of the matched nodes; for meshes on
    // the hexagonal domain this is its center.
    let inv = 1.0 / points.len().max(1) as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() * inv;
    let cy = points.iter().map(|p| p.y).sum::<f64>() * inv;
    let coords: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let j = 2.0 * (p.y - cy) / (SQRT3 * spacing);
            let i = (p.x - cx) / spacing - j / 2.0;
            (i, j)
        })
        .collect();
    let margin = 2i64;
    let i_lo = coords.iter().map(|c| c.0.floor() as i64).min().unwrap_or(0) - margin;
    let i_hi = coords.iter().map(|c| c.0.ceil() as i64).max().unwrap_or(0) + margin;
    let j_lo = coords.iter().map(|c| c.1.floor() as i64).min().unwrap_or(0) - margin;
    let j_hi = coords.iter().map(|c| c.1.ceil() as i64).max().unwrap_or(0) + margin;
    let site_count = ((i_hi - i_lo + 1) as usize).saturating_mul((j_hi - j_lo + 1) as usize);
    if points.len() > site_count {
        return Err(site_count);
    }

    let site_point = |i: i64, j: i64| {
        Point::new(
            cx + (i as f64 + j as f64 / 2.0) * spacing,
            cy + j as f64 * (SQRT3 / 2.0) * spacing,
        )
    };
    let max_ring = (i_hi - i_lo).max(j_hi - j_lo) + 1;
    let mut taken: HashSet<(i64, i64)> = HashSet::with_capacity(points.len());
    let mut sites = Vec::with_capacity(points.len());
    for (p, &(ci, cj)) in points.iter().zip(&coords) {
        let (ci, cj) = (ci.round() as i64, cj.round() as i64);
        let mut best: Option<(f64, i64, i64)> = None;
        for ring in 0..=max_ring {
            if let Some((d, _, _)) = best {
                // Sites on Chebyshev index-ring k are at least
                // (sqrt(3)/2 k - 1) spacings away from the point.
                if (0.866 * ring as f64 - 1.0) * spacing > d {
                    break;
                }
            }
            for (i, j) in chebyshev_ring(ci, cj, ring) {
                if i < i_lo || i > i_hi || j < j_lo || j > j_hi || taken.contains(&(i, j)) {
                    continue;
                }
                let d = p.dist(&site_point(i, j));
                let candidate = (d, j, i);
                if best.is_none_or(|(bd, bj, bi)| candidate < (bd, bj, bi)) {
                    best = Some(candidate);
                }
            }
        }
        match best {
            Some((_, j, i)) => {
                taken.insert((i, j));
                sites.push((i, j));
            }
            None => return Err(site_count),
        }
    }
    Ok(sites)
}

fn chebyshev_ring(ci: i64, cj: i64, ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(ci, cj)];
    }
    let mut out = Vec::with_capacity((8 * ring) as usize);
    for d in -ring..=ring {
        out.push((ci + d, cj - ring));
        out.push((ci + d, cj + ring));
    }
    for d in (-ring + 1)..ring {
        out.push((ci - ring, cj + d));
        out.push((ci + ring, cj + d));
    }
    out
}

/// Principal submatrix of the triangular-lattice Toeplitz matrix on the
/// given sites: diagonal `2 sqrt3`, and `-sqrt3/3` between lattice-adjacent
/// sites (displacements +-e1, +-e2, +-(e1 - e2)).
fn lattice_submatrix(sites: &[(i64, i64)]) -> SparseMatrix {
    const NEIGHBORS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
    let mut index_of: HashMap<(i64, i64), usize> = HashMap::with_capacity(sites.len());
    for (r, &s) in sites.iter().enumerate() {
        index_of.insert(s, r);
    }
    let rows = sites
        .iter()
        .enumerate()
        .map(|(r, &(i, j))| {
            let mut row = vec![(r, 2.0 * SQRT3)];
            for &(di, dj) in &NEIGHBORS {
                if let Some(&c) = index_of.get(&(i + di, j + dj)) {
                    row.push((c, -SQRT3 / 3.0));
                }
            }
            row.sort_by_key(|&(c, _)| c);
            row
        })
        .collect();
    SparseMatrix::from_rows(sites.len(), sites.len(), rows)
}
