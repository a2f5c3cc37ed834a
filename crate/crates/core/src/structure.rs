//! Two-level Toeplitz matrices from generating functions and the lattice
//! embeddings of the structured hexagonal mesh.
//!
//! On the triangular lattice with basis `e1 = (h, 0)`, `e2 = (h/2, h*sqrt3/2)`
//! the stiffness matrix of the unit-coefficient problem is a projection of
//! the two-level Toeplitz matrix generated by
//! `ftilde(s1, s2) = sqrt3 (6 - 2 cos s1 - 2 cos s2 - 2 cos(s1 + s2)) / 3`.
//! Lattice rows are indexed north to south, which maps the mesh neighbor
//! displacement `e1 - e2` onto the Toeplitz offset (1, 1) carried by the
//! `cos(s1 + s2)` term. The square analogue is the five-point symbol
//! `f(s1, s2) = 4 - 2 cos s1 - 2 cos s2`.

use crate::coeff::ScalarField;
use crate::dense::{check_dense_size, loglog_slope, sym_extreme_eigenvalues};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, MeshFamily, Point, HEX_CENTER, HEX_SIDE, SQRT3};
use crate::sparse::SparseMatrix;

const TOEPLITZ_LIMIT: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    /// `4 - 2 cos s1 - 2 cos s2`
    F,
    /// `sqrt3 (6 - 2 cos s1 - 2 cos s2 - 2 cos(s1 + s2)) / 3`
    Ftilde,
}

impl Symbol {
    pub fn eval(&self, s1: f64, s2: f64) -> f64 {
        match self {
            Symbol::F => 4.0 - 2.0 * s1.cos() - 2.0 * s2.cos(),
            Symbol::Ftilde => {
                SQRT3 * (6.0 - 2.0 * s1.cos() - 2.0 * s2.cos() - 2.0 * (s1 + s2).cos()) / 3.0
            }
        }
    }

    /// Nonzero Fourier coefficients as ((outer offset, inner offset), value).
    pub fn fourier_coefficients(&self) -> Vec<((i64, i64), f64)> {
        match self {
            Symbol::F => vec![
                ((0, 0), 4.0),
                ((1, 0), -1.0),
                ((-1, 0), -1.0),
                ((0, 1), -1.0),
                ((0, -1), -1.0),
            ],
            Symbol::Ftilde => {
                let c = -SQRT3 / 3.0;
                vec![
                    ((0, 0), 2.0 * SQRT3),
                    ((1, 0), c),
                    ((-1, 0), c),
                    ((0, 1), c),
                    ((0, -1), c),
                    ((1, 1), c),
                    ((-1, -1), c),
                ]
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ToeplitzSpec {
    pub symbol: Symbol,
    /// Outer (block) order.
    pub n1: usize,
    /// Inner order.
    pub n2: usize,
}

/// Assembles the two-level Toeplitz matrix of order `n1 * n2` whose entry at
/// rows p = (j, i), q = (j', i') is the Fourier coefficient at offset
/// (j - j', i - i').
pub fn build_toeplitz(spec: &ToeplitzSpec) -> Result<SparseMatrix> {
    if spec.n1 == 0 || spec.n2 == 0 {
        return Err(Error::InvalidParameter(
            "Toeplitz orders must be positive".into(),
        ));
    }
    let n = spec
        .n1
        .checked_mul(spec.n2)
        .filter(|&n| n <= TOEPLITZ_LIMIT)
        .ok_or(Error::TooLarge {
            n: spec.n1.saturating_mul(spec.n2),
            limit: TOEPLITZ_LIMIT,
        })?;
    let mut coeffs = spec.symbol.fourier_coefficients();
    coeffs.sort_by_key(|&(o, _)| o);
    let (n1, n2) = (spec.n1 as i64, spec.n2 as i64);
    let rows = (0..n)
        .map(|p| {
            let j = (p / spec.n2) as i64;
            let i = (p % spec.n2) as i64;
            coeffs
                .iter()
                .filter_map(|&((dj, di), v)| {
                    let (jj, ii) = (j + dj, i + di);
                    if (0..n1).contains(&jj) && (0..n2).contains(&ii) {
                        Some(((jj * n2 + ii) as usize, v))
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    Ok(SparseMatrix::from_rows(n, n, rows))
}

/// Row-selection projection: an ordered, injective choice of source indices.
/// Applying it on both sides of a matrix extracts the principal submatrix in
/// selection order, which is exactly `P M P^T` for the 0/1 selection matrix P.
#[derive(Clone, Debug)]
pub struct ProjectionMap {
    n1: usize,
    n2: usize,
    selection: Vec<usize>,
    sites: Vec<(i64, i64)>,
}

impl ProjectionMap {
    /// Lattice dimensions (outer, inner) of the source Toeplitz index box.
    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.selection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.is_empty()
    }

    /// Source index selected for each output index.
    pub fn selection(&self) -> &[usize] {
        &self.selection
    }

    /// Lattice coordinates (i, j) of each selected site, in output order.
    pub fn sites(&self) -> &[(i64, i64)] {
        &self.sites
    }

    /// `P M P^T` for the selection matrix P.
    pub fn select(&self, m: &SparseMatrix) -> SparseMatrix {
        m.principal_submatrix(&self.selection)
    }

    /// Injectivity check: `P P^T = I` holds exactly when no source index
    /// repeats.
    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.selection.iter().all(|&k| seen.insert(k))
    }
}

/// Embeddings of a structured hexagonal mesh into its bounding and inscribed
/// lattice parallelograms.
#[derive(Clone, Debug)]
pub struct HexEmbedding {
    /// Selects mesh nodes out of the bounding parallelogram: the system
    /// matrix satisfies `A_n(1) = outer.select(T_N(ftilde))`.
    pub outer: ProjectionMap,
    /// Selects inscribed-parallelogram sites out of the mesh: the submatrix
    /// `inner.select(A_n(1))` is itself Toeplitz.
    pub inner: ProjectionMap,
    /// Lattice spacing (1/m).
    pub h: f64,
}

impl HexEmbedding {
    /// Physical coordinates of a lattice site.
    pub fn site_coord(&self, i: i64, j: i64) -> Point {
        Point::new(
            HEX_CENTER.0 + (i as f64 + j as f64 / 2.0) * self.h,
            HEX_CENTER.1 + j as f64 * (SQRT3 / 2.0) * self.h,
        )
    }
}

/// Lattice coordinates of a point on the hex lattice with spacing `h`,
/// anchored at the hexagon center.
fn hex_lattice_coords(p: Point, h: f64) -> (f64, f64) {
    let (x, y) = (p.x - HEX_CENTER.0, p.y - HEX_CENTER.1);
    let j = 2.0 * y / (SQRT3 * h);
    let i = x / h - j / 2.0;
    (i, j)
}

/// Computes the outer and inner lattice embeddings of a structured hexagonal
/// mesh. Outer: the smallest lattice parallelogram whose sites cover every
/// interior node. Inner: the largest parallelogram all of whose sites are
/// interior nodes; its extent is balanced around the center so that both
/// index ranges reach the lattice-ball radius.
pub fn embed_hex(mesh: &Mesh) -> Result<HexEmbedding> {
    let m = match mesh.family() {
        MeshFamily::HexStructured(m) => m as i64,
        other => {
            return Err(Error::UnsupportedMesh(format!(
                "hexagonal lattice embedding requires a structured hexagon mesh, got {other:?}"
            )));
        }
    };
    let h = HEX_SIDE / m as f64;
    let interior = mesh.interior_nodes();

    let mut coords = Vec::with_capacity(interior.len());
    for &node in &interior {
        let (fi, fj) = hex_lattice_coords(mesh.node(node), h);
        let (i, j) = (fi.round() as i64, fj.round() as i64);
        if (fi - i as f64).abs() > 1e-9 || (fj - j as f64).abs() > 1e-9 {
            return Err(Error::UnsupportedMesh(format!(
                "node off the lattice: ({fi}, {fj})"
            )));
        }
        coords.push((i, j));
    }

    let i_min = coords.iter().map(|c| c.0).min().unwrap();
    let i_max = coords.iter().map(|c| c.0).max().unwrap();
    let j_min = coords.iter().map(|c| c.1).min().unwrap();
    let j_max = coords.iter().map(|c| c.1).max().unwrap();
    let n1 = (j_max - j_min + 1) as usize;
    let n2 = (i_max - i_min + 1) as usize;
    // Rows north to south: outer index j_max - j, inner index i - i_min.
    let toeplitz_index = |i: i64, j: i64| ((j_max - j) as usize) * n2 + (i - i_min) as usize;
    let outer = ProjectionMap {
        n1,
        n2,
        selection: coords.iter().map(|&(i, j)| toeplitz_index(i, j)).collect(),
        sites: coords.clone(),
    };

    // Inner parallelogram: radius r ball constraint |i|,|j|,|i+j| <= r allows
    // an (r+1) x (r+1) index box with i in [-a, r-a], j in [a-r, a].
    let r = m - 1;
    let a = (r + 1) / 2;
    let mut node_at = std::collections::HashMap::new();
    for (r_idx, &(i, j)) in coords.iter().enumerate() {
        node_at.insert((i, j), r_idx);
    }
    let inner_dim = (r + 1) as usize;
    let mut selection = Vec::with_capacity(inner_dim * inner_dim);
    let mut sites = Vec::with_capacity(inner_dim * inner_dim);
    for j in ((a - r)..=a).rev() {
        for i in -a..=(r - a) {
            let found = node_at.get(&(i, j)).copied().ok_or_else(|| {
                Error::UnsupportedMesh(format!(
                    "inscribed parallelogram site ({i}, {j}) is not an interior node"
                ))
            })?;
            selection.push(found);
            sites.push((i, j));
        }
    }
    let inner = ProjectionMap {
        n1: inner_dim,
        n2: inner_dim,
        selection,
        sites,
    };

    Ok(HexEmbedding { outer, inner, h })
}

/// Positive-definiteness report for the symbol sandwich
/// `sqrt3/3 T(f) <= T(ftilde) <= sqrt3 T(f)`.
#[derive(Clone, Copy, Debug)]
pub struct SandwichReport {
    /// Minimal eigenvalue of `T(ftilde) - sqrt3/3 T(f)`.
    pub lower_gap: f64,
    /// Minimal eigenvalue of `sqrt3 T(f) - T(ftilde)`.
    pub upper_gap: f64,
}

pub fn sandwich_check(n1: usize, n2: usize) -> Result<SandwichReport> {
    check_dense_size(n1.saturating_mul(n2))?;
    let tf = build_toeplitz(&ToeplitzSpec {
        symbol: Symbol::F,
        n1,
        n2,
    })?;
    let tft = build_toeplitz(&ToeplitzSpec {
        symbol: Symbol::Ftilde,
        n1,
        n2,
    })?;
    let lower = tft.add_scaled(&tf, -SQRT3 / 3.0)?;
    let upper = tf.scale(SQRT3).add_scaled(&tft, -1.0)?;
    Ok(SandwichReport {
        lower_gap: sym_extreme_eigenvalues(&lower.to_dense()).0,
        upper_gap: sym_extreme_eigenvalues(&upper.to_dense()).0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuredFamily {
    Hex,
    Fk,
}

#[derive(Clone, Copy, Debug)]
pub struct LawRow {
    pub m: u32,
    pub n: usize,
    pub h: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond2: f64,
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub rows: Vec<LawRow>,
    /// Fitted log-log slope of the minimal eigenvalue against h.
    pub lambda_min_slope: f64,
    /// Fitted log-log slope of the condition number against h.
    pub cond_slope: f64,
}

/// Extreme eigenvalues and condition number of the unit-coefficient
/// stiffness matrix across a refinement range, with fitted growth laws.
pub fn lambda_min_law(family: StructuredFamily, ms: &[u32]) -> Result<LawReport> {
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let mesh = match family {
            StructuredFamily::Hex => Mesh::hex_structured(m)?,
            StructuredFamily::Fk => Mesh::square_fk(m)?,
        };
        check_dense_size(mesh.n_interior())?;
        let a = crate::assembly::assemble_diffusion(&mesh, &ScalarField::Constant(1.0))?;
        let (min, max) = sym_extreme_eigenvalues(&a.to_dense());
        rows.push(LawRow {
            m,
            n: a.n_rows(),
            h: mesh.h(),
            lambda_min: min,
            lambda_max: max,
            cond2: max / min,
        });
    }
    let min_points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.lambda_min)).collect();
    let cond_points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.cond2)).collect();
    Ok(LawReport {
        lambda_min_slope: loglog_slope(&min_points),
        cond_slope: loglog_slope(&cond_points),
        rows,
    })
}

/// Closed-form minimal eigenvalue of the square-symbol Toeplitz matrix on an
/// n x n index box: `8 sin^2(pi h / 2)` with `h = 1/(n+1)`.
pub fn square_symbol_lambda_min(n: usize) -> f64 {
    let h = 1.0 / (n as f64 + 1.0);
    let s = (std::f64::consts::PI / 2.0 * h).sin();
    8.0 * s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_diffusion;
    use approx::assert_relative_eq;

    #[test]
    fn symbols_are_nonnegative_and_vanish_at_origin() {
        for symbol in [Symbol::F, Symbol::Ftilde] {
            assert_relative_eq!(symbol.eval(0.0, 0.0), 0.0, epsilon = 1e-14);
            for k in 0..20 {
                for l in 0..20 {
                    let s1 = -std::f64::consts::PI + 0.1 + 0.3 * k as f64;
                    let s2 = -std::f64::consts::PI + 0.1 + 0.3 * l as f64;
                    assert!(symbol.eval(s1, s2) >= -1e-14);
                }
            }
        }
    }

    #[test]
    fn coefficients_reconstruct_symbol() {
        // a_jk e^{i<j,s>} summed over the offset table must reproduce the
        // symbol (all offsets come in +/- pairs so the sum is real).
        for symbol in [Symbol::F, Symbol::Ftilde] {
            for (s1, s2) in [(0.3, -1.2), (2.0, 0.7), (-0.4, 0.9)] {
                let direct = symbol.eval(s1, s2);
                let series: f64 = symbol
                    .fourier_coefficients()
                    .iter()
                    .map(|&((j, i), v)| v * (j as f64 * s1 + i as f64 * s2).cos())
                    .sum();
                assert_relative_eq!(direct, series, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn trivial_toeplitz_is_scalar() {
        let t = build_toeplitz(&ToeplitzSpec {
            symbol: Symbol::F,
            n1: 1,
            n2: 1,
        })
        .unwrap();
        assert_eq!(t.n_rows(), 1);
        assert_relative_eq!(t.get(0, 0), 4.0);
    }

    #[test]
    fn ftilde_2x2_block_structure() {
        let t = build_toeplitz(&ToeplitzSpec {
            symbol: Symbol::Ftilde,
            n1: 2,
            n2: 2,
        })
        .unwrap();
        let c = -SQRT3 / 3.0;
        assert!(t.is_symmetric());
        for p in 0..4 {
            assert_relative_eq!(t.get(p, p), 2.0 * SQRT3, max_relative = 1e-12);
        }
        // offsets (0,1), (1,0) and (1,1) all carry the same coefficient
        assert_relative_eq!(t.get(0, 1), c, max_relative = 1e-12);
        assert_relative_eq!(t.get(0, 2), c, max_relative = 1e-12);
        assert_relative_eq!(t.get(0, 3), c, max_relative = 1e-12);
        // offset (1,-1) is not in the table
        assert_eq!(t.get(1, 2), 0.0);
    }

    #[test]
    fn square_symbol_minimum_eigenvalue_formula() {
        for n in [2usize, 5, 12, 30] {
            let t = build_toeplitz(&ToeplitzSpec {
                symbol: Symbol::F,
                n1: n,
                n2: n,
            })
            .unwrap();
            let (min, _) = sym_extreme_eigenvalues(&t.to_dense());
            assert!(
                (min - square_symbol_lambda_min(n)).abs() < 1e-10,
                "n = {n}: {min} vs {}",
                square_symbol_lambda_min(n)
            );
        }
    }

    #[test]
    fn ones_quadratic_form_cross_check() {
        // x^T T x for the all-ones vector equals the sum of all stored
        // entries; cross-check against direct offset counting.
        let spec = ToeplitzSpec {
            symbol: Symbol::Ftilde,
            n1: 7,
            n2: 9,
        };
        let t = build_toeplitz(&spec).unwrap();
        let ones = vec![1.0; t.n_rows()];
        let quad: f64 = t.matvec(&ones).iter().sum();
        let mut direct = 0.0;
        for ((dj, di), v) in spec.symbol.fourier_coefficients() {
            let rows = (spec.n1 as i64 - dj.abs()).max(0) as f64;
            let cols = (spec.n2 as i64 - di.abs()).max(0) as f64;
            direct += v * rows * cols;
        }
        assert_relative_eq!(quad, direct, max_relative = 1e-12);
    }

    #[test]
    fn outer_embedding_reproduces_stiffness() {
        for m in 1..=5u32 {
            let mesh = Mesh::hex_structured(m).unwrap();
            let emb = embed_hex(&mesh).unwrap();
            assert!(emb.outer.is_injective());
            assert_eq!(emb.outer.len(), mesh.n_interior());
            let (n1, n2) = emb.outer.dims();
            let t = build_toeplitz(&ToeplitzSpec {
                symbol: Symbol::Ftilde,
                n1,
                n2,
            })
            .unwrap();
            let projected = emb.outer.select(&t);
            let a = assemble_diffusion(&mesh, &ScalarField::Constant(1.0)).unwrap();
            assert!(
                projected.max_abs_diff(&a) < 1e-12,
                "m = {m}: diff {}",
                projected.max_abs_diff(&a)
            );
        }
    }

    #[test]
    fn inner_embedding_extracts_toeplitz() {
        for m in 1..=5u32 {
            let mesh = Mesh::hex_structured(m).unwrap();
            let emb = embed_hex(&mesh).unwrap();
            let (n1, n2) = emb.inner.dims();
            assert_eq!(n1 * n2, (m as usize) * (m as usize));
            let a = assemble_diffusion(&mesh, &ScalarField::Constant(1.0)).unwrap();
            let extracted = emb.inner.select(&a);
            let t = build_toeplitz(&ToeplitzSpec {
                symbol: Symbol::Ftilde,
                n1,
                n2,
            })
            .unwrap();
            assert!(
                extracted.max_abs_diff(&t) < 1e-12,
                "m = {m}: diff {}",
                extracted.max_abs_diff(&t)
            );
        }
    }

    #[test]
    fn embedding_sites_land_on_node_coordinates() {
        let mesh = Mesh::hex_structured(4).unwrap();
        let emb = embed_hex(&mesh).unwrap();
        let interior = mesh.interior_nodes();
        for (r, &(i, j)) in emb.outer.sites().iter().enumerate() {
            let site = emb.site_coord(i, j);
            let node = mesh.node(interior[r]);
            assert!(site.dist(&node) < 1e-12 * emb.h);
        }
    }

    #[test]
    fn embedding_rejects_other_families() {
        let mesh = Mesh::square_fk(3).unwrap();
        assert!(matches!(embed_hex(&mesh), Err(Error::UnsupportedMesh(_))));
    }

    #[test]
    fn sandwich_gaps_are_positive() {
        let report = sandwich_check(4, 4).unwrap();
        assert!(report.lower_gap > 0.0, "lower gap {}", report.lower_gap);
        assert!(report.upper_gap > 0.0, "upper gap {}", report.upper_gap);
        // The scalar case reduces to 2 sqrt3 - 4 sqrt3 / 3 and
        // 4 sqrt3 - 2 sqrt3.
        let scalar = sandwich_check(1, 1).unwrap();
        assert_relative_eq!(scalar.lower_gap, 2.0 * SQRT3 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(scalar.upper_gap, 2.0 * SQRT3, max_relative = 1e-12);
    }

    #[test]
    fn minimal_eigenvalue_sandwiched_by_embeddings() {
        let mesh = Mesh::hex_structured(4).unwrap();
        let emb = embed_hex(&mesh).unwrap();
        let a = assemble_diffusion(&mesh, &ScalarField::Constant(1.0)).unwrap();
        let (outer_dims, inner_dims) = (emb.outer.dims(), emb.inner.dims());
        let t_outer = build_toeplitz(&ToeplitzSpec {
            symbol: Symbol::Ftilde,
            n1: outer_dims.0,
            n2: outer_dims.1,
        })
        .unwrap();
        let t_inner = build_toeplitz(&ToeplitzSpec {
            symbol: Symbol::Ftilde,
            n1: inner_dims.0,
            n2: inner_dims.1,
        })
        .unwrap();
        let lo = sym_extreme_eigenvalues(&t_outer.to_dense()).0;
        let mid = sym_extreme_eigenvalues(&a.to_dense()).0;
        let hi = sym_extreme_eigenvalues(&t_inner.to_dense()).0;
        assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12, "{lo} {mid} {hi}");
    }

    #[test]
    fn law_slopes_on_small_ranges() {
        let hex = lambda_min_law(StructuredFamily::Hex, &[2, 4, 8]).unwrap();
        assert!(
            (1.6..=2.4).contains(&hex.lambda_min_slope),
            "hex slope {}",
            hex.lambda_min_slope
        );
        let fk = lambda_min_law(StructuredFamily::Fk, &[4, 8, 16]).unwrap();
        assert!(
            (-2.4..=-1.6).contains(&fk.cond_slope),
            "fk cond slope {}",
            fk.cond_slope
        );
        for row in &fk.rows {
            assert!(row.lambda_max < 8.0);
        }
    }
}
