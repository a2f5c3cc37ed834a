//! Triangulations of the hexagonal and square domains.
//!
//! A [`Mesh`] is immutable after construction: generators and transformations
//! return fresh meshes. Interior nodes carry a contiguous index into the
//! linear system; boundary nodes do not (homogeneous Dirichlet conditions).

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Side length of the hexagonal domain.
pub const HEX_SIDE: f64 = 0.5;
/// Center of the hexagonal domain; the hexagon then sits inside the unit
/// square and the kink line y = sqrt(3)/4 of the low-regularity coefficient
/// templates crosses its interior.
pub const HEX_CENTER: (f64, f64) = (0.5, 0.5);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Twice the signed area of the triangle (a, b, c); positive when
/// counter-clockwise.
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    /// Regular hexagon of unit side split into equilateral triangles of side 1/m.
    HexStructured(u32),
    /// Unit square, m x m cells, each split by the lower-left to upper-right diagonal.
    SquareFk(u32),
    Unstructured,
    Perturbed,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    is_boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    n_interior: usize,
    h: f64,
    family: MeshFamily,
}

impl Mesh {
    /// Structured mesh on the regular hexagon of side [`HEX_SIDE`] centered
    /// at [`HEX_CENTER`], one vertex toward positive x. Each side is split
    /// into `m` segments, giving 6m^2 congruent equilateral triangles.
    pub fn hex_structured(m: u32) -> Result<Mesh> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "hexagonal mesh requires m >= 1".into(),
            ));
        }
        let mi = m as i64;
        let h = HEX_SIDE / m as f64;

        // Triangular lattice indices (i, j) with node = center + i*e1 + j*e2,
        // e1 = (h, 0), e2 = (h/2, h*sqrt(3)/2). The hexagon is the lattice
        // ball max(|i|, |j|, |i+j|) <= m. Rows are scanned north to south so
        // the natural ordering matches the Toeplitz embedding convention.
        let mut nodes = Vec::new();
        let mut is_boundary = Vec::new();
        let mut index_of = HashMap::new();
        for j in (-mi..=mi).rev() {
            let i_lo = (-mi).max(-mi - j);
            let i_hi = mi.min(mi - j);
            for i in i_lo..=i_hi {
                let x = HEX_CENTER.0 + (i as f64 + j as f64 / 2.0) * h;
                let y = HEX_CENTER.1 + j as f64 * (SQRT3 / 2.0) * h;
                index_of.insert((i, j), nodes.len());
                nodes.push(Point::new(x, y));
                is_boundary.push(i.abs().max(j.abs()).max((i + j).abs()) == mi);
            }
        }

        // Anchor cells one step outside the ball still contribute triangles
        // whose three vertices all lie inside, so scan the extended box.
        let mut triangles = Vec::new();
        for j in (-mi - 1..=mi).rev() {
            for i in -mi - 1..=mi {
                // Up triangle (i,j), (i+1,j), (i,j+1); down triangle
                // (i+1,j), (i+1,j+1), (i,j+1). Both counter-clockwise.
                if let (Some(&a), Some(&b), Some(&c)) = (
                    index_of.get(&(i, j)),
                    index_of.get(&(i + 1, j)),
                    index_of.get(&(i, j + 1)),
                ) {
                    triangles.push([a, b, c]);
                }
                if let (Some(&a), Some(&b), Some(&c)) = (
                    index_of.get(&(i + 1, j)),
                    index_of.get(&(i + 1, j + 1)),
                    index_of.get(&(i, j + 1)),
                ) {
                    triangles.push([a, b, c]);
                }
            }
        }

        Ok(Mesh::assemble_parts(
            nodes,
            triangles,
            is_boundary,
            MeshFamily::HexStructured(m),
        ))
    }

    /// Friedrichs-Keller mesh on the unit square: m x m cells, each split into
    /// two right triangles by the lower-left to upper-right diagonal.
    pub fn square_fk(m: u32) -> Result<Mesh> {
        if m < 2 {
            return Err(Error::InvalidParameter(
                "Friedrichs-Keller mesh requires m >= 2 (no interior node otherwise)".into(),
            ));
        }
        let h = 1.0 / m as f64;
        let nm = m as usize;
        let idx = |i: usize, j: usize| j * (nm + 1) + i;

        let mut nodes = Vec::with_capacity((nm + 1) * (nm + 1));
        let mut is_boundary = Vec::with_capacity((nm + 1) * (nm + 1));
        for j in 0..=nm {
            for i in 0..=nm {
                nodes.push(Point::new(i as f64 * h, j as f64 * h));
                is_boundary.push(i == 0 || i == nm || j == 0 || j == nm);
            }
        }

        let mut triangles = Vec::with_capacity(2 * nm * nm);
        for j in 0..nm {
            for i in 0..nm {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }

        Ok(Mesh::assemble_parts(
            nodes,
            triangles,
            is_boundary,
            MeshFamily::SquareFk(m),
        ))
    }

    /// Builds a mesh from raw node coordinates and triangles, detecting
    /// boundary nodes topologically (a node is boundary when it lies on an
    /// edge belonging to exactly one triangle) and reorienting triangles
    /// counter-clockwise when needed.
    pub fn from_raw(nodes: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Mesh> {
        Mesh::from_raw_with_flags(nodes, triangles, None)
    }

    /// As [`Mesh::from_raw`] but with externally supplied boundary markers.
    pub fn from_raw_with_flags(
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        markers: Option<Vec<bool>>,
    ) -> Result<Mesh> {
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nodes.len() {
                    return Err(Error::InvalidParameter(format!(
                        "triangle {t} references node {v} but only {} nodes exist",
                        nodes.len()
                    )));
                }
            }
            let area2 = signed_area2(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area2 < 0.0 {
                tri.swap(1, 2);
            } else if area2 == 0.0 {
                return Err(Error::DegenerateElement {
                    index: t,
                    area: 0.0,
                });
            }
        }

        let is_boundary = match markers {
            Some(flags) => {
                if flags.len() != nodes.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} boundary markers for {} nodes",
                        flags.len(),
                        nodes.len()
                    )));
                }
                flags
            }
            None => topological_boundary(nodes.len(), &triangles),
        };

        Ok(Mesh::assemble_parts(
            nodes,
            triangles,
            is_boundary,
            MeshFamily::Unstructured,
        ))
    }

    fn assemble_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        is_boundary: Vec<bool>,
        family: MeshFamily,
    ) -> Mesh {
        let mut interior_index = vec![None; nodes.len()];
        let mut n_interior = 0;
        for (k, &b) in is_boundary.iter().enumerate() {
            if !b {
                interior_index[k] = Some(n_interior);
                n_interior += 1;
            }
        }
        let h = max_edge_length(&nodes, &triangles);
        Mesh {
            nodes,
            triangles,
            is_boundary,
            interior_index,
            n_interior,
            h,
            family,
        }
    }

    /// Replaces every triangle by its four midpoint children. Parent nodes
    /// keep their indices and flags; an edge midpoint is a boundary node
    /// exactly when the edge belongs to a single triangle.
    pub fn refine_midpoint(&self) -> Mesh {
        let counts = edge_counts(&self.triangles);
        let mut edges: Vec<(usize, usize)> = counts.keys().copied().collect();
        edges.sort_unstable();

        let mut nodes = self.nodes.clone();
        let mut is_boundary = self.is_boundary.clone();
        let mut midpoint = HashMap::with_capacity(edges.len());
        for &(a, b) in &edges {
            midpoint.insert((a, b), nodes.len());
            nodes.push(Point::new(
                (self.nodes[a].x + self.nodes[b].x) / 2.0,
                (self.nodes[a].y + self.nodes[b].y) / 2.0,
            ));
            is_boundary.push(counts[&(a, b)] == 1);
        }

        let mid = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[v0, v1, v2] in &self.triangles {
            let m01 = mid(v0, v1);
            let m12 = mid(v1, v2);
            let m20 = mid(v2, v0);
            triangles.push([v0, m01, m20]);
            triangles.push([v1, m12, m01]);
            triangles.push([v2, m20, m12]);
            triangles.push([m01, m12, m20]);
        }

        let family = match self.family {
            MeshFamily::HexStructured(m) => MeshFamily::HexStructured(2 * m),
            MeshFamily::SquareFk(m) => MeshFamily::SquareFk(2 * m),
            other => other,
        };
        let mut mesh = Mesh::assemble_parts(nodes, triangles, is_boundary, family);
        // Children are half-scale copies of their parents, so the refined
        // diameter is exactly half the parent one; keep that value instead of
        // the recomputed maximum to avoid a spurious last-ulp drift.
        if matches!(
            family,
            MeshFamily::HexStructured(_) | MeshFamily::SquareFk(_)
        ) {
            mesh.h = self.h / 2.0;
        }
        mesh
    }

    /// Displaces every interior node by a deterministic pseudo-random vector
    /// of magnitude at most `alpha * h`, keeping all triangle orientations
    /// positive (the displacement is halved until the incident triangles stay
    /// counter-clockwise). Boundary nodes are left in place.
    pub fn perturb(&self, alpha: f64, seed: u64) -> Result<Mesh> {
        if !matches!(
            self.family,
            MeshFamily::HexStructured(_) | MeshFamily::SquareFk(_)
        ) {
            return Err(Error::UnsupportedMesh(
                "perturbation is defined for structured meshes only".into(),
            ));
        }
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "perturbation amplitude must lie in [0, 0.5), got {alpha}"
            )));
        }

        let mut tris_of_node: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                tris_of_node[v].push(t);
            }
        }

        let mut nodes = self.nodes.clone();
        for k in 0..nodes.len() {
            if self.is_boundary[k] {
                continue;
            }
            let u1 = unit_from_bits(counter_hash(seed, k as u64, 0));
            let u2 = unit_from_bits(counter_hash(seed, k as u64, 1));
            let radius = alpha * self.h * u1.sqrt();
            let angle = 2.0 * std::f64::consts::PI * u2;
            let mut dx = radius * angle.cos();
            let mut dy = radius * angle.sin();
            let original = nodes[k];
            for _ in 0..64 {
                nodes[k] = Point::new(original.x + dx, original.y + dy);
                let ok = tris_of_node[k].iter().all(|&t| {
                    let [a, b, c] = self.triangles[t];
                    signed_area2(nodes[a], nodes[b], nodes[c]) > 0.0
                });
                if ok {
                    break;
                }
                dx /= 2.0;
                dy /= 2.0;
                nodes[k] = original;
            }
        }

        Ok(Mesh::assemble_parts(
            nodes,
            self.triangles.clone(),
            self.is_boundary.clone(),
            MeshFamily::Perturbed,
        ))
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> Point {
        self.nodes[k]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.is_boundary[k]
    }

    /// Index of node `k` in the linear system, when interior.
    pub fn interior_index(&self, k: usize) -> Option<usize> {
        self.interior_index[k]
    }

    /// Number of interior nodes, i.e. the order of the assembled system.
    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Node indices ordered by their interior index.
    pub fn interior_nodes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_interior];
        for (k, idx) in self.interior_index.iter().enumerate() {
            if let Some(i) = idx {
                out[*i] = k;
            }
        }
        out
    }

    /// Maximum triangle diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn family(&self) -> MeshFamily {
        self.family
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area2(a, b, c) / 2.0
    }

    /// Mean length of interior edges (edges shared by two triangles).
    pub fn mean_interior_edge_length(&self) -> f64 {
        let counts = edge_counts(&self.triangles);
        let mut total = 0.0;
        let mut n = 0usize;
        for (&(a, b), &c) in &counts {
            if c == 2 {
                total += self.nodes[a].dist(&self.nodes[b]);
                n += 1;
            }
        }
        if n == 0 {
            self.h
        } else {
            total / n as f64
        }
    }

    /// Checks the structural invariants: positive triangle orientation, edge
    /// manifoldness (every edge in one or two triangles), the bijection of
    /// interior indices, and the diameter definition.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            let area2 = signed_area2(self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]);
            if area2 <= 0.0 {
                return Err(Error::DegenerateElement {
                    index: t,
                    area: area2 / 2.0,
                });
            }
        }
        for (&(a, b), &c) in &edge_counts(&self.triangles) {
            if c > 2 {
                return Err(Error::UnsupportedMesh(format!(
                    "edge ({a}, {b}) belongs to {c} triangles"
                )));
            }
        }
        let mut seen = vec![false; self.n_interior];
        for (k, idx) in self.interior_index.iter().enumerate() {
            match (self.is_boundary[k], idx) {
                (false, Some(i)) => {
                    if *i >= self.n_interior || seen[*i] {
                        return Err(Error::UnsupportedMesh(format!(
                            "interior index {i} repeated or out of range"
                        )));
                    }
                    seen[*i] = true;
                }
                (true, None) => {}
                _ => {
                    return Err(Error::UnsupportedMesh(format!(
                        "node {k}: boundary flag and interior index disagree"
                    )));
                }
            }
        }
        let h = max_edge_length(&self.nodes, &self.triangles);
        if (h - self.h).abs() > 1e-12 * self.h.max(1.0) {
            return Err(Error::UnsupportedMesh(format!(
                "stored diameter {} does not match recomputed {}",
                self.h, h
            )));
        }
        Ok(())
    }
}

fn max_edge_length(nodes: &[Point], triangles: &[[usize; 3]]) -> f64 {
    let mut h: f64 = 0.0;
    for tri in triangles {
        for e in 0..3 {
            let a = nodes[tri[e]];
            let b = nodes[tri[(e + 1) % 3]];
            h = h.max(a.dist(&b));
        }
    }
    h
}

/// Counts how many triangles contain each undirected edge.
pub(crate) fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), u32> {
    let mut counts = HashMap::with_capacity(triangles.len() * 3 / 2);
    for tri in triangles {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

fn topological_boundary(n_nodes: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut flags = vec![false; n_nodes];
    for (&(a, b), &c) in &edge_counts(triangles) {
        if c == 1 {
            flags[a] = true;
            flags[b] = true;
        }
    }
    flags
}

/// Counter-based generator (splitmix64 over a keyed counter); reproducible
/// across platforms and independent of evaluation order.
pub fn counter_hash(seed: u64, stream: u64, counter: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(counter);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps 64 random bits to a double in [0, 1).
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
