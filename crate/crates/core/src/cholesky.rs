//! Direct solver for sparse symmetric positive definite systems.
//!
//! The matrix is permuted with reverse Cuthill-McKee to shrink its envelope,
//! then factored by a profile (skyline) Cholesky: row i of the factor spans
//! the columns from the leading nonzero of the permuted row up to the
//! diagonal, and no fill occurs outside that envelope. The ordering breaks
//! ties by degree and then index, so factorizations are deterministic.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const ENVELOPE_LIMIT: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct SpdFactor {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    data: Vec<f64>,
}

impl SpdFactor {
    pub fn new(a: &SparseMatrix) -> Result<SpdFactor> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {} x {} matrix",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let n = a.n_rows();
        let perm = reverse_cuthill_mckee(a);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // Envelope: the leading stored column of each permuted row.
        let mut first = vec![0usize; n];
        for i in 0..n {
            let (cols, _) = a.row(perm[i]);
            let lead = cols.iter().map(|&j| iperm[j]).filter(|&j| j <= i).min();
            first[i] = lead.unwrap_or(i).min(i);
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for i in 0..n {
            let width = i - first[i] + 1;
            let next = row_start[i] + width;
            if next > ENVELOPE_LIMIT {
                return Err(Error::TooLarge {
                    n: next,
                    limit: ENVELOPE_LIMIT,
                });
            }
            row_start.push(next);
        }

        let mut data = vec![0.0; row_start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = iperm[j];
                if jn <= i {
                    data[row_start[i] + (jn - first[i])] = v;
                }
            }
        }

        // In-place profile factorization.
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = data[row_start[i] + (j - first[i])];
                if lo < j {
                    let ri = &data[row_start[i] + (lo - first[i])..];
                    let rj = &data[row_start[j] + (lo - first[j])..];
                    let len = j - lo;
                    for k in 0..len {
                        s -= ri[k] * rj[k];
                    }
                }
                if j < i {
                    let djj = data[row_start[j] + (j - first[j])];
                    data[row_start[i] + (j - first[i])] = s / djj;
                } else {
                    if s <= 0.0 {
                        return Err(Error::NotPositiveDefinite(format!(
                            "pivot {s:e} at elimination step {i}"
                        )));
                    }
                    data[row_start[i] + (j - first[i])] = s.sqrt();
                }
            }
        }

        Ok(SpdFactor {
            n,
            perm,
            first,
            row_start,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored factor entries (diagnostic).
    pub fn envelope_len(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "solve dimension mismatch");
        let mut y: Vec<f64> = (0..self.n).map(|i| b[self.perm[i]]).collect();
        // L z = y
        for i in 0..self.n {
            let f = self.first[i];
            let row = &self.data[self.row_start[i]..self.row_start[i + 1]];
            let mut s = y[i];
            for (k, &l) in row[..i - f].iter().enumerate() {
                s -= l * y[f + k];
            }
            y[i] = s / row[i - f];
        }
        // L^T x = z, column sweep expressed over rows
        for i in (0..self.n).rev() {
            let f = self.first[i];
            let row = &self.data[self.row_start[i]..self.row_start[i + 1]];
            let xi = y[i] / row[i - f];
            y[i] = xi;
            for (k, &l) in row[..i - f].iter().enumerate() {
                y[f + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
/// Returns perm with perm[new] = old.
fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, _) = a.row(i);
        for &j in cols {
            if j != i {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for row in &mut adjacency {
        row.sort_unstable();
        row.dedup();
    }
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut pending: Vec<usize> = (0..n).collect();
    pending.sort_by_key(|&v| (degree[v], v));

    for &seed in &pending {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adjacency, &degree);
        let level_start = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = level_start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adjacency[v]
                .iter()
                .copied()
                .filter(|&u| !visited[u])
                .collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                if !visited[u] {
                    visited[u] = true;
                    order.push(u);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Double-BFS heuristic for a start node on the component of `seed`.
fn pseudo_peripheral(seed: usize, adjacency: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let mut ecc = 0usize;
    for _ in 0..4 {
        let (far, far_ecc) = bfs_farthest(current, adjacency, degree);
        if far_ecc <= ecc {
            break;
        }
        ecc = far_ecc;
        current = far;
    }
    current
}

fn bfs_farthest(start: usize, adjacency: &[Vec<usize>], degree: &[usize]) -> (usize, usize) {
    let n = adjacency.len();
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    let mut last_level = Vec::new();
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        if dist[v] > depth {
            depth = dist[v];
            last_level.clear();
        }
        if dist[v] == depth {
            last_level.push(v);
        }
        for &u in &adjacency[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let best = last_level
        .into_iter()
        .min_by_key(|&v| (degree[v], v))
        .unwrap_or(start);
    (best, depth)
}
