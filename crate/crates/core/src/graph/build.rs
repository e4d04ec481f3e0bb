use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::manifolds::SampleCloud;
use crate::scalar::{dist_sq, Scalar};

/// Below this size the all-pairs search is used by default.
pub const ALL_PAIRS_BELOW: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NeighborSearch {
    #[default]
    Auto,
    Grid,
    AllPairs,
}

/// Symmetric ε-neighborhood graph in CSR layout with the weighted degrees
/// `deg(x) = (1/n) Σ_y η_ε(|x - y|)`, self term included.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph<T> {
    pub(crate) n: usize,
    pub(crate) epsilon: T,
    pub(crate) profile: KernelProfile<T>,
    pub(crate) row_ptr: Vec<usize>,
    pub(crate) cols: Vec<u32>,
    pub(crate) weights: Vec<T>,
    pub(crate) deg: Vec<T>,
    pub(crate) seed: Option<u64>,
}

impl<T: Scalar> Graph<T> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn profile(&self) -> &KernelProfile<T> {
        &self.profile
    }

    pub fn degrees(&self) -> &[T] {
        &self.deg
    }

    /// Seed of the sample cloud the graph was built on, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Stored entries, diagonal included.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column indices and weights of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> (&[u32], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.weights[r])
    }

    /// Sorted neighbor lists (self included), for adjacency comparisons.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        (0..self.n).map(|i| self.row(i).0.to_vec()).collect()
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for &j in self.row(i).0 {
                    let j = j as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }
}

/// Builds the ε-graph on a sample cloud.
pub fn build_graph<T: Scalar>(cloud: &SampleCloud<T>, epsilon: T, profile: &KernelProfile<T>) -> Result<Graph<T>> {
    let mut g = build_graph_from_points(&cloud.points, cloud.ambient_dim, epsilon, profile, NeighborSearch::Auto)?;
    g.seed = Some(cloud.seed);
    Ok(g)
}

/// Builds the ε-graph on row-major points of dimension `dim`.
pub fn build_graph_from_points<T: Scalar>(
    points: &[T],
    dim: usize,
    epsilon: T,
    profile: &KernelProfile<T>,
    search: NeighborSearch,
) -> Result<Graph<T>> {
    if dim == 0 || points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if points.len() % dim != 0 {
        return Err(Error::LengthMismatch { expected: points.len() / dim * dim, got: points.len() });
    }
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("bandwidth must be positive, got {epsilon}")));
    }
    let n = points.len() / dim;
    if n > u32::MAX as usize {
        return Err(Error::Domain("too many points for 32-bit column indices".into()));
    }
    let use_grid = match search {
        NeighborSearch::Auto => n >= ALL_PAIRS_BELOW,
        NeighborSearch::Grid => true,
        NeighborSearch::AllPairs => false,
    };
    let rows: Vec<Vec<(u32, T)>> = if use_grid {
        match PointGrid::new(points, dim, epsilon) {
            Some(grid) => (0..n)
                .into_par_iter()
                .map(|i| grid.row(points, i, epsilon, profile))
                .collect(),
            None => all_pairs_rows(points, dim, epsilon, profile),
        }
    } else {
        all_pairs_rows(points, dim, epsilon, profile)
    };
    Ok(assemble(n, epsilon, profile, rows))
}

fn all_pairs_rows<T: Scalar>(points: &[T], dim: usize, epsilon: T, profile: &KernelProfile<T>) -> Vec<Vec<(u32, T)>> {
    let n = points.len() / dim;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &points[i * dim..(i + 1) * dim];
            (0..n)
                .filter_map(|j| {
                    let w = profile.weight_sq(dist_sq(xi, &points[j * dim..(j + 1) * dim]), epsilon);
                    (w > T::zero()).then_some((j as u32, w))
                })
                .collect()
        })
        .collect()
}

fn assemble<T: Scalar>(n: usize, epsilon: T, profile: &KernelProfile<T>, rows: Vec<Vec<(u32, T)>>) -> Graph<T> {
    let nnz = rows.iter().map(Vec::len).sum();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(nnz);
    let mut weights = Vec::with_capacity(nnz);
    let mut deg = Vec::with_capacity(n);
    let nf = T::from_usize_lossy(n);
    row_ptr.push(0);
    for row in rows {
        let mut s = T::zero();
        for (j, w) in row {
            cols.push(j);
            weights.push(w);
            s += w;
        }
        deg.push(s / nf);
        row_ptr.push(cols.len());
    }
    Graph {
        n,
        epsilon,
        profile: *profile,
        row_ptr,
        cols,
        weights,
        deg,
        seed: None,
    }
}

/// Uniform grid over the bounding box of a point set; points are sorted by
/// cell key so each cell is a contiguous range.
pub(crate) struct PointGrid<T> {
    dim: usize,
    lo: Vec<T>,
    shape: Vec<u64>,
    keys: Vec<u64>,
    order: Vec<u32>,
    inv_cell: T,
}

impl<T: Scalar> PointGrid<T> {
    /// `None` when the cell count does not fit in 64 bits.
    pub(crate) fn new(points: &[T], dim: usize, cell: T) -> Option<Self> {
        let n = points.len() / dim;
        let mut lo = vec![T::infinity(); dim];
        let mut hi = vec![T::neg_infinity(); dim];
        for i in 0..n {
            for k in 0..dim {
                let v = points[i * dim + k];
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        let inv_cell = T::one() / cell;
        let mut shape = Vec::with_capacity(dim);
        let mut total: u64 = 1;
        for k in 0..dim {
            let cells = ((hi[k] - lo[k]) * inv_cell).floor().to_u64()? + 1;
            total = total.checked_mul(cells)?;
            shape.push(cells);
        }
        let mut grid = Self { dim, lo, shape, keys: Vec::new(), order: Vec::new(), inv_cell };
        let mut pairs: Vec<(u64, u32)> = (0..n)
            .map(|i| (grid.key(&grid.cell(&points[i * dim..(i + 1) * dim])), i as u32))
            .collect();
        pairs.sort_unstable();
        grid.keys = pairs.iter().map(|p| p.0).collect();
        grid.order = pairs.iter().map(|p| p.1).collect();
        Some(grid)
    }

    fn cell(&self, x: &[T]) -> Vec<i64> {
        x.iter()
            .zip(&self.lo)
            .map(|(&v, &l)| ((v - l) * self.inv_cell).floor().to_i64().unwrap_or(i64::MIN / 4))
            .collect()
    }

    fn key(&self, cell: &[i64]) -> u64 {
        cell.iter()
            .zip(&self.shape)
            .fold(0u64, |acc, (&c, &s)| acc * s + c.clamp(0, s as i64 - 1) as u64)
    }

    /// Calls `f` for every point in the `3^dim` cells around `x`; covers all
    /// points within one cell size of `x`.
    pub(crate) fn visit<F: FnMut(usize)>(&self, x: &[T], mut f: F) {
        let dim = self.dim;
        let home = self.cell(x);
        let mut offset = vec![-1i64; dim];
        let mut neighbor = vec![0i64; dim];
        'cells: loop {
            let mut valid = true;
            for k in 0..dim {
                let c = home[k] + offset[k];
                if c < 0 || c >= self.shape[k] as i64 {
                    valid = false;
                    break;
                }
                neighbor[k] = c;
            }
            if valid {
                let key = self.key(&neighbor);
                let start = self.keys.partition_point(|&k| k < key);
                let end = self.keys.partition_point(|&k| k <= key);
                for &j in &self.order[start..end] {
                    f(j as usize);
                }
            }
            // advance the {-1, 0, 1}^dim odometer
            for k in 0..dim {
                if offset[k] < 1 {
                    offset[k] += 1;
                    continue 'cells;
                }
                offset[k] = -1;
            }
            break;
        }
    }

    fn row(&self, points: &[T], i: usize, epsilon: T, profile: &KernelProfile<T>) -> Vec<(u32, T)> {
        let dim = self.dim;
        let xi = &points[i * dim..(i + 1) * dim];
        let mut out = Vec::new();
        self.visit(xi, |j| {
            let w = profile.weight_sq(dist_sq(xi, &points[j * dim..(j + 1) * dim]), epsilon);
            if w > T::zero() {
                out.push((j as u32, w));
            }
        });
        out.sort_unstable_by_key(|p| p.0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_inside_support() {
        let g = build_graph_from_points(&[0.0, 0.5], 1, 1.0, &KernelProfile::Indicator, NeighborSearch::Auto).unwrap();
        assert_eq!(g.row(0), (&[0u32, 1][..], &[1.0, 1.0][..]));
        assert_eq!(g.degrees(), &[1.0, 1.0]);
    }

    #[test]
    fn two_points_outside_support() {
        let g = build_graph_from_points(&[0.0, 2.0], 1, 1.0, &KernelProfile::Indicator, NeighborSearch::Grid).unwrap();
        assert_eq!(g.nnz(), 2);
        assert_eq!(g.degrees(), &[0.5, 0.5]);
        assert_eq!(g.components(), 2);
    }

    #[test]
    fn closed_ball_includes_boundary() {
        let g = build_graph_from_points(&[0.0, 0.0, 0.0, 1.0], 2, 1.0, &KernelProfile::Indicator, NeighborSearch::Grid)
            .unwrap();
        assert_eq!(g.nnz(), 4);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            build_graph_from_points::<f64>(&[], 2, 1.0, &KernelProfile::Indicator, NeighborSearch::Auto),
            Err(Error::EmptyCloud)
        ));
    }
}
