//! Spatial-spectral adjacency graph and reconstruction weights.
//!
//! Graph nodes are a subset of cube pixels (all of them, or e.g. the
//! training pixels of one split). Neighbor entries refer to node positions,
//! so a graph over the full cube has node position == flat index.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::cube::PixelCoord;
use crate::error::{HsiError, Result};
use crate::metrics::{scd, SscdContext};
use crate::wmf::squared_distance;

/// Default relative Gram regularizer, scaled by `trace(z) / k`.
pub const DEFAULT_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Position of the neighbor in the graph's node list.
    pub node: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    k: usize,
    nodes: Vec<usize>,
    neighbors: Vec<Vec<Neighbor>>,
}

impl NeighborGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Flat pixel index (or sample index) of every node.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.neighbors[i]
    }

    pub fn neighbor_flat_indices(&self, i: usize) -> Vec<usize> {
        self.neighbors[i].iter().map(|n| self.nodes[n.node]).collect()
    }
}

fn by_distance_then_index(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.node.cmp(&b.node))
}

/// Exact k-NN by exhaustive evaluation. `dist(i, j)` is only called with
/// `i != j`; rows may be asymmetric.
fn select_knn<F, R>(nodes: Vec<usize>, k: usize, dist: F) -> Result<NeighborGraph>
where
    F: Fn(usize) -> R + Sync,
    R: Fn(usize) -> f64,
{
    let n = nodes.len();
    if k == 0 || k >= n {
        return Err(HsiError::config(format!(
            "neighbor count k = {k} must satisfy 1 <= k < n = {n}"
        )));
    }
    let neighbors = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = dist(i);
            let mut cand: Vec<Neighbor> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Neighbor {
                    node: j,
                    distance: row(j),
                })
                .collect();
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_distance_then_index);
                cand.truncate(k);
            }
            cand.sort_by(by_distance_then_index);
            cand
        })
        .collect();
    Ok(NeighborGraph {
        k,
        nodes,
        neighbors,
    })
}

/// k nearest neighbors of every cube pixel under SSCD.
pub fn knn_sscd(ctx: &SscdContext, k: usize) -> Result<NeighborGraph> {
    let all: Vec<usize> = (0..ctx.pixel_count()).collect();
    knn_sscd_among(ctx, &all, k)
}

/// k nearest neighbors under SSCD, with both queries and candidates
/// restricted to `nodes` (flat pixel indices).
pub fn knn_sscd_among(ctx: &SscdContext, nodes: &[usize], k: usize) -> Result<NeighborGraph> {
    for &i in nodes {
        ctx.raw().check_index(i)?;
    }
    check_distinct(nodes)?;
    let nodes_vec = nodes.to_vec();
    select_knn(nodes_vec, k, |i| {
        let window = ctx.window(nodes[i]);
        move |j| ctx.sscd_with_window(&window, nodes[j])
    })
}

/// k nearest neighbors under plain Euclidean distance between the columns
/// of `samples` (`D x n`). Node `i` is column `i`.
pub fn knn_euclidean(samples: &DMatrix<f64>, k: usize) -> Result<NeighborGraph> {
    let nodes: Vec<usize> = (0..samples.ncols()).collect();
    select_knn(nodes, k, |i| {
        let xi = samples.column(i);
        move |j| squared_distance(xi.as_slice(), samples.column(j).as_slice()).sqrt()
    })
}

fn check_distinct(nodes: &[usize]) -> Result<()> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(HsiError::config("graph nodes must be distinct pixels"));
    }
    Ok(())
}

/// Divisor applied to neighbor differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScdMode {
    /// Spatial coordinate distance between the two pixels.
    Coordinates,
    /// A fixed divisor for every pair; `Constant(1.0)` gives plain NPE differences.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightOptions {
    pub eps: f64,
    pub scd: ScdMode,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            scd: ScdMode::Coordinates,
        }
    }
}

/// `(x_i - x_j) / d_scd(i, j)` on raw spectra.
pub fn combined_measure(ctx: &SscdContext, i: usize, j: usize) -> Result<Vec<f64>> {
    ctx.raw().check_index(i)?;
    ctx.raw().check_index(j)?;
    if i == j {
        return Err(HsiError::config("combined measure of a pixel with itself"));
    }
    let divisor = ctx.scd(i, j);
    Ok(ctx
        .raw()
        .pixel(i)
        .iter()
        .zip(ctx.raw().pixel(j))
        .map(|(a, b)| (a - b) / divisor)
        .collect())
}

/// Graph nodes with the spectra and positions that feed the weights.
#[derive(Debug, Clone)]
pub struct NodeData {
    /// `D x n`, column `i` is node `i`.
    pub samples: DMatrix<f64>,
    pub coords: Option<Vec<PixelCoord>>,
}

impl NodeData {
    pub fn from_cube(cube: &crate::cube::HyperCube, nodes: &[usize]) -> Self {
        Self {
            samples: cube.columns(nodes),
            coords: Some(nodes.iter().map(|&i| cube.coord(i)).collect()),
        }
    }

    pub fn plain(samples: DMatrix<f64>) -> Self {
        Self {
            samples,
            coords: None,
        }
    }

    /// Stacked measures `h_i^a` as columns of a `D x k` matrix.
    fn measures(&self, i: usize, graph: &NeighborGraph, mode: ScdMode) -> Result<DMatrix<f64>> {
        let nbrs = graph.neighbors(i);
        let xi = self.samples.column(i);
        let mut h = DMatrix::zeros(self.samples.nrows(), nbrs.len());
        for (a, nb) in nbrs.iter().enumerate() {
            let divisor = match mode {
                ScdMode::Constant(c) => c,
                ScdMode::Coordinates => {
                    let coords = self.coords.as_ref().ok_or_else(|| {
                        HsiError::config("coordinate divisor requested for samples without positions")
                    })?;
                    scd(coords[i], coords[nb.node])
                }
            };
            if !(divisor > 0.0 && divisor.is_finite()) {
                return Err(HsiError::config(format!(
                    "spatial divisor must be positive, got {divisor}"
                )));
            }
            h.set_column(a, &((xi - self.samples.column(nb.node)) / divisor));
        }
        Ok(h)
    }
}

/// Gram matrix `z[a][b] = <h_a, h_b>` of node `i`'s neighbor measures.
pub fn gram_z(data: &NodeData, i: usize, graph: &NeighborGraph, mode: ScdMode) -> Result<DMatrix<f64>> {
    if data.samples.ncols() != graph.len() {
        return Err(HsiError::shape(format!(
            "{} samples for a graph of {} nodes",
            data.samples.ncols(),
            graph.len()
        )));
    }
    let h = data.measures(i, graph, mode)?;
    Ok(h.tr_mul(&h))
}

/// Affine weights (summing to one) minimizing `w^T z w`, computed as
/// `u / sum(u)` with `(z + eps * trace(z) / k * I) u = 1`.
pub fn reconstruction_weights(z: &DMatrix<f64>, eps: f64) -> Result<DVector<f64>> {
    let k = z.nrows();
    if k == 0 || z.ncols() != k {
        return Err(HsiError::shape(format!("gram matrix must be square, got {:?}", z.shape())));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(HsiError::config(format!("eps must be nonnegative, got {eps}")));
    }
    if k == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let trace = z.trace();
    if trace == 0.0 {
        // Every measure is zero: any affine combination is optimal.
        if eps > 0.0 {
            return Ok(DVector::from_element(k, 1.0 / k as f64));
        }
        return Err(HsiError::Singular("all-zero gram matrix with eps = 0".into()));
    }
    let mut reg = z.clone();
    let shift = eps * trace / k as f64;
    for d in 0..k {
        reg[(d, d)] += shift;
    }
    let lu = reg.full_piv_lu();
    let u = lu
        .solve(&DVector::from_element(k, 1.0))
        .ok_or_else(|| HsiError::Singular("gram matrix is singular; raise eps".into()))?;
    let total = u.sum();
    if !total.is_finite() || total == 0.0 || u.iter().any(|v| !v.is_finite()) {
        return Err(HsiError::Singular("gram solve produced no usable weights".into()));
    }
    Ok(u / total)
}

/// Sparse `n x n` reconstruction weight matrix, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if j >= n || j == i || !v.is_finite() {
                    return Err(HsiError::shape(format!("invalid weight entry ({i}, {j}) = {v}")));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .filter(|(c, _)| *c == j)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, v)| v).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Reconstruction weights for every node of `graph`.
pub fn build_weights(data: &NodeData, graph: &NeighborGraph, opts: &WeightOptions) -> Result<WeightMatrix> {
    let rows = (0..graph.len())
        .into_par_iter()
        .map(|i| {
            let z = gram_z(data, i, graph, opts.scd)?;
            let u = reconstruction_weights(&z, opts.eps)?;
            Ok(graph
                .neighbors(i)
                .iter()
                .zip(u.iter())
                .map(|(nb, &v)| (nb.node, v))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    WeightMatrix::from_rows(rows)
}

/// Weights from raw spectra and spatial-coordinate divisors.
pub fn build_weight_matrix(ctx: &SscdContext, graph: &NeighborGraph, eps: f64) -> Result<WeightMatrix> {
    let data = NodeData::from_cube(ctx.raw(), graph.nodes());
    build_weights(
        &data,
        graph,
        &WeightOptions {
            eps,
            scd: ScdMode::Coordinates,
        },
    )
}
