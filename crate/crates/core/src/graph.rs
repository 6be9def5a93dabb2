//! Vertex/weight data model and the normalized weighted graph Laplacians.
//!
//! Both weight families (connectivity and proximity) are stored as sorted
//! per-vertex edge lists, and the Laplacian is applied matrix-free:
//!
//! ```text
//! (L g)(x_m) = (1/pi_m) * sum_j (g(x_m) - g(x_j)) w_mj,   pi_m = sum_j w_mj
//! ```
//!
//! This operator is positive semidefinite; the diffusion terms of the model
//! carry their minus sign explicitly at the call site.

use crate::error::{Error, Result};

/// Which of the two superposed weight families an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFamily {
    /// White-matter fiber connection strength (tau spreading).
    Connectivity,
    /// Spatial closeness in the parenchyma (amyloid diffusion).
    Proximity,
}

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Connectivity => "connectivity",
            WeightFamily::Proximity => "proximity",
        }
    }
}

/// Symmetric nonnegative sparse weights with zero diagonal.
///
/// Neighbor lists are sorted by index so that iteration order (and hence
/// floating-point summation order) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeights {
    num_vertices: usize,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SparseWeights {
    /// Build from undirected edge triples `(i, j, w)`.
    ///
    /// Duplicate edges (in either orientation) are summed. Diagonal entries
    /// are ignored: they cancel out of the Laplacian and the degree is
    /// defined over neighbors only. Negative weights and out-of-range
    /// indices are rejected.
    pub fn from_edges(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_vertices];
        for (i, j, w) in edges {
            if i >= num_vertices || j >= num_vertices {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) references a vertex outside 0..{num_vertices}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) has invalid weight {w}; weights must be finite and >= 0"
                )));
            }
            if i == j || w == 0.0 {
                continue;
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(j, _)| j);
            // merge duplicates (summed)
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, w) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            *row = merged;
        }
        Ok(Self {
            num_vertices,
            adjacency,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Number of undirected edges with nonzero weight.
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, m: usize) -> &[(usize, f64)] {
        &self.adjacency[m]
    }

    /// Weight of the (i, j) entry, zero if absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| self.adjacency[i][pos].1)
            .unwrap_or(0.0)
    }

    /// Upper-triangle edge iterator `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter_map(move |&(j, w)| (i < j).then_some((i, j, w))))
    }
}

/// Row sums `pi_m = sum_j w_mj`, failing on any isolated vertex.
pub fn weighted_degrees(weights: &SparseWeights, family: WeightFamily) -> Result<Vec<f64>> {
    let degrees: Vec<f64> = (0..weights.num_vertices())
        .map(|m| weights.neighbors(m).iter().map(|&(_, w)| w).sum())
        .collect();
    if let Some(vertex) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedVertex {
            family: family.name(),
            vertex,
        });
    }
    Ok(degrees)
}

/// Gaussian-kernel proximity weights with a hard distance cutoff:
/// `w_ij = exp(-|x_i - x_j|^2 / decay_scale^2)` for `0 < |x_i - x_j| <= cutoff_radius`.
///
/// Exactly coincident points are not linked. The result must leave no vertex
/// isolated; otherwise an error names the first offending vertex.
pub fn build_proximity_weights(
    coordinates: &[[f64; 3]],
    cutoff_radius: f64,
    decay_scale: f64,
) -> Result<SparseWeights> {
    if !(cutoff_radius > 0.0) || !(decay_scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff_radius and decay_scale must be positive (got {cutoff_radius}, {decay_scale})"
        )));
    }
    if let Some(m) = coordinates
        .iter()
        .position(|c| c.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::InvalidArgument(format!(
            "coordinate of vertex {m} is not finite"
        )));
    }
    let n = coordinates.len();
    let inv_decay_sq = 1.0 / (decay_scale * decay_scale);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(&coordinates[i], &coordinates[j]);
            if d > 0.0 && d <= cutoff_radius {
                edges.push((i, j, (-d * d * inv_decay_sq).exp()));
            }
        }
    }
    let weights = SparseWeights::from_edges(n, edges)?;
    weighted_degrees(&weights, WeightFamily::Proximity)?;
    Ok(weights)
}

/// Default proximity kernel parameters for a point cloud.
///
/// Cutoff: the 10th percentile of the pairwise-distance distribution, raised
/// if necessary to the largest nearest-neighbor distance so that no vertex
/// ends up isolated. Decay scale: half the cutoff.
pub fn default_proximity_params(coordinates: &[[f64; 3]]) -> (f64, f64) {
    let n = coordinates.len();
    let mut pairwise = Vec::with_capacity(n * (n - 1) / 2);
    let mut largest_nearest = 0.0f64;
    for i in 0..n {
        let mut nearest = f64::INFINITY;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = distance(&coordinates[i], &coordinates[j]);
            if j > i {
                pairwise.push(d);
            }
            if d > 0.0 {
                nearest = nearest.min(d);
            }
        }
        if nearest.is_finite() {
            largest_nearest = largest_nearest.max(nearest);
        }
    }
    pairwise.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p10 = pairwise[(pairwise.len() as f64 * 0.10) as usize];
    let cutoff = p10.max(largest_nearest);
    (cutoff, cutoff / 2.0)
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Parcellated brain: vertex geometry, labels, and the two weight families.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainGraph {
    coordinates: Vec<[f64; 3]>,
    labels: Vec<String>,
    conn_weights: SparseWeights,
    prox_weights: SparseWeights,
    conn_degrees: Vec<f64>,
    prox_degrees: Vec<f64>,
    /// Sorted vertex indices of the seed region (entorhinal cortex).
    seed_set: Vec<usize>,
}

impl BrainGraph {
    pub fn new(
        coordinates: Vec<[f64; 3]>,
        labels: Vec<String>,
        conn_weights: SparseWeights,
        prox_weights: SparseWeights,
        seed_set: Vec<usize>,
    ) -> Result<Self> {
        let n = coordinates.len();
        if labels.len() != n || conn_weights.num_vertices() != n || prox_weights.num_vertices() != n
        {
            return Err(Error::InvalidArgument(format!(
                "inconsistent vertex counts: {} coordinates, {} labels, {} / {} weight rows",
                n,
                labels.len(),
                conn_weights.num_vertices(),
                prox_weights.num_vertices()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("graph has no vertices".into()));
        }
        if seed_set.iter().any(|&v| v >= n) {
            return Err(Error::InvalidArgument(
                "seed set references a vertex outside the graph".into(),
            ));
        }
        let conn_degrees = weighted_degrees(&conn_weights, WeightFamily::Connectivity)?;
        let prox_degrees = weighted_degrees(&prox_weights, WeightFamily::Proximity)?;
        let mut seed_set = seed_set;
        seed_set.sort_unstable();
        seed_set.dedup();
        Ok(Self {
            coordinates,
            labels,
            conn_weights,
            prox_weights,
            conn_degrees,
            prox_degrees,
            seed_set,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[[f64; 3]] {
        &self.coordinates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self, family: WeightFamily) -> &SparseWeights {
        match family {
            WeightFamily::Connectivity => &self.conn_weights,
            WeightFamily::Proximity => &self.prox_weights,
        }
    }

    pub fn degrees(&self, family: WeightFamily) -> &[f64] {
        match family {
            WeightFamily::Connectivity => &self.conn_degrees,
            WeightFamily::Proximity => &self.prox_degrees,
        }
    }

    pub fn seed_set(&self) -> &[usize] {
        &self.seed_set
    }

    /// Per-vertex membership mask of the seed set.
    pub fn seed_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vertices()];
        for &v in &self.seed_set {
            mask[v] = true;
        }
        mask
    }

    /// Normalized Laplacian over the requested weight family.
    ///
    /// The operator is immutable and borrows the graph, so it can be applied
    /// concurrently from any number of readers.
    pub fn laplacian(&self, family: WeightFamily) -> LaplacianOperator<'_> {
        LaplacianOperator {
            weights: self.weights(family),
            degrees: self.degrees(family),
        }
    }
}

/// Matrix-free normalized graph Laplacian for one weight family.
#[derive(Debug, Clone, Copy)]
pub struct LaplacianOperator<'g> {
    weights: &'g SparseWeights,
    degrees: &'g [f64],
}

impl LaplacianOperator<'_> {
    pub fn num_vertices(&self) -> usize {
        self.degrees.len()
    }

    /// `out[m] = (1/pi_m) * sum_j (g[m] - g[j]) w_mj`.
    ///
    /// The difference form keeps constants in the kernel exactly: every term
    /// of the sum is `w * 0.0` when `g` is constant.
    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        debug_assert_eq!(g.len(), self.degrees.len());
        debug_assert_eq!(out.len(), self.degrees.len());
        for m in 0..g.len() {
            let gm = g[m];
            let mut acc = 0.0;
            for &(j, w) in self.weights.neighbors(m) {
                acc += (gm - g[j]) * w;
            }
            out[m] = acc / self.degrees[m];
        }
    }

    pub fn apply_vec(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        self.apply(g, &mut out);
        out
    }

    pub fn degrees(&self) -> &[f64] {
        self.degrees
    }
}
