//! Immutable weighted undirected graphs with O(1) query access.
//!
//! Storage is CSR: per-vertex neighbor lists sorted by target, with weights
//! and a per-vertex alias table so that weighted neighbor sampling costs one
//! random draw. Vertices are dense indices `0..n`; the original identifiers
//! from the input file are kept alongside.

mod alias;
mod components;
mod ingest;
mod spectral;

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use alias::AliasTables;

pub use components::largest_connected_component;
pub use ingest::{load_edge_list, read_id_map, write_edge_list, write_id_map, IngestOptions};
pub use spectral::condition_number_upper_bound;

/// Dense vertex index in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn new(index: usize) -> Self {
        VertexId(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How a neighbor is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborMode {
    /// `P(v) = w_uv / w_u`.
    Weighted,
    /// `P(v) = 1 / d_u`.
    Uniform,
}

#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    weighted_degree: Vec<f64>,
    alias: AliasTables,
    original_ids: Vec<u64>,
    unit_weights: bool,
}

impl Graph {
    /// Builds a graph on `n` vertices labelled `0..n`.
    ///
    /// Self-loops are dropped; for a repeated pair (in either orientation)
    /// the first weight wins. Weights must be finite and positive.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::from_edges_with_ids((0..n as u64).collect(), edges)
    }

    /// Like [`Graph::from_edges`] but with explicit original identifiers,
    /// one per dense vertex.
    pub fn from_edges_with_ids<I>(original_ids: Vec<u64>, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = original_ids.len();
        if n == 0 {
            return Err(Error::validation("graph has no vertices"));
        }
        if n > u32::MAX as usize {
            return Err(Error::Capacity {
                what: "vertex count",
                size: n,
                limit: u32::MAX as usize,
            });
        }
        let mut seen: HashMap<(u32, u32), usize> = HashMap::new();
        let mut kept: Vec<(u32, u32, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= n {
                return Err(Error::Bounds { vertex: u, n });
            }
            if v >= n {
                return Err(Error::Bounds { vertex: v, n });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) has non-positive or non-finite weight {w}"
                )));
            }
            if u == v {
                continue;
            }
            let key = (u.min(v) as u32, u.max(v) as u32);
            if let Entry::Vacant(e) = seen.entry(key) {
                e.insert(kept.len());
                kept.push((key.0, key.1, w));
            }
        }
        drop(seen);

        let mut degree = vec![0usize; n];
        for &(u, v, _) in &kept {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut slots: Vec<(u32, f64)> = vec![(0, 0.0); 2 * kept.len()];
        for &(u, v, w) in &kept {
            slots[cursor[u as usize]] = (v, w);
            cursor[u as usize] += 1;
            slots[cursor[v as usize]] = (u, w);
            cursor[v as usize] += 1;
        }
        for u in 0..n {
            slots[offsets[u]..offsets[u + 1]].sort_unstable_by_key(|&(t, _)| t);
        }
        let targets: Vec<u32> = slots.iter().map(|&(t, _)| t).collect();
        let weights: Vec<f64> = slots.iter().map(|&(_, w)| w).collect();
        let weighted_degree = (0..n)
            .map(|u| weights[offsets[u]..offsets[u + 1]].iter().sum())
            .collect();
        let unit_weights = weights.iter().all(|&w| w == 1.0);
        let alias = AliasTables::build(&offsets, &weights);
        Ok(Graph {
            offsets,
            targets,
            weights,
            weighted_degree,
            alias,
            original_ids,
            unit_weights,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    #[inline]
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    /// Average unweighted degree `2m / n`.
    pub fn mean_degree(&self) -> f64 {
        self.targets.len() as f64 / self.n() as f64
    }

    pub fn check_vertex(&self, u: VertexId) -> Result<()> {
        if u.index() < self.n() {
            Ok(())
        } else {
            Err(Error::Bounds {
                vertex: u.index(),
                n: self.n(),
            })
        }
    }

    /// `(w_u, d_u)`: weighted and unweighted degree.
    pub fn degree(&self, u: VertexId) -> Result<(f64, usize)> {
        self.check_vertex(u)?;
        Ok((self.weighted_degree(u), self.unweighted_degree(u)))
    }

    #[inline]
    pub fn weighted_degree(&self, u: VertexId) -> f64 {
        self.weighted_degree[u.index()]
    }

    #[inline]
    pub fn unweighted_degree(&self, u: VertexId) -> usize {
        let i = u.index();
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_weighted_degree(&self) -> f64 {
        self.weighted_degree.iter().copied().fold(0.0, f64::max)
    }

    /// Neighbors of `u` with edge weights, in increasing vertex order.
    pub fn neighbors(&self, u: VertexId) -> impl ExactSizeIterator<Item = (VertexId, f64)> + '_ {
        let (lo, hi) = (self.offsets[u.index()], self.offsets[u.index() + 1]);
        self.targets[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .map(|(&t, &w)| (VertexId(t), w))
    }

    /// Weight of edge `(u, v)`, if present.
    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let (lo, hi) = (self.offsets[u.index()], self.offsets[u.index() + 1]);
        self.targets[lo..hi]
            .binary_search(&v.0)
            .ok()
            .map(|i| self.weights[lo + i])
    }

    /// All edges once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.n()).flat_map(move |u| {
            let u = VertexId::new(u);
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Whether every edge has weight exactly 1.
    pub fn is_unit_weight(&self) -> bool {
        self.unit_weights
    }

    /// Original identifier of a dense vertex.
    pub fn original_id(&self, u: VertexId) -> u64 {
        self.original_ids[u.index()]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    /// Dense index for an original identifier, if present.
    pub fn dense_id(&self, original: u64) -> Option<VertexId> {
        // Loaded graphs keep original ids sorted; fall back to a scan otherwise.
        match self.original_ids.binary_search(&original) {
            Ok(i) => Some(VertexId::new(i)),
            Err(_) => self
                .original_ids
                .iter()
                .position(|&x| x == original)
                .map(VertexId::new),
        }
    }

    /// Uniform vertex.
    #[inline]
    pub fn sample_vertex(&self, rng: &mut RandomStream) -> VertexId {
        VertexId::new(rng.below(self.n()))
    }

    /// Neighbor of `u` drawn according to `mode`.
    pub fn sample_neighbor(
        &self,
        u: VertexId,
        mode: NeighborMode,
        rng: &mut RandomStream,
    ) -> Result<VertexId> {
        self.check_vertex(u)?;
        self.sample_neighbor_edge(u, mode, rng)
            .map(|(v, _)| v)
            .ok_or(Error::NoNeighbors(u))
    }

    /// Neighbor of `u` together with the weight of the connecting edge;
    /// `None` when `u` is isolated.
    #[inline]
    pub fn sample_neighbor_edge(
        &self,
        u: VertexId,
        mode: NeighborMode,
        rng: &mut RandomStream,
    ) -> Option<(VertexId, f64)> {
        let lo = self.offsets[u.index()];
        let d = self.offsets[u.index() + 1] - lo;
        if d == 0 {
            return None;
        }
        let slot = match mode {
            NeighborMode::Uniform => rng.below(d),
            NeighborMode::Weighted if self.unit_weights => rng.below(d),
            NeighborMode::Weighted => self.alias.sample(lo, d, rng),
        };
        Some((VertexId(self.targets[lo + slot]), self.weights[lo + slot]))
    }

    /// Uniform undirected edge, as an ordered pair.
    pub fn sample_edge(&self, rng: &mut RandomStream) -> Option<(VertexId, VertexId)> {
        if self.targets.is_empty() {
            return None;
        }
        let slot = rng.below(self.targets.len());
        // First vertex whose range contains `slot`.
        let u = self.offsets.partition_point(|&o| o <= slot) - 1;
        Some((VertexId::new(u), VertexId(self.targets[slot])))
    }

    /// `Some(d)` if every vertex has unweighted degree `d` and all weights
    /// are 1; otherwise the first vertex that breaks the pattern.
    pub fn unit_regular_degree(&self) -> Result<usize, (VertexId, String)> {
        let d = self.unweighted_degree(VertexId(0));
        for u in 0..self.n() {
            let u = VertexId::new(u);
            let du = self.unweighted_degree(u);
            if du != d {
                return Err((u, format!("has degree {du}, expected {d}")));
            }
            if let Some((v, w)) = self.neighbors(u).find(|&(_, w)| w != 1.0) {
                return Err((u, format!("has edge to {v} with weight {w}")));
            }
        }
        Ok(d)
    }

    /// Sparse product `y = A x`.
    pub fn adjacency_mul(&self, x: &[f64], y: &mut [f64]) {
        for (u, yu) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.offsets[u], self.offsets[u + 1]);
            *yu = self.targets[lo..hi]
                .iter()
                .zip(&self.weights[lo..hi])
                .map(|(&t, &w)| w * x[t as usize])
                .sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn degree_of_path_middle() {
        let g = path3();
        assert_eq!(g.degree(VertexId(1)).unwrap(), (2.0, 2));
        assert_eq!(g.degree(VertexId(0)).unwrap(), (1.0, 1));
    }

    #[test]
    fn degree_single_half_edge() {
        let g = Graph::from_edges(2, [(0, 1, 0.5)]).unwrap();
        assert_eq!(g.degree(VertexId(0)).unwrap(), (0.5, 1));
    }

    #[test]
    fn isolated_vertex_has_zero_degree() {
        let g = Graph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        assert_eq!(g.degree(VertexId(2)).unwrap(), (0.0, 0));
        let mut rng = RandomStream::new(1);
        assert!(matches!(
            g.sample_neighbor(VertexId(2), NeighborMode::Weighted, &mut rng),
            Err(Error::NoNeighbors(_))
        ));
    }

    #[test]
    fn out_of_range_vertex() {
        let g = path3();
        assert!(matches!(g.degree(VertexId(3)), Err(Error::Bounds { vertex: 3, n: 3 })));
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = Graph::from_edges(3, [(0, 1, 2.0), (1, 0, 5.0), (1, 1, 1.0), (0, 1, 7.0)]).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.edge_weight(VertexId(1), VertexId(0)), Some(2.0));
    }

    #[test]
    fn rejects_bad_weight() {
        assert!(Graph::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, -1.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn single_neighbor_always_chosen() {
        let g = Graph::from_edges(2, [(0, 1, 3.0)]).unwrap();
        let mut rng = RandomStream::new(5);
        for mode in [NeighborMode::Weighted, NeighborMode::Uniform] {
            for _ in 0..100 {
                assert_eq!(g.sample_neighbor(VertexId(0), mode, &mut rng).unwrap(), VertexId(1));
            }
        }
    }

    #[test]
    fn single_vertex_sampling() {
        let g = Graph::from_edges(1, []).unwrap();
        let mut rng = RandomStream::new(9);
        for _ in 0..50 {
            assert_eq!(g.sample_vertex(&mut rng), VertexId(0));
        }
    }

    #[test]
    fn sample_vertex_deterministic() {
        let g = Graph::from_edges(10, [(0, 1, 1.0)]).unwrap();
        let mut a = RandomStream::new(42);
        let mut b = RandomStream::new(42);
        let xs: Vec<_> = (0..20).map(|_| g.sample_vertex(&mut a)).collect();
        let ys: Vec<_> = (0..20).map(|_| g.sample_vertex(&mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn sample_edge_covers_edges() {
        let g = path3();
        let mut rng = RandomStream::new(2);
        for _ in 0..100 {
            let (u, v) = g.sample_edge(&mut rng).unwrap();
            assert!(g.edge_weight(u, v).is_some());
        }
    }

    #[test]
    fn weighted_degree_sums_match() {
        let g = Graph::from_edges(4, [(0, 1, 0.25), (1, 2, 1.5), (2, 3, 2.0), (3, 0, 0.75)]).unwrap();
        let total: f64 = (0..4).map(|u| g.weighted_degree(VertexId(u))).sum();
        let edge_total: f64 = g.edges().map(|(_, _, w)| w).sum();
        assert!((total - 2.0 * edge_total).abs() <= 1e-12 * total);
    }

    #[test]
    fn regularity_check() {
        let k4 = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(k4.unit_regular_degree(), Ok(3));
        assert!(path3().unit_regular_degree().is_err());
    }
}
