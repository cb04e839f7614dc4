//! Synthetic graph families for tests and benchmarks.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, Graph};
use crate::rng::RandomStream;

/// Erdős–Rényi `G(n, m)` with unit weights, restricted to its largest
/// connected component.
pub fn gnm(n: usize, m: usize, rng: &mut RandomStream) -> Result<Graph> {
    if n < 2 || m == 0 {
        return Err(Error::validation("G(n, m) needs n >= 2 and m >= 1"));
    }
    let max = n * (n - 1) / 2;
    if m > max {
        return Err(Error::validation(format!("{m} edges do not fit in {n} vertices")));
    }
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.below(n);
        let v = rng.below(n);
        if u == v {
            continue;
        }
        if seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v, 1.0));
        }
    }
    Ok(largest_connected_component(&Graph::from_edges(n, edges)?))
}

/// `G(n, m)` whose edge weights are drawn uniformly from `(0, 1]`.
pub fn gnm_weighted(n: usize, m: usize, rng: &mut RandomStream) -> Result<Graph> {
    let g = gnm(n, m, rng)?;
    let edges: Vec<_> = g
        .edges()
        .map(|(u, v, _)| (u.index(), v.index(), 1.0 - rng.unit()))
        .collect();
    Graph::from_edges_with_ids(g.original_ids().to_vec(), edges)
}

/// Connected random `d`-regular simple graph. Stubs are paired one at a
/// time, skipping pairs that would form a loop or a repeated edge, and the
/// whole pairing restarts when it gets stuck.
pub fn random_regular(n: usize, d: usize, rng: &mut RandomStream) -> Result<Graph> {
    if d == 0 || d >= n || (n * d) % 2 == 1 {
        return Err(Error::validation(format!("no simple {d}-regular graph on {n} vertices")));
    }
    for _ in 0..1000 {
        let Some(mut edges) = pair_stubs(n, d, rng) else { continue };
        edges.sort_unstable();
        let g = Graph::from_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))?;
        if largest_connected_component(&g).n() == n {
            return Ok(g);
        }
    }
    Err(Error::validation(format!(
        "failed to sample a connected simple {d}-regular graph on {n} vertices"
    )))
}

fn pair_stubs(n: usize, d: usize, rng: &mut RandomStream) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|u| std::iter::repeat_n(u, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);
    let mut edges = Vec::with_capacity(n * d / 2);
    let mut misses = 0;
    while !stubs.is_empty() {
        let i = rng.below(stubs.len());
        let j = rng.below(stubs.len());
        let (u, v) = (stubs[i], stubs[j]);
        if i == j || u == v || seen.contains(&(u.min(v), u.max(v))) {
            misses += 1;
            if misses > 50 * stubs.len() + 100 {
                return None;
            }
            continue;
        }
        misses = 0;
        seen.insert((u.min(v), u.max(v)));
        edges.push((u.min(v), u.max(v)));
        let (hi, lo) = (i.max(j), i.min(j));
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    Some(edges)
}

/// Star with hub 0 and `leaves` leaves, unit weights.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v, 1.0))).expect("valid star")
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| (v - 1, v, 1.0))).expect("valid path")
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0)))).expect("valid clique")
}
