//! Recovering innate opinions from expressed ones.
//!
//! At equilibrium `s_u = (1+w_u) z*_u − S_u` with `S_u = Σ_v w_uv z*_v`, so
//! `s_u` is exact after `d_u + 1` lookups. For high-degree vertices `S_u` is
//! estimated from weighted neighbor samples instead.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NeighborMode, VertexId};
use crate::opinions::OpinionSource;
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SMethod {
    /// Average of weighted neighbor samples, additive error.
    MeanSampling,
    /// Pair collisions among samples, multiplicative error.
    Collision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SEstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Vertices with `d_u < threshold` are computed exactly.
    pub threshold: usize,
    /// Independent estimates combined by their median; odd.
    pub repetitions: usize,
    pub method: SMethod,
    /// Lower bound `c` on the expressed opinions, used to size the
    /// collision estimator.
    pub c_lower: f64,
    /// Also use the exact path whenever it needs no more lookups than
    /// sampling would.
    pub exact_when_cheaper: bool,
}

impl Default for SEstimatorConfig {
    fn default() -> Self {
        SEstimatorConfig {
            epsilon: 0.1,
            delta: 0.1,
            threshold: 400,
            repetitions: 5,
            method: SMethod::MeanSampling,
            c_lower: 0.5,
            exact_when_cheaper: true,
        }
    }
}

impl SEstimatorConfig {
    /// Sets `delta` and the matching number of median repetitions.
    pub fn with_confidence(mut self, delta: f64) -> Self {
        self.delta = delta;
        self.repetitions = median_repetitions(delta);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::validation("epsilon must be positive"));
        }
        if self.repetitions == 0 || self.repetitions % 2 == 0 {
            return Err(Error::validation("repetitions must be odd and at least 1"));
        }
        if self.method == SMethod::Collision && !(self.c_lower > 0.0) {
            return Err(Error::validation("collision estimator needs c > 0"));
        }
        Ok(())
    }
}

/// Smallest odd `k` with `exp(-0.32 k) ≤ δ`: the median of `k` estimates,
/// each within the target with probability 0.9, then fails with probability
/// at most `δ` by Hoeffding's inequality.
pub fn median_repetitions(delta: f64) -> usize {
    if !(delta > 0.0 && delta < 1.0) {
        return 1;
    }
    let k = ((1.0 / delta).ln() / 0.32).ceil().max(1.0) as usize;
    k | 1
}

/// Samples for the mean estimator at a vertex with weighted degree `w`.
pub fn mean_sample_count(w: f64, epsilon: f64) -> usize {
    ((10.0 * w * w / (epsilon * epsilon)).ceil() as usize).max(1)
}

/// Samples for the collision estimator at a vertex with degree `d`.
pub fn collision_sample_count(d: usize, epsilon: f64, c: f64) -> usize {
    (9.0 * (d as f64).sqrt() / (epsilon * c)).ceil() as usize
}

/// `s_u = (1+w_u) z_u − Σ w_uv z_v` from `d_u + 1` lookups.
pub fn estimate_s_exact<Z: OpinionSource + ?Sized>(g: &Graph, z: &Z, u: VertexId) -> Result<f64> {
    g.check_vertex(u)?;
    let sum: f64 = g.neighbors(u).map(|(v, w)| w * z.opinion(v)).sum();
    Ok((1.0 + g.weighted_degree(u)) * z.opinion(u) - sum)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs[xs.len() / 2]
}

/// Looks up each distinct vertex once per call.
struct Cached<'a, Z: ?Sized> {
    z: &'a Z,
    seen: HashMap<VertexId, f64>,
}

impl<'a, Z: OpinionSource + ?Sized> Cached<'a, Z> {
    fn new(z: &'a Z) -> Self {
        Cached { z, seen: HashMap::new() }
    }

    fn get(&mut self, v: VertexId) -> f64 {
        let z = self.z;
        *self.seen.entry(v).or_insert_with(|| z.opinion(v))
    }
}

fn require_neighbors(g: &Graph, u: VertexId) -> Result<()> {
    g.check_vertex(u)?;
    if g.unweighted_degree(u) == 0 {
        return Err(Error::NoNeighbors(u));
    }
    Ok(())
}

/// `S_u` as `w_u` times the mean of `z` over `ceil(10 w_u²/ε²)` weighted
/// neighbor samples, median over the configured repetitions.
pub fn estimate_sum_mean<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    u: VertexId,
    cfg: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> Result<f64> {
    cfg.validate()?;
    require_neighbors(g, u)?;
    Ok(sum_mean(g, &mut Cached::new(z), u, cfg, rng))
}

fn sum_mean<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &mut Cached<'_, Z>,
    u: VertexId,
    cfg: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> f64 {
    let w = g.weighted_degree(u);
    let k = mean_sample_count(w, cfg.epsilon);
    let ys = (0..cfg.repetitions)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..k {
                let (v, _) = g
                    .sample_neighbor_edge(u, NeighborMode::Weighted, rng)
                    .expect("vertex has neighbors");
                acc += z.get(v);
            }
            w * acc / k as f64
        })
        .collect();
    median(ys)
}

/// `S_u` from collisions among `ceil(9 √d_u / (ε c))` weighted samples:
/// `w_u² · C(m,2)^{-1} · Σ_t C(c_t, 2) z_t / w_ut`. Falls back to mean
/// sampling when fewer than three samples would be drawn.
pub fn estimate_sum_collision<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    u: VertexId,
    cfg: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> Result<f64> {
    cfg.validate()?;
    require_neighbors(g, u)?;
    Ok(sum_collision(g, &mut Cached::new(z), u, cfg, rng))
}

fn sum_collision<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &mut Cached<'_, Z>,
    u: VertexId,
    cfg: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> f64 {
    let m = collision_sample_count(g.unweighted_degree(u), cfg.epsilon, cfg.c_lower);
    if m < 3 {
        return sum_mean(g, z, u, cfg, rng);
    }
    let ys = (0..cfg.repetitions).map(|_| collision_once(g, z, u, m, rng)).collect();
    median(ys)
}

fn collision_once<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &mut Cached<'_, Z>,
    u: VertexId,
    m: usize,
    rng: &mut RandomStream,
) -> f64 {
    let w = g.weighted_degree(u);
    let mut counts: HashMap<VertexId, (u64, f64)> = HashMap::new();
    for _ in 0..m {
        let (v, wv) = g
            .sample_neighbor_edge(u, NeighborMode::Weighted, rng)
            .expect("vertex has neighbors");
        counts.entry(v).or_insert((0, wv)).0 += 1;
    }
    let pairs = (m * (m - 1) / 2) as f64;
    let mut hits: Vec<_> = counts.into_iter().filter(|(_, (c, _))| *c >= 2).collect();
    hits.sort_unstable_by_key(|(v, _)| *v);
    let total: f64 = hits
        .into_iter()
        .map(|(v, (c, wv))| (c * (c - 1) / 2) as f64 * z.get(v) / wv)
        .sum();
    w * w * total / pairs
}

/// Lookups the sampled path would need at most.
fn sampled_cost(g: &Graph, u: VertexId, cfg: &SEstimatorConfig) -> usize {
    let per_rep = match cfg.method {
        SMethod::MeanSampling => mean_sample_count(g.weighted_degree(u), cfg.epsilon),
        SMethod::Collision => {
            let m = collision_sample_count(g.unweighted_degree(u), cfg.epsilon, cfg.c_lower);
            if m < 3 {
                mean_sample_count(g.weighted_degree(u), cfg.epsilon)
            } else {
                m
            }
        }
    };
    per_rep.saturating_mul(cfg.repetitions).saturating_add(1)
}

/// Estimate of `s_u`. Exact below the degree threshold; otherwise
/// `(1+w_u) z_u − S̃_u` with `S̃_u` from the configured sampler, clamped to
/// `[0, 1]`.
pub fn estimate_s<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    u: VertexId,
    cfg: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> Result<f64> {
    cfg.validate()?;
    g.check_vertex(u)?;
    let d = g.unweighted_degree(u);
    if d < cfg.threshold || d == 0 || (cfg.exact_when_cheaper && d < sampled_cost(g, u, cfg)) {
        return estimate_s_exact(g, z, u);
    }
    let mut cached = Cached::new(z);
    let zu = cached.get(u);
    let sum = match cfg.method {
        SMethod::MeanSampling => sum_mean(g, &mut cached, u, cfg, rng),
        SMethod::Collision => sum_collision(g, &mut cached, u, cfg, rng),
    };
    Ok(((1.0 + g.weighted_degree(u)) * zu - sum).clamp(0.0, 1.0))
}
