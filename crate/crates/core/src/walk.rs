//! Estimating a single expressed opinion with lazy random walks.
//!
//! A lazy walk with timeout at `v` stays with probability 1/2, moves to
//! neighbor `w` with probability `w_vw / (2(1+w_v))` and otherwise stops.
//! Averaging `s(pos)/(1+w(pos))` over the positions of many such walks and
//! halving gives a truncated Neumann series for `((I+L)^{-1} s)_u`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NeighborMode, VertexId};
use crate::opinions::OpinionSource;
use crate::rng::RandomStream;

/// What each visited opinion is divided by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Denominator {
    /// `1 + w_v`, the diagonal of `I + L`.
    DiagIPlusL,
    /// `w_v` (1 for isolated vertices).
    WeightedDegree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    /// Number of walks ℓ.
    pub num_walks: usize,
    /// Timeout r.
    pub max_steps: usize,
    pub seed: u64,
    pub denominator: Denominator,
    /// Count the starting position as step 0.
    pub include_step_zero: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            num_walks: 4000,
            max_steps: 600,
            seed: 0,
            denominator: Denominator::DiagIPlusL,
            include_step_zero: true,
        }
    }
}

impl WalkConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Walk count and timeout derived from a condition-number bound `κ̄`, a
    /// target error and the graph's size and maximum weighted degree.
    pub fn from_condition_number(kappa_bar: f64, epsilon: f64, n: usize, max_w: f64) -> Self {
        let r = (kappa_bar * (n as f64 * kappa_bar * max_w.max(1.0) / epsilon).ln())
            .ceil()
            .max(1.0);
        let l = ((2.0 * r / epsilon).powi(2) * r.ln().max(1.0)).ceil();
        WalkConfig {
            num_walks: l as usize,
            max_steps: r as usize,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Stay,
    Move(VertexId),
    Terminate,
}

/// One step of the lazy walk with timeout.
pub fn lazy_walk_step(g: &Graph, v: VertexId, rng: &mut RandomStream) -> StepOutcome {
    let x = rng.unit();
    if x < 0.5 {
        return StepOutcome::Stay;
    }
    // Conditioned on leaving, stop with probability 1/(1+w_v).
    let y = 2.0 * (x - 0.5);
    if y * (1.0 + g.weighted_degree(v)) < 1.0 {
        return StepOutcome::Terminate;
    }
    match g.sample_neighbor_edge(v, NeighborMode::Weighted, rng) {
        Some((w, _)) => StepOutcome::Move(w),
        None => StepOutcome::Terminate,
    }
}

/// Steps taken before termination, capped at `max_steps`.
pub fn walk_length(g: &Graph, u: VertexId, max_steps: usize, rng: &mut RandomStream) -> usize {
    let mut pos = u;
    for t in 0..max_steps {
        match lazy_walk_step(g, pos, rng) {
            StepOutcome::Stay => {}
            StepOutcome::Move(w) => pos = w,
            StepOutcome::Terminate => return t,
        }
    }
    max_steps
}

#[inline]
fn denominator(g: &Graph, v: VertexId, mode: Denominator) -> f64 {
    let w = g.weighted_degree(v);
    match mode {
        Denominator::DiagIPlusL => 1.0 + w,
        Denominator::WeightedDegree if w > 0.0 => w,
        Denominator::WeightedDegree => 1.0,
    }
}

/// Sum over live steps of one walk. Runs of stays are drawn in one go: the
/// number of consecutive stays is the count of trailing zero bits of a
/// uniform word, which has the same geometric law as repeated coin flips.
fn walk_sum<S: OpinionSource + ?Sized>(
    g: &Graph,
    s: &S,
    u: VertexId,
    cfg: &WalkConfig,
    rng: &mut RandomStream,
) -> f64 {
    let first = if cfg.include_step_zero { 0 } else { 1 };
    let r = cfg.max_steps;
    let mut pos = u;
    let mut t = 0usize;
    let mut val = s.opinion(pos) / denominator(g, pos, cfg.denominator);
    let mut total = 0.0;
    loop {
        let stays = rng.bits().trailing_zeros() as usize;
        let end = (t + stays).min(r);
        let lo = t.max(first);
        if end >= lo {
            total += val * (end - lo + 1) as f64;
        }
        if t + stays >= r {
            return total;
        }
        let w = g.weighted_degree(pos);
        if rng.unit() * (1.0 + w) < 1.0 {
            return total;
        }
        match g.sample_neighbor_edge(pos, NeighborMode::Weighted, rng) {
            Some((next, _)) => pos = next,
            None => return total,
        }
        t += stays + 1;
        val = s.opinion(pos) / denominator(g, pos, cfg.denominator);
    }
}

/// Estimate of `z*_u` as the `target_index`-th target of a batch.
pub fn estimate_z_indexed<S: OpinionSource + ?Sized>(
    g: &Graph,
    s: &S,
    u: VertexId,
    target_index: u64,
    cfg: &WalkConfig,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..cfg.num_walks {
        let mut rng = RandomStream::derive(cfg.seed, &[target_index, i as u64]);
        acc += walk_sum(g, s, u, cfg, &mut rng);
    }
    (0.5 * acc / cfg.num_walks as f64).clamp(0.0, 1.0)
}

/// Estimate of `z*_u`; identical to the first entry of a batch.
pub fn estimate_z<S: OpinionSource + ?Sized>(g: &Graph, s: &S, u: VertexId, cfg: &WalkConfig) -> f64 {
    estimate_z_indexed(g, s, u, 0, cfg)
}

/// Estimates for many targets in parallel. Target `i` uses the same random
/// streams as a sequential `estimate_z_indexed(.., i, ..)` call, so the
/// output does not depend on the thread count.
pub fn estimate_z_batch<S: OpinionSource + ?Sized>(
    g: &Graph,
    s: &S,
    targets: &[VertexId],
    cfg: &WalkConfig,
) -> Vec<f64> {
    targets
        .par_iter()
        .enumerate()
        .map(|(i, &u)| estimate_z_indexed(g, s, u, i as u64, cfg))
        .collect()
}
