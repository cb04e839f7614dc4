//! Sampling estimators for the network measures.
//!
//! Every measure except disagreement is a sum over vertices (or ordered
//! vertex pairs), so it is estimated as `n/C` times a sum over `C` uniform
//! samples. With an innate-opinion oracle the expressed opinions of the
//! sampled vertices come from random walks; with an expressed-opinion oracle
//! the innate opinions come from the local inversion in [`crate::innate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::MeasureReport;
use crate::graph::{Graph, VertexId};
use crate::innate::{self, SEstimatorConfig};
use crate::opinions::{Expressed, Innate, OpinionSource, Oracle};
use crate::rng::RandomStream;
use crate::walk::{estimate_z_batch, WalkConfig};

/// `ceil(ε^{-2} ln(1/δ))`.
pub fn sum_sample_count(epsilon: f64, delta: f64) -> usize {
    ((1.0 / delta).ln() / (epsilon * epsilon)).ceil().max(1.0) as usize
}

/// `(n / C) Σ x_i` over `C` indices drawn uniformly with replacement.
pub fn estimate_sum(accessor: impl Fn(usize) -> f64, n: usize, count: usize, rng: &mut RandomStream) -> f64 {
    let total: f64 = (0..count).map(|_| accessor(rng.below(n))).sum();
    n as f64 / count as f64 * total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    /// `count` uniform vertices and `count` uniform ordered pairs.
    Random { count: usize },
    /// Every vertex once and every ordered pair once.
    Exhaustive,
}

/// How walk parameters are chosen on the innate-oracle path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WalkPolicy {
    /// The same walk count and timeout for every quantity.
    Fixed(WalkConfig),
    /// Derived from a condition-number bound at each quantity's inner error.
    Derived { kappa_bar: f64 },
}

/// How disagreement is obtained from the other estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DisagreementRule {
    /// `D = DC − C`.
    Difference,
    /// `D = (‖s‖² − I − C) / 2`.
    Conservation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub sampling: Sampling,
    pub walk: WalkPolicy,
    pub s_cfg: SEstimatorConfig,
    /// `None` picks the rule that matches the oracle: difference for the
    /// innate oracle, conservation for the expressed one.
    pub disagreement: Option<DisagreementRule>,
    pub seed: u64,
}

impl MeasureEstimatorConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        MeasureEstimatorConfig {
            epsilon,
            delta,
            sampling: Sampling::Random {
                count: sum_sample_count(epsilon, delta),
            },
            walk: WalkPolicy::Fixed(WalkConfig::default()),
            s_cfg: SEstimatorConfig::default(),
            disagreement: None,
            seed: 0,
        }
    }

    pub fn with_samples(mut self, count: usize) -> Self {
        self.sampling = Sampling::Random { count };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::validation("epsilon must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation("delta must lie in (0, 1)"));
        }
        if let Sampling::Random { count: 0 } = self.sampling {
            return Err(Error::validation("sample count must be positive"));
        }
        Ok(())
    }
}

/// A measure report together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub report: MeasureReport,
    /// Vertex samples `C` (equal to `n` when exhaustive).
    pub samples: usize,
    /// Innate-opinion estimates produced on the expressed-oracle path.
    pub innate_estimates: Vec<(VertexId, f64)>,
    /// Opinion-sampler restarts on the expressed-oracle path.
    pub restarts: usize,
}

/// Expressed-opinion estimates for a batch of vertices.
pub trait ZEstimator: Sync {
    /// `stream` separates independent batches; `inner_eps` is the accuracy
    /// the caller needs.
    fn estimate(&self, targets: &[VertexId], inner_eps: f64, stream: u64) -> Vec<f64>;
}

/// Random-walk estimates against an innate-opinion source.
pub struct WalkZ<'a, S: ?Sized> {
    pub graph: &'a Graph,
    pub s: &'a S,
    pub policy: WalkPolicy,
    pub seed: u64,
}

impl<S: OpinionSource + ?Sized> ZEstimator for WalkZ<'_, S> {
    fn estimate(&self, targets: &[VertexId], inner_eps: f64, stream: u64) -> Vec<f64> {
        let mut cfg = match self.policy {
            WalkPolicy::Fixed(cfg) => cfg,
            WalkPolicy::Derived { kappa_bar } => WalkConfig::from_condition_number(
                kappa_bar,
                inner_eps,
                self.graph.n(),
                self.graph.max_weighted_degree(),
            ),
        };
        cfg.seed = RandomStream::derive(self.seed, &[stream, cfg.seed]).bits();
        estimate_z_batch(self.graph, self.s, targets, &cfg)
    }
}

/// Exact expressed opinions, for checking the sampling machinery alone.
pub struct ExactZ<'a, Z: ?Sized>(pub &'a Z);

impl<Z: OpinionSource + ?Sized> ZEstimator for ExactZ<'_, Z> {
    fn estimate(&self, targets: &[VertexId], _inner_eps: f64, _stream: u64) -> Vec<f64> {
        targets.iter().map(|&v| self.0.opinion(v)).collect()
    }
}

fn vertex_sample(g: &Graph, sampling: Sampling, rng: &mut RandomStream) -> Vec<VertexId> {
    match sampling {
        Sampling::Random { count } => (0..count).map(|_| g.sample_vertex(rng)).collect(),
        Sampling::Exhaustive => (0..g.n()).map(VertexId::new).collect(),
    }
}

/// `P` from values at sampled vertices, or from all pairs when exhaustive.
fn polarization(n: usize, sampling: Sampling, firsts: &[f64], seconds: &[f64], all: &[f64]) -> f64 {
    match sampling {
        Sampling::Random { count } => {
            let sq: f64 = firsts.iter().zip(seconds).map(|(a, b)| (a - b) * (a - b)).sum();
            n as f64 / (2.0 * count as f64) * sq
        }
        Sampling::Exhaustive => {
            let mean = all.iter().sum::<f64>() / all.len() as f64;
            all.iter().map(|x| (x - mean) * (x - mean)).sum()
        }
    }
}

const STREAM_VERTICES: u64 = 1;
const STREAM_PAIRS_A: u64 = 2;
const STREAM_PAIRS_B: u64 = 3;
const STREAM_SAMPLER: u64 = 4;

/// All measures from an innate-opinion oracle, with expressed opinions
/// from lazy random walks.
pub fn estimate_measures_given_s(
    g: &Graph,
    s: &Oracle<'_, Innate>,
    cfg: &MeasureEstimatorConfig,
) -> Result<MeasureEstimate> {
    let z = WalkZ {
        graph: g,
        s,
        policy: cfg.walk,
        seed: cfg.seed,
    };
    estimate_measures_given_s_with(g, s, &z, cfg)
}

/// As [`estimate_measures_given_s`] with any source of expressed-opinion
/// estimates.
pub fn estimate_measures_given_s_with<S, Z>(
    g: &Graph,
    s: &S,
    z: &Z,
    cfg: &MeasureEstimatorConfig,
) -> Result<MeasureEstimate>
where
    S: OpinionSource + ?Sized,
    Z: ZEstimator + ?Sized,
{
    cfg.validate()?;
    let n = g.n();
    let eps = cfg.epsilon;
    let mut rng = RandomStream::derive(cfg.seed, &[STREAM_VERTICES]);
    let verts = vertex_sample(g, cfg.sampling, &mut rng);
    let c = verts.len();
    let scale = n as f64 / c as f64;

    let sv: Vec<f64> = verts.iter().map(|&v| s.opinion(v)).collect();
    let zv = z.estimate(&verts, eps / 6.0, STREAM_VERTICES);

    let sum = scale * sv.iter().sum::<f64>();
    let s_norm_sq = scale * sv.iter().map(|x| x * x).sum::<f64>();
    let controversy = scale * zv.iter().map(|x| x * x).sum::<f64>();
    let internal_conflict = scale * sv.iter().zip(&zv).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let dc = scale * sv.iter().zip(&zv).map(|(a, b)| a * b).sum::<f64>();

    let (za, zb) = match cfg.sampling {
        Sampling::Random { count } => {
            let a: Vec<_> = (0..count).map(|_| g.sample_vertex(&mut rng)).collect();
            let b: Vec<_> = (0..count).map(|_| g.sample_vertex(&mut rng)).collect();
            (
                z.estimate(&a, eps / 18.0, STREAM_PAIRS_A),
                z.estimate(&b, eps / 18.0, STREAM_PAIRS_B),
            )
        }
        Sampling::Exhaustive => (Vec::new(), Vec::new()),
    };
    let polarization = polarization(n, cfg.sampling, &za, &zb, &zv);

    let disagreement = match cfg.disagreement.unwrap_or(DisagreementRule::Difference) {
        DisagreementRule::Difference => dc - controversy,
        DisagreementRule::Conservation => (s_norm_sq - internal_conflict - controversy) / 2.0,
    };
    Ok(MeasureEstimate {
        report: MeasureReport {
            sum,
            mean: sum / n as f64,
            polarization,
            disagreement,
            internal_conflict,
            controversy,
            disagreement_controversy: dc,
            s_norm_sq,
        },
        samples: c,
        innate_estimates: Vec::new(),
        restarts: 0,
    })
}

/// Wraps a source and counts lookups locally.
struct Counting<'a, Z: ?Sized> {
    inner: &'a Z,
    count: std::sync::atomic::AtomicU64,
}

impl<Z: OpinionSource + ?Sized> OpinionSource for Counting<'_, Z> {
    fn opinion(&self, u: VertexId) -> f64 {
        self.count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.opinion(u)
    }
}

/// One sampled vertex: `(u, s̃_u, z_u)`.
pub type SampledOpinion = (VertexId, f64, f64);

/// Outcome of [`opinion_sampler`].
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerOutput {
    pub samples: Vec<SampledOpinion>,
    pub restarts: usize,
    /// Lookups across all attempts.
    pub queries: u64,
}

/// Lookup budget `T = C (d̄ + 1)` of one sampler attempt; attempts are
/// abandoned after `10 T`.
pub fn sampler_budget(g: &Graph, count: usize) -> u64 {
    (count as f64 * (g.mean_degree() + 1.0)).ceil() as u64
}

/// Attempts allowed: `ceil(log10(2/δ))`.
pub fn sampler_attempts(delta: f64) -> usize {
    ((2.0 / delta).log10().ceil() as usize).max(1)
}

/// `count` uniform vertices with innate-opinion estimates, each within
/// `eps` except with probability `δ / (2 count)`. Attempts that exceed
/// ten times the expected lookup budget are restarted.
pub fn opinion_sampler<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    count: usize,
    eps: f64,
    delta: f64,
    base: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> Result<SamplerOutput> {
    sampler(g, z, None, count, eps, delta, base, rng)
}

#[allow(clippy::too_many_arguments)]
fn sampler<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    fixed: Option<&[VertexId]>,
    count: usize,
    eps: f64,
    delta: f64,
    base: &SEstimatorConfig,
    rng: &mut RandomStream,
) -> Result<SamplerOutput> {
    if count == 0 {
        return Err(Error::validation("sample count must be positive"));
    }
    let scfg = SEstimatorConfig {
        epsilon: eps,
        ..*base
    }
    .with_confidence(delta / (2.0 * count as f64));
    let limit = 10 * sampler_budget(g, count);
    let attempts = sampler_attempts(delta);
    let mut total = 0;
    for attempt in 0..attempts {
        let mut arng = rng.split();
        let counter = Counting {
            inner: z,
            count: 0.into(),
        };
        let mut out = Vec::with_capacity(count);
        let mut over = false;
        for i in 0..count {
            let u = match fixed {
                Some(v) => v[i],
                None => g.sample_vertex(&mut arng),
            };
            let zu = counter.opinion(u);
            let su = innate::estimate_s(g, &counter, u, &scfg, &mut arng)?;
            out.push((u, su, zu));
            if counter.count.load(std::sync::atomic::Ordering::Relaxed) > limit {
                over = true;
                break;
            }
        }
        total += counter.count.into_inner();
        if !over {
            return Ok(SamplerOutput {
                samples: out,
                restarts: attempt,
                queries: total,
            });
        }
    }
    Err(Error::BudgetExhausted { attempts })
}

/// All measures from an expressed-opinion oracle. `S`, `C` and `P` come
/// straight from lookups; `‖s‖²`, `I` and `DC` from the opinion sampler.
pub fn estimate_measures_given_z(
    g: &Graph,
    z: &Oracle<'_, Expressed>,
    cfg: &MeasureEstimatorConfig,
) -> Result<MeasureEstimate> {
    estimate_measures_given_z_with(g, z, cfg)
}

/// As [`estimate_measures_given_z`] over any opinion source.
pub fn estimate_measures_given_z_with<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    cfg: &MeasureEstimatorConfig,
) -> Result<MeasureEstimate> {
    cfg.validate()?;
    let n = g.n();
    let mut rng = RandomStream::derive(cfg.seed, &[STREAM_VERTICES]);
    let verts = vertex_sample(g, cfg.sampling, &mut rng);
    let c = verts.len();
    let scale = n as f64 / c as f64;

    let zv: Vec<f64> = verts.iter().map(|&v| z.opinion(v)).collect();
    let sum = scale * zv.iter().sum::<f64>();
    let controversy = scale * zv.iter().map(|x| x * x).sum::<f64>();
    let (za, zb): (Vec<f64>, Vec<f64>) = match cfg.sampling {
        Sampling::Random { count } => (0..count)
            .map(|_| {
                let a = g.sample_vertex(&mut rng);
                let b = g.sample_vertex(&mut rng);
                (z.opinion(a), z.opinion(b))
            })
            .unzip(),
        Sampling::Exhaustive => (Vec::new(), Vec::new()),
    };
    let polarization = polarization(n, cfg.sampling, &za, &zb, &zv);

    let mut srng = RandomStream::derive(cfg.seed, &[STREAM_SAMPLER]);
    let fixed = match cfg.sampling {
        Sampling::Exhaustive => Some(verts.as_slice()),
        Sampling::Random { .. } => None,
    };
    let out = sampler(g, z, fixed, c, cfg.epsilon / 6.0, cfg.delta / 2.0, &cfg.s_cfg, &mut srng)?;
    let s_norm_sq = scale * out.samples.iter().map(|(_, s, _)| s * s).sum::<f64>();
    let internal_conflict = scale * out.samples.iter().map(|(_, s, z)| (s - z) * (s - z)).sum::<f64>();
    let dc = scale * out.samples.iter().map(|(_, s, z)| s * z).sum::<f64>();

    let disagreement = match cfg.disagreement.unwrap_or(DisagreementRule::Conservation) {
        DisagreementRule::Difference => dc - controversy,
        DisagreementRule::Conservation => (s_norm_sq - internal_conflict - controversy) / 2.0,
    };
    Ok(MeasureEstimate {
        report: MeasureReport {
            sum,
            mean: sum / n as f64,
            polarization,
            disagreement,
            internal_conflict,
            controversy,
            disagreement_controversy: dc,
            s_norm_sq,
        },
        samples: c,
        innate_estimates: out.samples.iter().map(|&(u, s, _)| (u, s)).collect(),
        restarts: out.restarts,
    })
}

/// Disagreement as `m/N` times the sum of squared gaps over `N` uniform
/// edges. Unweighted graphs only.
pub fn estimate_disagreement_edges<Z: OpinionSource + ?Sized>(
    g: &Graph,
    z: &Z,
    num_samples: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    if !g.is_unit_weight() {
        return Err(Error::Unsupported("edge sampling needs an unweighted graph".into()));
    }
    if num_samples == 0 {
        return Err(Error::validation("sample count must be positive"));
    }
    let mut total = 0.0;
    for _ in 0..num_samples {
        let Some((u, v)) = g.sample_edge(rng) else {
            return Ok(0.0);
        };
        let d = z.opinion(u) - z.opinion(v);
        total += d * d;
    }
    Ok(g.m() as f64 / num_samples as f64 * total)
}
