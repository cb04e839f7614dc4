//! Opinion vectors, synthetic generators and query-counted oracles.

use std::io::{BufRead, BufReader, Read, Write};
use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::rng::RandomStream;

/// Per-vertex opinions, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::validation(format!("opinion {v} at index {i} is outside [0, 1]")));
        }
        Ok(OpinionVector(values))
    }

    /// Constant vector `c·1`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Skips the range check; callers guarantee the invariant.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        OpinionVector(values)
    }

    #[inline]
    pub fn get(&self, u: VertexId) -> f64 {
        self.0[u.index()]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// i.i.d. uniform opinions.
pub fn gen_uniform(n: usize, rng: &mut RandomStream) -> OpinionVector {
    OpinionVector((0..n).map(|_| rng.unit()).collect())
}

/// i.i.d. Exp(1) draws, min-max rescaled so the extremes are exactly 0 and 1.
pub fn gen_exponential(n: usize, rng: &mut RandomStream) -> Result<OpinionVector> {
    if n < 2 {
        return Err(Error::validation("exponential opinions need at least two vertices"));
    }
    loop {
        let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        if let Some(v) = min_max_rescale(raw) {
            return Ok(v);
        }
    }
}

/// Power iteration on the Laplacian with the all-ones direction projected
/// out after every step, then min-max rescaled.
pub fn gen_eigenvector(g: &Graph, iters: usize) -> Result<OpinionVector> {
    if iters == 0 {
        return Err(Error::validation("power iteration needs at least one step"));
    }
    let raw = laplacian_power(g, iters, 0)
        .or_else(|| laplacian_power(g, iters, 1))
        .ok_or_else(|| Error::validation("power iteration collapsed to the zero vector"))?;
    min_max_rescale(raw).ok_or_else(|| Error::validation("eigenvector is constant"))
}

/// Unrescaled deflated power iterate; `None` if it vanishes.
pub fn laplacian_power(g: &Graph, iters: usize, attempt: u64) -> Option<Vec<f64>> {
    let n = g.n();
    let mut rng = RandomStream::derive(0xe16e, &[attempt]);
    let mut x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64 + rng.unit()).collect();
    let mut ax = vec![0.0; n];
    if !project_and_normalize(&mut x) {
        return None;
    }
    for _ in 0..iters {
        g.adjacency_mul(&x, &mut ax);
        for u in 0..n {
            x[u] = g.weighted_degree(VertexId::new(u)) * x[u] - ax[u];
        }
        if !project_and_normalize(&mut x) {
            return None;
        }
    }
    Some(x)
}

fn project_and_normalize(x: &mut [f64]) -> bool {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 1e-300) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

fn min_max_rescale(v: Vec<f64>) -> Option<OpinionVector> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    Some(OpinionVector(
        v.into_iter().map(|x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).collect(),
    ))
}

/// Reads one opinion per line; blank lines are ignored.
pub fn read_opinions<R: Read>(reader: R, expected_n: usize) -> Result<OpinionVector> {
    let mut values = Vec::with_capacity(expected_n);
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("invalid opinion {t:?}"),
        })?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("opinion {v} is outside [0, 1]"),
            });
        }
        values.push(v);
    }
    if values.len() != expected_n {
        return Err(Error::validation(format!(
            "expected {expected_n} opinions, found {}",
            values.len()
        )));
    }
    Ok(OpinionVector(values))
}

/// Writes one opinion per line in shortest round-trip form.
pub fn write_opinions<W: Write>(x: &OpinionVector, mut out: W) -> Result<()> {
    for v in x.as_slice() {
        writeln!(out, "{v:?}")?;
    }
    out.flush()?;
    Ok(())
}

/// Marker for an oracle over innate opinions `s`.
#[derive(Debug)]
pub enum Innate {}
/// Marker for an oracle over equilibrium expressed opinions `z*`.
#[derive(Debug)]
pub enum Expressed {}

/// Query-counted read access to an opinion vector. The counter is atomic so
/// one oracle can be shared by parallel estimators.
#[derive(Debug)]
pub struct Oracle<'a, K> {
    values: &'a OpinionVector,
    count: AtomicU64,
    _kind: PhantomData<fn() -> K>,
}

impl<'a, K> Oracle<'a, K> {
    pub fn new(values: &'a OpinionVector) -> Self {
        Oracle {
            values,
            count: AtomicU64::new(0),
            _kind: PhantomData,
        }
    }

    #[inline]
    pub fn query(&self, u: VertexId) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.values.get(u)
    }

    pub fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Anything that yields an opinion per vertex: a counted oracle, or a plain
/// vector when an estimator runs against exact values.
pub trait OpinionSource: Sync {
    fn opinion(&self, u: VertexId) -> f64;
}

impl OpinionSource for OpinionVector {
    #[inline]
    fn opinion(&self, u: VertexId) -> f64 {
        self.get(u)
    }
}

impl<K> OpinionSource for Oracle<'_, K> {
    #[inline]
    fn opinion(&self, u: VertexId) -> f64 {
        self.query(u)
    }
}
