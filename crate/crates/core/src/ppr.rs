//! Deterministic estimation of `z*_u` on unweighted regular graphs through
//! personalized PageRank push.
//!
//! On a `d`-regular graph with `α = 1/(d+1)`, the row of `(I+L)^{-1}` at `u`
//! equals `pr'(α, 1_u)`, the PageRank vector of the non-lazy walk `D^{-1}A`
//! with teleport `α`. Repeated local push computes it up to a residual whose
//! ℓ1 norm bounds the error.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::opinions::OpinionSource;

/// Largest graph handled by [`ppr_dense`].
pub const PPR_DENSE_LIMIT: usize = 5_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PprParams {
    pub alpha: f64,
    pub eps_push: f64,
}

/// Approximation `p` and residual `r`; entries are strictly positive.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMass {
    pub p: BTreeMap<VertexId, f64>,
    pub r: BTreeMap<VertexId, f64>,
}

impl SparseMass {
    /// `p = 0`, `r = 1_v`.
    pub fn unit(v: VertexId) -> Self {
        SparseMass {
            p: BTreeMap::new(),
            r: BTreeMap::from([(v, 1.0)]),
        }
    }

    pub fn p_norm(&self) -> f64 {
        self.p.values().sum()
    }

    pub fn r_norm(&self) -> f64 {
        self.r.values().sum()
    }

    /// `‖p‖₁ + ‖r‖₁`.
    pub fn total_mass(&self) -> f64 {
        self.p_norm() + self.r_norm()
    }

    pub fn p_dense(&self, n: usize) -> Vec<f64> {
        to_dense(&self.p, n)
    }

    pub fn r_dense(&self, n: usize) -> Vec<f64> {
        to_dense(&self.r, n)
    }
}

fn to_dense(m: &BTreeMap<VertexId, f64>, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (k, x) in m {
        v[k.index()] = *x;
    }
    v
}

/// Moves `α·r(u)` into `p(u)` and spreads the rest of `r(u)` over the
/// neighbors of `u` in proportion to edge weight; `r(u)` becomes 0.
pub fn push(g: &Graph, u: VertexId, alpha: f64, state: &mut SparseMass) {
    let ru = state.r.remove(&u).unwrap_or(0.0);
    debug_assert!(ru > 0.0, "push at a vertex without residual");
    if ru == 0.0 {
        return;
    }
    *state.p.entry(u).or_insert(0.0) += alpha * ru;
    let spread = (1.0 - alpha) * ru;
    if spread > 0.0 {
        let wu = g.weighted_degree(u);
        for (v, w) in g.neighbors(u) {
            *state.r.entry(v).or_insert(0.0) += spread * w / wu;
        }
    }
}

fn violates(g: &Graph, u: VertexId, ru: f64, eps: f64) -> bool {
    let d = g.unweighted_degree(u) as f64;
    ru > 0.0 && (ru == 1.0 || ru >= eps * d)
}

/// Pushes from `1_v` until every residual satisfies `r(u)/d_u < eps_push`.
/// Violating vertices are processed first in, first out.
pub fn approximate_ppr(g: &Graph, v: VertexId, params: PprParams) -> SparseMass {
    let mut state = SparseMass::unit(v);
    let mut queue = VecDeque::from([v]);
    let mut queued = HashSet::from([v]);
    while let Some(u) = queue.pop_front() {
        queued.remove(&u);
        let ru = state.r.get(&u).copied().unwrap_or(0.0);
        if !violates(g, u, ru, params.eps_push) {
            continue;
        }
        push(g, u, params.alpha, &mut state);
        for (w, _) in g.neighbors(u) {
            let rw = state.r.get(&w).copied().unwrap_or(0.0);
            if violates(g, w, rw, params.eps_push) && !queued.contains(&w) {
                queued.insert(w);
                queue.push_back(w);
            }
        }
    }
    state
}

/// Dense `pr'(α, s)`: the solution of `(I − (1−α) A D^{-1}) x = α s`, which
/// is the fixed point of the push dynamics started from mass `s`.
pub fn ppr_dense(g: &Graph, alpha: f64, s: &[f64]) -> Result<Vec<f64>> {
    let n = g.n();
    if n > PPR_DENSE_LIMIT {
        return Err(Error::Capacity {
            what: "dense PageRank",
            size: n,
            limit: PPR_DENSE_LIMIT,
        });
    }
    if s.len() != n {
        return Err(Error::validation("mass vector length differs from vertex count"));
    }
    let mut m = DMatrix::<f64>::identity(n, n);
    for u in 0..n {
        let u_id = VertexId::new(u);
        let wu = g.weighted_degree(u_id);
        if wu == 0.0 {
            return Err(Error::validation(format!("vertex {u} is isolated")));
        }
        for (v, w) in g.neighbors(u_id) {
            m[(v.index(), u)] -= (1.0 - alpha) * w / wu;
        }
    }
    let rhs = DVector::from_iterator(n, s.iter().map(|x| alpha * x));
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::validation("PageRank system is singular"))?;
    Ok(x.iter().copied().collect())
}

/// Outcome of [`estimate_z_regular`].
#[derive(Clone, Debug, PartialEq)]
pub struct PprEstimate {
    pub estimate: f64,
    /// Oracle lookups, one per vertex in the support of `p`.
    pub queries: usize,
    pub support_size: usize,
    pub outer_iterations: usize,
}

/// Degree `d` of an unweighted regular graph.
pub fn check_regular(g: &Graph) -> Result<usize> {
    g.unit_regular_degree()
        .map_err(|(vertex, reason)| Error::RegularityViolation { vertex, reason })
}

/// Estimate of `z*_u` with additive error at most `eps_total`.
pub fn estimate_z_regular<S: OpinionSource + ?Sized>(
    g: &Graph,
    s: &S,
    u: VertexId,
    eps_total: f64,
) -> Result<PprEstimate> {
    estimate_z_regular_traced(g, s, u, eps_total, |_| {})
}

/// As [`estimate_z_regular`], calling `observe` with the state after every
/// outer iteration.
pub fn estimate_z_regular_traced<S: OpinionSource + ?Sized>(
    g: &Graph,
    s: &S,
    u: VertexId,
    eps_total: f64,
    mut observe: impl FnMut(&SparseMass),
) -> Result<PprEstimate> {
    if !(eps_total > 0.0 && eps_total < 1.0) {
        return Err(Error::validation("epsilon must lie in (0, 1)"));
    }
    g.check_vertex(u)?;
    let d = check_regular(g)?;
    let params = PprParams {
        alpha: 1.0 / (d as f64 + 1.0),
        eps_push: eps_total,
    };
    let mut cache: HashMap<VertexId, SparseMass> = HashMap::new();
    let mut state = SparseMass::unit(u);
    let mut outer = 0;
    while state.r_norm() > eps_total {
        let mut next_r: BTreeMap<VertexId, f64> = BTreeMap::new();
        let residual = std::mem::take(&mut state.r);
        for (&i, &ri) in &residual {
            let sub = cache.entry(i).or_insert_with(|| approximate_ppr(g, i, params));
            for (&v, &x) in &sub.p {
                *state.p.entry(v).or_insert(0.0) += ri * x;
            }
            for (&v, &x) in &sub.r {
                *next_r.entry(v).or_insert(0.0) += ri * x;
            }
        }
        state.r = next_r;
        outer += 1;
        observe(&state);
    }
    let estimate = state.p.iter().map(|(&v, &x)| x * s.opinion(v)).sum::<f64>();
    Ok(PprEstimate {
        estimate,
        queries: state.p.len(),
        support_size: state.p.len(),
        outer_iterations: outer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_dense;
    use crate::opinions::{Innate, OpinionVector, Oracle};
    use crate::synth;

    #[test]
    fn push_formula() {
        let g = synth::path(3);
        let mut st = SparseMass::unit(VertexId(1));
        push(&g, VertexId(1), 0.25, &mut st);
        assert_eq!(st.p[&VertexId(1)], 0.25);
        assert!(!st.r.contains_key(&VertexId(1)));
        assert_eq!(st.r[&VertexId(0)], 0.375);
        assert_eq!(st.r[&VertexId(2)], 0.375);
        assert!((st.total_mass() - 1.0).abs() < 1e-15);
        push(&g, VertexId(0), 0.25, &mut st);
        assert!((st.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn push_alpha_one() {
        let g = synth::path(3);
        let mut st = SparseMass::unit(VertexId(1));
        push(&g, VertexId(1), 1.0, &mut st);
        assert_eq!(st.p[&VertexId(1)], 1.0);
        assert!(st.r.is_empty());
    }

    #[test]
    fn large_threshold_pushes_once() {
        let g = synth::complete(4);
        let st = approximate_ppr(&g, VertexId(0), PprParams { alpha: 0.25, eps_push: 2.0 });
        assert_eq!(st.p.len(), 1);
        assert_eq!(st.r.len(), 3);
    }

    #[test]
    fn decomposition_on_k4() {
        let g = synth::complete(4);
        let alpha = 0.25;
        let st = approximate_ppr(&g, VertexId(0), PprParams { alpha, eps_push: 1e-4 });
        let lhs_r = ppr_dense(&g, alpha, &st.r_dense(4)).unwrap();
        let mut e0 = vec![0.0; 4];
        e0[0] = 1.0;
        let full = ppr_dense(&g, alpha, &e0).unwrap();
        for v in 0..4 {
            assert!((st.p_dense(4)[v] + lhs_r[v] - full[v]).abs() < 1e-8);
        }
    }

    #[test]
    fn support_bound() {
        let g = synth::random_regular(200, 4, &mut crate::rng::RandomStream::new(3)).unwrap();
        for eps in [0.1, 0.03, 0.01] {
            let params = PprParams { alpha: 0.2, eps_push: eps };
            let st = approximate_ppr(&g, VertexId(5), params);
            let touched = st.p.keys().chain(st.r.keys()).collect::<std::collections::BTreeSet<_>>();
            assert!(touched.len() as f64 <= 1.0 / (eps * params.alpha));
        }
    }

    #[test]
    fn dense_reference_values() {
        let g = synth::path(2);
        let x = ppr_dense(&g, 0.5, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-12 && (x[1] - 1.0 / 3.0).abs() < 1e-12);
        let y = ppr_dense(&g, 1.0, &[0.3, 0.7]).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-12 && (y[1] - 0.7).abs() < 1e-12);
        let k4 = synth::complete(4);
        let u = ppr_dense(&k4, 0.3, &[0.25; 4]).unwrap();
        assert!(u.iter().all(|x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn regular_estimate_on_k4() {
        let g = synth::complete(4);
        let s = OpinionVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let z = solve_dense(&g, &s).unwrap();
        let o: Oracle<Innate> = Oracle::new(&s);
        let est = estimate_z_regular(&g, &o, VertexId(0), 0.05).unwrap();
        assert!((est.estimate - z.get(VertexId(0))).abs() <= 0.05);
        assert_eq!(o.query_count() as usize, est.queries);
    }

    #[test]
    fn regular_consensus() {
        let g = synth::random_regular(50, 3, &mut crate::rng::RandomStream::new(1)).unwrap();
        let s = OpinionVector::constant(50, 0.6).unwrap();
        let est = estimate_z_regular(&g, &s, VertexId(7), 0.1).unwrap();
        assert!(est.estimate <= 0.6 + 1e-12 && est.estimate >= 0.6 * 0.9);
    }

    #[test]
    fn non_regular_rejected() {
        let s = OpinionVector::constant(3, 0.5).unwrap();
        match estimate_z_regular(&synth::path(3), &s, VertexId(0), 0.1) {
            Err(Error::RegularityViolation { vertex, .. }) => assert_eq!(vertex, VertexId(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let g = synth::random_regular(300, 3, &mut crate::rng::RandomStream::new(2)).unwrap();
        let s = crate::opinions::gen_uniform(300, &mut crate::rng::RandomStream::new(9));
        let a = estimate_z_regular(&g, &s, VertexId(1), 0.05).unwrap();
        let b = estimate_z_regular(&g, &s, VertexId(1), 0.05).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a, b);
    }
}
