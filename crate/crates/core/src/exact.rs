//! Ground truth: equilibrium solvers and exact measures.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::opinions::OpinionVector;

/// Largest system solved by dense factorization.
pub const DENSE_LIMIT: usize = 20_000;

/// The network measures plus `‖s‖²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub sum: f64,
    pub mean: f64,
    pub polarization: f64,
    pub disagreement: f64,
    pub internal_conflict: f64,
    pub controversy: f64,
    pub disagreement_controversy: f64,
    pub s_norm_sq: f64,
}

impl MeasureReport {
    /// `(name, value)` pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("sum", self.sum),
            ("mean", self.mean),
            ("polarization", self.polarization),
            ("disagreement", self.disagreement),
            ("internal_conflict", self.internal_conflict),
            ("controversy", self.controversy),
            ("disagreement_controversy", self.disagreement_controversy),
            ("s_norm_sq", self.s_norm_sq),
        ]
    }
}

fn check_len(g: &Graph, v: &OpinionVector, what: &str) -> Result<()> {
    if v.len() != g.n() {
        return Err(Error::validation(format!(
            "{what} has {} entries but the graph has {} vertices",
            v.len(),
            g.n()
        )));
    }
    Ok(())
}

/// `z* = (I+L)^{-1} s` by Cholesky factorization.
pub fn solve_dense(g: &Graph, s: &OpinionVector) -> Result<OpinionVector> {
    check_len(g, s, "opinion vector")?;
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(Error::Capacity {
            what: "dense solve",
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let mut m = DMatrix::<f64>::identity(n, n);
    for u in 0..n {
        let u_id = VertexId::new(u);
        m[(u, u)] += g.weighted_degree(u_id);
        for (v, w) in g.neighbors(u_id) {
            m[(u, v.index())] -= w;
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::validation("I + L is not positive definite"))?;
    let z = chol.solve(&DVector::from_column_slice(s.as_slice()));
    Ok(OpinionVector::from_vec_unchecked(
        z.iter().map(|x| x.clamp(0.0, 1.0)).collect(),
    ))
}

/// One application of `z ← (s + A z) / (1 + w)`.
fn pr_step(g: &Graph, s: &[f64], z: &[f64], out: &mut [f64]) {
    g.adjacency_mul(z, out);
    for (u, o) in out.iter_mut().enumerate() {
        *o = (s[u] + *o) / (1.0 + g.weighted_degree(VertexId::new(u)));
    }
}

fn check_no_isolated(g: &Graph) -> Result<()> {
    match (0..g.n()).find(|&u| g.unweighted_degree(VertexId::new(u)) == 0) {
        Some(u) => Err(Error::validation(format!("vertex {u} is isolated"))),
        None => Ok(()),
    }
}

/// The fixed-point iteration started from the constant mean-of-`s` vector,
/// together with `‖z^(t) − z^(t−1)‖₂` for every step.
pub fn solve_iterative_pr_traced(
    g: &Graph,
    s: &OpinionVector,
    iters: usize,
) -> Result<(OpinionVector, Vec<f64>)> {
    check_len(g, s, "opinion vector")?;
    if iters == 0 {
        return Err(Error::validation("iteration count must be positive"));
    }
    check_no_isolated(g)?;
    let mut z = vec![s.mean(); g.n()];
    let mut next = vec![0.0; g.n()];
    let mut residuals = Vec::with_capacity(iters);
    for _ in 0..iters {
        pr_step(g, s.as_slice(), &z, &mut next);
        residuals.push(l2_dist(&z, &next));
        std::mem::swap(&mut z, &mut next);
    }
    Ok((OpinionVector::from_vec_unchecked(clamped(z)), residuals))
}

pub fn solve_iterative_pr(g: &Graph, s: &OpinionVector, iters: usize) -> Result<OpinionVector> {
    solve_iterative_pr_traced(g, s, iters).map(|(z, _)| z)
}

/// Iterates until the step size in the max norm drops below `tol`, or
/// `max_iters` steps. Returns the iterate and the number of steps taken.
pub fn solve_iterative_until(
    g: &Graph,
    s: &OpinionVector,
    tol: f64,
    max_iters: usize,
) -> Result<(OpinionVector, usize)> {
    check_len(g, s, "opinion vector")?;
    check_no_isolated(g)?;
    let mut z = vec![s.mean(); g.n()];
    let mut next = vec![0.0; g.n()];
    let mut steps = 0;
    while steps < max_iters {
        pr_step(g, s.as_slice(), &z, &mut next);
        steps += 1;
        let delta = z.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut z, &mut next);
        if delta < tol {
            break;
        }
    }
    Ok((OpinionVector::from_vec_unchecked(clamped(z)), steps))
}

fn clamped(z: Vec<f64>) -> Vec<f64> {
    z.into_iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Max-norm distance between `z` and its image under the update map.
pub fn fixed_point_residual(g: &Graph, s: &OpinionVector, z: &OpinionVector) -> Result<f64> {
    check_len(g, s, "innate opinions")?;
    check_len(g, z, "expressed opinions")?;
    let mut next = vec![0.0; g.n()];
    pr_step(g, s.as_slice(), z.as_slice(), &mut next);
    Ok(next
        .iter()
        .zip(z.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// All measures by direct summation.
pub fn measures_exact(g: &Graph, s: &OpinionVector, z: &OpinionVector) -> Result<MeasureReport> {
    check_len(g, s, "innate opinions")?;
    check_len(g, z, "expressed opinions")?;
    let (s, z) = (s.as_slice(), z.as_slice());
    let n = g.n() as f64;
    let sum: f64 = z.iter().sum();
    let mean = sum / n;
    let polarization = z.iter().map(|x| (x - mean) * (x - mean)).sum();
    let disagreement = g
        .edges()
        .map(|(u, v, w)| {
            let d = z[u.index()] - z[v.index()];
            w * d * d
        })
        .sum::<f64>();
    let internal_conflict = s.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    let controversy: f64 = z.iter().map(|x| x * x).sum();
    let s_norm_sq = s.iter().map(|x| x * x).sum();
    Ok(MeasureReport {
        sum,
        mean,
        polarization,
        disagreement,
        internal_conflict,
        controversy,
        disagreement_controversy: disagreement + controversy,
        s_norm_sq,
    })
}

/// `|I + 2D + C − ‖s‖²| / ‖s‖²`.
pub fn conservation_residual(r: &MeasureReport) -> f64 {
    (r.internal_conflict + 2.0 * r.disagreement + r.controversy - r.s_norm_sq).abs()
        / r.s_norm_sq.max(1e-30)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opinions::gen_uniform;
    use crate::rng::RandomStream;
    use crate::synth;

    fn edge() -> Graph {
        Graph::from_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    fn ov(v: &[f64]) -> OpinionVector {
        OpinionVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dense_single_vertex() {
        let g = Graph::from_edges(1, []).unwrap();
        assert_eq!(solve_dense(&g, &ov(&[0.5])).unwrap().as_slice(), &[0.5]);
    }

    #[test]
    fn dense_single_edge() {
        let z = solve_dense(&edge(), &ov(&[1.0, 0.0])).unwrap();
        assert!((z.as_slice()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((z.as_slice()[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn dense_consensus() {
        let g = synth::gnm(60, 200, &mut RandomStream::new(1)).unwrap();
        let z = solve_dense(&g, &OpinionVector::constant(g.n(), 0.3).unwrap()).unwrap();
        assert!(z.as_slice().iter().all(|x| (x - 0.3).abs() < 1e-12));
    }

    #[test]
    fn dense_capacity_guard() {
        let g = Graph::from_edges(DENSE_LIMIT + 1, [(0, 1, 1.0)]).unwrap();
        let s = OpinionVector::constant(g.n(), 0.0).unwrap();
        assert!(matches!(solve_dense(&g, &s), Err(Error::Capacity { .. })));
    }

    #[test]
    fn iterative_consensus_is_fixed() {
        let g = synth::gnm(40, 100, &mut RandomStream::new(2)).unwrap();
        let s = OpinionVector::constant(g.n(), 0.7).unwrap();
        let (z, res) = solve_iterative_pr_traced(&g, &s, 5).unwrap();
        assert!(z.as_slice().iter().all(|&x| (x - 0.7).abs() < 1e-15));
        assert!(res.iter().all(|&r| r < 1e-14));
    }

    #[test]
    fn iterative_single_edge() {
        let z = solve_iterative_pr(&edge(), &ov(&[1.0, 0.0]), 50).unwrap();
        assert!((z.as_slice()[0] - 2.0 / 3.0).abs() < 1e-6);
        assert!((z.as_slice()[1] - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn iterative_residuals_decrease() {
        let mut rng = RandomStream::new(3);
        let g = synth::gnm(100, 300, &mut rng).unwrap();
        let s = gen_uniform(g.n(), &mut rng);
        let (_, res) = solve_iterative_pr_traced(&g, &s, 30).unwrap();
        assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
    }

    #[test]
    fn iterative_rejects_isolated() {
        let g = Graph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        assert!(solve_iterative_pr(&g, &ov(&[0.0, 0.0, 0.0]), 1).is_err());
    }

    #[test]
    fn single_edge_measures() {
        let s = ov(&[1.0, 0.0]);
        let z = ov(&[2.0 / 3.0, 1.0 / 3.0]);
        let r = measures_exact(&edge(), &s, &z).unwrap();
        let want = [1.0, 0.5, 1.0 / 18.0, 1.0 / 9.0, 2.0 / 9.0, 5.0 / 9.0, 2.0 / 3.0, 1.0];
        for ((name, got), w) in r.entries().iter().zip(want) {
            assert!((got - w).abs() < 1e-12, "{name}: {got} vs {w}");
        }
        assert!(conservation_residual(&r) < 1e-12);
    }

    #[test]
    fn consensus_and_zero_measures() {
        let g = synth::gnm(30, 60, &mut RandomStream::new(4)).unwrap();
        let c = OpinionVector::constant(g.n(), 0.5).unwrap();
        let r = measures_exact(&g, &c, &c).unwrap();
        assert_eq!((r.polarization, r.disagreement, r.internal_conflict), (0.0, 0.0, 0.0));
        assert_eq!(r.controversy, 0.25 * g.n() as f64);
        assert_eq!(conservation_residual(&r), 0.0);
        let zero = OpinionVector::constant(g.n(), 0.0).unwrap();
        let r = measures_exact(&g, &zero, &zero).unwrap();
        assert!(r.entries().iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn conservation_on_random_graph() {
        let mut rng = RandomStream::new(5);
        let g = synth::gnm(200, 800, &mut rng).unwrap();
        let s = gen_uniform(g.n(), &mut rng);
        let z = solve_dense(&g, &s).unwrap();
        let r = measures_exact(&g, &s, &z).unwrap();
        assert!(conservation_residual(&r) <= 1e-8);
        assert!(fixed_point_residual(&g, &s, &z).unwrap() < 1e-9);
    }

    #[test]
    fn length_mismatch() {
        assert!(measures_exact(&edge(), &ov(&[0.0]), &ov(&[0.0, 0.0])).is_err());
    }
}
