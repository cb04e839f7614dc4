use super::Graph;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Power-iteration estimate of the condition number of
/// `(I+D)^{-1/2} (I+L) (I+D)^{-1/2}`.
///
/// The largest eigenvalue comes from `iters` steps on the matrix itself, the
/// smallest from `iters` steps on the shifted matrix `λmax·I − S̃`. Both start
/// from the same fixed pseudo-random vector. The result is at least 1.
pub fn condition_number_upper_bound(g: &Graph, iters: usize) -> Result<f64> {
    if iters == 0 {
        return Err(Error::validation("power iteration needs at least one step"));
    }
    let n = g.n();
    let scale: Vec<f64> = (0..n)
        .map(|u| 1.0 / (1.0 + g.weighted_degree[u]).sqrt())
        .collect();
    let mut ax = vec![0.0; n];
    // S̃x = x - N A N x, where (I+D)^{-1/2}(I+D)(I+D)^{-1/2} = I.
    let mut apply = |x: &[f64], y: &mut [f64]| {
        let nx: Vec<f64> = x.iter().zip(&scale).map(|(a, b)| a * b).collect();
        g.adjacency_mul(&nx, &mut ax);
        for u in 0..n {
            y[u] = x[u] - scale[u] * ax[u];
        }
    };
    let start = start_vector(n);

    let lmax = power(&start, iters, |x, y| apply(x, y));
    let lshift = power(&start, iters, |x, y| {
        apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = lmax * xi - *yi;
        }
    });
    let lmin = lmax - lshift;
    if !(lmin > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok((lmax / lmin).max(1.0))
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = RandomStream::new(0x5eed);
    let v: Vec<f64> = (0..n).map(|_| 0.5 + rng.unit()).collect();
    normalized(v)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Rayleigh quotient after `iters` power steps.
fn power(start: &[f64], iters: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    let mut x = start.to_vec();
    let mut y = vec![0.0; x.len()];
    let mut lambda = 0.0;
    for _ in 0..iters {
        apply(&x, &mut y);
        lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense_kappa(g: &Graph) -> f64 {
        let n = g.n();
        let mut m = DMatrix::<f64>::identity(n, n);
        for (u, v, w) in g.edges() {
            let (u, v) = (u.index(), v.index());
            m[(u, v)] -= w;
            m[(v, u)] -= w;
            m[(u, u)] += w;
            m[(v, v)] += w;
        }
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] /= ((1.0 + g.weighted_degree[i]) * (1.0 + g.weighted_degree[j])).sqrt();
            }
        }
        let ev = m.symmetric_eigenvalues();
        ev.max() / ev.min()
    }

    #[test]
    fn single_edge() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let k = condition_number_upper_bound(&g, 100).unwrap();
        assert!((k - 3.0).abs() / 3.0 < 0.05, "{k}");
    }

    #[test]
    fn triangle_matches_dense() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let k = condition_number_upper_bound(&g, 100).unwrap();
        let d = dense_kappa(&g);
        assert!((k - d).abs() / d < 0.05, "{k} vs {d}");
    }

    #[test]
    fn more_iterations_do_not_shrink_much() {
        let edges: Vec<_> = (0..20).map(|i| (i, (i * 7 + 3) % 21, 1.0)).chain((0..20).map(|i| (i, i + 1, 1.0))).collect();
        let g = Graph::from_edges(21, edges).unwrap();
        let k1 = condition_number_upper_bound(&g, 1).unwrap();
        let k100 = condition_number_upper_bound(&g, 100).unwrap();
        assert!(k100 >= 0.9 * k1, "{k1} {k100}");
        assert!(k100 >= 1.0);
        let d = dense_kappa(&g);
        assert!((k100 - d).abs() / d < 0.2, "{k100} vs {d}");
    }

    #[test]
    fn zero_iterations_rejected() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert!(condition_number_upper_bound(&g, 0).is_err());
    }
}
