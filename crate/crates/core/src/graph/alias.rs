//! Walker/Vose alias tables, one per vertex, stored flat alongside the CSR
//! adjacency arrays.

use crate::rng::RandomStream;

#[derive(Clone, Debug, Default)]
pub(crate) struct AliasTables {
    /// Acceptance threshold for each adjacency slot.
    prob: Vec<f64>,
    /// Local index (within the vertex's slice) of the alias slot.
    alias: Vec<u32>,
}

impl AliasTables {
    pub(crate) fn build(offsets: &[usize], weights: &[f64]) -> Self {
        let mut prob = vec![1.0; weights.len()];
        let mut alias: Vec<u32> = vec![0; weights.len()];
        let mut small = Vec::new();
        let mut large = Vec::new();
        for w in offsets.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let d = hi - lo;
            if d == 0 {
                continue;
            }
            let slice = &weights[lo..hi];
            let total: f64 = slice.iter().sum();
            let mut scaled: Vec<f64> = slice.iter().map(|&x| x * d as f64 / total).collect();
            small.clear();
            large.clear();
            for (i, &p) in scaled.iter().enumerate() {
                if p < 1.0 {
                    small.push(i);
                } else {
                    large.push(i);
                }
            }
            while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
                small.pop();
                prob[lo + s] = scaled[s];
                alias[lo + s] = l as u32;
                scaled[l] -= 1.0 - scaled[s];
                if scaled[l] < 1.0 {
                    large.pop();
                    small.push(l);
                }
            }
            // Leftovers are 1 up to rounding.
            for &i in large.iter().chain(small.iter()) {
                prob[lo + i] = 1.0;
                alias[lo + i] = i as u32;
            }
        }
        AliasTables { prob, alias }
    }

    /// Local slot index drawn with probability proportional to weight.
    #[inline]
    pub(crate) fn sample(&self, lo: usize, degree: usize, rng: &mut RandomStream) -> usize {
        let x = rng.unit() * degree as f64;
        let i = (x as usize).min(degree - 1);
        let frac = x - i as f64;
        if frac < self.prob[lo + i] {
            i
        } else {
            self.alias[lo + i] as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_reproduces_weights() {
        let weights = [1.0, 3.0, 0.5, 0.5, 5.0];
        let offsets = [0, 5];
        let t = AliasTables::build(&offsets, &weights);
        // Exact induced distribution: slot i is chosen with prob[i]/d directly
        // plus (1 - prob[j])/d for every j aliasing to i.
        let d = weights.len() as f64;
        let mut induced = vec![0.0; weights.len()];
        for j in 0..weights.len() {
            induced[j] += t.prob[j] / d;
            induced[t.alias[j] as usize] += (1.0 - t.prob[j]) / d;
        }
        let total: f64 = weights.iter().sum();
        for (p, w) in induced.iter().zip(weights.iter()) {
            assert!((p - w / total).abs() < 1e-12, "{p} vs {}", w / total);
        }
    }
}
