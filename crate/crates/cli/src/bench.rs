//! Wall-clock timing of the walk estimator.

use std::time::Instant;

use fj_core::opinions::{Innate, OpinionVector, Oracle};
use fj_core::walk::{estimate_z_batch, WalkConfig};
use fj_core::{Graph, VertexId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub walk: WalkConfig,
    pub repetitions: usize,
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        if xs.is_empty() {
            return Stat::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub num_walks: usize,
    pub max_steps: usize,
    pub targets: usize,
    /// Seconds for the whole batch.
    pub total: Stat,
    /// Seconds per target vertex.
    pub per_vertex: Stat,
    pub queries_per_vertex: f64,
}

/// Times `plan.repetitions` batch estimates over `targets`.
pub fn bench_walks(g: &Graph, s: &OpinionVector, targets: &[VertexId], plan: &BenchPlan) -> BenchResult {
    let mut totals = Vec::with_capacity(plan.repetitions);
    let mut queries = 0;
    for rep in 0..plan.repetitions.max(1) {
        let oracle: Oracle<Innate> = Oracle::new(s);
        let cfg = WalkConfig {
            seed: plan.walk.seed.wrapping_add(rep as u64),
            ..plan.walk
        };
        let start = Instant::now();
        let out = estimate_z_batch(g, &oracle, targets, &cfg);
        totals.push(start.elapsed().as_secs_f64());
        std::hint::black_box(out);
        queries += oracle.query_count();
    }
    let k = targets.len().max(1) as f64;
    let per: Vec<f64> = totals.iter().map(|t| t / k).collect();
    BenchResult {
        num_walks: plan.walk.num_walks,
        max_steps: plan.walk.max_steps,
        targets: targets.len(),
        total: Stat::of(&totals),
        per_vertex: Stat::of(&per),
        queries_per_vertex: queries as f64 / (k * totals.len() as f64),
    }
}

pub const CSV_HEADER: &str = "num_walks,max_steps,targets,total_mean_s,total_std_s,per_vertex_mean_s,per_vertex_std_s,queries_per_vertex";

impl BenchResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.9},{:.9},{:.1}",
            self.num_walks,
            self.max_steps,
            self.targets,
            self.total.mean,
            self.total.std,
            self.per_vertex.mean,
            self.per_vertex.std,
            self.queries_per_vertex
        )
    }
}

/// Timing table for a plan with a walk estimator: one row per
/// `(num_walks, max_steps)` pair, defaulting to the plan's own values.
pub fn bench_plan(
    plan: &crate::plan::ExperimentPlan,
    walks: &[usize],
    steps: &[usize],
) -> crate::error::CliResult<Vec<BenchResult>> {
    use crate::error::CliError;
    use crate::plan::{load_inputs, select_targets, EstimatorSpec};
    plan.validate()?;
    let EstimatorSpec::Walk(base) = plan.estimator else {
        return Err(CliError::usage("estimator: bench needs a walk estimator"));
    };
    let inputs = load_inputs(plan)?;
    let targets: Vec<VertexId> = select_targets(plan, &inputs.graph)?.into_iter().map(|t| t.0).collect();
    let walks = if walks.is_empty() { vec![base.num_walks] } else { walks.to_vec() };
    let steps = if steps.is_empty() { vec![base.max_steps] } else { steps.to_vec() };
    let mut rows = Vec::new();
    for &num_walks in &walks {
        for &max_steps in &steps {
            let walk = WalkConfig { num_walks, max_steps, seed: plan.seed, ..base };
            let bp = BenchPlan { walk, repetitions: plan.repetitions };
            rows.push(bench_walks(&inputs.graph, &inputs.s, &targets, &bp));
        }
    }
    Ok(rows)
}
