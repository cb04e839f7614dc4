//! Experiment plans: what to load, what to estimate, where to write it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use fj_core::exact::{measures_exact, solve_iterative_until};
use fj_core::innate::{estimate_s, SEstimatorConfig};
use fj_core::measures::{estimate_measures_given_s, estimate_measures_given_z, MeasureEstimatorConfig, WalkPolicy};
use fj_core::opinions::{gen_eigenvector, gen_exponential, gen_uniform};
use fj_core::ppr::estimate_z_regular;
use fj_core::walk::{estimate_z_batch, WalkConfig};
use fj_core::{synth, Expressed, Graph, Innate, MeasureReport, OpinionVector, Oracle, RandomStream, VertexId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::Stat;
use crate::error::{CliError, CliResult, Context};
use crate::io;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        largest_component: bool,
    },
    Gnm { n: usize, m: usize },
    GnmWeighted { n: usize, m: usize },
    Regular { n: usize, d: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpinionSpec {
    File { path: PathBuf },
    Uniform,
    Exponential,
    Eigenvector { iters: usize },
}

/// Which opinion vector the estimator may query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Innate,
    Expressed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSpec {
    /// Expressed opinions by lazy random walks.
    Walk(WalkConfig),
    /// Expressed opinions by push on a regular graph.
    Ppr { epsilon: f64 },
    /// Innate opinions from expressed ones.
    Innate(SEstimatorConfig),
    /// All measures at once.
    Measures {
        epsilon: f64,
        delta: f64,
        #[serde(default)]
        samples: Option<usize>,
        #[serde(default)]
        walk: Option<WalkConfig>,
        #[serde(default)]
        innate: Option<SEstimatorConfig>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSelection {
    /// `k` vertices drawn uniformly with replacement.
    Random { k: usize },
    All,
    /// One original vertex ID per line.
    File { path: PathBuf },
    /// Vertices sorted by degree and cut into `count` equal groups, with
    /// `per_bucket` targets drawn from each.
    Buckets { count: usize, per_bucket: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub graph: GraphSource,
    pub opinions: OpinionSpec,
    pub oracle: OracleKind,
    pub estimator: EstimatorSpec,
    pub targets: TargetSelection,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving every artifact.
    pub output: PathBuf,
}

fn one() -> usize {
    1
}

const STREAM_GRAPH: u64 = 1;
const STREAM_OPINIONS: u64 = 2;
const STREAM_TARGETS: u64 = 3;
const STREAM_REP: u64 = 4;

impl ExperimentPlan {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid plan: {e}")))
    }

    /// Reads either a plan or a run manifest, which embeds its plan.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let plan = match value.get("plan") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(plan).map_err(|e| CliError::usage(format!("{}: invalid plan: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.repetitions == 0 {
            return Err(CliError::usage("repetitions: must be at least 1"));
        }
        match (&self.estimator, self.oracle) {
            (EstimatorSpec::Walk(_) | EstimatorSpec::Ppr { .. }, OracleKind::Expressed) => {
                return Err(CliError::usage("oracle: expressed-opinion estimators need the innate oracle"))
            }
            (EstimatorSpec::Innate(_), OracleKind::Innate) => {
                return Err(CliError::usage("oracle: the innate estimator needs the expressed oracle"))
            }
            _ => {}
        }
        if let EstimatorSpec::Ppr { epsilon } = self.estimator {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(CliError::usage("estimator.ppr.epsilon: must lie in (0, 1)"));
            }
        }
        match self.targets {
            TargetSelection::Random { k: 0 } => Err(CliError::usage("targets.random.k: must be at least 1")),
            TargetSelection::Buckets { count: 0, .. } => Err(CliError::usage("targets.buckets.count: must be at least 1")),
            TargetSelection::Buckets { per_bucket: 0, .. } => {
                Err(CliError::usage("targets.buckets.per_bucket: must be at least 1"))
            }
            TargetSelection::Buckets { .. } if matches!(self.estimator, EstimatorSpec::Measures { .. }) => {
                Err(CliError::usage("targets: buckets apply to per-vertex estimators only"))
            }
            _ => Ok(()),
        }
    }
}

/// Graph, innate opinions and equilibrium opinions of a plan.
pub struct Inputs {
    pub graph: Graph,
    pub s: OpinionVector,
    pub z: OpinionVector,
}

pub fn load_inputs(plan: &ExperimentPlan) -> CliResult<Inputs> {
    let mut rng = RandomStream::derive(plan.seed, &[STREAM_GRAPH]);
    let graph = match &plan.graph {
        GraphSource::EdgeList { path, largest_component } => io::load_graph(path, *largest_component)?,
        GraphSource::Gnm { n, m } => synth::gnm(*n, *m, &mut rng).context(|| "graph.gnm".into())?,
        GraphSource::GnmWeighted { n, m } => synth::gnm_weighted(*n, *m, &mut rng).context(|| "graph.gnm_weighted".into())?,
        GraphSource::Regular { n, d } => synth::random_regular(*n, *d, &mut rng).context(|| "graph.regular".into())?,
    };
    let mut rng = RandomStream::derive(plan.seed, &[STREAM_OPINIONS]);
    let s = match &plan.opinions {
        OpinionSpec::File { path } => io::load_opinions(path, graph.n())?,
        OpinionSpec::Uniform => gen_uniform(graph.n(), &mut rng),
        OpinionSpec::Exponential => gen_exponential(graph.n(), &mut rng).context(|| "opinions.exponential".into())?,
        OpinionSpec::Eigenvector { iters } => gen_eigenvector(&graph, *iters).context(|| "opinions.eigenvector".into())?,
    };
    let z = equilibrium(&graph, &s)?;
    Ok(Inputs { graph, s, z })
}

/// Equilibrium opinions to near machine precision.
pub fn equilibrium(g: &Graph, s: &OpinionVector) -> CliResult<OpinionVector> {
    solve_iterative_until(g, s, 1e-13, 1_000_000)
        .map(|(z, _)| z)
        .context(|| "equilibrium".into())
}

/// Vertices sorted by `(degree, index)` and split into `count` contiguous
/// groups whose sizes differ by at most one.
pub fn degree_buckets(g: &Graph, count: usize) -> Vec<Vec<VertexId>> {
    let mut order: Vec<VertexId> = (0..g.n()).map(VertexId::new).collect();
    order.sort_by_key(|&u| (g.unweighted_degree(u), u));
    let n = order.len();
    (0..count).map(|b| order[b * n / count..(b + 1) * n / count].to_vec()).collect()
}

/// Targets with their bucket label, if any.
pub fn select_targets(plan: &ExperimentPlan, g: &Graph) -> CliResult<Vec<(VertexId, Option<usize>)>> {
    let mut rng = RandomStream::derive(plan.seed, &[STREAM_TARGETS]);
    Ok(match &plan.targets {
        TargetSelection::Random { k } => (0..*k).map(|_| (g.sample_vertex(&mut rng), None)).collect(),
        TargetSelection::All => (0..g.n()).map(|u| (VertexId::new(u), None)).collect(),
        TargetSelection::File { path } => io::load_targets(path, g)?.into_iter().map(|u| (u, None)).collect(),
        TargetSelection::Buckets { count, per_bucket } => {
            if *count > g.n() {
                return Err(CliError::usage(format!(
                    "targets.buckets.count: {count} buckets for {} vertices",
                    g.n()
                )));
            }
            let mut out = Vec::new();
            for (b, mut members) in degree_buckets(g, *count).into_iter().enumerate() {
                let take = (*per_bucket).min(members.len());
                for i in 0..take {
                    let j = i + rng.below(members.len() - i);
                    members.swap(i, j);
                }
                out.extend(members[..take].iter().map(|&u| (u, Some(b))));
            }
            out
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RepRecord {
    pub rep: usize,
    pub seed: u64,
    pub queries: u64,
    pub wall_seconds: f64,
    pub artifact: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub mean_degree: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub plan: ExperimentPlan,
    pub graph: GraphSummary,
    pub targets: usize,
    pub started_unix_s: u64,
    pub wall_seconds: f64,
    pub repetitions: Vec<RepRecord>,
    pub artifacts: Vec<String>,
}

/// One bucket of the degree-bucket table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BucketRow {
    pub bucket: usize,
    pub targets: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub normalized_error: f64,
    pub normalized_std: f64,
}

/// Per-bucket error mean and spread, each divided by its average over all
/// buckets.
pub fn bucket_rows(errors: &[Vec<f64>]) -> Vec<BucketRow> {
    let stats: Vec<Stat> = errors.iter().map(|e| Stat::of(e)).collect();
    let k = stats.len().max(1) as f64;
    let avg_mean = stats.iter().map(|s| s.mean).sum::<f64>() / k;
    let avg_std = stats.iter().map(|s| s.std).sum::<f64>() / k;
    let norm = |x: f64, by: f64| if by > 0.0 { x / by } else { 0.0 };
    stats
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(bucket, (s, e))| BucketRow {
            bucket,
            targets: e.len(),
            mean_error: s.mean,
            std_error: s.std,
            normalized_error: norm(s.mean, avg_mean),
            normalized_std: norm(s.std, avg_std),
        })
        .collect()
}

pub const VERTEX_CSV_HEADER: &str = "target,vertex,original_id,degree,estimate,truth,abs_error";
pub const BUCKET_CSV_HEADER: &str = "bucket,targets,mean_error,std_error,normalized_error,normalized_std";

pub fn bucket_csv(rows: &[BucketRow]) -> String {
    let mut out = format!("{BUCKET_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.12},{:.12},{:.6},{:.6}",
            r.bucket, r.targets, r.mean_error, r.std_error, r.normalized_error, r.normalized_std
        );
    }
    out
}

/// Summary of a finished run.
pub struct RunOutcome {
    pub manifest: Manifest,
    pub aggregate_csv: String,
    pub buckets: Option<Vec<BucketRow>>,
}

fn rep_seed(plan: &ExperimentPlan, rep: usize) -> u64 {
    RandomStream::derive(plan.seed, &[STREAM_REP, rep as u64]).bits()
}

/// Runs every repetition of `plan`, writing per-repetition files, an
/// aggregate table, optional bucket table, and `manifest.json`.
pub fn run_plan(plan: &ExperimentPlan) -> CliResult<RunOutcome> {
    plan.validate()?;
    let started = Instant::now();
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let inputs = load_inputs(plan)?;
    let g = &inputs.graph;
    std::fs::create_dir_all(&plan.output).map_err(|e| CliError::io(&plan.output, e))?;

    let mut records = Vec::with_capacity(plan.repetitions);
    let mut artifacts = Vec::new();
    let (aggregate_csv, buckets, targets) = if let EstimatorSpec::Measures { .. } = plan.estimator {
        let exact = measures_exact(g, &inputs.s, &inputs.z).context(|| "exact measures".into())?;
        let mut reports = Vec::with_capacity(plan.repetitions);
        for rep in 0..plan.repetitions {
            let t = Instant::now();
            let seed = rep_seed(plan, rep);
            let (body, report, queries) = run_measures(plan, &inputs, &exact, seed)?;
            let name = format!("rep_{rep:03}.json");
            io::write_string(&plan.output.join(&name), &body)?;
            reports.push(report);
            records.push(RepRecord { rep, seed, queries, wall_seconds: t.elapsed().as_secs_f64(), artifact: name.clone() });
            artifacts.push(name);
        }
        (measures_aggregate(&reports, &exact), None, 0)
    } else {
        let targets = select_targets(plan, g)?;
        let vertices: Vec<VertexId> = targets.iter().map(|t| t.0).collect();
        let truth = match plan.estimator {
            EstimatorSpec::Innate(_) => &inputs.s,
            _ => &inputs.z,
        };
        let mut per_rep: Vec<Vec<f64>> = Vec::new();
        let mut errors: Vec<Vec<f64>> = Vec::new();
        for rep in 0..plan.repetitions {
            let t = Instant::now();
            let seed = rep_seed(plan, rep);
            let (est, queries) = run_vertices(plan, &inputs, &vertices, seed)?;
            let mut body = format!("{VERTEX_CSV_HEADER}\n");
            let mut errs = Vec::with_capacity(est.len());
            for (i, (&u, e)) in vertices.iter().zip(&est).enumerate() {
                let exact = truth.get(u);
                let err = (e - exact).abs();
                errs.push(err);
                let _ = writeln!(
                    body,
                    "{i},{},{},{},{e:.12},{exact:.12},{err:.12}",
                    u.index(),
                    g.original_id(u),
                    g.unweighted_degree(u)
                );
            }
            let name = format!("rep_{rep:03}.csv");
            io::write_string(&plan.output.join(&name), &body)?;
            records.push(RepRecord { rep, seed, queries, wall_seconds: t.elapsed().as_secs_f64(), artifact: name.clone() });
            artifacts.push(name);
            per_rep.push(vec![
                errs.iter().sum::<f64>() / errs.len().max(1) as f64,
                errs.iter().copied().fold(0.0, f64::max),
                queries as f64,
            ]);
            errors.push(errs);
        }
        let buckets = if let TargetSelection::Buckets { count, .. } = plan.targets {
            let mut by_bucket = vec![Vec::new(); count];
            for errs in &errors {
                for ((_, b), e) in targets.iter().zip(errs) {
                    by_bucket[b.expect("bucket label")].push(*e);
                }
            }
            let rows = bucket_rows(&by_bucket);
            io::write_string(&plan.output.join("buckets.csv"), &bucket_csv(&rows))?;
            artifacts.push("buckets.csv".into());
            Some(rows)
        } else {
            None
        };
        (vertex_aggregate(&per_rep), buckets, targets.len())
    };
    io::write_string(&plan.output.join("aggregate.csv"), &aggregate_csv)?;
    artifacts.push("aggregate.csv".into());

    let manifest = Manifest {
        tool: "fj",
        version: env!("CARGO_PKG_VERSION"),
        plan: plan.clone(),
        graph: GraphSummary { n: g.n(), m: g.m(), mean_degree: g.mean_degree() },
        targets,
        started_unix_s,
        wall_seconds: started.elapsed().as_secs_f64(),
        repetitions: records,
        artifacts,
    };
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    io::write_string(&plan.output.join("manifest.json"), &body)?;
    Ok(RunOutcome { manifest, aggregate_csv, buckets })
}

/// Estimates at `targets`, in target order, and the oracle query count.
pub fn run_vertices(plan: &ExperimentPlan, inputs: &Inputs, targets: &[VertexId], seed: u64) -> CliResult<(Vec<f64>, u64)> {
    let g = &inputs.graph;
    match &plan.estimator {
        EstimatorSpec::Walk(cfg) => {
            let oracle: Oracle<Innate> = Oracle::new(&inputs.s);
            let est = estimate_z_batch(g, &oracle, targets, &cfg.with_seed(seed));
            Ok((est, oracle.query_count()))
        }
        EstimatorSpec::Ppr { epsilon } => {
            let oracle: Oracle<Innate> = Oracle::new(&inputs.s);
            let est = targets
                .par_iter()
                .map(|&u| estimate_z_regular(g, &oracle, u, *epsilon).map(|r| r.estimate))
                .collect::<fj_core::Result<Vec<_>>>()
                .context(|| "ppr estimator".into())?;
            Ok((est, oracle.query_count()))
        }
        EstimatorSpec::Innate(cfg) => {
            let oracle: Oracle<Expressed> = Oracle::new(&inputs.z);
            let est = targets
                .par_iter()
                .enumerate()
                .map(|(i, &u)| estimate_s(g, &oracle, u, cfg, &mut RandomStream::derive(seed, &[i as u64])))
                .collect::<fj_core::Result<Vec<_>>>()
                .context(|| "innate estimator".into())?;
            Ok((est, oracle.query_count()))
        }
        EstimatorSpec::Measures { .. } => Err(CliError::usage("estimator: measures do not produce per-vertex output")),
    }
}

pub fn measures_config(spec: &EstimatorSpec, seed: u64) -> CliResult<MeasureEstimatorConfig> {
    let EstimatorSpec::Measures { epsilon, delta, samples, walk, innate } = spec else {
        return Err(CliError::usage("estimator: expected measures"));
    };
    let mut cfg = MeasureEstimatorConfig::new(*epsilon, *delta).with_seed(seed);
    if let Some(c) = samples {
        cfg = cfg.with_samples(*c);
    }
    if let Some(w) = walk {
        cfg.walk = WalkPolicy::Fixed(*w);
    }
    if let Some(s) = innate {
        cfg.s_cfg = *s;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct MeasuresFile<'a> {
    seed: u64,
    samples: usize,
    restarts: usize,
    queries: u64,
    estimate: &'a MeasureReport,
    exact: &'a MeasureReport,
    relative_error: Vec<(&'static str, f64)>,
}

fn relative_errors(est: &MeasureReport, exact: &MeasureReport) -> Vec<(&'static str, f64)> {
    est.entries()
        .iter()
        .zip(exact.entries())
        .map(|(&(name, e), (_, x))| (name, if x != 0.0 { (e - x).abs() / x.abs() } else { (e - x).abs() }))
        .collect()
}

fn run_measures(
    plan: &ExperimentPlan,
    inputs: &Inputs,
    exact: &MeasureReport,
    seed: u64,
) -> CliResult<(String, MeasureReport, u64)> {
    let cfg = measures_config(&plan.estimator, seed)?;
    let g = &inputs.graph;
    let (est, queries) = match plan.oracle {
        OracleKind::Innate => {
            let oracle: Oracle<Innate> = Oracle::new(&inputs.s);
            let est = estimate_measures_given_s(g, &oracle, &cfg).context(|| "measures".into())?;
            (est, oracle.query_count())
        }
        OracleKind::Expressed => {
            let oracle: Oracle<Expressed> = Oracle::new(&inputs.z);
            let est = estimate_measures_given_z(g, &oracle, &cfg).context(|| "measures".into())?;
            (est, oracle.query_count())
        }
    };
    let file = MeasuresFile {
        seed,
        samples: est.samples,
        restarts: est.restarts,
        queries,
        estimate: &est.report,
        exact,
        relative_error: relative_errors(&est.report, exact),
    };
    Ok((serde_json::to_string_pretty(&file).expect("report serializes"), est.report, queries))
}

fn measures_aggregate(reports: &[MeasureReport], exact: &MeasureReport) -> String {
    let mut out = String::from("metric,exact,estimate_mean,estimate_std,rel_error_mean,rel_error_std\n");
    for (k, (name, x)) in exact.entries().iter().enumerate() {
        let values: Vec<f64> = reports.iter().map(|r| r.entries()[k].1).collect();
        let rel: Vec<f64> = reports.iter().map(|r| relative_errors(r, exact)[k].1).collect();
        let (v, e) = (Stat::of(&values), Stat::of(&rel));
        let _ = writeln!(out, "{name},{x:.12},{:.12},{:.12},{:.8},{:.8}", v.mean, v.std, e.mean, e.std);
    }
    out
}

fn vertex_aggregate(per_rep: &[Vec<f64>]) -> String {
    let mut out = String::from("metric,mean,std\n");
    for (k, name) in ["mean_abs_error", "max_abs_error", "queries"].iter().enumerate() {
        let s = Stat::of(&per_rep.iter().map(|r| r[k]).collect::<Vec<_>>());
        let _ = writeln!(out, "{name},{:.12},{:.12}", s.mean, s.std);
    }
    out
}
