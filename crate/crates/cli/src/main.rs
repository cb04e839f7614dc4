use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fj_cli::bench::{bench_plan, CSV_HEADER};
use fj_cli::error::{CliError, CliResult, Context};
use fj_cli::io;
use fj_cli::plan::{bucket_csv, equilibrium, ExperimentPlan, TargetSelection};
use fj_core::exact::{measures_exact, solve_dense, solve_iterative_pr};
use fj_core::graph::{write_edge_list, write_id_map};
use fj_core::innate::{estimate_s, SEstimatorConfig, SMethod};
use fj_core::measures::{estimate_measures_given_s, estimate_measures_given_z, MeasureEstimatorConfig, WalkPolicy};
use fj_core::opinions::{gen_eigenvector, gen_exponential, gen_uniform, write_opinions};
use fj_core::ppr::estimate_z_regular;
use fj_core::walk::{estimate_z_batch, WalkConfig};
use fj_core::{Expressed, Graph, Innate, Oracle, RandomStream, VertexId};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "fj", version, about = "Opinion dynamics estimators on large graphs")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "FJ_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an edge list (optionally gzipped) and write it with dense IDs.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        largest_component: bool,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the dense-to-original ID map.
        #[arg(long)]
        idmap: Option<PathBuf>,
    },
    /// Generate innate opinions for a graph.
    GenOpinions {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        kind: OpinionKind,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact equilibrium and measures.
    Exact {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        opinions: PathBuf,
        #[arg(long, value_enum, default_value_t = ExactMethod::Iterative)]
        method: ExactMethod,
        /// Fixed iteration count; runs to convergence when absent.
        #[arg(long)]
        iters: Option<usize>,
        /// Write the expressed opinions here.
        #[arg(long)]
        z_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate expressed opinions from the innate oracle.
    EstimateZ {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        opinions: PathBuf,
        #[arg(long, value_enum, default_value_t = ZMethod::Rw)]
        method: ZMethod,
        #[command(flatten)]
        targets: TargetArgs,
        #[arg(long, default_value_t = 4000)]
        walks: usize,
        #[arg(long, default_value_t = 600)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate innate opinions from the expressed oracle.
    EstimateS {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        expressed: PathBuf,
        #[command(flatten)]
        targets: TargetArgs,
        #[command(flatten)]
        s: SArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate all measures from one oracle.
    Measures {
        #[arg(long)]
        graph: PathBuf,
        /// Opinions behind the oracle: innate or expressed per --oracle.
        #[arg(long)]
        opinions: PathBuf,
        #[arg(long, value_enum)]
        oracle: OracleArg,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 4000)]
        walks: usize,
        #[arg(long, default_value_t = 600)]
        steps: usize,
        #[command(flatten)]
        s: SArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the walk estimator of a plan over a grid of walk counts and lengths.
    Bench {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_delimiter = ',')]
        walks: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        steps: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a plan with degree-bucket targets and print the bucket table.
    Buckets {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 50)]
        per_bucket: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a plan, or rerun the plan stored in a manifest.
    Run {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpinionKind {
    Uniform,
    Exponential,
    Eigenvector,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExactMethod {
    Dense,
    Iterative,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZMethod {
    Rw,
    Ppr,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Innate,
    Expressed,
}

#[derive(Clone, Copy, ValueEnum)]
enum SMethodArg {
    Mean,
    Collision,
}

#[derive(Args)]
struct TargetArgs {
    /// Number of uniformly random targets.
    #[arg(long, conflicts_with_all = ["all", "target_file"])]
    targets: Option<usize>,
    #[arg(long)]
    all: bool,
    /// File of original vertex IDs.
    #[arg(long)]
    target_file: Option<PathBuf>,
}

#[derive(Args)]
struct SArgs {
    #[arg(long, default_value_t = 400)]
    threshold: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = SMethodArg::Mean)]
    s_method: SMethodArg,
    #[arg(long, default_value_t = 0.1)]
    s_epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    c_lower: f64,
}

impl SArgs {
    fn config(&self, delta: f64) -> SEstimatorConfig {
        SEstimatorConfig {
            epsilon: self.s_epsilon,
            delta,
            threshold: self.threshold,
            repetitions: self.reps,
            method: match self.s_method {
                SMethodArg::Mean => SMethod::MeanSampling,
                SMethodArg::Collision => SMethod::Collision,
            },
            c_lower: self.c_lower,
            ..SEstimatorConfig::default()
        }
    }
}

impl TargetArgs {
    fn resolve(&self, g: &Graph, seed: u64) -> CliResult<Vec<VertexId>> {
        if self.all {
            return Ok((0..g.n()).map(VertexId::new).collect());
        }
        if let Some(path) = &self.target_file {
            return io::load_targets(path, g);
        }
        let k = self.targets.unwrap_or(1);
        if k == 0 {
            return Err(CliError::usage("--targets must be at least 1"));
        }
        let mut rng = RandomStream::derive(seed, &[3]);
        Ok((0..k).map(|_| g.sample_vertex(&mut rng)).collect())
    }
}

fn emit(out: Option<&Path>, body: &str) -> CliResult<()> {
    match out {
        Some(path) => io::write_string(path, body),
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn vertex_csv(g: &Graph, targets: &[VertexId], est: &[f64]) -> String {
    let mut out = String::from("target,vertex,original_id,estimate\n");
    for (i, (&u, e)) in targets.iter().zip(est).enumerate() {
        out.push_str(&format!("{i},{},{},{e:.12}\n", u.index(), g.original_id(u)));
    }
    out
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest { input, largest_component, out, idmap } => {
            let g = io::load_graph(&input, largest_component)?;
            write_edge_list(&g, io::create(&out)?).context(|| out.display().to_string())?;
            if let Some(path) = idmap {
                write_id_map(&g, io::create(&path)?).context(|| path.display().to_string())?;
            }
            eprintln!("n = {}, m = {}", g.n(), g.m());
        }
        Command::GenOpinions { graph, kind, iters, seed, out } => {
            let g = io::load_graph(&graph, false)?;
            let mut rng = RandomStream::derive(seed, &[2]);
            let s = match kind {
                OpinionKind::Uniform => gen_uniform(g.n(), &mut rng),
                OpinionKind::Exponential => gen_exponential(g.n(), &mut rng).context(|| "exponential".into())?,
                OpinionKind::Eigenvector => gen_eigenvector(&g, iters).context(|| "eigenvector".into())?,
            };
            write_opinions(&s, io::create(&out)?).context(|| out.display().to_string())?;
        }
        Command::Exact { graph, opinions, method, iters, z_out, out } => {
            let g = io::load_graph(&graph, false)?;
            let s = io::load_opinions(&opinions, g.n())?;
            let z = match (method, iters) {
                (ExactMethod::Dense, _) => solve_dense(&g, &s).context(|| "dense solve".into())?,
                (ExactMethod::Iterative, Some(k)) => solve_iterative_pr(&g, &s, k).context(|| "iteration".into())?,
                (ExactMethod::Iterative, None) => equilibrium(&g, &s)?,
            };
            if let Some(path) = z_out {
                write_opinions(&z, io::create(&path)?).context(|| path.display().to_string())?;
            }
            let report = measures_exact(&g, &s, &z).context(|| "measures".into())?;
            emit(out.as_deref(), &json(&report))?;
        }
        Command::EstimateZ { graph, opinions, method, targets, walks, steps, epsilon, seed, out } => {
            let g = io::load_graph(&graph, false)?;
            let s = io::load_opinions(&opinions, g.n())?;
            let targets = targets.resolve(&g, seed)?;
            let oracle: Oracle<Innate> = Oracle::new(&s);
            let est = match method {
                ZMethod::Rw => {
                    let cfg = WalkConfig { num_walks: walks, max_steps: steps, seed, ..WalkConfig::default() };
                    estimate_z_batch(&g, &oracle, &targets, &cfg)
                }
                ZMethod::Ppr => targets
                    .par_iter()
                    .map(|&u| estimate_z_regular(&g, &oracle, u, epsilon).map(|r| r.estimate))
                    .collect::<fj_core::Result<Vec<_>>>()
                    .context(|| "ppr estimator".into())?,
            };
            emit(out.as_deref(), &vertex_csv(&g, &targets, &est))?;
            eprintln!("queries = {}", oracle.query_count());
        }
        Command::EstimateS { graph, expressed, targets, s, seed, out } => {
            let g = io::load_graph(&graph, false)?;
            let z = io::load_opinions(&expressed, g.n())?;
            let targets = targets.resolve(&g, seed)?;
            let cfg = s.config(0.1);
            let oracle: Oracle<Expressed> = Oracle::new(&z);
            let est = targets
                .par_iter()
                .enumerate()
                .map(|(i, &u)| estimate_s(&g, &oracle, u, &cfg, &mut RandomStream::derive(seed, &[4, i as u64])))
                .collect::<fj_core::Result<Vec<_>>>()
                .context(|| "innate estimator".into())?;
            emit(out.as_deref(), &vertex_csv(&g, &targets, &est))?;
            eprintln!("queries = {}", oracle.query_count());
        }
        Command::Measures { graph, opinions, oracle, epsilon, delta, samples, walks, steps, s, seed, out } => {
            let g = io::load_graph(&graph, false)?;
            let x = io::load_opinions(&opinions, g.n())?;
            let mut cfg = MeasureEstimatorConfig::new(epsilon, delta).with_seed(seed);
            if let Some(c) = samples {
                cfg = cfg.with_samples(c);
            }
            cfg.walk = WalkPolicy::Fixed(WalkConfig { num_walks: walks, max_steps: steps, ..WalkConfig::default() });
            cfg.s_cfg = s.config(delta);
            let (est, queries) = match oracle {
                OracleArg::Innate => {
                    let o: Oracle<Innate> = Oracle::new(&x);
                    (estimate_measures_given_s(&g, &o, &cfg), o.query_count())
                }
                OracleArg::Expressed => {
                    let o: Oracle<Expressed> = Oracle::new(&x);
                    (estimate_measures_given_z(&g, &o, &cfg), o.query_count())
                }
            };
            let est = est.context(|| "measures".into())?;
            let body = serde_json::json!({
                "report": est.report,
                "samples": est.samples,
                "restarts": est.restarts,
                "queries": queries,
            });
            emit(out.as_deref(), &json(&body))?;
        }
        Command::Bench { plan, walks, steps, out } => {
            let plan = ExperimentPlan::load(&plan)?;
            let rows = bench_plan(&plan, &walks, &steps)?;
            let mut body = format!("{CSV_HEADER}\n");
            for r in rows {
                body.push_str(&r.csv_row());
                body.push('\n');
            }
            emit(out.as_deref(), &body)?;
        }
        Command::Buckets { plan, count, per_bucket, output } => {
            let mut plan = ExperimentPlan::load(&plan)?;
            plan.targets = TargetSelection::Buckets { count, per_bucket };
            if let Some(dir) = output {
                plan.output = dir;
            }
            let outcome = fj_cli::run_plan(&plan)?;
            emit(None, &bucket_csv(&outcome.buckets.unwrap_or_default()))?;
        }
        Command::Run { plan, output } => {
            let mut plan = ExperimentPlan::load(&plan)?;
            if let Some(dir) = output {
                plan.output = dir;
            }
            let outcome = fj_cli::run_plan(&plan)?;
            emit(None, &outcome.aggregate_csv)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("fj: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fj: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
