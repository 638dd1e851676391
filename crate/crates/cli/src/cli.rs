//! Argument parsing and the subcommand implementations.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use sbmis::formulations::{build_mis_ising, Graph, MisWeights};
use sbmis::indexed::{encode_model, EncodedJ};
use sbmis::ising::IsingModel;
use sbmis::mis::{BaselineSolver, MisAlgorithm, MisSolver};
use sbmis::sb::{EngineKind, SbParams};
use sbmis::tdma::{benchmark, validate_schedule, write_bench_csv, Condition, InterferenceClass, Scheduler};
use sbmis::tuning::{
    build_dataset, grid_scan, measure_latency, read_dataset, read_latency_csv, train_estimator, train_selector,
    write_dataset, write_latency_csv, DatasetConfig, EstimatorConfig, EstimatorModel, GridConfig, LatencyConfig,
    SelectorConfig, SelectorModel,
};

use crate::server;

#[derive(Debug, Parser)]
#[command(name = "sbmis", version, about = "Simulated-bifurcation MIS solver, parameter tuning and TDMA scheduling")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Master seed (overrides any seed in --config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with the subcommand's configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Where to write the result (stdout when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve maximum independent set on a graph file.
    SolveMis(SolveMisArgs),
    /// Scan the (c, dt, step) grid on one graph.
    GridSearch(GridSearchArgs),
    /// Generate random graphs and grid-search each into a JSONL dataset.
    BuildDataset(BuildDatasetArgs),
    /// Fit the parameter estimator on a dataset.
    TrainEstimator(TrainEstimatorArgs),
    /// Time both engines over a size x step table (CSV).
    MeasureLatency(MeasureLatencyArgs),
    /// Fit the engine selector on a latency table.
    TrainSelector(TrainSelectorArgs),
    /// TDMA scheduling on sensor fields.
    #[command(subcommand)]
    Tdma(TdmaCommand),
    /// Encode an Ising model's couplings into the indexed binary format.
    EncodeJ(EncodeJArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum TdmaCommand {
    /// Schedule one field.
    Run(TdmaRunArgs),
    /// Compare the solver against the greedy baseline over several fields.
    Bench(TdmaBenchArgs),
}

/// Solver options shared by the commands that solve MIS instances.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Trained estimator model (JSON).
    #[arg(long, value_name = "FILE")]
    pub estimator: Option<PathBuf>,
    /// Trained selector model (JSON).
    #[arg(long, value_name = "FILE")]
    pub selector: Option<PathBuf>,
    #[arg(long)]
    pub shots: Option<usize>,
    /// Force an engine instead of asking the selector.
    #[arg(long)]
    pub engine: Option<EngineKind>,
    /// Fixed coupling gain; with --dt and --step overrides the estimator.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub step: Option<usize>,
}

/// `--config` contents for the solving commands.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub estimator: Option<PathBuf>,
    pub selector: Option<PathBuf>,
    pub shots: Option<usize>,
    pub engine: Option<EngineKind>,
    pub params: Option<SbParams>,
    pub weights: Option<MisWeights>,
}

#[derive(Debug, Args)]
pub struct SolveMisArgs {
    /// Graph JSON: {"num_nodes": n, "edges": [[i, j], ..]} with 1-based ids.
    pub graph: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Use the randomized greedy baseline instead.
    #[arg(long)]
    pub baseline: bool,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub shots_per_point: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildDatasetArgs {
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub shots_per_point: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainEstimatorArgs {
    /// JSONL dataset from build-dataset.
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeasureLatencyArgs {
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Comma-separated step counts.
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<usize>>,
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainSelectorArgs {
    /// Latency CSV from measure-latency.
    pub latency: PathBuf,
}

#[derive(Debug, Args)]
pub struct TdmaRunArgs {
    #[arg(long)]
    pub ns: usize,
    /// Interference class used to calibrate the radius.
    #[arg(long, default_value = "lif", conflicts_with = "radius")]
    pub class: InterferenceClass,
    /// Fixed communication radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub baseline: bool,
}

#[derive(Debug, Args)]
pub struct TdmaBenchArgs {
    /// Comma-separated sensor counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    /// Comma-separated interference classes.
    #[arg(long, value_delimiter = ',', default_value = "lif", conflicts_with = "radius")]
    pub class: Vec<InterferenceClass>,
    /// Comma-separated fixed radii.
    #[arg(long, value_delimiter = ',')]
    pub radius: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct EncodeJArgs {
    /// Ising model JSON {"n": .., "j": [[..]], "h": [..]}.
    pub model: PathBuf,
    /// Treat the input as a graph and encode its MIS couplings.
    #[arg(long)]
    pub graph: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory holding estimator.json and selector.json.
    #[arg(long, value_name = "DIR")]
    pub models_dir: Option<PathBuf>,
    /// Built web UI assets.
    #[arg(long, value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
    /// Idle seconds before a session is dropped.
    #[arg(long, default_value_t = 3600)]
    pub idle_timeout: u64,
}

/// Parses `args` and runs the command. Usage errors exit 2, runtime errors 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::SolveMis(a) => solve_mis_cmd(g, a),
        Command::GridSearch(a) => grid_search_cmd(g, a),
        Command::BuildDataset(a) => build_dataset_cmd(g, a),
        Command::TrainEstimator(a) => train_estimator_cmd(g, a),
        Command::MeasureLatency(a) => measure_latency_cmd(g, a),
        Command::TrainSelector(a) => train_selector_cmd(g, a),
        Command::Tdma(TdmaCommand::Run(a)) => tdma_run_cmd(g, a),
        Command::Tdma(TdmaCommand::Bench(a)) => tdma_bench_cmd(g, a),
        Command::EncodeJ(a) => encode_j_cmd(g, a),
        Command::Serve(a) => serve_cmd(a),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("cannot parse {}", path.display()))
}

fn load_config<T: DeserializeOwned + Default>(g: &Global) -> Result<T> {
    match &g.config {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

/// Writes `v` to `--out` when given; prints it with `--json`, else prints `human`.
fn emit(g: &Global, v: &impl Serialize, human: impl FnOnce() -> String) -> Result<()> {
    if let Some(p) = &g.out {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        w.flush()?;
    }
    if g.json {
        print_json(v)
    } else {
        println!("{}", human());
        Ok(())
    }
}

/// Writes a non-JSON artifact to `--out` or stdout, then reports `summary`
/// when the artifact did not take stdout.
fn emit_artifact(
    g: &Global,
    write: impl FnOnce(&mut dyn Write) -> Result<()>,
    summary: serde_json::Value,
    human: impl FnOnce() -> String,
) -> Result<()> {
    match &g.out {
        Some(p) => {
            let mut w = create(p)?;
            write(&mut w)?;
            w.flush()?;
            if g.json {
                print_json(&summary)
            } else {
                println!("{}", human());
                Ok(())
            }
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Builds the configured solver from flags layered over `--config`.
pub fn build_solver(g: &Global, a: &SolverArgs) -> Result<MisSolver> {
    let cfg: SolverConfig = load_config(g)?;
    let mut s = MisSolver::new();
    if let Some(p) = a.estimator.as_ref().or(cfg.estimator.as_ref()) {
        s = s.with_estimator(read_json::<EstimatorModel>(p)?);
    }
    if let Some(p) = a.selector.as_ref().or(cfg.selector.as_ref()) {
        s = s.with_selector(read_json::<SelectorModel>(p)?);
    }
    if let Some(n) = a.shots.or(cfg.shots) {
        if n == 0 {
            bail!("--shots must be at least 1");
        }
        s = s.with_shots(n);
    }
    if let Some(e) = a.engine.or(cfg.engine) {
        s = s.with_engine(e);
    }
    if let Some(w) = cfg.weights {
        w.validate()?;
        s.weights = w;
    }
    let mut params = cfg.params;
    if a.c.is_some() || a.dt.is_some() || a.step.is_some() {
        let base = params.unwrap_or_else(sbmis::mis::default_params);
        params = Some(SbParams::new(a.c.unwrap_or(base.c), a.dt.unwrap_or(base.dt), a.step.unwrap_or(base.step))?);
    }
    if let Some(p) = params {
        p.validate()?;
        s = s.with_params(p);
    }
    Ok(s)
}

fn solve_mis_cmd(g: &Global, a: SolveMisArgs) -> Result<()> {
    let graph: Graph = read_json(&a.graph)?;
    let seed = g.seed.unwrap_or(0);
    let sol = if a.baseline {
        BaselineSolver.solve(&graph, seed)?
    } else {
        build_solver(g, &a.solver)?.solve(&graph, seed)?
    };
    if !graph.is_independent(&sol.nodes) {
        bail!("solver returned a dependent set");
    }
    let human = || {
        let nodes: Vec<String> = sol.nodes.iter().map(|v| (v + 1).to_string()).collect();
        let params = sol.params.map(|p| format!(", c={} dt={} step={}", p.c, p.dt, p.step)).unwrap_or_default();
        format!("size {}: {} ({}{params}, {:.4}s)", sol.size(), nodes.join(" "), sol.engine, sol.elapsed_s)
    };
    emit(g, &sol, human)
}

fn grid_search_cmd(g: &Global, a: GridSearchArgs) -> Result<()> {
    let graph: Graph = read_json(&a.graph)?;
    let mut cfg: GridConfig = load_config(g)?;
    if let Some(s) = a.shots_per_point {
        cfg.shots_per_point = s;
    }
    let out = grid_scan(&graph, &cfg, g.seed.unwrap_or(0))?;
    let human = || {
        let best: Vec<String> = out
            .best
            .iter()
            .map(|&i| {
                let p = &out.points[i];
                format!("c={} dt={} step={}", p.params.c, p.params.dt, p.params.step)
            })
            .collect();
        format!(
            "{} points, target #IS {}, best TTST {:.4e}s at {}",
            out.points.len(),
            out.target,
            out.best_ttst(),
            best.join("; ")
        )
    };
    emit(g, &out, human)
}

fn build_dataset_cmd(g: &Global, a: BuildDatasetArgs) -> Result<()> {
    let mut cfg: DatasetConfig = load_config(g)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(v) = a.count {
        cfg.count = v;
    }
    if let Some(v) = a.n_min {
        cfg.n_min = v;
    }
    if let Some(v) = a.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = a.shots_per_point {
        cfg.grid.shots_per_point = v;
    }
    let records = build_dataset(&cfg)?;
    let summary = json!({ "graphs": cfg.count, "records": records.len(), "out": g.out });
    let human = || format!("{} records from {} graphs", records.len(), cfg.count);
    emit_artifact(g, |w| Ok(write_dataset(&records, w)?), summary, human)
}

fn train_estimator_cmd(g: &Global, a: TrainEstimatorArgs) -> Result<()> {
    let f = File::open(&a.dataset).with_context(|| format!("cannot open {}", a.dataset.display()))?;
    let records = read_dataset(BufReader::new(f)).with_context(|| format!("cannot parse {}", a.dataset.display()))?;
    let mut cfg: EstimatorConfig = load_config(g)?;
    if let Some(s) = g.seed {
        cfg.trees.seed = s;
    }
    let model = train_estimator(&records, &cfg)?;
    let r = model.report.clone();
    let human = || {
        let rmse =
            r.holdout_rmse.map(|e| format!(", holdout RMSE {:.3} {:.3} {:.3}", e[0], e[1], e[2])).unwrap_or_default();
        format!("trained on {} records ({} held out){rmse}", r.n_train, r.n_holdout)
    };
    emit_model(g, &model, serde_json::to_value(&r)?, human)
}

/// Models go to `--out` or stdout; the report is printed only when the model is written to a file.
fn emit_model(
    g: &Global,
    model: &impl Serialize,
    report: serde_json::Value,
    human: impl FnOnce() -> String,
) -> Result<()> {
    emit_artifact(
        g,
        |w| {
            serde_json::to_writer_pretty(&mut *w, model)?;
            writeln!(w)?;
            Ok(())
        },
        report,
        human,
    )
}

fn measure_latency_cmd(g: &Global, a: MeasureLatencyArgs) -> Result<()> {
    let mut cfg: LatencyConfig = load_config(g)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(v) = a.sizes {
        cfg.sizes = v;
    }
    if let Some(v) = a.steps {
        cfg.steps = v;
    }
    if let Some(v) = a.repeats {
        cfg.repeats = v;
    }
    let rows = measure_latency(&cfg)?;
    let wide = rows.iter().filter(|r| r.label == EngineKind::Wide).count();
    let summary = json!({ "cells": rows.len(), "wide": wide, "light": rows.len() - wide, "out": g.out });
    let human = || format!("{} cells: wide faster in {wide}, light in {}", rows.len(), rows.len() - wide);
    emit_artifact(g, |w| Ok(write_latency_csv(&rows, w)?), summary, human)
}

fn train_selector_cmd(g: &Global, a: TrainSelectorArgs) -> Result<()> {
    let f = File::open(&a.latency).with_context(|| format!("cannot open {}", a.latency.display()))?;
    let rows = read_latency_csv(BufReader::new(f)).with_context(|| format!("cannot parse {}", a.latency.display()))?;
    let mut cfg: SelectorConfig = load_config(g)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    let model = train_selector(&rows, &cfg)?;
    let r = model.report.clone();
    let human = || {
        let hold = r.holdout_accuracy.map(|a| format!(", holdout accuracy {a:.3}")).unwrap_or_default();
        format!("trained on {} rows, train accuracy {:.3}{hold}", r.n_train, r.train_accuracy)
    };
    emit_model(g, &model, serde_json::to_value(&r)?, human)
}

#[derive(Serialize)]
struct TdmaRunOutput<'a> {
    n_s: usize,
    radius: f64,
    tree_depth: usize,
    total_slots: usize,
    valid: bool,
    schedule: sbmis::tdma::Schedule,
    trace: &'a [sbmis::tdma::SlotTrace],
}

fn tdma_run_cmd(g: &Global, a: TdmaRunArgs) -> Result<()> {
    let seed = g.seed.unwrap_or(0);
    let cond = match a.radius {
        Some(r) => Condition::radius(a.ns, r),
        None => Condition::class(a.ns, a.class),
    };
    let field = cond.field(seed)?;
    let solver: Box<dyn MisAlgorithm> =
        if a.baseline { Box::new(BaselineSolver) } else { Box::new(build_solver(g, &a.solver)?) };
    let mut s = Scheduler::new(field, seed)?;
    let schedule = s.run(solver.as_ref())?;
    let valid = validate_schedule(s.field(), s.tree(), s.interference(), &schedule);
    if let Err(v) = &valid {
        bail!("invalid schedule: {v}");
    }
    let out = TdmaRunOutput {
        n_s: a.ns,
        radius: s.field().radius,
        tree_depth: s.tree().depth(),
        total_slots: schedule.total_slots(),
        valid: valid.is_ok(),
        schedule,
        trace: s.trace(),
    };
    let human = || {
        format!(
            "{}: {} slots (tree depth {}) in {:.4}s with {}",
            cond.label(),
            out.total_slots,
            out.tree_depth,
            out.schedule.elapsed_s,
            solver.name()
        )
    };
    emit(g, &out, human)
}

fn tdma_bench_cmd(g: &Global, a: TdmaBenchArgs) -> Result<()> {
    let mut conditions = Vec::new();
    for &n in &a.ns {
        match &a.radius {
            Some(rs) => conditions.extend(rs.iter().map(|&r| Condition::radius(n, r))),
            None => conditions.extend(a.class.iter().map(|&c| Condition::class(n, c))),
        }
    }
    let sb = build_solver(g, &a.solver)?;
    let report = benchmark(&conditions, &[&sb, &BaselineSolver], a.instances, g.seed.unwrap_or(0))?;
    if let Some(bad) = report.runs.iter().find(|r| !r.valid) {
        bail!("{} produced an invalid schedule on {} instance {}", bad.solver, bad.condition, bad.instance);
    }
    if g.json {
        if let Some(p) = &g.out {
            write_bench_csv(&report.rows, create(p)?)?;
        }
        return print_json(&report);
    }
    let summary = serde_json::Value::Null;
    let human = || {
        report
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{} {}: {:.2} ± {:.2} slots, {:.4}s",
                    r.condition, r.solver, r.slots_mean, r.slots_std, r.time_mean
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    emit_artifact(g, |w| Ok(write_bench_csv(&report.rows, w)?), summary, human)
}

fn encode_j_cmd(g: &Global, a: EncodeJArgs) -> Result<()> {
    let model: IsingModel = if a.graph {
        let graph: Graph = read_json(&a.model)?;
        let cfg: SolverConfig = load_config(g)?;
        build_mis_ising(&graph, cfg.weights.unwrap_or_default())
    } else {
        read_json(&a.model)?
    };
    let enc = encode_model(&model)?;
    let out = g.out.clone().unwrap_or_else(|| a.model.with_extension("idxj"));
    let mut w = create(&out)?;
    enc.write_to(&mut w)?;
    w.flush()?;
    let check = EncodedJ::from_bytes(&std::fs::read(&out)?)?;
    if check != enc {
        bail!("read-back of {} differs", out.display());
    }
    let summary = json!({
        "n": enc.n(),
        "n_v": enc.table().len(),
        "bits_per_entry": enc.bits_per_entry(),
        "table": enc.table().values(),
        "payload_bytes": enc.payload_bytes(),
        "dense_f32_bytes": enc.dense_f32_bytes(),
        "ratio": enc.payload_bytes() as f64 / enc.dense_f32_bytes() as f64,
        "out": out,
    });
    if g.json {
        print_json(&summary)
    } else {
        println!(
            "n={} N_v={} bits={}: {} payload bytes vs {} float32 bytes (ratio {}), wrote {}",
            enc.n(),
            enc.table().len(),
            enc.bits_per_entry(),
            enc.payload_bytes(),
            enc.dense_f32_bytes(),
            enc.payload_bytes() as f64 / enc.dense_f32_bytes() as f64,
            out.display()
        );
        Ok(())
    }
}

fn serve_cmd(a: ServeArgs) -> Result<()> {
    let solver = server::load_models(a.models_dir.as_deref())?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().context("invalid --host/--port")?;
    let opts =
        server::ServeOptions { addr, static_dir: a.static_dir, idle_timeout: Duration::from_secs(a.idle_timeout) };
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(server::serve(solver, opts))
}
