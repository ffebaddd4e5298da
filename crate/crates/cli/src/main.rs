use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use forcepath::attack::{self, verify_attack, Algorithm, AttackConfig, Diagnostic};
use forcepath::graph::{yen_k_shortest, Graph, NodeId, Path, PerturbationVector};
use forcepath::graphgen::{apply_weights, generate, invert_weights, GenSpec, GraphModel, WeightKind, WeightScheme};
use forcepath::harness::{run_experiment, ExperimentConfig};
use forcepath::io::{read_edge_list_with, write_edge_list, LabelMap, Merge, ReadOptions};
use forcepath::oracle::DEFAULT_EPS;
use forcepath::Error;

/// Minimum-cost edge perturbations that make a chosen path the shortest.
#[derive(Parser)]
#[command(name = "forcepath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic weighted graph as an edge list.
    Gen(GenArgs),
    /// Force one path on one graph.
    Attack(AttackArgs),
    /// Run a configured batch of trials.
    Experiment(ExperimentArgs),
    /// Check a perturbation against a path.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// er, ba, ws, kron, lattice or complete.
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Edges per new node (ba).
    #[arg(long)]
    m: Option<usize>,
    /// Ring degree (ws).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    rewire: Option<f64>,
    #[arg(long = "log2-n")]
    log2_n: Option<u32>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long = "kron-a")]
    kron_a: Option<f64>,
    #[arg(long = "kron-b")]
    kron_b: Option<f64>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// unit, poisson:RATE or uniform:LO:HI.
    #[arg(long, default_value = "unit")]
    weights: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphInput {
    #[arg(long)]
    graph: PathBuf,
    /// Use 1/w for similarity-weighted inputs.
    #[arg(long)]
    invert: bool,
    /// Combine duplicate edges (min or sum) instead of rejecting them.
    #[arg(long)]
    merge: Option<String>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long)]
    source: String,
    #[arg(long)]
    target: String,
    /// Target path as node labels from source to target.
    #[arg(long, num_args = 1.., conflicts_with = "path_rank", required_unless_present = "path_rank")]
    path: Option<Vec<String>>,
    /// Use the K-th shortest simple path as the target.
    #[arg(long = "path-rank")]
    path_rank: Option<usize>,
    /// Required margin; defaults to 1, or 0.1 with --invert.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value = "pathperturb")]
    algo: String,
    /// Recorded in the output; the attack itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iterations")]
    max_iterations: Option<usize>,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, num_args = 1.., required = true)]
    path: Vec<String>,
    /// JSON: an `attack` output file or a plain array with one value per edge.
    #[arg(long)]
    delta: PathBuf,
    #[arg(long = "delta-buffer", default_value_t = 1.0)]
    delta_buffer: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

enum Failure {
    Validation(String),
    Runtime(String),
    Rejected(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Rejected(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) | Failure::Rejected(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::NodeOutOfRange(..)
            | Error::InvalidPath(_)
            | Error::ProtectedEdgePerturbed { .. }
            | Error::Parse { .. }
            | Error::Validation { .. }
            | Error::Config(_) => Failure::Validation(e.to_string()),
            Error::Io(_) | Error::Csv(_) | Error::Solver(_) | Error::Internal(_) => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Validation(msg.into()))
}

fn io_failure(path: &FsPath, e: io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn need<T>(value: Option<T>, flag: &str, model: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::Validation(format!("--{flag} is required for --model {model}")))
}

fn model_from_args(a: &GenArgs) -> CliResult<GraphModel> {
    let m = a.model.as_str();
    let model = match m {
        "er" => GraphModel::Er {
            n: need(a.n, "n", m)?,
            p: need(a.p, "p", m)?,
        },
        "ba" => GraphModel::Ba {
            n: need(a.n, "n", m)?,
            m_attach: need(a.m, "m", m)?,
        },
        "ws" => GraphModel::Ws {
            n: need(a.n, "n", m)?,
            k_degree: need(a.k, "k", m)?,
            p_rewire: need(a.rewire, "rewire", m)?,
        },
        "kron" => GraphModel::Kron {
            log2_n: need(a.log2_n, "log2-n", m)?,
            density: need(a.density, "density", m)?,
            a: a.kron_a.unwrap_or(forcepath::graphgen::KRON_A),
            b: a.kron_b.unwrap_or(forcepath::graphgen::KRON_B),
        },
        "lattice" => GraphModel::Lattice {
            rows: need(a.rows, "rows", m)?,
            cols: need(a.cols, "cols", m)?,
        },
        "complete" => GraphModel::Complete { n: need(a.n, "n", m)? },
        other => return invalid(format!("unknown model `{other}`")),
    };
    model.validate()?;
    Ok(model)
}

fn open_sink(out: Option<&FsPath>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let model = model_from_args(&a)?;
    let kind: WeightKind = a.weights.parse()?;
    let g = generate(&GenSpec { model, seed: a.seed })?;
    // Weights get their own seed so changing the scheme keeps the topology.
    let g = apply_weights(&g, &WeightScheme { kind, seed: a.seed.wrapping_add(1) })?;
    let labels = LabelMap::identity(g.n_nodes());
    write_edge_list(&g, &labels, open_sink(a.out.as_deref())?)?;
    Ok(())
}

fn load_graph(input: &GraphInput) -> CliResult<(Graph, LabelMap)> {
    let merge = input.merge.as_deref().map(str::parse::<Merge>).transpose()?;
    let f = File::open(&input.graph).map_err(|e| Failure::Validation(format!("{}: {e}", input.graph.display())))?;
    let (g, labels) = read_edge_list_with(BufReader::new(f), ReadOptions { merge })?;
    let g = if input.invert { invert_weights(&g)? } else { g };
    Ok((g, labels))
}

fn path_from_labels(g: &Graph, labels: &LabelMap, nodes: &[String]) -> CliResult<Path> {
    let ids = nodes.iter().map(|l| labels.resolve(l)).collect::<Result<Vec<NodeId>, _>>()?;
    Ok(Path::from_nodes(g, ids)?)
}

#[derive(Serialize, Deserialize)]
struct DeltaEntry {
    edge: usize,
    u: String,
    v: String,
    value: f64,
}

#[derive(Serialize)]
struct AttackReport {
    algorithm: Algorithm,
    source: String,
    target: String,
    path: Vec<String>,
    path_rank: Option<usize>,
    delta_buffer: f64,
    seed: u64,
    budget: f64,
    iterations: usize,
    constraints_generated: usize,
    wall_time_ms: f64,
    success: bool,
    delta: Vec<DeltaEntry>,
}

fn sparse_delta(g: &Graph, labels: &LabelMap, delta: &PerturbationVector) -> Vec<DeltaEntry> {
    delta
        .support()
        .map(|(e, value)| {
            let edge = g.edge(e);
            DeltaEntry {
                edge: e.index(),
                u: labels.label(edge.u).to_string(),
                v: labels.label(edge.v).to_string(),
                value,
            }
        })
        .collect()
}

fn cmd_attack(a: AttackArgs) -> CliResult<()> {
    let (g, labels) = load_graph(&a.input)?;
    let s = labels.resolve(&a.source)?;
    let t = labels.resolve(&a.target)?;
    let algorithm: Algorithm = a.algo.parse()?;
    let pstar = match (&a.path, a.path_rank) {
        (Some(nodes), _) => path_from_labels(&g, &labels, nodes)?,
        (None, Some(k)) => {
            if k == 0 {
                return invalid("--path-rank must be >= 1");
            }
            let mut paths = yen_k_shortest(&g, s, t, k, None)?;
            if paths.len() < k {
                return invalid(format!(
                    "only {} simple paths between {} and {}",
                    paths.len(),
                    a.source,
                    a.target
                ));
            }
            paths.swap_remove(k - 1)
        }
        (None, None) => return invalid("one of --path or --path-rank is required"),
    };
    if pstar.source() != s || pstar.target() != t {
        return invalid("--path must run from --source to --target");
    }
    let buffer = a.delta.unwrap_or(if a.input.invert { 0.1 } else { 1.0 });
    let cfg = AttackConfig {
        max_iterations: a.max_iterations,
        ..AttackConfig::with_buffer(buffer)
    };
    let res = attack::run(algorithm, &g, &pstar, &cfg)?;
    let report = AttackReport {
        algorithm,
        source: a.source.clone(),
        target: a.target.clone(),
        path: pstar.nodes().iter().map(|&u| labels.label(u).to_string()).collect(),
        path_rank: a.path_rank,
        delta_buffer: buffer,
        seed: a.seed,
        budget: res.budget,
        iterations: res.iterations,
        constraints_generated: res.constraints_generated,
        wall_time_ms: res.wall_time.as_secs_f64() * 1e3,
        success: res.success,
        delta: sparse_delta(&g, &labels, &res.delta),
    };
    let mut sink = open_sink(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut sink, &report).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(sink).and_then(|_| sink.flush()).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> CliResult<()> {
    let mut cfg = ExperimentConfig::from_file(&a.config)?;
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    cfg.validate()?;
    let Some(out) = a.out.or_else(|| cfg.out.clone()) else {
        return invalid("an output directory is required (--out or `out` in the config)");
    };
    let result = run_experiment(&cfg, Some(&out))?;
    eprintln!(
        "{} records, {} skipped; results in {}",
        result.records.len(),
        result.skipped.len(),
        out.display()
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DeltaFile {
    Dense(Vec<f64>),
    Report { delta: Vec<DeltaEntry> },
}

fn load_delta(path: &FsPath, g: &Graph, labels: &LabelMap) -> CliResult<PerturbationVector> {
    let f = File::open(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let parsed: DeltaFile = serde_json::from_reader(BufReader::new(f))
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let values = match parsed {
        DeltaFile::Dense(v) => v,
        DeltaFile::Report { delta } => {
            let mut v = vec![0.0; g.n_edges()];
            for entry in delta {
                let (u, w) = (labels.resolve(&entry.u)?, labels.resolve(&entry.v)?);
                let Some(e) = g.edge_between(u, w) else {
                    return invalid(format!("no edge {{{}, {}}} in the graph", entry.u, entry.v));
                };
                v[e.index()] += entry.value;
            }
            v
        }
    };
    if values.len() != g.n_edges() {
        return invalid(format!("delta has {} entries for {} edges", values.len(), g.n_edges()));
    }
    // Negative entries are reported by the verifier rather than rejected here.
    Ok(PerturbationVector::from_raw(values))
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let (g, labels) = load_graph(&a.input)?;
    let pstar = path_from_labels(&g, &labels, &a.path)?;
    let delta = load_delta(&a.delta, &g, &labels)?;
    let v = verify_attack(&g, &pstar, &delta, a.delta_buffer, a.eps);
    if v.ok {
        println!("ok");
        return Ok(());
    }
    let lines: Vec<String> = v
        .diagnostics
        .iter()
        .map(|d| match d {
            Diagnostic::ViolatingPath { path, length, threshold } => {
                let nodes: Vec<&str> = path.nodes().iter().map(|&u| labels.label(u)).collect();
                format!("path [{}] has length {length} < {threshold}", nodes.join(","))
            }
            other => other.to_string(),
        })
        .collect();
    Err(Failure::Rejected(lines.join("\n")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
