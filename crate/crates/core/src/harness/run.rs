use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path as FsPath;
use std::sync::mpsc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, GraphSource, Selection};
use super::stats::{summarize, write_skipped_csv, write_summary_csv, SkipRecord, SummaryStats};
use crate::attack::{self, verify_attack, Algorithm, AttackConfig};
use crate::error::{Error, Result};
use crate::graph::{
    induced_subgraph_within_hops, largest_connected_component, nodes_at_hop_distance, yen_k_shortest, Graph,
    NodeId, Path, Subgraph,
};
use crate::graphgen::{apply_weights, generate, invert_weights, GenSpec, WeightScheme};
use crate::io::{read_edge_list_with, LabelMap, ReadOptions, ResultRecord, ResultWriter};

/// Hop-mode draws of `s` before a trial is skipped.
pub const HOP_ATTEMPTS: usize = 100;

/// Either a value or the reason a trial was skipped.
#[derive(Clone, Debug, PartialEq)]
pub enum Pick<T> {
    Chosen(T),
    Skip(String),
}

/// `s` and `t` are ids in `working.graph`.
#[derive(Clone, Debug, PartialEq)]
pub struct Endpoints {
    pub s: NodeId,
    pub t: NodeId,
    pub working: Subgraph,
}

fn distinct_pair<R: Rng>(n: usize, rng: &mut R) -> (usize, usize) {
    let s = rng.gen_range(0..n);
    let mut t = rng.gen_range(0..n - 1);
    if t >= s {
        t += 1;
    }
    (s, t)
}

/// Picks endpoints according to `mode`. `labels` resolves fixed endpoints.
pub fn select_endpoints<R: Rng>(
    g: &Graph,
    mode: &Selection,
    labels: &LabelMap,
    rng: &mut R,
) -> Result<Pick<Endpoints>> {
    if g.n_nodes() == 0 {
        return Ok(Pick::Skip("empty graph".into()));
    }
    let lcc = largest_connected_component(g)?;
    match mode {
        Selection::UniformComponent => {
            let n = lcc.graph.n_nodes();
            if n < 2 {
                return Ok(Pick::Skip("largest component has fewer than 2 nodes".into()));
            }
            let (s, t) = distinct_pair(n, rng);
            Ok(Pick::Chosen(Endpoints {
                s: NodeId(s),
                t: NodeId(t),
                working: lcc,
            }))
        }
        Selection::HopTarget { h_target, h_limit } => {
            let n = lcc.graph.n_nodes();
            for _ in 0..HOP_ATTEMPTS {
                let s = NodeId(rng.gen_range(0..n));
                let ring = nodes_at_hop_distance(&lcc.graph, s, *h_target)?;
                if ring.is_empty() {
                    continue;
                }
                let t = ring[rng.gen_range(0..ring.len())];
                let ball = induced_subgraph_within_hops(&lcc.graph, s, *h_limit)?;
                let local = |u: NodeId| ball.from_original(u).expect("ring lies inside the ball");
                let working = Subgraph {
                    original: ball.original.iter().map(|&u| lcc.to_original(u)).collect(),
                    graph: ball.graph.clone(),
                };
                return Ok(Pick::Chosen(Endpoints {
                    s: local(s),
                    t: local(t),
                    working,
                }));
            }
            Ok(Pick::Skip(format!(
                "no node {h_target} hops away after {HOP_ATTEMPTS} draws of s"
            )))
        }
        Selection::Fixed { source, target } => {
            let s = labels.resolve(source)?;
            let t = labels.resolve(target)?;
            if s == t {
                return Err(Error::arg("fixed source and target coincide"));
            }
            let (Some(ls), Some(lt)) = (lcc.from_original(s), lcc.from_original(t)) else {
                return Ok(Pick::Skip(format!(
                    "{source} and {target} are not both in the largest component"
                )));
            };
            Ok(Pick::Chosen(Endpoints {
                s: ls,
                t: lt,
                working: lcc,
            }))
        }
    }
}

/// The `k`-th shortest simple `s`→`t` path (1-based).
pub fn select_target_path(g: &Graph, s: NodeId, t: NodeId, k: usize) -> Result<Pick<Path>> {
    let mut paths = yen_k_shortest(g, s, t, k, None)?;
    if paths.len() < k {
        return Ok(Pick::Skip(format!("only {} simple paths", paths.len())));
    }
    Ok(Pick::Chosen(paths.swap_remove(k - 1)))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<ResultRecord>,
    pub skipped: Vec<SkipRecord>,
    pub summary: Vec<SummaryStats>,
}

/// Per-trial randomness: stream `trial` of ChaCha8 seeded with the master
/// seed. The first two draws seed the graph and the weights; selection
/// consumes the rest.
pub fn trial_rng(master: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64);
    rng
}

struct Context {
    cfg: ExperimentConfig,
    fixed: Option<(Graph, LabelMap)>,
    graph_desc: String,
    weights_desc: String,
    algorithms: Vec<Algorithm>,
    attack: AttackConfig,
}

#[derive(Default)]
struct TrialOutput {
    records: Vec<ResultRecord>,
    skipped: Vec<SkipRecord>,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (fixed, graph_desc) = match &cfg.graph {
            GraphSource::Generator(model) => (None, model.to_string()),
            GraphSource::File { path, merge } => {
                let f = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let loaded = read_edge_list_with(BufReader::new(f), ReadOptions { merge: *merge })?;
                let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
                (Some(loaded), name)
            }
        };
        if let (Selection::Fixed { source, target }, Some((_, labels))) = (&cfg.selection, &fixed) {
            labels.resolve(source).map_err(|e| Error::Config(e.to_string()))?;
            labels.resolve(target).map_err(|e| Error::Config(e.to_string()))?;
        }
        let mut weights_desc = match (&cfg.weights, &cfg.graph) {
            (Some(kind), _) => kind.to_string(),
            (None, GraphSource::File { .. }) => "file".to_string(),
            (None, GraphSource::Generator(_)) => "unit".to_string(),
        };
        if cfg.invert {
            weights_desc.push_str("+invert");
        }
        Ok(Context {
            cfg: cfg.clone(),
            fixed,
            graph_desc,
            weights_desc,
            algorithms: cfg.algorithm_list(),
            attack: AttackConfig {
                max_iterations: cfg.max_iterations,
                ..AttackConfig::with_buffer(cfg.delta())
            },
        })
    }

    fn skip_all(&self, trial: usize, reason: &str) -> TrialOutput {
        TrialOutput {
            records: Vec::new(),
            skipped: self
                .cfg
                .path_ranks
                .iter()
                .map(|&k| self.skip(trial, k, reason.to_string()))
                .collect(),
        }
    }

    fn skip(&self, trial: usize, path_rank: usize, reason: String) -> SkipRecord {
        SkipRecord {
            trial,
            graph: self.graph_desc.clone(),
            weights: self.weights_desc.clone(),
            path_rank,
            reason,
        }
    }

    fn trial(&self, trial: usize) -> TrialOutput {
        match self.try_trial(trial) {
            Ok(out) => out,
            Err(e) => self.skip_all(trial, &e.to_string()),
        }
    }

    fn build_graph(&self, rng: &mut ChaCha8Rng) -> Result<(Graph, LabelMap)> {
        let graph_seed = rng.next_u64();
        let weight_seed = rng.next_u64();
        let (mut g, labels) = match (&self.cfg.graph, &self.fixed) {
            (_, Some((g, labels))) => (g.clone(), labels.clone()),
            (GraphSource::Generator(model), None) => {
                let g = generate(&GenSpec {
                    model: model.clone(),
                    seed: graph_seed,
                })?;
                let labels = LabelMap::identity(g.n_nodes());
                (g, labels)
            }
            (GraphSource::File { .. }, None) => unreachable!("file graphs are loaded up front"),
        };
        if let Some(kind) = self.cfg.weights {
            g = apply_weights(&g, &WeightScheme { kind, seed: weight_seed })?;
        }
        if self.cfg.invert {
            g = invert_weights(&g)?;
        }
        Ok((g, labels))
    }

    fn try_trial(&self, trial: usize) -> Result<TrialOutput> {
        let mut rng = trial_rng(self.cfg.seed, trial);
        let (g, labels) = self.build_graph(&mut rng)?;
        let ends = match select_endpoints(&g, &self.cfg.selection, &labels, &mut rng)? {
            Pick::Chosen(e) => e,
            Pick::Skip(reason) => return Ok(self.skip_all(trial, &reason)),
        };
        let wg = &ends.working.graph;
        let label = |u: NodeId| labels.label(ends.working.to_original(u)).to_string();
        let k_max = *self.cfg.path_ranks.iter().max().expect("validated nonempty");
        let paths = yen_k_shortest(wg, ends.s, ends.t, k_max, None)?;

        let mut out = TrialOutput::default();
        for &rank in &self.cfg.path_ranks {
            let Some(pstar) = paths.get(rank - 1) else {
                out.skipped.push(self.skip(trial, rank, format!("only {} simple paths", paths.len())));
                continue;
            };
            match self.run_rank(trial, rank, wg, pstar, &label(ends.s), &label(ends.t)) {
                Ok(recs) => out.records.extend(recs),
                Err(e) => out.skipped.push(self.skip(trial, rank, e.to_string())),
            }
        }
        Ok(out)
    }

    fn run_rank(
        &self,
        trial: usize,
        rank: usize,
        g: &Graph,
        pstar: &Path,
        s: &str,
        t: &str,
    ) -> Result<Vec<ResultRecord>> {
        let baseline = attack::greedy_first(g, pstar, &self.attack)?;
        let mut recs = Vec::with_capacity(self.algorithms.len());
        for &algo in &self.algorithms {
            let res = match algo {
                Algorithm::GreedyFirst => baseline.clone(),
                other => attack::run(other, g, pstar, &self.attack)?,
            };
            if algo == Algorithm::Pathperturb {
                let v = verify_attack(g, pstar, &res.delta, self.attack.buffer, self.attack.eps);
                if !v.ok {
                    let why: Vec<String> = v.diagnostics.iter().map(ToString::to_string).collect();
                    return Err(Error::Internal(format!("verification failed: {}", why.join("; "))));
                }
            }
            let cost_ratio = if baseline.budget > 0.0 {
                res.budget / baseline.budget
            } else {
                1.0
            };
            recs.push(ResultRecord {
                trial,
                graph: self.graph_desc.clone(),
                weights: self.weights_desc.clone(),
                s: s.to_string(),
                t: t.to_string(),
                path_rank: rank,
                delta: self.attack.buffer,
                algorithm: algo,
                budget: res.budget,
                baseline_budget: baseline.budget,
                cost_ratio,
                iterations: res.iterations,
                constraints_generated: res.constraints_generated,
                wall_time_ms: if self.cfg.record_wall_time {
                    res.wall_time.as_secs_f64() * 1e3
                } else {
                    0.0
                },
                success: res.success,
            });
        }
        Ok(recs)
    }
}

/// Runs every trial of `cfg`. With `out_dir`, `results.csv` is written
/// incrementally in trial order, then `skipped.csv` and `summary.csv`.
/// Output is identical for any worker count.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&FsPath>) -> Result<ExperimentOutput> {
    let ctx = Context::new(cfg)?;
    let workers = cfg.workers.unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let mut writer = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(ResultWriter::new(File::create(dir.join("results.csv"))?)?)
        }
        None => None,
    };

    let mut output = ExperimentOutput::default();
    let mut pending: BTreeMap<usize, TrialOutput> = BTreeMap::new();
    let mut next = 0;
    let (tx, rx) = mpsc::channel::<(usize, TrialOutput)>();
    std::thread::scope(|scope| -> Result<()> {
        let ctx = &ctx;
        scope.spawn(move || {
            pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .for_each_with(tx, |tx, i| {
                        // The receiver only disappears if the writer failed.
                        let _ = tx.send((i, ctx.trial(i)));
                    })
            })
        });
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(done) = pending.remove(&next) {
                if let Some(w) = writer.as_mut() {
                    for r in &done.records {
                        w.write(r)?;
                    }
                }
                output.records.extend(done.records);
                output.skipped.extend(done.skipped);
                next += 1;
            }
        }
        Ok(())
    })?;
    if next != cfg.trials {
        return Err(Error::Internal(format!("only {next} of {} trials reported", cfg.trials)));
    }

    output.summary = summarize(&output.records, &output.skipped);
    if let Some(dir) = out_dir {
        write_skipped_csv(&output.skipped, File::create(dir.join("skipped.csv"))?)?;
        write_summary_csv(&output.summary, File::create(dir.join("summary.csv"))?)?;
    }
    Ok(output)
}
