//! Acceptance suite. Runs without the libtest harness so each criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

mod common;

use std::path::Path as FsPath;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use forcepath::attack::{self, Algorithm, AttackConfig, AttackResult};
use forcepath::graph::{path_length, yen_k_shortest, Graph, NodeId, Path};
use forcepath::graphgen::{GraphModel, WeightKind};
use forcepath::harness::{max_summary_diff, read_skipped_csv, run_experiment, summarize, ExperimentConfig, GraphSource, Selection};
use forcepath::io::{read_edge_list, read_results_csv, write_edge_list, write_results_csv};
use forcepath::lp::{self, LpModel, LpRow, LpStatus};
use forcepath::EdgeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{enumerate_paths, exhaustive_optimum, exhaustively_valid, random_instance, vertex_lp, Instance};

type Verdict = Result<String, String>;

/// One instance of the shared random set, with every algorithm's outcome.
struct Run {
    inst: Instance,
    buffer: f64,
    results: Vec<(Algorithm, Result<AttackResult, String>)>,
}

struct Shared {
    runs: Vec<Run>,
    attack_time: Duration,
}

const SHARED_GRAPHS: usize = 200;

fn shared() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let start = Instant::now();
        let mut runs = Vec::new();
        for _ in 0..SHARED_GRAPHS {
            let inst = random_instance(&mut rng, 10);
            for buffer in [0.0, 1.0] {
                let cfg = AttackConfig::with_buffer(buffer);
                let results = Algorithm::ALL
                    .iter()
                    .map(|&a| (a, attack::run(a, &inst.g, &inst.pstar, &cfg).map_err(|e| e.to_string())))
                    .collect();
                runs.push(Run {
                    inst: inst.clone(),
                    buffer,
                    results,
                });
            }
        }
        Shared {
            runs,
            attack_time: start.elapsed(),
        }
    })
}

fn result(run: &Run, algo: Algorithm) -> Result<&AttackResult, String> {
    let (_, r) = run.results.iter().find(|(a, _)| *a == algo).expect("all algorithms ran");
    r.as_ref()
        .map_err(|e| format!("{algo} failed on {} buffer={}: {e}", run.inst.label, run.buffer))
}

fn c1_optimality() -> Verdict {
    let start = Instant::now();
    let sh = shared();
    let mut worst = 0.0_f64;
    for run in &sh.runs {
        let pp = result(run, Algorithm::Pathperturb)?;
        let opt = exhaustive_optimum(&run.inst.g, &run.inst.pstar, run.buffer);
        let gap = (pp.budget - opt).abs();
        worst = worst.max(gap);
        if gap > 1e-6 {
            return Err(format!(
                "{} buffer={}: budget {} vs exhaustive optimum {opt}",
                run.inst.label, run.buffer, pp.budget
            ));
        }
    }
    let elapsed = start.elapsed() + sh.attack_time;
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}, limit 60 s"));
    }
    Ok(format!(
        "{} instances, max |gap| {worst:.2e}, {elapsed:.2?}",
        sh.runs.len()
    ))
}

fn c2_validity() -> Verdict {
    let sh = shared();
    let mut checked = 0;
    for run in &sh.runs {
        for algo in Algorithm::ALL {
            let r = result(run, algo)?;
            if !r.success {
                return Err(format!("{algo} reported failure on {}", run.inst.label));
            }
            let v = attack::verify_attack(&run.inst.g, &run.inst.pstar, &r.delta, run.buffer, 1e-9);
            if !v.ok {
                return Err(format!("{algo} on {}: {:?}", run.inst.label, v.diagnostics));
            }
            exhaustively_valid(&run.inst.g, &run.inst.pstar, r.delta.as_slice(), run.buffer, 1e-9)
                .map_err(|e| format!("{algo} on {} buffer={}: {e}", run.inst.label, run.buffer))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} attacks verified exhaustively"))
}

fn c3_dominance() -> Verdict {
    let sh = shared();
    let mut tightest = f64::INFINITY;
    let (mut positive, mut strict) = (0, 0);
    for run in &sh.runs {
        let pp = result(run, Algorithm::Pathperturb)?.budget;
        positive += usize::from(pp > 0.0);
        strict += usize::from(result(run, Algorithm::GreedyFirst)?.budget > pp + 1e-6);
        for algo in [Algorithm::GreedyFirst, Algorithm::GreedyMin] {
            let b = result(run, algo)?.budget;
            if pp > b + 1e-6 {
                return Err(format!("{}: pathperturb {pp} > {algo} {b}", run.inst.label));
            }
            tightest = tightest.min(b - pp);
        }
    }
    Ok(format!(
        "{} instances ({positive} with positive budget, {strict} where greedy_first is strictly worse), min greedy - optimal = {tightest:.3e}",
        sh.runs.len()
    ))
}

fn worked() -> (Graph, Path) {
    let (g, labels) = read_edge_list("s c 10\nc t 10\ns a 1\na t 1\ns b 1\nb a 1\n".as_bytes()).unwrap();
    let ids: Vec<NodeId> = ["s", "c", "t"].iter().map(|l| labels.node(l).unwrap()).collect();
    let pstar = Path::from_nodes(&g, ids).unwrap();
    (g, pstar)
}

fn c4_worked_instance() -> Verdict {
    let start = Instant::now();
    let (g, pstar) = worked();
    let cfg = AttackConfig::with_buffer(0.0);
    let pp = attack::pathperturb(&g, &pstar, &cfg).map_err(|e| e.to_string())?;
    let gf = attack::greedy_first(&g, &pstar, &cfg).map_err(|e| e.to_string())?;
    let ratio = pp.budget / gf.budget;
    let elapsed = start.elapsed();
    let ok = (pp.budget - 18.0).abs() <= 1e-9
        && (gf.budget - 35.0).abs() <= 1e-9
        && (ratio - 0.5143).abs() <= 1e-4
        && elapsed < Duration::from_secs(1);
    let msg = format!("pathperturb {} greedy_first {} ratio {ratio:.6} in {elapsed:.2?}", pp.budget, gf.budget);
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn experiment(model: GraphModel, weights: WeightKind, trials: usize, rank: usize, workers: usize) -> ExperimentConfig {
    ExperimentConfig {
        graph: GraphSource::Generator(model),
        weights: Some(weights),
        invert: false,
        trials,
        path_ranks: vec![rank],
        delta: Some(1.0),
        selection: Selection::UniformComponent,
        algorithms: vec![Algorithm::GreedyFirst, Algorithm::Pathperturb],
        seed: 2024,
        workers: Some(workers),
        record_wall_time: true,
        max_iterations: None,
        out: None,
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

fn c5_desk_scale_headline() -> Verdict {
    let start = Instant::now();
    let cfg = experiment(
        GraphModel::Ba { n: 500, m_attach: 5 },
        WeightKind::PoissonPlusOne { rate: 20.0 },
        20,
        50,
        workers(),
    );
    let out = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ratios: Vec<f64> = out
        .records
        .iter()
        .filter(|r| r.algorithm == Algorithm::Pathperturb)
        .map(|r| r.cost_ratio)
        .collect();
    if ratios.is_empty() {
        return Err(format!("every trial skipped: {:?}", out.skipped));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let msg = format!(
        "mean cost_ratio {mean:.4} over {} trials ({} skipped), {elapsed:.1?}",
        ratios.len(),
        out.skipped.len()
    );
    if mean < 0.9 && elapsed < Duration::from_secs(600) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_clique_parity() -> Verdict {
    let cfg = experiment(GraphModel::Complete { n: 30 }, WeightKind::Unit, 10, 20, workers());
    let out = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    let mut pairs = Vec::new();
    for r in out.records.iter().filter(|r| r.algorithm == Algorithm::Pathperturb) {
        pairs.push((r.budget, r.baseline_budget));
    }
    if pairs.len() != 10 {
        return Err(format!("{} of 10 trials produced records: {:?}", pairs.len(), out.skipped));
    }
    let mismatched: Vec<_> = pairs.iter().filter(|(p, g)| p != g).collect();
    if mismatched.is_empty() {
        let mut budgets: Vec<String> = pairs.iter().map(|(p, _)| p.to_string()).collect();
        budgets.dedup();
        Ok(format!("10/10 trials equal, budgets {{{}}}", budgets.join(",")))
    } else {
        Err(format!("unequal (pathperturb, greedy_first) budgets: {mismatched:?}"))
    }
}

fn c7_yen_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut compared = 0;
    for case in 0..100 {
        let (label, g) = common::random_small_graph(&mut rng, 10);
        let n = g.n_nodes();
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        let got = yen_k_shortest(&g, NodeId(s), NodeId(t), 10, None).map_err(|e| e.to_string())?;
        let all = enumerate_paths(&g, s, t, &common::costs(&g, None), None);
        let want = &all[..all.len().min(10)];
        if got.len() != want.len() {
            return Err(format!("case {case} {label}: {} paths vs {}", got.len(), want.len()));
        }
        for (p, (len, nodes)) in got.iter().zip(want) {
            let plen = path_length(&g, p, None).unwrap();
            if common::node_ids(p) != *nodes || plen != *len {
                return Err(format!("case {case} {label}: {p} ({plen}) vs {nodes:?} ({len})"));
            }
            compared += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}, limit 10 s"));
    }
    Ok(format!("100 graphs, {compared} paths identical, {elapsed:.2?}"))
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(Vec<usize>, f64)> {
    (0..m)
        .map(|_| {
            let mut support: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if support.is_empty() {
                support.push(rng.gen_range(0..n));
            }
            let rhs = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0..=40) as f64 / 2.0 };
            (support, rhs)
        })
        .collect()
}

fn solve_rows(n: usize, rows: &[(Vec<usize>, f64)]) -> Result<f64, String> {
    let rows = rows
        .iter()
        .map(|(s, b)| LpRow {
            support: s.iter().map(|&j| EdgeId(j)).collect(),
            rhs: *b,
        })
        .collect();
    let model = LpModel::from_rows(n, [], rows).map_err(|e| e.to_string())?;
    let sol = lp::solve_default(&model).map_err(|e| e.to_string())?;
    if sol.status != LpStatus::Optimal {
        return Err(format!("status {:?}", sol.status));
    }
    if model.max_violation(&sol.delta) > 1e-9 {
        return Err(format!("solution violates a row by {}", model.max_violation(&sol.delta)));
    }
    Ok(sol.objective_value)
}

fn c8_lp_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut worst = 0.0_f64;
    for case in 0..100 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let rows = random_rows(&mut rng, n, m);
        let got = solve_rows(n, &rows).map_err(|e| format!("lp {case}: {e}"))?;
        let want = vertex_lp(n, &rows).ok_or(format!("lp {case}: brute force found no vertex"))?;
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 1e-8 {
            return Err(format!("lp {case} {rows:?}: solve {got} vs vertices {want}"));
        }
    }
    for case in 0..100 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=5);
        let mut rows = random_rows(&mut rng, n, m + 1);
        let extra = rows.pop().unwrap();
        let before = solve_rows(n, &rows)?;
        rows.push(extra);
        let after = solve_rows(n, &rows)?;
        if after < before - 1e-9 {
            return Err(format!("pair {case}: objective fell from {before} to {after}"));
        }
    }
    Ok(format!("100 LPs match vertex enumeration (max gap {worst:.1e}), 100 nested pairs monotone"))
}

fn c9_determinism_and_round_trips() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = experiment(
        GraphModel::Er { n: 30, p: 0.2 },
        WeightKind::UniformInt { lo: 1, hi: 41 },
        12,
        2,
        1,
    );
    cfg.path_ranks = vec![2, 8];
    cfg.algorithms = Algorithm::ALL.to_vec();
    cfg.record_wall_time = false;
    let mut outputs = Vec::new();
    for (i, w) in [1, 1, 4, 4].into_iter().enumerate() {
        cfg.workers = Some(w);
        let d = dir.path().join(format!("run{i}"));
        let out = run_experiment(&cfg, Some(&d)).map_err(|e| e.to_string())?;
        outputs.push((d, out));
    }
    let bytes = |d: &FsPath, f: &str| std::fs::read(d.join(f)).map_err(|e| e.to_string());
    for f in ["results.csv", "summary.csv", "skipped.csv"] {
        let first = bytes(&outputs[0].0, f)?;
        for (d, _) in &outputs[1..] {
            if bytes(d, f)? != first {
                return Err(format!("{f} differs in {}", d.display()));
            }
        }
    }

    let (d, out) = &outputs[0];
    let csv = bytes(d, "results.csv")?;
    let records = read_results_csv(csv.as_slice()).map_err(|e| e.to_string())?;
    if records != out.records || records.is_empty() {
        return Err("results.csv does not read back to the in-memory records".into());
    }
    let mut again = Vec::new();
    write_results_csv(&records, &mut again).map_err(|e| e.to_string())?;
    if again != csv {
        return Err("results.csv is not byte-stable under read/write".into());
    }
    let skipped = read_skipped_csv(bytes(d, "skipped.csv")?.as_slice()).map_err(|e| e.to_string())?;
    let recomputed = summarize(&records, &skipped);
    match max_summary_diff(&recomputed, &out.summary) {
        Some(diff) if diff <= 1e-9 => {}
        other => return Err(format!("summary recomputed from CSV differs: {other:?}")),
    }

    let fixtures = FsPath::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/valid");
    let mut n_fixtures = 0;
    for entry in std::fs::read_dir(&fixtures).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read(&path).map_err(|e| e.to_string())?;
        let (g, labels) = read_edge_list(text.as_slice()).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut buf = Vec::new();
        write_edge_list(&g, &labels, &mut buf).map_err(|e| e.to_string())?;
        let (h, labels2) = read_edge_list(buf.as_slice()).map_err(|e| e.to_string())?;
        if h != g || labels2 != labels {
            return Err(format!("{} does not round-trip", path.display()));
        }
        n_fixtures += 1;
    }
    Ok(format!(
        "{} records byte-identical over 4 runs (workers 1,1,4,4); {n_fixtures} edge-list fixtures and CSV round-trip",
        records.len()
    ))
}

fn c10_greedy_termination() -> Verdict {
    let sh = shared();
    let mut most = 0;
    for run in &sh.runs {
        for algo in [Algorithm::GreedyFirst, Algorithm::GreedyMin] {
            // Errors here include the in-loop check on each raise.
            let r = result(run, algo)?;
            if !r.success || r.iterations > attack::DEFAULT_MAX_ITERATIONS {
                return Err(format!("{algo} on {}: {} iterations, success {}", run.inst.label, r.iterations, r.success));
            }
            most = most.max(r.iterations);
        }
    }
    Ok(format!("{} runs per greedy, at most {most} iterations", sh.runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("optimality vs exhaustive LP", c1_optimality),
        ("attack validity", c2_validity),
        ("dominance", c3_dominance),
        ("worked-instance regression", c4_worked_instance),
        ("desk-scale cost ratio", c5_desk_scale_headline),
        ("clique parity", c6_clique_parity),
        ("k-shortest-path equivalence", c7_yen_equivalence),
        ("LP solver suite", c8_lp_suite),
        ("determinism and round-trips", c9_determinism_and_round_trips),
        ("greedy termination", c10_greedy_termination),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
