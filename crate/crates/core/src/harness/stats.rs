use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::attack::Algorithm;
use crate::error::Result;
use crate::io::ResultRecord;

/// A trial and rank for which no records were produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub trial: usize,
    pub graph: String,
    pub weights: String,
    pub path_rank: usize,
    pub reason: String,
}

/// Aggregate over successful trials of one (graph, weights, rank, algorithm).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub graph: String,
    pub weights: String,
    pub path_rank: usize,
    pub algorithm: Algorithm,
    pub n: usize,
    pub skipped: usize,
    pub mean_budget: f64,
    pub se_budget: f64,
    pub mean_cost_ratio: f64,
    pub se_cost_ratio: f64,
    pub mean_wall_time_ms: f64,
}

/// Mean and standard error (sample stdev / sqrt(n)); the error is 0 below
/// two samples.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

type Key = (String, String, usize, Algorithm);

pub fn summarize(records: &[ResultRecord], skipped: &[SkipRecord]) -> Vec<SummaryStats> {
    let mut groups: BTreeMap<Key, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.graph.clone(), r.weights.clone(), r.path_rank, r.algorithm))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((graph, weights, path_rank, algorithm), rs)| {
            let column = |f: fn(&ResultRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (mean_budget, se_budget) = mean_and_se(&column(|r| r.budget));
            let (mean_cost_ratio, se_cost_ratio) = mean_and_se(&column(|r| r.cost_ratio));
            let (mean_wall_time_ms, _) = mean_and_se(&column(|r| r.wall_time_ms));
            let skipped = skipped
                .iter()
                .filter(|s| s.graph == graph && s.weights == weights && s.path_rank == path_rank)
                .count();
            SummaryStats {
                n: rs.len(),
                skipped,
                mean_budget,
                se_budget,
                mean_cost_ratio,
                se_cost_ratio,
                mean_wall_time_ms,
                graph,
                weights,
                path_rank,
                algorithm,
            }
        })
        .collect()
}

fn write_rows<W: Write, T: Serialize>(rows: &[T], header: &[&str], sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(source: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(source);
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

pub const SKIP_FIELDS: [&str; 5] = ["trial", "graph", "weights", "path_rank", "reason"];

pub const SUMMARY_FIELDS: [&str; 11] = [
    "graph",
    "weights",
    "path_rank",
    "algorithm",
    "n",
    "skipped",
    "mean_budget",
    "se_budget",
    "mean_cost_ratio",
    "se_cost_ratio",
    "mean_wall_time_ms",
];

pub fn write_skipped_csv<W: Write>(rows: &[SkipRecord], sink: W) -> Result<()> {
    write_rows(rows, &SKIP_FIELDS, sink)
}

pub fn read_skipped_csv<R: Read>(source: R) -> Result<Vec<SkipRecord>> {
    read_rows(source)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryStats], sink: W) -> Result<()> {
    write_rows(rows, &SUMMARY_FIELDS, sink)
}

pub fn read_summary_csv<R: Read>(source: R) -> Result<Vec<SummaryStats>> {
    read_rows(source)
}

/// Largest absolute difference between matching numeric fields, or `None`
/// if the two summaries do not cover the same groups.
pub fn max_summary_diff(a: &[SummaryStats], b: &[SummaryStats]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        let same_group = (&x.graph, &x.weights, x.path_rank, x.algorithm, x.n, x.skipped)
            == (&y.graph, &y.weights, y.path_rank, y.algorithm, y.n, y.skipped);
        if !same_group {
            return None;
        }
        for (p, q) in [
            (x.mean_budget, y.mean_budget),
            (x.se_budget, y.se_budget),
            (x.mean_cost_ratio, y.mean_cost_ratio),
            (x.se_cost_ratio, y.se_cost_ratio),
            (x.mean_wall_time_ms, y.mean_wall_time_ms),
        ] {
            if p.is_nan() && q.is_nan() {
                continue;
            }
            worst = worst.max((p - q).abs());
        }
    }
    Some(worst)
}
