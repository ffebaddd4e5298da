//! Weighted edge-list files and results CSV.
//!
//! Edge lists are whitespace-separated `u v [w]` lines. Labels are arbitrary
//! tokens mapped to dense node ids in order of first appearance; `w`
//! defaults to 1. `#` starts a comment line and blank lines are skipped.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::attack::Algorithm;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, NodeId};

/// Bidirectional map between file labels and node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl LabelMap {
    /// Labels `"0"`, `"1"`, ... for generated graphs.
    pub fn identity(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), NodeId(i))).collect();
        LabelMap { labels, index }
    }

    fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = NodeId(self.labels.len());
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u.0]
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<NodeId> {
        self.node(label)
            .ok_or_else(|| Error::arg(format!("unknown node label `{label}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Merge {
    Min,
    Sum,
}

impl std::str::FromStr for Merge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Merge::Min),
            "sum" => Ok(Merge::Sum),
            other => Err(Error::arg(format!("unknown merge mode `{other}`; expected min or sum"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// How to combine duplicate undirected edges; `None` rejects them.
    pub merge: Option<Merge>,
}

pub fn read_edge_list<R: BufRead>(source: R) -> Result<(Graph, LabelMap)> {
    read_edge_list_with(source, ReadOptions::default())
}

pub fn read_edge_list_with<R: BufRead>(source: R, opts: ReadOptions) -> Result<(Graph, LabelMap)> {
    let mut labels = LabelMap::default();
    let mut builder = GraphBuilder::new(0);
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let (a, b, w) = match tokens.as_slice() {
            [a, b] => (*a, *b, 1.0),
            [a, b, w] => {
                let w: f64 = w.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("weight `{w}` is not a number"),
                })?;
                (*a, *b, w)
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `u v [w]`, found {} fields", tokens.len()),
                })
            }
        };
        let invalid = |msg: String| Error::Validation { line: line_no, msg };
        if !w.is_finite() || w < 0.0 {
            return Err(invalid(format!("weight {w} must be finite and >= 0")));
        }
        if a == b {
            return Err(invalid(format!("self-loop on `{a}`")));
        }
        let u = labels.intern(a);
        let v = labels.intern(b);
        builder.ensure_nodes(labels.len());
        match builder.edge_between(u, v) {
            None => {
                builder.add_edge(u, v, w).map_err(|e| invalid(e.to_string()))?;
            }
            Some(e) => match opts.merge {
                None => return Err(invalid(format!("duplicate edge {{{a}, {b}}}"))),
                Some(Merge::Min) => builder.set_weight(e, builder.weight(e).min(w))?,
                Some(Merge::Sum) => builder.set_weight(e, builder.weight(e) + w)?,
            },
        }
    }
    Ok((builder.build(), labels))
}

/// Writes one `u v w` line per edge in edge-id order. Weights use the
/// shortest decimal form that parses back to the same `f64`.
pub fn write_edge_list<W: Write>(g: &Graph, labels: &LabelMap, mut sink: W) -> Result<()> {
    if labels.len() != g.n_nodes() {
        return Err(Error::arg(format!(
            "label map has {} entries for {} nodes",
            labels.len(),
            g.n_nodes()
        )));
    }
    for (_, e) in g.edges() {
        writeln!(sink, "{} {} {}", labels.label(e.u), labels.label(e.v), e.weight)?;
    }
    sink.flush()?;
    Ok(())
}

/// One algorithm run on one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub trial: usize,
    pub graph: String,
    pub weights: String,
    pub s: String,
    pub t: String,
    pub path_rank: usize,
    pub delta: f64,
    pub algorithm: Algorithm,
    pub budget: f64,
    pub baseline_budget: f64,
    #[serde(serialize_with = "sci17")]
    pub cost_ratio: f64,
    pub iterations: usize,
    pub constraints_generated: usize,
    pub wall_time_ms: f64,
    pub success: bool,
}

pub const RESULT_FIELDS: [&str; 15] = [
    "trial",
    "graph",
    "weights",
    "s",
    "t",
    "path_rank",
    "delta",
    "algorithm",
    "budget",
    "baseline_budget",
    "cost_ratio",
    "iterations",
    "constraints_generated",
    "wall_time_ms",
    "success",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn sci17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.16e}"))
}

/// Streams records to a CSV sink, flushing after each one.
pub struct ResultWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultWriter<W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
        inner.write_record(RESULT_FIELDS)?;
        inner.flush()?;
        Ok(ResultWriter { inner })
    }

    pub fn write(&mut self, record: &ResultRecord) -> Result<()> {
        self.inner.serialize(record)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn write_results_csv<W: Write>(records: &[ResultRecord], sink: W) -> Result<()> {
    let mut w = ResultWriter::new(sink)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

pub fn read_results_csv<R: Read>(source: R) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != RESULT_FIELDS {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected results header {header:?}"),
        });
    }
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
