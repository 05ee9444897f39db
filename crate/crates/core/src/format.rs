//! Line-oriented text formats for graphs and payoff tables.
//!
//! Graph files:
//!
//! ```text
//! # golden mean
//! digraph 2
//! alphabet 0 1
//! edge 0 0 label 0
//! edge 0 1 label 1
//! edge 1 0 label 0
//! ```
//!
//! Payoff files hold one `P <g_edge> <h_edge> <integer>` line per pair of edges.

use std::collections::HashSet;
use std::fmt::Write;

use thiserror::Error;

use crate::graph::{Digraph, EdgeId, GraphError, LabeledDigraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("missing `digraph <vertex_count>` header")]
    MissingHeader,
    #[error("some edges are labeled and some are not")]
    MixedLabels,
    #[error("no payoff for G-edge {g_edge} against H-edge {h_edge}")]
    MissingPayoff { g_edge: EdgeId, h_edge: EdgeId },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn at(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        reason: reason.into(),
    }
}

/// Contents of a graph file. Labels are present for all edges or none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFile {
    pub graph: Digraph,
    pub labels: Option<Vec<String>>,
    pub alphabet: Option<Vec<String>>,
}

impl GraphFile {
    /// Fails on unlabeled graphs.
    pub fn labeled(&self) -> Result<LabeledDigraph, FormatError> {
        let labels = self.labels.clone().ok_or(FormatError::MixedLabels)?;
        Ok(LabeledDigraph::new(self.graph.clone(), labels, self.alphabet.clone())?)
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| at(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| at(line, format!("bad {what} {tok:?}")))
}

fn content(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

pub fn parse_graph(text: &str) -> Result<GraphFile, FormatError> {
    let mut vertex_count: Option<usize> = None;
    let mut edges = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut alphabet: Option<Vec<String>> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = content(raw).split_whitespace();
        let Some(keyword) = toks.next() else { continue };
        match keyword {
            "digraph" => {
                if vertex_count.is_some() {
                    return Err(at(line, "second digraph header"));
                }
                vertex_count = Some(parse_num(toks.next(), line, "vertex count")?);
            }
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(at(line, "second alphabet line"));
                }
                let symbols: Vec<String> = toks.by_ref().map(str::to_string).collect();
                if symbols.is_empty() {
                    return Err(at(line, "empty alphabet"));
                }
                alphabet = Some(symbols);
            }
            "edge" => {
                let n = vertex_count.ok_or_else(|| at(line, "edge before digraph header"))?;
                let s: usize = parse_num(toks.next(), line, "source")?;
                let d: usize = parse_num(toks.next(), line, "target")?;
                for v in [s, d] {
                    if v >= n {
                        return Err(at(line, format!("vertex {v} out of range for {n} vertices")));
                    }
                }
                let label = match toks.next() {
                    None => None,
                    Some("label") => Some(toks.next().ok_or_else(|| at(line, "missing label"))?.to_string()),
                    Some(t) => return Err(at(line, format!("expected `label`, found {t:?}"))),
                };
                edges.push((s, d));
                labels.push(label);
            }
            other => return Err(at(line, format!("unknown keyword {other:?}"))),
        }
        if let Some(extra) = toks.next() {
            return Err(at(line, format!("unexpected token {extra:?}")));
        }
    }

    let vertex_count = vertex_count.ok_or(FormatError::MissingHeader)?;
    let labels = if labels.iter().all(Option::is_some) && !labels.is_empty() {
        Some(labels.into_iter().flatten().collect())
    } else if labels.iter().all(Option::is_none) {
        None
    } else {
        return Err(FormatError::MixedLabels);
    };
    Ok(GraphFile {
        graph: Digraph::new(vertex_count, edges)?,
        labels,
        alphabet,
    })
}

/// Canonical text: header, optional alphabet, then edges in id order.
pub fn serialize_graph(file: &GraphFile) -> String {
    let mut out = format!("digraph {}\n", file.graph.vertex_count());
    if let Some(a) = &file.alphabet {
        writeln!(out, "alphabet {}", a.join(" ")).unwrap();
    }
    for (e, &(s, d)) in file.graph.edges().iter().enumerate() {
        match &file.labels {
            Some(l) => writeln!(out, "edge {s} {d} label {}", l[e]).unwrap(),
            None => writeln!(out, "edge {s} {d}").unwrap(),
        }
    }
    out
}

/// `((g_edge, h_edge), payoff)`.
pub type PayoffEntry = ((EdgeId, EdgeId), i64);

/// Payoff entries, checked to cover every `(g_edge, h_edge)` pair exactly once.
pub fn parse_payoff(text: &str, g_edges: usize, h_edges: usize) -> Result<Vec<PayoffEntry>, FormatError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = content(raw).split_whitespace();
        match toks.next() {
            None => continue,
            Some("P") => {}
            Some(t) => return Err(at(line, format!("expected `P`, found {t:?}"))),
        }
        let ge: EdgeId = parse_num(toks.next(), line, "G-edge id")?;
        let he: EdgeId = parse_num(toks.next(), line, "H-edge id")?;
        let value: i64 = parse_num(toks.next(), line, "payoff")?;
        if let Some(extra) = toks.next() {
            return Err(at(line, format!("unexpected token {extra:?}")));
        }
        if ge >= g_edges || he >= h_edges {
            return Err(at(line, format!("edge pair ({ge}, {he}) out of range")));
        }
        if !seen.insert((ge, he)) {
            return Err(at(line, format!("duplicate payoff for ({ge}, {he})")));
        }
        entries.push(((ge, he), value));
    }
    for g_edge in 0..g_edges {
        for h_edge in 0..h_edges {
            if !seen.contains(&(g_edge, h_edge)) {
                return Err(FormatError::MissingPayoff { g_edge, h_edge });
            }
        }
    }
    Ok(entries)
}

/// One line per pair, `G`-edge major.
pub fn serialize_payoff(g_edges: usize, h_edges: usize, payoff: impl Fn(EdgeId, EdgeId) -> i64) -> String {
    let mut out = String::new();
    for g in 0..g_edges {
        for h in 0..h_edges {
            writeln!(out, "P {g} {h} {}", payoff(g, h)).unwrap();
        }
    }
    out
}
