//! Plain-text edge lists.
//!
//! ```text
//! # comment lines start with '#'
//! n m
//! u v      (m lines, whitespace separated)
//! ```
//!
//! Endpoints are normally zero-based integers below `n`. Any other labels
//! are accepted too: they are mapped to dense ids in order of first
//! appearance and the mapping is returned alongside the graph.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use colorgame_core::Graph;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("missing `n m` header line")]
    MissingHeader,
    #[error("line {line}: expected two fields, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: `{text}` is not a non-negative integer")]
    BadNumber { line: usize, text: String },
    #[error("header declares {declared} edges, found {found}")]
    EdgeCount { declared: usize, found: usize },
    #[error("header declares {declared} vertices, edges use {found} distinct labels")]
    TooManyLabels { declared: usize, found: usize },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: colorgame_core::GraphError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListGraph {
    pub graph: Graph,
    /// Original label of each dense vertex id, when the file did not use
    /// plain zero-based integers.
    pub labels: Option<Vec<String>>,
}

fn fields(line: &str) -> Option<(&str, &str)> {
    let mut it = line.split_whitespace();
    let a = it.next()?;
    let b = it.next()?;
    it.next().is_none().then_some((a, b))
}

fn number(text: &str, line: usize) -> Result<usize, FormatError> {
    text.parse().map_err(|_| FormatError::BadNumber {
        line,
        text: text.to_string(),
    })
}

pub fn parse_edge_list(text: &str) -> Result<EdgeListGraph, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(FormatError::MissingHeader)?;
    let (n, m) = fields(header).ok_or_else(|| FormatError::Malformed {
        line: hline,
        text: header.to_string(),
    })?;
    let (n, m) = (number(n, hline)?, number(m, hline)?);

    let mut raw = Vec::with_capacity(m);
    for (line, l) in lines {
        let (a, b) = fields(l).ok_or_else(|| FormatError::Malformed {
            line,
            text: l.to_string(),
        })?;
        raw.push((line, a, b));
    }
    if raw.len() != m {
        return Err(FormatError::EdgeCount {
            declared: m,
            found: raw.len(),
        });
    }

    let dense = raw.iter().all(|(_, a, b)| {
        [a, b]
            .iter()
            .all(|t| t.parse::<usize>().map(|x| x < n).unwrap_or(false))
    });
    let mut pairs = Vec::with_capacity(m);
    let labels = if dense {
        for &(_, a, b) in &raw {
            pairs.push((a.parse().unwrap(), b.parse().unwrap()));
        }
        None
    } else {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut order: Vec<String> = Vec::new();
        for &(_, a, b) in &raw {
            let mut ends = [0; 2];
            for (slot, t) in ends.iter_mut().zip([a, b]) {
                *slot = *ids.entry(t).or_insert_with(|| {
                    order.push(t.to_string());
                    order.len() - 1
                });
            }
            pairs.push((ends[0], ends[1]));
        }
        if order.len() > n {
            return Err(FormatError::TooManyLabels {
                declared: n,
                found: order.len(),
            });
        }
        // isolated vertices keep their dense id as label
        for i in order.len()..n {
            order.push(format!("#{i}"));
        }
        Some(order)
    };

    for (i, &(u, v)) in pairs.iter().enumerate() {
        if u == v {
            return Err(FormatError::Graph {
                line: raw[i].0,
                source: colorgame_core::GraphError::SelfLoop { v: u },
            });
        }
    }
    let graph = Graph::from_edge_list(&pairs, n).map_err(|source| FormatError::Graph {
        line: hline,
        source,
    })?;
    Ok(EdgeListGraph { graph, labels })
}

pub fn read_edge_list(path: &Path) -> crate::Result<EdgeListGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
    Ok(parse_edge_list(&text)?)
}

/// Serializes with zero-based ids, each edge once with `u < v`.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.n(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}
