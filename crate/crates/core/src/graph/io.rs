//! Line-oriented graph interchange.
//!
//! ```text
//! # comments and blank lines are ignored
//! tvg <N> <T>          directed timed edges, one per line: u t_i v t_j
//! static <N> [T]       undirected edges, one per line: u v
//! ```
//!
//! Timed edges must join an instant to its successor. A static file may
//! name its number of instants; it defaults to 1.

use std::io::{BufRead, Write};

use super::ba::StaticNetwork;
use super::temporal::{TemporalGraph, TimedEdge};
use crate::error::{Error, Result};

/// A parsed graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphFile {
    Varying(TemporalGraph),
    Static { network: StaticNetwork, times: usize },
}

impl GraphFile {
    pub fn node_count(&self) -> usize {
        match self {
            GraphFile::Varying(g) => g.node_count(),
            GraphFile::Static { network, .. } => network.node_count(),
        }
    }

    /// The graph as a time-varying graph. A static network keeps its
    /// declared instants unless `times` overrides them.
    pub fn temporal(&self, times: Option<usize>) -> TemporalGraph {
        match self {
            GraphFile::Varying(g) => g.clone(),
            GraphFile::Static { network, times: t } => network.over_instants(times.unwrap_or(*t)),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn fields(line: usize, text: &str, want: usize) -> Result<Vec<u64>> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != want {
        return Err(parse_err(line, format!("expected {want} fields, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|p| p.parse::<u64>().map_err(|_| parse_err(line, format!("not a non-negative integer: {p:?}"))))
        .collect()
}

fn to_u32(line: usize, x: u64) -> Result<u32> {
    u32::try_from(x).map_err(|_| parse_err(line, format!("{x} does not fit a node or instant id")))
}

pub fn read_graph<R: BufRead>(input: R) -> Result<GraphFile> {
    let mut header: Option<(bool, usize, usize)> = None;
    let mut timed = Vec::new();
    let mut pairs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let Some((is_static, n, _)) = header else {
            let mut it = text.split_whitespace();
            let kind = it.next().unwrap_or("");
            let rest: Vec<&str> = it.collect();
            let nums: Vec<usize> = rest
                .iter()
                .map(|p| p.parse().map_err(|_| parse_err(lineno, format!("bad header field {p:?}"))))
                .collect::<Result<_>>()?;
            header = Some(match (kind, nums.as_slice()) {
                ("tvg", [n, t]) => (false, *n, *t),
                ("static", [n]) => (true, *n, 1),
                ("static", [n, t]) => (true, *n, *t),
                _ => return Err(parse_err(lineno, "header must be `tvg <N> <T>` or `static <N> [T]`")),
            });
            continue;
        };
        if is_static {
            let f = fields(lineno, text, 2)?;
            let (u, v) = (to_u32(lineno, f[0])?, to_u32(lineno, f[1])?);
            if u as usize >= n || v as usize >= n {
                return Err(parse_err(lineno, format!("node outside 0..{n}")));
            }
            pairs.push((u, v));
        } else {
            let f = fields(lineno, text, 4)?;
            let e = TimedEdge::new(to_u32(lineno, f[0])?, to_u32(lineno, f[1])?, to_u32(lineno, f[2])?, to_u32(lineno, f[3])?);
            timed.push((lineno, e));
        }
    }
    let (is_static, n, times) = header.ok_or_else(|| parse_err(0, "missing header"))?;
    if times == 0 {
        return Err(parse_err(1, "a graph needs at least one time instant"));
    }
    if is_static {
        return Ok(GraphFile::Static { network: StaticNetwork::from_undirected(n, &pairs)?, times });
    }
    // Validate edge by edge so the error names the offending line.
    for (lineno, e) in &timed {
        TemporalGraph::from_edges(n, times, std::slice::from_ref(e)).map_err(|err| parse_err(*lineno, err.to_string()))?;
    }
    let edges: Vec<TimedEdge> = timed.into_iter().map(|(_, e)| e).collect();
    Ok(GraphFile::Varying(TemporalGraph::from_edges(n, times, &edges)?))
}

pub fn write_static<W: Write>(g: &StaticNetwork, times: usize, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "static {} {}", g.node_count(), times)?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_temporal<W: Write>(g: &TemporalGraph, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "tvg {} {}", g.node_count(), g.time_count())?;
    for e in g.edges() {
        writeln!(out, "{} {} {} {}", e.u, e.ti, e.v, e.tj)?;
    }
    Ok(())
}
