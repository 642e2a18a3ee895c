//! Time-varying graphs under the synchronous-round edge convention.
//!
//! An edge `(u, t_i, v, t_{i+1})` carries whatever `u` holds at the end of
//! round `i` into `v` at round `i + 1`. With `T` instants there are `T - 1`
//! transition layers; layer `i` holds the edges leaving instant `t_i`.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed adjacency: sorted, duplicate-free out-lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    pub fn empty(n: usize) -> Self {
        Csr { offsets: vec![0; n + 1], targets: Vec::new() }
    }

    /// Build from directed pairs; duplicates collapse.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in pairs {
            lists[u as usize].push(v);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(pairs.len());
        offsets.push(0);
        for mut list in lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Csr { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Number of directed arcs.
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u as u32, v)))
    }

    pub fn to_lists(&self) -> Vec<Vec<u32>> {
        (0..self.node_count()).map(|u| self.neighbors(u).to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Layers {
    /// One adjacency shared by every instant.
    Static(Arc<Csr>),
    /// One adjacency per transition `t_i -> t_{i+1}`.
    Varying(Vec<Csr>),
}

/// A directed time-varying graph on nodes `0..n` and instants `0..times`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalGraph {
    n: usize,
    times: usize,
    layers: Layers,
}

/// A timed edge `(u, t_i, v, t_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimedEdge {
    pub u: u32,
    pub ti: u32,
    pub v: u32,
    pub tj: u32,
}

impl TimedEdge {
    pub fn new(u: u32, ti: u32, v: u32, tj: u32) -> Self {
        TimedEdge { u, ti, v, tj }
    }
}

impl TemporalGraph {
    /// Build from timed edges. Each must join an instant to its successor;
    /// same-instant, backward and multi-step edges are rejected.
    pub fn from_edges(n: usize, times: usize, edges: &[TimedEdge]) -> Result<Self> {
        if times == 0 {
            return Err(Error::param("a graph needs at least one time instant"));
        }
        let mut per_layer = vec![Vec::new(); times.saturating_sub(1)];
        for e in edges {
            check_edge(n, times, e)?;
            per_layer[e.ti as usize].push((e.u, e.v));
        }
        let layers = per_layer.iter().map(|pairs| Csr::from_pairs(n, pairs)).collect();
        Ok(TemporalGraph { n, times, layers: Layers::Varying(layers) })
    }

    /// As [`from_edges`](Self::from_edges), adding the reverse of every edge
    /// within the same transition.
    pub fn from_undirected_edges(n: usize, times: usize, edges: &[TimedEdge]) -> Result<Self> {
        let both: Vec<TimedEdge> = edges
            .iter()
            .flat_map(|e| [*e, TimedEdge::new(e.v, e.ti, e.u, e.tj)])
            .collect();
        Self::from_edges(n, times, &both)
    }

    pub(crate) fn from_static(adjacency: Arc<Csr>, times: usize) -> Self {
        TemporalGraph { n: adjacency.node_count(), times: times.max(1), layers: Layers::Static(adjacency) }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn time_count(&self) -> usize {
        self.times
    }

    /// Number of transitions, one fewer than the number of instants.
    pub fn layer_count(&self) -> usize {
        self.times - 1
    }

    pub fn is_static_storage(&self) -> bool {
        matches!(self.layers, Layers::Static(_))
    }

    /// Adjacency of the transition leaving instant `t`. A static graph
    /// returns its shared adjacency at every instant; a varying graph has
    /// no transition leaving its last instant.
    pub fn layer(&self, t: usize) -> Option<&Csr> {
        if t >= self.times {
            return None;
        }
        self.layer_unchecked(t)
    }

    fn layer_unchecked(&self, t: usize) -> Option<&Csr> {
        match &self.layers {
            Layers::Static(csr) => Some(csr),
            Layers::Varying(v) => v.get(t),
        }
    }

    /// Out-neighbors at instant `t` as owned lists.
    pub fn snapshot(&self, t: usize) -> Result<Vec<Vec<u32>>> {
        if t >= self.times {
            return Err(Error::range(format!("instant {t} outside 0..{}", self.times)));
        }
        Ok(match self.layer_unchecked(t) {
            Some(csr) => csr.to_lists(),
            None => vec![Vec::new(); self.n],
        })
    }

    /// Every timed edge, ordered by transition then source.
    pub fn edges(&self) -> Vec<TimedEdge> {
        (0..self.layer_count())
            .flat_map(|t| {
                let csr = self.layer_unchecked(t).expect("layer exists below the last instant");
                csr.arcs().map(move |(u, v)| TimedEdge::new(u, t as u32, v, t as u32 + 1)).collect::<Vec<_>>()
            })
            .collect()
    }

    /// True when every transition carries the same node-pair relation.
    pub fn is_time_invariant(&self) -> bool {
        match &self.layers {
            Layers::Static(_) => true,
            Layers::Varying(v) => v.windows(2).all(|w| w[0] == w[1]),
        }
    }

    fn check_node(&self, u: usize) -> Result<()> {
        if u >= self.n {
            return Err(Error::range(format!("node {u} outside 0..{}", self.n)));
        }
        Ok(())
    }
}

fn check_edge(n: usize, times: usize, e: &TimedEdge) -> Result<()> {
    if e.u as usize >= n || e.v as usize >= n {
        return Err(Error::param(format!("edge {}->{} names a node outside 0..{n}", e.u, e.v)));
    }
    if e.ti as usize >= times || e.tj as usize >= times {
        return Err(Error::param(format!("edge instants {}->{} outside 0..{times}", e.ti, e.tj)));
    }
    match e.tj.cmp(&e.ti) {
        std::cmp::Ordering::Equal => Err(Error::param(format!("same-instant edge at t{}", e.ti))),
        std::cmp::Ordering::Less => Err(Error::param(format!("edge runs backwards from t{} to t{}", e.ti, e.tj))),
        std::cmp::Ordering::Greater if e.tj != e.ti + 1 => Err(Error::param(format!(
            "edge from t{} to t{} skips instants; only successor edges are supported",
            e.ti, e.tj
        ))),
        _ => Ok(()),
    }
}

/// Earliest-arrival steps from a single source starting at instant `start`.
/// Entry `v` is the number of transitions needed to reach `v`, or `None`.
pub fn temporal_bfs(g: &TemporalGraph, source: usize, start: usize) -> Result<Vec<Option<u32>>> {
    temporal_reach(g, &[source], start)
}

/// Earliest-arrival steps from a set of sources. Information persists at a
/// node once it arrives, so every reached node forwards at every later
/// transition.
pub fn temporal_reach(g: &TemporalGraph, sources: &[usize], start: usize) -> Result<Vec<Option<u32>>> {
    if start >= g.times {
        return Err(Error::range(format!("start instant {start} outside 0..{}", g.times)));
    }
    let mut reach = vec![None; g.n];
    for &s in sources {
        g.check_node(s)?;
        reach[s] = Some(0);
    }
    match &g.layers {
        Layers::Static(csr) => static_bfs(csr, &mut reach, g.times - 1 - start),
        Layers::Varying(layers) => {
            let mut reached: Vec<u32> = (0..g.n as u32).filter(|&u| reach[u as usize].is_some()).collect();
            for (step, csr) in layers[start..].iter().enumerate() {
                let mut fresh = Vec::new();
                for &u in &reached {
                    for &v in csr.neighbors(u as usize) {
                        if reach[v as usize].is_none() {
                            reach[v as usize] = Some(step as u32 + 1);
                            fresh.push(v);
                        }
                    }
                }
                if reached.len() + fresh.len() == g.n {
                    break;
                }
                reached.extend(fresh);
            }
        }
    }
    Ok(reach)
}

/// With one adjacency shared by all transitions, earliest arrival is plain
/// hop distance truncated at the horizon.
fn static_bfs(csr: &Csr, reach: &mut [Option<u32>], horizon: usize) {
    let mut queue: VecDeque<u32> = (0..reach.len() as u32).filter(|&u| reach[u as usize].is_some()).collect();
    while let Some(u) = queue.pop_front() {
        let d = reach[u as usize].expect("queued nodes are reached");
        if d as usize >= horizon {
            continue;
        }
        for &v in csr.neighbors(u as usize) {
            if reach[v as usize].is_none() {
                reach[v as usize] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
}

/// Temporal diffusion diameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diameter {
    Finite(u32),
    /// Some source cannot reach every node within the graph's instants.
    Unreachable,
}

impl Diameter {
    pub fn finite(self) -> Option<u32> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Unreachable => None,
        }
    }
}

impl std::fmt::Display for Diameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diameter::Finite(d) => write!(f, "{d}"),
            Diameter::Unreachable => f.write_str("inf"),
        }
    }
}

/// Largest, over all sources, of the steps a diffusion starting at `start`
/// needs to cover every node.
pub fn diffusion_diameter(g: &TemporalGraph, start: usize) -> Result<Diameter> {
    let mut worst = 0;
    for s in 0..g.n {
        let reach = temporal_bfs(g, s, start)?;
        for r in reach {
            match r {
                Some(d) => worst = worst.max(d),
                None => return Ok(Diameter::Unreachable),
            }
        }
    }
    Ok(Diameter::Finite(worst))
}
