//! Static networks and the Barabási–Albert generator.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::temporal::{Csr, TemporalGraph};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Stream label for graph generation.
const BA_STREAM: u64 = 0xBA;

/// An undirected graph whose edge relation holds between every instant and
/// its successor. Cheap to clone; the adjacency is shared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticNetwork {
    adjacency: Arc<Csr>,
}

impl StaticNetwork {
    /// Build from undirected pairs. Self-loops and duplicates are dropped.
    pub fn from_undirected(n: usize, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(2 * pairs.len());
        for &(u, v) in pairs {
            if u as usize >= n || v as usize >= n {
                return Err(Error::param(format!("edge {u}-{v} names a node outside 0..{n}")));
            }
            if u != v {
                arcs.push((u, v));
                arcs.push((v, u));
            }
        }
        Ok(StaticNetwork { adjacency: Arc::new(Csr::from_pairs(n, &arcs)) })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.arc_count() / 2
    }

    pub fn adjacency(&self) -> &Csr {
        &self.adjacency
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        self.adjacency.neighbors(u)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|u| self.adjacency.degree(u)).collect()
    }

    /// Undirected edges with `u < v`, in adjacency order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.arcs().filter(|(u, v)| u < v)
    }

    /// View as a time-varying graph with `times` instants.
    pub fn over_instants(&self, times: usize) -> TemporalGraph {
        TemporalGraph::from_static(Arc::clone(&self.adjacency), times)
    }
}

/// Parameters of the preferential-attachment generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaParams {
    pub n: usize,
    pub m: usize,
    pub m0: usize,
    pub seed: u64,
}

impl BaParams {
    /// Seed clique of size `m`, or 2 when `m = 1`.
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        BaParams { n, m, m0: m.max(2).min(n.max(1)), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= self.m0 && self.m0 >= self.m && self.m >= 1) {
            return Err(Error::param(format!(
                "need n >= m0 >= m >= 1, got n={} m0={} m={}",
                self.n, self.m0, self.m
            )));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::param("node count exceeds u32 ids"));
        }
        Ok(())
    }

    /// Edges the generator emits: the seed clique plus `m` per later node.
    pub fn expected_edges(&self) -> usize {
        self.m0 * (self.m0 - 1) / 2 + self.m * (self.n - self.m0)
    }
}

/// Linear preferential attachment grown from an `m0`-clique.
///
/// Targets are drawn from an urn holding every edge endpoint, so a node is
/// picked with probability proportional to its degree. A repeated target is
/// redrawn, giving each new node exactly `m` distinct neighbors. A one-node
/// seed has no endpoints yet, so the second node attaches to it directly.
pub fn generate_ba(params: BaParams) -> Result<StaticNetwork> {
    params.validate()?;
    let BaParams { n, m, m0, seed } = params;
    let mut rng = rng_from_seed(derive_seed(seed, &[BA_STREAM]));
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(params.expected_edges());
    let mut urn: Vec<u32> = Vec::with_capacity(2 * params.expected_edges());

    for u in 0..m0 as u32 {
        for v in u + 1..m0 as u32 {
            pairs.push((u, v));
            urn.extend([u, v]);
        }
    }

    let mut chosen: Vec<u32> = Vec::with_capacity(m);
    for v in m0 as u32..n as u32 {
        chosen.clear();
        if urn.is_empty() {
            chosen.push(0);
        }
        while chosen.len() < m {
            let t = urn[rng.gen_range(0..urn.len() as u64) as usize];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            pairs.push((t, v));
            urn.extend([t, v]);
        }
    }
    StaticNetwork::from_undirected(n, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let g = generate_ba(BaParams { n: 1, m: 1, m0: 1, seed: 0 }).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn one_node_seed_grows_a_tree() {
        let g = generate_ba(BaParams { n: 50, m: 1, m0: 1, seed: 3 }).unwrap();
        assert_eq!(g.edge_count(), 49);
    }

    #[test]
    fn edge_count_matches_generator_loop() {
        let p = BaParams { n: 100, m: 2, m0: 3, seed: 42 };
        let g = generate_ba(p).unwrap();
        assert_eq!(g.edge_count(), 3 + 2 * 97);
        assert_eq!(g.edge_count(), p.expected_edges());
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_ba(BaParams { n: 5, m: 3, m0: 2, seed: 0 }).is_err());
        assert!(generate_ba(BaParams { n: 2, m: 1, m0: 3, seed: 0 }).is_err());
        assert!(generate_ba(BaParams { n: 5, m: 0, m0: 2, seed: 0 }).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let p = BaParams::new(500, 3, 9);
        assert_eq!(generate_ba(p).unwrap(), generate_ba(p).unwrap());
        let q = BaParams { seed: 10, ..p };
        assert_ne!(generate_ba(p).unwrap(), generate_ba(q).unwrap());
    }

    #[test]
    fn static_view_is_time_invariant() {
        let g = generate_ba(BaParams::new(200, 2, 1)).unwrap();
        let t = g.over_instants(5);
        assert!(t.is_time_invariant());
        let first = t.snapshot(0).unwrap();
        for i in 1..5 {
            assert_eq!(t.snapshot(i).unwrap(), first);
        }
    }
}
