//! Synchronous imitation-of-the-fittest dynamics under SIS contagion.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::record::{PartialOutput, Tag};
use crate::error::{Error, Result};
use crate::graph::Csr;

/// Infection probability `nu` and cure probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SisParams {
    pub nu: f64,
    pub delta: f64,
}

impl SisParams {
    pub fn new(nu: f64, delta: f64) -> Result<Self> {
        let p = SisParams { nu, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("nu", self.nu), ("delta", self.delta)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::param(format!("{name} = {x} is not a probability")));
            }
        }
        Ok(())
    }

    /// Effective spreading rate `nu / delta`; undefined without cures.
    pub fn lambda(&self) -> Option<f64> {
        (self.delta > 0.0).then(|| self.nu / self.delta)
    }
}

/// How a susceptible node behaves when it does not become infected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IfpVariant {
    /// Keep the previous record.
    #[default]
    Literal,
    /// Copy the largest value in the neighborhood but stay susceptible.
    SusceptibleImitates,
}

/// Bijection from graph nodes to population members, with the cycle offset
/// and total number of cycles of the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeMapping {
    assignment: Vec<u32>,
    pub c0: u32,
    pub cycles: u32,
}

impl NodeMapping {
    pub fn new(assignment: Vec<u32>, c0: u32, cycles: u32) -> Result<Self> {
        if cycles == 0 {
            return Err(Error::param("a run needs at least one cycle"));
        }
        let mut seen = vec![false; assignment.len()];
        for &m in &assignment {
            match seen.get_mut(m as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::param(format!("mapping is not a bijection (member {m})"))),
            }
        }
        Ok(NodeMapping { assignment, c0, cycles })
    }

    pub fn identity(n: usize, c0: u32, cycles: u32) -> Result<Self> {
        Self::new((0..n as u32).collect(), c0, cycles)
    }

    /// Uniformly random bijection (Fisher–Yates on 64-bit draws).
    pub fn random<R: Rng>(n: usize, c0: u32, cycles: u32, rng: &mut R) -> Result<Self> {
        let mut a: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i as u64) as usize;
            a.swap(i, j);
        }
        Self::new(a, c0, cycles)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Population member placed on `node`.
    pub fn member(&self, node: usize) -> usize {
        self.assignment[node] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Graph transition used by cycle `c`, if any. Cycle `c` sits at
    /// instant `c - 1 - c0`, so it reads what crossed the transition
    /// leaving instant `c - 2 - c0`.
    pub fn layer_for_cycle(&self, c: u32) -> Option<usize> {
        c.checked_sub(2 + self.c0).map(|l| l as usize)
    }

    /// Instant of cycle `c`, if the cycle falls on one.
    pub fn instant_of_cycle(&self, c: u32) -> Option<usize> {
        c.checked_sub(1 + self.c0).map(|t| t as usize)
    }
}

/// Which rule fired for a node during one contagion cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Susceptible, exposed to the maximum, infected.
    Infect,
    /// Susceptible, not exposed.
    Unexposed,
    /// Susceptible, exposed, not infected.
    Resist,
    /// Infected, cured back to its first-cycle record.
    Cure,
    /// Infected, stays infected.
    Persist,
}

/// Records of every node at the current cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    cycle: u32,
    cycles: u32,
    input: u64,
    global_max: u64,
    initial: Vec<PartialOutput>,
    current: Vec<PartialOutput>,
}

impl NetworkState {
    /// Cycle 1: every node runs on its own. Nodes attaining the largest
    /// value in the population start infected. `member_values` holds each
    /// population member's first-cycle value.
    pub fn init_cycle_one(member_values: &[u64], mapping: &NodeMapping, input: u64) -> Result<Self> {
        if member_values.len() != mapping.len() {
            return Err(Error::config(format!(
                "population of {} does not match a mapping over {} nodes",
                member_values.len(),
                mapping.len()
            )));
        }
        let values: Vec<u64> = (0..mapping.len()).map(|v| member_values[mapping.member(v)]).collect();
        let global_max = values.iter().copied().max().unwrap_or(0);
        let initial: Vec<PartialOutput> = values
            .iter()
            .enumerate()
            .map(|(v, &value)| {
                let tag = if mapping.cycles == 1 {
                    Tag::Raw
                } else if value == global_max {
                    Tag::Infected
                } else {
                    Tag::Susceptible
                };
                PartialOutput { tag, cycle: 1, input, origin: v as u32, value }
            })
            .collect();
        Ok(NetworkState { cycle: 1, cycles: mapping.cycles, input, global_max, current: initial.clone(), initial })
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    pub fn global_max(&self) -> u64 {
        self.global_max
    }

    pub fn records(&self) -> &[PartialOutput] {
        &self.current
    }

    pub fn initial(&self) -> &[PartialOutput] {
        &self.initial
    }

    /// Advance one contagion cycle. `layer` carries the edges from the
    /// previous cycle's instant into this one; `None` means no edges.
    /// Every exposed susceptible node and every infected node consumes
    /// exactly one uniform draw, in node order.
    pub fn step_cycle<R: Rng>(
        &mut self,
        layer: Option<&Csr>,
        params: SisParams,
        variant: IfpVariant,
        rng: &mut R,
    ) -> Result<Vec<Rule>> {
        let next = self.cycle + 1;
        if next >= self.cycles {
            return Err(Error::range(format!("cycle {next} is not a contagion cycle of a {}-cycle run", self.cycles)));
        }
        let n = self.current.len();
        if let Some(csr) = layer {
            if csr.node_count() != n {
                return Err(Error::config(format!("layer over {} nodes, state over {n}", csr.node_count())));
            }
        }

        // Largest value seen by each node, own record included, and the
        // origin it came with. Ties keep the node itself, then the lowest
        // sender.
        let mut seen: Vec<(u64, u32)> = self.current.iter().map(|r| (r.value, r.origin)).collect();
        if let Some(csr) = layer {
            for (u, rec) in self.current.iter().enumerate() {
                for &v in csr.neighbors(u) {
                    let slot = &mut seen[v as usize];
                    if rec.value > slot.0 {
                        *slot = (rec.value, rec.origin);
                    }
                }
            }
        }

        let mut rules = Vec::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        for (v, rec) in self.current.iter().enumerate() {
            let (max_seen, max_origin) = seen[v];
            let (rule, mut new) = match rec.tag {
                Tag::Infected => {
                    if rng.gen::<f64>() < params.delta {
                        (Rule::Cure, self.initial[v])
                    } else {
                        (Rule::Persist, *rec)
                    }
                }
                _ => {
                    let exposed = max_seen == self.global_max;
                    let imitated =
                        PartialOutput { tag: Tag::Susceptible, value: max_seen, origin: max_origin, ..*rec };
                    let idle = match variant {
                        IfpVariant::Literal => *rec,
                        IfpVariant::SusceptibleImitates => imitated,
                    };
                    if !exposed {
                        (Rule::Unexposed, idle)
                    } else if rng.gen::<f64>() < params.nu {
                        (Rule::Infect, PartialOutput { tag: Tag::Infected, ..imitated })
                    } else {
                        (Rule::Resist, idle)
                    }
                }
            };
            new.cycle = next;
            rules.push(rule);
            out.push(new);
        }
        self.current = out;
        self.cycle = next;
        Ok(rules)
    }

    /// Final outputs: the value of each node's last record.
    pub fn finalize(&self) -> Result<Vec<u64>> {
        if self.cycles > 1 && self.cycle + 1 != self.cycles {
            return Err(Error::range(format!(
                "finalize at cycle {} of a {}-cycle run; contagion cycles remain",
                self.cycle, self.cycles
            )));
        }
        Ok(self.current.iter().map(|r| r.value).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn path(n: usize) -> Csr {
        let pairs: Vec<(u32, u32)> =
            (0..n as u32 - 1).flat_map(|u| [(u, u + 1), (u + 1, u)]).collect();
        Csr::from_pairs(n, &pairs)
    }

    #[test]
    fn params_and_lambda() {
        assert_eq!(SisParams::new(0.2, 0.5).unwrap().lambda(), Some(0.4));
        assert_eq!(SisParams::new(0.2, 0.0).unwrap().lambda(), None);
        assert!(SisParams::new(1.2, 0.0).is_err());
        assert!(SisParams::new(0.5, -0.1).is_err());
    }

    #[test]
    fn mapping_must_be_bijective() {
        assert!(NodeMapping::new(vec![0, 2, 1], 0, 3).is_ok());
        assert!(NodeMapping::new(vec![0, 0, 1], 0, 3).is_err());
        assert!(NodeMapping::new(vec![0, 3, 1], 0, 3).is_err());
        assert!(NodeMapping::new(vec![0], 0, 0).is_err());
        let m = NodeMapping::random(50, 0, 3, &mut rng_from_seed(1)).unwrap();
        let mut a = m.assignment().to_vec();
        a.sort_unstable();
        assert_eq!(a, (0..50).collect::<Vec<u32>>());
    }

    #[test]
    fn cycle_layout() {
        let m = NodeMapping::identity(1, 2, 8).unwrap();
        assert_eq!(m.layer_for_cycle(3), None);
        assert_eq!(m.layer_for_cycle(4), Some(0));
        assert_eq!(m.instant_of_cycle(3), Some(0));
    }

    #[test]
    fn single_node_is_infected() {
        let m = NodeMapping::identity(1, 0, 3).unwrap();
        let s = NetworkState::init_cycle_one(&[0], &m, 0).unwrap();
        assert_eq!(s.records()[0].tag, Tag::Infected);
    }

    #[test]
    fn single_cycle_emits_raw_values() {
        let m = NodeMapping::identity(3, 0, 1).unwrap();
        let s = NetworkState::init_cycle_one(&[4, 9, 2], &m, 0).unwrap();
        assert!(s.records().iter().all(|r| r.tag == Tag::Raw));
        assert_eq!(s.finalize().unwrap(), vec![4, 9, 2]);
    }

    #[test]
    fn all_zero_values_are_all_maximal() {
        let m = NodeMapping::identity(4, 0, 3).unwrap();
        let s = NetworkState::init_cycle_one(&[0; 4], &m, 0).unwrap();
        assert!(s.records().iter().all(|r| r.tag == Tag::Infected && r.value == 0));
    }

    #[test]
    fn full_contagion_walks_the_path() {
        let m = NodeMapping::identity(4, 0, 5).unwrap();
        let mut s = NetworkState::init_cycle_one(&[1, 2, 3, 9], &m, 0).unwrap();
        let layer = path(4);
        let p = SisParams::new(1.0, 0.0).unwrap();
        let mut rng = rng_from_seed(0);
        s.step_cycle(Some(&layer), p, IfpVariant::Literal, &mut rng).unwrap();
        assert_eq!(s.records().iter().map(|r| r.value).collect::<Vec<_>>(), vec![1, 2, 9, 9]);
        assert_eq!(s.records()[2].origin, 3);
        s.step_cycle(Some(&layer), p, IfpVariant::Literal, &mut rng).unwrap();
        s.step_cycle(Some(&layer), p, IfpVariant::Literal, &mut rng).unwrap();
        assert!(s.step_cycle(Some(&layer), p, IfpVariant::Literal, &mut rng).is_err());
        assert_eq!(s.finalize().unwrap(), vec![9; 4]);
    }

    #[test]
    fn certain_cure_restores_first_cycle_records() {
        let m = NodeMapping::identity(3, 0, 6).unwrap();
        let mut s = NetworkState::init_cycle_one(&[5, 1, 2], &m, 0).unwrap();
        let layer = path(3);
        let mut rng = rng_from_seed(0);
        s.step_cycle(Some(&layer), SisParams::new(1.0, 1.0).unwrap(), IfpVariant::Literal, &mut rng).unwrap();
        assert_eq!(s.records()[1].value, 5);
        let rules =
            s.step_cycle(Some(&layer), SisParams::new(0.0, 1.0).unwrap(), IfpVariant::Literal, &mut rng).unwrap();
        assert_eq!(rules, vec![Rule::Cure, Rule::Cure, Rule::Resist]);
        assert_eq!(s.records()[1].value, 1);
        assert_eq!(s.records()[1].tag, Tag::Susceptible);
        // The source reverts to itself and stays infected.
        assert_eq!(s.records()[0].tag, Tag::Infected);
        assert_eq!(s.records()[0].value, 5);
    }

    #[test]
    fn imitating_variant_spreads_values_but_not_tags() {
        let m = NodeMapping::identity(3, 0, 4).unwrap();
        let mut s = NetworkState::init_cycle_one(&[1, 7, 9], &m, 0).unwrap();
        let layer = Csr::from_pairs(3, &[(1, 0)]);
        s.step_cycle(Some(&layer), SisParams::new(1.0, 0.0).unwrap(), IfpVariant::SusceptibleImitates, &mut rng_from_seed(0))
            .unwrap();
        assert_eq!(s.records()[0].value, 7);
        assert_eq!(s.records()[0].tag, Tag::Susceptible);
        assert_eq!(s.records()[0].origin, 1);
    }

    #[test]
    fn finalize_requires_all_contagion_cycles() {
        let m = NodeMapping::identity(2, 0, 4).unwrap();
        let s = NetworkState::init_cycle_one(&[1, 2], &m, 0).unwrap();
        assert!(s.finalize().is_err());
    }
}
