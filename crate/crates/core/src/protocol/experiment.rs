//! Experiment configuration, cycle schedules and the multi-trace runner.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{IfpVariant, NodeMapping, SisParams};
use super::trace::{run_trace, RunSpec, Trace};
use crate::error::{Error, Result};
use crate::graph::{diffusion_diameter, generate_ba, read_graph, BaParams, Diameter, GraphFile, StaticNetwork, TemporalGraph};
use crate::machine::{isolated_trajectory, run_bounded, sample_population, Population, RunOutcome, DEFAULT_MAX_LEN, DEFAULT_STEP_LIMIT};
use crate::rng::{derive_seed, rng_from_seed};

const GRAPH_STREAM: u64 = 1;
const POPULATION_STREAM: u64 = 2;
const MAPPING_STREAM: u64 = 3;
const TRIAL_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    Ba {
        n: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m0: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

impl Default for GraphSource {
    fn default() -> Self {
        GraphSource::Ba { n: 64, m: 3, m0: None, seed: None }
    }
}

/// Cycle budget `f(N, t_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BudgetFn {
    Constant { value: u32 },
    /// `ceil(scale * lg N) + offset`.
    Lg {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: u32,
    },
    /// Temporal diffusion diameter at `t_z` plus `offset`.
    Diameter {
        #[serde(default)]
        offset: u32,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for BudgetFn {
    fn default() -> Self {
        BudgetFn::Lg { scale: 1.0, offset: 0 }
    }
}

/// Cycle schedule `c(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CycleFn {
    /// `c(x) = x + c0 + shift`.
    Offset {
        #[serde(default)]
        shift: u32,
    },
    /// `c(x) = slope * x + shift`.
    Linear { slope: u32, shift: u32 },
}

impl Default for CycleFn {
    fn default() -> Self {
        CycleFn::Offset { shift: 0 }
    }
}

impl CycleFn {
    pub fn eval(&self, x: u32, c0: u32) -> u32 {
        match *self {
            CycleFn::Offset { shift } => x + c0 + shift,
            CycleFn::Linear { slope, shift } => slope * x + shift,
        }
    }
}

/// What an isolated node outputs after the run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// The node keeps its first-cycle output: the same network with the
    /// contagion switched off.
    #[default]
    ContagionOnly,
    /// The node is fed its own output every cycle; any non-halting cycle
    /// makes the final output 0.
    Reiterated,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    /// Must equal the graph's node count when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineConfig {
    pub input: u64,
    pub step_limit: u64,
    pub max_len: u32,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig { input: 0, step_limit: DEFAULT_STEP_LIMIT, max_len: DEFAULT_MAX_LEN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SisConfig {
    pub nu: f64,
    pub delta: f64,
    pub variant: IfpVariant,
}

impl Default for SisConfig {
    fn default() -> Self {
        SisConfig { nu: 1.0, delta: 0.0, variant: IfpVariant::Literal }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub c0: u32,
    /// Instant `t_z` at which contagion starts.
    pub start: u32,
    pub budget: BudgetFn,
    pub cycles: CycleFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mappings: u32,
    pub trials: u32,
    pub baseline: Baseline,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { mappings: 1, trials: 1, baseline: Baseline::ContagionOnly }
    }
}

/// Calibration and stationarity settings used when a run is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Frozen `C_4`. Fitted on the calibration ladder when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c4: Option<i64>,
    pub calibration_seeds: Vec<u64>,
    pub calibration_sizes: Vec<usize>,
    pub window: usize,
    pub tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            c4: None,
            calibration_seeds: (0..10).collect(),
            calibration_sizes: (6..=12).map(|e| 1usize << e).collect(),
            window: 20,
            tolerance: 0.005,
        }
    }
}

/// A complete experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub graph: GraphSource,
    pub population: PopulationConfig,
    pub machine: MachineConfig,
    pub sis: SisConfig,
    pub schedule: ScheduleConfig,
    pub run: RunConfig,
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn sis_params(&self) -> Result<SisParams> {
        SisParams::new(self.sis.nu, self.sis.delta).map_err(|e| Error::config(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::config("no seed given"))
    }

    /// Build the graph, sample the population and fix the schedule.
    /// Relative graph paths resolve against `base_dir`.
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<ResolvedExperiment> {
        let seed = self.seed()?;
        let params = self.sis_params()?;
        if self.run.mappings == 0 || self.run.trials == 0 {
            return Err(Error::config("mappings and trials must be at least 1"));
        }
        if self.machine.step_limit == 0 {
            return Err(Error::config("step_limit must be at least 1"));
        }
        let source = match &self.graph {
            GraphSource::Ba { n, m, m0, seed: gseed } => {
                let mut p = BaParams::new(*n, *m, gseed.unwrap_or_else(|| derive_seed(seed, &[GRAPH_STREAM])));
                if let Some(m0) = m0 {
                    p.m0 = *m0;
                }
                let net = generate_ba(p).map_err(|e| Error::config(e.to_string()))?;
                GraphFile::Static { network: net, times: 1 }
            }
            GraphSource::File { path } => {
                let full = match base_dir {
                    Some(d) if path.is_relative() => d.join(path),
                    _ => path.clone(),
                };
                let f = std::fs::File::open(&full)
                    .map_err(|e| Error::config(format!("cannot open graph {}: {e}", full.display())))?;
                read_graph(std::io::BufReader::new(f))?
            }
        };
        let n = source.node_count();
        if let Some(size) = self.population.size {
            if size != n {
                return Err(Error::config(format!("population size {size} does not match graph size {n}")));
            }
        }
        if n == 0 {
            return Err(Error::config("graph has no nodes"));
        }
        let schedule = Schedule::derive(&self.schedule, &source, n)?;
        let graph = match &source {
            GraphFile::Static { network, .. } => network.over_instants(schedule.instants),
            GraphFile::Varying(g) => truncate_instants(g, schedule.instants)?,
        };
        let pop_seed = self.population.seed.unwrap_or_else(|| derive_seed(seed, &[POPULATION_STREAM]));
        let population = sample_population(n, pop_seed)?;
        let network = match source {
            GraphFile::Static { network, .. } => Some(network),
            GraphFile::Varying(_) => None,
        };
        Ok(ResolvedExperiment { config: self.clone(), seed, params, schedule, graph, network, population })
    }
}

fn truncate_instants(g: &TemporalGraph, instants: usize) -> Result<TemporalGraph> {
    if g.time_count() < instants {
        return Err(Error::config(format!(
            "schedule needs {instants} instants but the graph has {}",
            g.time_count()
        )));
    }
    let edges: Vec<_> = g.edges().into_iter().filter(|e| (e.tj as usize) < instants).collect();
    TemporalGraph::from_edges(g.node_count(), instants, &edges)
}

/// The cycle arithmetic of one experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub c0: u32,
    /// Contagion start instant `z`.
    pub start: u32,
    /// Budget `f(N, t_z)`.
    pub budget: u32,
    /// Argument `x = z + f + 2` of the cycle schedule.
    pub x: u32,
    /// Total cycles `n = c(x)`.
    pub cycles: u32,
    /// Graph instants `c(x) - c0 - 1`.
    pub instants: usize,
}

impl Schedule {
    pub fn derive(cfg: &ScheduleConfig, graph: &GraphFile, n: usize) -> Result<Self> {
        let z = cfg.start;
        let f = match &cfg.budget {
            BudgetFn::Constant { value } => *value,
            BudgetFn::Lg { scale, offset } => {
                let lg = if n > 1 { (n as f64).log2() } else { 0.0 };
                (scale * lg).ceil().max(0.0) as u32 + offset
            }
            BudgetFn::Diameter { offset } => {
                let g = match graph {
                    GraphFile::Static { network, .. } => network.over_instants(z as usize + n + 1),
                    GraphFile::Varying(g) => g.clone(),
                };
                if z as usize >= g.time_count() {
                    return Err(Error::config(format!("start instant {z} is outside the graph")));
                }
                match diffusion_diameter(&g, z as usize)? {
                    Diameter::Finite(d) => d + offset,
                    Diameter::Unreachable => {
                        return Err(Error::config(format!("diffusion diameter from t{z} is infinite")))
                    }
                }
            }
        };
        Self::from_parts(cfg.c0, z, f, &cfg.cycles)
    }

    /// Check the schedule inequalities and size the run.
    pub fn from_parts(c0: u32, start: u32, budget: u32, cycles: &CycleFn) -> Result<Self> {
        let x = start + budget + 2;
        for y in 0..x {
            if cycles.eval(y + 1, c0) < cycles.eval(y, c0) {
                return Err(Error::config(format!("c(x) decreases between x={y} and x={}", y + 1)));
            }
        }
        let cx = cycles.eval(x, c0);
        let need = c0 + x;
        if cx < need {
            return Err(Error::config(format!(
                "c(z + f + 2) >= c0 + z + f + 2 fails: c({x}) = {cx} < {need}"
            )));
        }
        Ok(Schedule { c0, start, budget, x, cycles: cx, instants: (cx - c0 - 1) as usize })
    }

    /// Last graph instant of the run.
    pub fn last_instant(&self) -> usize {
        self.instants - 1
    }
}

/// A configuration with its graph, population and schedule materialized.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub params: SisParams,
    pub schedule: Schedule,
    pub graph: TemporalGraph,
    /// Present when the graph is static.
    pub network: Option<StaticNetwork>,
    pub population: Population,
}

/// Traces plus the per-member evaluations they were built from.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub schedule: Schedule,
    pub outcomes: Vec<RunOutcome>,
    /// Final isolated output of each population member.
    pub isolated: Vec<u64>,
    /// Ordered by mapping, then trial.
    pub traces: Vec<Trace>,
}

/// Evaluate every member once on the network input.
pub fn evaluate_population(population: &Population, input: u64, step_limit: u64) -> Result<Vec<RunOutcome>> {
    population.members.par_iter().map(|p| run_bounded(p, input, step_limit)).collect()
}

/// Final output of each member run alone for `cycles` cycles, each fed its
/// previous output. A cycle that does not halt makes the final output 0.
pub fn run_isolated(population: &Population, input: u64, cycles: u32, step_limit: u64) -> Result<Vec<u64>> {
    if cycles == 0 {
        return Err(Error::param("cycles must be at least 1"));
    }
    Ok(population
        .members
        .par_iter()
        .map(|p| {
            let traj = isolated_trajectory(p, input, cycles, step_limit);
            let last = traj.last().expect("at least one cycle");
            if traj.len() == cycles as usize && last.halted {
                last.value
            } else {
                0
            }
        })
        .collect())
}

pub fn run_experiment(exp: &ResolvedExperiment) -> Result<ExperimentOutput> {
    let cfg = &exp.config;
    let outcomes = evaluate_population(&exp.population, cfg.machine.input, cfg.machine.step_limit)?;
    let values: Vec<u64> = outcomes.iter().map(|o| o.value).collect();
    let isolated = match cfg.run.baseline {
        Baseline::ContagionOnly => values.clone(),
        Baseline::Reiterated => run_isolated(&exp.population, cfg.machine.input, exp.schedule.cycles, cfg.machine.step_limit)?,
    };
    let spec = RunSpec {
        graph: &exp.graph,
        params: exp.params,
        variant: cfg.sis.variant,
        input: cfg.machine.input,
        contagion_start: exp.schedule.start as usize,
    };
    let n = exp.population.len();
    let mappings: Vec<NodeMapping> = (0..cfg.run.mappings)
        .map(|j| {
            let mut rng = rng_from_seed(derive_seed(exp.seed, &[MAPPING_STREAM, j as u64]));
            NodeMapping::random(n, exp.schedule.c0, exp.schedule.cycles, &mut rng)
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(u32, u32)> = (0..cfg.run.mappings).flat_map(|j| (0..cfg.run.trials).map(move |k| (j, k))).collect();
    let traces = jobs
        .par_iter()
        .map(|&(j, k)| {
            let s = derive_seed(exp.seed, &[TRIAL_STREAM, j as u64, k as u64]);
            run_trace(&spec, &values, &mappings[j as usize], k, j, s, &mut rng_from_seed(s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput { schedule: exp.schedule.clone(), outcomes, isolated, traces })
}
