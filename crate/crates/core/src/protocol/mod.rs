//! Synchronous imitation-of-the-fittest protocol under SIS contagion:
//! records, cycle stepping, traces and experiment running.

mod experiment;
mod record;
mod state;
mod trace;

pub use experiment::{
    evaluate_population, run_experiment, run_isolated, AnalysisConfig, Baseline, BudgetFn, CycleFn, ExperimentConfig, ExperimentOutput,
    GraphSource, MachineConfig, PopulationConfig, ResolvedExperiment, RunConfig, Schedule, ScheduleConfig, SisConfig,
};
pub use record::{PartialOutput, Tag};
pub use state::{IfpVariant, NetworkState, NodeMapping, Rule, SisParams};
pub use trace::{hex_digest, read_trace_rows, run_trace, write_traces_csv, RunSpec, Trace, TraceRow, TRACE_CSV_HEADER};
