//! Toy self-delimiting machine, program sampling, and enumeration-based
//! proxies for Busy Beaver values, halting probability, and complexity.

mod complexity;
mod enumerate;
mod sample;
mod vm;

pub use complexity::{ceil_lg, complexity_proxy, literal_bits, ComplexityIndex};
pub use enumerate::{
    busy_beaver_bounded, count_with_ops, enumerate_programs, estimate_omega, halting_cycles,
    halting_set, isolated_trajectory, omega_profile, DyadicMass, EnumerationTable, TableEntry,
    DEFAULT_MAX_LEN, DEFAULT_STEP_LIMIT,
};
pub use sample::{
    sample_population, sample_population_with, sample_program, Population, ProgramSampler,
    MAX_SAMPLED_OPS,
};
pub use vm::{run_bits, run_bounded, Opcode, Program, RunOutcome, Stop, OPCODE_BITS, VM_VERSION};
