//! Everything measured on one finished experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bounds::{calibrate, BoundConstants, BoundReport, CalibrationSpec};
use super::emergence::eeac;
use super::lemmas::{fit_c4, lemma1_ladder};
use super::prevalence::{detect_stationary, PrevalenceSeries, StationarityReport};
use crate::error::{Error, Result};
use crate::machine::{omega_profile, ComplexityIndex, EnumerationTable};
use crate::protocol::{ExperimentConfig, ExperimentOutput, ResolvedExperiment, Schedule};

/// Complexity index, halting-probability profile and bound constants for
/// one machine configuration.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub index: ComplexityIndex,
    /// `omega[c - 1]` is the proxy for `c` cycles.
    pub omega: Vec<f64>,
    pub constants: BoundConstants,
}

impl Calibration {
    pub fn omega_at(&self, cycles: u32) -> Result<f64> {
        let c = cycles as usize;
        if c == 0 || c > self.omega.len() {
            return Err(Error::range(format!("no halting proxy for {cycles} cycles (profile covers 1..={})", self.omega.len())));
        }
        Ok(self.omega[c - 1])
    }
}

/// Builds (or loads from `cache`) the enumeration tables for `cfg.machine`
/// and fits the constants. `x_max` and `max_cycles` bound the schedules
/// the calibration must cover.
pub fn calibrate_experiment(cfg: &ExperimentConfig, x_max: u32, max_cycles: u32, cache: Option<&Path>) -> Result<Calibration> {
    let m = &cfg.machine;
    let base = EnumerationTable::load_or_build(cache, m.max_len, 0, m.step_limit)?;
    let index = ComplexityIndex::from_table(&base);
    let table = if m.input == 0 { base } else { EnumerationTable::load_or_build(cache, m.max_len, m.input, m.step_limit)? };
    let max_cycles = max_cycles.max(1);
    let omega = omega_profile(m.input, max_cycles, m.max_len, m.step_limit)?.iter().map(|d| d.value()).collect();
    let a = &cfg.analysis;
    let c4 = match a.c4 {
        Some(c4) => c4,
        None => fit_c4(&lemma1_ladder(&a.calibration_sizes, &a.calibration_seeds, 0, m.step_limit, &index)?)?,
    };
    let spec = CalibrationSpec {
        w: m.input,
        step_limit: m.step_limit,
        cycles: cfg.schedule.cycles.clone(),
        c0: cfg.schedule.c0,
        x_max,
        max_cycles,
        baseline: cfg.run.baseline,
    };
    let constants = calibrate(&index, &table, &spec, c4)?;
    Ok(Calibration { index, omega, constants })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub n: usize,
    pub seed: u64,
    pub schedule: Schedule,
    /// Averaged value-based density at the last instant.
    pub tau: f64,
    /// Averaged tag-based density at the last instant.
    pub tau_tagged: f64,
    /// Halting-probability proxy at `c(x)` cycles.
    pub omega: f64,
    pub eeac: f64,
    pub prevalence: PrevalenceSeries,
    /// Present when the series spans two windows.
    pub stationarity: Option<StationarityReport>,
    pub bound: BoundReport,
}

/// `omega_at(c)` supplies the halting-probability proxy for `c` cycles.
pub fn measure<F: Fn(u32) -> Result<f64>>(
    exp: &ResolvedExperiment,
    out: &ExperimentOutput,
    index: &ComplexityIndex,
    omega_at: F,
    constants: &BoundConstants,
    window: usize,
    tol: f64,
) -> Result<Measurement> {
    let start = exp.schedule.start as usize;
    let stored = out.traces.first().ok_or_else(|| Error::param("no traces"))?.instant_count();
    if start >= stored {
        return Err(Error::range(format!(
            "contagion start t{start} has no stored instant (the run stores {stored})"
        )));
    }
    let prevalence = PrevalenceSeries::from_traces(&out.traces, start)?;
    let tau = prevalence.final_mean();
    let tau_tagged = prevalence.mean_tagged.last().copied().unwrap_or(0.0);
    let stationarity = if prevalence.mean.len() >= 2 * window {
        Some(detect_stationary(&prevalence.mean, window, tol)?)
    } else {
        None
    };
    let omega = omega_at(out.schedule.cycles)?;
    let e = eeac(&out.traces, &out.isolated, |v| index.complexity(v))?;
    let a_w = index.complexity(exp.config.machine.input) as f64;
    let n = exp.population.len();
    let bound = BoundReport::new(n as u64, out.schedule.x, tau, omega, a_w, constants, Some(e))?;
    Ok(Measurement {
        n,
        seed: exp.seed,
        schedule: out.schedule.clone(),
        tau,
        tau_tagged,
        omega,
        eeac: e,
        prevalence,
        stationarity,
        bound,
    })
}
