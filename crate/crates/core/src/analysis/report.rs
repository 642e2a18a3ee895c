//! CSV tables and the JSON summary written next to each experiment.
//!
//! Every table has a header row and one record per line, so it loads
//! directly into gnuplot (`set datafile separator ","`) or pandas.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::bounds::{from_micro, BoundConstants, BoundReport};
use super::measure::Measurement;
use super::prevalence::PrevalenceSeries;
use super::sis::SisEstimate;

pub const PREVALENCE_HEADER: &str = "instant,mean,mean_tagged,min,max";
pub const EEAC_LADDER_HEADER: &str = "n,seed,x,cycles,tau,omega,eeac,bound,bound_proof,margin";
pub const BOUND_REPORT_HEADER: &str =
    "n,x,tau,omega,a_w,tau_term,omega_term,c5,c5_proof,bound,bound_proof,eeac,margin";
pub const SWEEP_HEADER: &str = "lambda,m,n,trials,rho_hat,delta_star,detected,theory";

/// One row per instant from the contagion start: mean, tag-based mean, and
/// the spread across runs.
pub fn write_prevalence_csv<W: Write>(series: &PrevalenceSeries, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{PREVALENCE_HEADER}")?;
    for (i, (&m, &mt)) in series.mean.iter().zip(&series.mean_tagged).enumerate() {
        let col = series.runs.iter().map(|r| r[i]);
        let lo = col.clone().fold(f64::INFINITY, f64::min);
        let hi = col.fold(f64::NEG_INFINITY, f64::max);
        writeln!(out, "{},{m},{mt},{lo},{hi}", series.start + i)?;
    }
    Ok(())
}

pub fn write_eeac_ladder_csv<W: Write>(rows: &[Measurement], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{EEAC_LADDER_HEADER}")?;
    for m in rows {
        let b = &m.bound;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            m.n,
            m.seed,
            m.schedule.x,
            m.schedule.cycles,
            m.tau,
            m.omega,
            m.eeac,
            b.bound(),
            from_micro(b.bound_proof_micro),
            b.margin().map(|v| v.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn write_bound_report_csv<W: Write>(rows: &[BoundReport], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{BOUND_REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.x,
            r.tau,
            r.omega,
            r.a_w,
            r.tau_term,
            r.omega_term,
            r.c5,
            r.c5_proof,
            r.bound(),
            from_micro(r.bound_proof_micro),
            r.eeac.map(|v| v.to_string()).unwrap_or_default(),
            r.margin().map(|v| v.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// A sweep cell: one spreading rate on one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub m: usize,
    pub n: usize,
    pub estimate: Option<SisEstimate>,
    /// Set when the cell failed; the sweep carries on.
    pub error: Option<String>,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let theory = (-1.0 / (r.m as f64 * r.lambda)).exp();
        match &r.estimate {
            Some(e) => writeln!(
                out,
                "{},{},{},{},{},{},{},{theory}",
                r.lambda,
                r.m,
                r.n,
                e.trials,
                e.rho_hat.map(|v| v.to_string()).unwrap_or_default(),
                e.stationarity.delta_star.map(|v| v.to_string()).unwrap_or_default(),
                e.stationarity.detected
            )?,
            None => writeln!(out, "{},{},{},0,,,false,{theory}", r.lambda, r.m, r.n)?,
        }
    }
    Ok(())
}

/// Machine-readable digest of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub n: usize,
    pub x: u32,
    pub cycles: u32,
    pub instants: usize,
    pub traces: usize,
    pub tau: f64,
    pub tau_tagged: f64,
    pub omega: f64,
    /// Complexity proxy of the network input.
    pub a_w: f64,
    pub eeac: f64,
    pub stationary: Option<bool>,
    pub delta_star: Option<usize>,
    pub bound: f64,
    pub bound_proof: f64,
    pub margin: Option<f64>,
    pub constants: BoundConstants,
    /// sha256 of the trace CSV.
    pub trace_digest: String,
    /// Every quantity here is a finite-scale proxy.
    pub note: String,
}

impl RunSummary {
    pub fn new(m: &Measurement, traces: usize, constants: &BoundConstants, trace_digest: String) -> Self {
        RunSummary {
            seed: m.seed,
            n: m.n,
            x: m.schedule.x,
            cycles: m.schedule.cycles,
            instants: m.schedule.instants,
            traces,
            tau: m.tau,
            tau_tagged: m.tau_tagged,
            omega: m.omega,
            a_w: m.bound.a_w,
            eeac: m.eeac,
            stationary: m.stationarity.as_ref().map(|s| s.detected),
            delta_star: m.stationarity.as_ref().and_then(|s| s.delta_star),
            bound: m.bound.bound(),
            bound_proof: from_micro(m.bound.bound_proof_micro),
            margin: m.bound.margin(),
            constants: constants.clone(),
            trace_digest,
            note: "omega, complexity and eeac are enumeration-based proxies".to_string(),
        }
    }
}
