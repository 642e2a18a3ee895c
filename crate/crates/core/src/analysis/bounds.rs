//! The lower bound on expected emergent complexity, its constants, and the
//! conditions under which it grows without limit.
//!
//! All constants are calibrated against the enumeration rather than
//! assumed. Bounds are reported in fixed-point micro-bits so two evaluations
//! can be compared exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::prevalence::theoretical_prevalence;
use crate::error::{Error, Result};
use crate::machine::{isolated_trajectory, ComplexityIndex, EnumerationTable};
use crate::protocol::{Baseline, CycleFn};

/// Micro-bits per bit.
pub const MICRO: f64 = 1e6;

pub fn to_micro(bits: f64) -> i64 {
    (bits * MICRO).round() as i64
}

pub fn from_micro(micro: i64) -> f64 {
    micro as f64 / MICRO
}

/// `(tau - omega) lg n - omega lg x - 2 omega lg lg x - a_w - c5`.
pub fn theorem1_lower_bound(n: u64, x: u32, tau: f64, omega: f64, a_w: f64, c5: f64) -> Result<f64> {
    let (tau_term, omega_term) = bound_terms(n, x, tau, omega)?;
    Ok(tau_term - omega_term - a_w - c5)
}

/// `((tau - omega) lg n, omega lg x + 2 omega lg lg x)`.
fn bound_terms(n: u64, x: u32, tau: f64, omega: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::domain(format!("population size must be at least 2, got {n}")));
    }
    if x < 2 {
        return Err(Error::domain(format!("lg lg x is undefined for x = {x}")));
    }
    for (name, v) in [("tau", tau), ("omega", omega)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    let lg_x = (x as f64).log2();
    Ok(((tau - omega) * (n as f64).log2(), omega * lg_x + 2.0 * omega * lg_x.log2()))
}

/// Calibrated constants, each with a note on how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Proxy complexity of 0, the output of a non-halting node.
    pub c0: i64,
    pub c1: i64,
    pub c2: i64,
    /// Not used by any bound evaluated here.
    pub c3: Option<i64>,
    /// Lemma-1 constant in use (fitted unless overridden).
    pub c4: i64,
    /// `2 C_Omega + 2 C_BB`, the value the lemma's proof gives.
    pub c4_theory: i64,
    pub c6: Option<f64>,
    pub c_l: i64,
    pub c_bb: i64,
    pub c_omega: i64,
    pub c_c: i64,
    pub eps: Option<f64>,
    pub eps2: Option<f64>,
    pub notes: BTreeMap<String, String>,
}

impl BoundConstants {
    /// `C_c + C_L + C_1 + C_4 - C_0`, as the theorem states it.
    pub fn c5(&self) -> i64 {
        self.c_c + self.c_l + self.c1 + self.c4 - self.c0
    }

    /// `C_c + C_L + C_1 + C_4 + C_0`, the constant the proof's last steps
    /// actually collect. Never smaller than [`Self::c5`].
    pub fn c5_proof(&self) -> i64 {
        self.c_c + self.c_l + self.c1 + self.c4 + self.c0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("eps2", self.eps2), ("c6", self.c6)] {
            if let Some(v) = v {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::param(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// What the calibration runs over.
#[derive(Debug, Clone)]
pub struct CalibrationSpec {
    /// Network input.
    pub w: u64,
    pub step_limit: u64,
    /// Cycle schedule and its offset, for `C_c`.
    pub cycles: CycleFn,
    pub c0: u32,
    /// Arguments `0..=x_max` of the schedule are scanned.
    pub x_max: u32,
    /// Isolated runs of `1..=max_cycles` cycles are scanned for `C_1`.
    pub max_cycles: u32,
    /// Which isolated output `C_1` has to bound.
    pub baseline: Baseline,
}

/// Calibrate every constant except `C_4`, which is fitted on a population
/// ladder and passed in, and the Theorem 2 quantities.
pub fn calibrate(
    index: &ComplexityIndex,
    table: &EnumerationTable,
    spec: &CalibrationSpec,
    c4_fitted: i64,
) -> Result<BoundConstants> {
    if spec.max_cycles == 0 {
        return Err(Error::param("max_cycles must be at least 1"));
    }
    let a = |v: u64| index.complexity(v) as i64;
    let mut notes = BTreeMap::new();

    let c0 = a(0);
    notes.insert("c0".into(), "proxy complexity of 0".into());

    let c2 = index.outputs().map(|(_, l)| l as i64).min().unwrap_or(0);
    notes.insert("c2".into(), "shortest enumerated program length (cheapest output)".into());

    let c_l = index.c_l as i64;
    notes.insert("c_l".into(), "literal-fallback constant of the complexity index".into());

    let c_c = (0..=spec.x_max)
        .map(|x| a(spec.cycles.eval(x, spec.c0) as u64) - a(x as u64))
        .max()
        .unwrap_or(0)
        .max(0);
    notes.insert("c_c".into(), format!("max of A(c(x)) - A(x) over x in 0..={}, clamped at 0", spec.x_max));

    let a_w = a(spec.w);
    let mut c1 = i64::MIN;
    for e in &table.entries {
        let traj = isolated_trajectory(&e.program, spec.w, spec.max_cycles, spec.step_limit);
        for (i, r) in traj.iter().enumerate().take_while(|(_, r)| r.halted) {
            let c = i as u64 + 1;
            let out = match spec.baseline {
                Baseline::ContagionOnly => traj[0].value,
                Baseline::Reiterated => r.value,
            };
            c1 = c1.max(a(out) - e.program.len_bits() as i64 - a_w - a(c));
        }
    }
    if c1 == i64::MIN {
        return Err(Error::domain("no enumerated program halts, C1 is undefined"));
    }
    notes.insert(
        "c1".into(),
        format!(
            "max of A(iso output) - |p| - A(w) - A(c) over enumerated halting runs, c in 1..={}, {:?} baseline",
            spec.max_cycles, spec.baseline
        ),
    );

    let min_len = index.outputs().map(|(_, l)| l).min().unwrap_or(0);
    let (mut c_bb, mut c_omega) = (0i64, 0i64);
    for k in min_len..=table.max_len {
        let (bb, witness) = table.busy_beaver(k)?;
        if let Some(p) = witness {
            c_bb = c_bb.max(p.len_bits() as i64 - k as i64);
            c_omega = c_omega.max(k as i64 - a(bb));
        }
    }
    notes.insert("c_bb".into(), "max of |witness| - k over bounded Busy Beaver values, clamped at 0".into());
    notes.insert("c_omega".into(), "max of k - A(BB(k)), clamped at 0".into());
    notes.insert("c4".into(), "max deficit lg N - A(max cycle-1 output) on the calibration ladder".into());
    notes.insert("c3".into(), "not used".into());

    Ok(BoundConstants {
        c0,
        c1,
        c2,
        c3: None,
        c4: c4_fitted,
        c4_theory: 2 * c_omega + 2 * c_bb,
        c6: None,
        c_l,
        c_bb,
        c_omega,
        c_c,
        eps: None,
        eps2: None,
        notes,
    })
}

/// One evaluation of the bound, with everything needed to redo it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u64,
    pub x: u32,
    pub tau: f64,
    pub omega: f64,
    pub a_w: f64,
    /// `(tau - omega) lg N`, bits.
    pub tau_term: f64,
    /// `omega lg x + 2 omega lg lg x`, bits.
    pub omega_term: f64,
    pub c5: i64,
    pub c5_proof: i64,
    pub bound_micro: i64,
    /// The bound with the proof's constant.
    pub bound_proof_micro: i64,
    /// Measured expected emergent complexity, bits.
    pub eeac: Option<f64>,
    /// `eeac - bound`, micro-bits.
    pub margin_micro: Option<i64>,
}

impl BoundReport {
    pub fn new(n: u64, x: u32, tau: f64, omega: f64, a_w: f64, constants: &BoundConstants, eeac: Option<f64>) -> Result<Self> {
        let (tau_term, omega_term) = bound_terms(n, x, tau, omega)?;
        let c5 = constants.c5();
        let c5_proof = constants.c5_proof();
        let bound_micro = to_micro(theorem1_lower_bound(n, x, tau, omega, a_w, c5 as f64)?);
        let bound_proof_micro = to_micro(theorem1_lower_bound(n, x, tau, omega, a_w, c5_proof as f64)?);
        Ok(BoundReport {
            n,
            x,
            tau,
            omega,
            a_w,
            tau_term,
            omega_term,
            c5,
            c5_proof,
            bound_micro,
            bound_proof_micro,
            eeac,
            margin_micro: eeac.map(|e| to_micro(e) - bound_micro),
        })
    }

    pub fn bound(&self) -> f64 {
        from_micro(self.bound_micro)
    }

    pub fn margin(&self) -> Option<f64> {
        self.margin_micro.map(from_micro)
    }

    /// Recompute the bound from the stored inputs.
    pub fn is_consistent(&self) -> bool {
        theorem1_lower_bound(self.n, self.x, self.tau, self.omega, self.a_w, self.c5 as f64)
            .map(|b| to_micro(b) == self.bound_micro)
            .unwrap_or(false)
    }
}

/// Whether `exp(-1 / (m lambda))` exceeds the halting-probability term.
pub fn corollary_condition_check(m: f64, lambda: f64, omega: f64) -> Result<bool> {
    Ok(theoretical_prevalence(m, lambda)? > omega)
}

/// Smallest integer `m` in `1..=m_max` passing [`corollary_condition_check`].
pub fn smallest_m(lambda: f64, omega: f64, m_max: u32) -> Result<Option<u32>> {
    for m in 1..=m_max {
        if corollary_condition_check(m as f64, lambda, omega)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// The growth condition of the central-time theorem at measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCondition {
    pub tau: f64,
    pub omega: f64,
    /// Supremum of admissible `eps`: `tau - omega`.
    pub eps_max: f64,
    /// Reported `eps`, half the supremum.
    pub eps: Option<f64>,
    /// `(tau - omega - eps) / omega`.
    pub c: Option<f64>,
    /// `1 / C`, the largest `eps2` with `C <= 1 / eps2`.
    pub eps2: Option<f64>,
}

impl GrowthCondition {
    pub fn new(tau: f64, omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) || !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::domain(format!("need tau in [0, 1] and omega in (0, 1], got {tau}, {omega}")));
        }
        let eps_max = tau - omega;
        if eps_max <= 0.0 {
            return Ok(GrowthCondition { tau, omega, eps_max, eps: None, c: None, eps2: None });
        }
        let eps = eps_max / 2.0;
        let c = (tau - omega - eps) / omega;
        Ok(GrowthCondition { tau, omega, eps_max, eps: Some(eps), c: Some(c), eps2: Some(1.0 / c) })
    }

    pub fn holds(&self) -> bool {
        self.c.is_some()
    }
}

/// `x lg N / N^C`, the ratio `C_6` must dominate at one ladder rung.
pub fn c6_ratio(x: u32, n: u64, c: f64) -> f64 {
    let nf = n as f64;
    x as f64 * nf.log2() / nf.powf(c)
}
