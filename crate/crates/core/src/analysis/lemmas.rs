//! Finite-scale checks of the isolated-node lemmas against sampled
//! populations and the enumeration.
//!
//! The enumeration only sees programs of at most `K` bits, so the halting
//! mass it measures is a truncation. The population checks for the
//! halting and non-halting sums therefore count only members of at most
//! `K` bits against the truncated masses, and report the untruncated sums
//! beside them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::least_squares;
use crate::machine::{halting_cycles, run_bounded, sample_population, ComplexityIndex, EnumerationTable, Population};
use crate::rng::derive_seed;

/// Largest cycle-1 output of one population against `lg N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Cell {
    pub n: usize,
    pub seed: u64,
    pub max_value: u64,
    pub proxy_bits: u32,
    /// `lg N - proxy_bits`.
    pub deficit: f64,
}

/// Population of size `n` drawn from `derive_seed(seed, [n])`.
pub fn ladder_population(n: usize, seed: u64) -> Result<Population> {
    sample_population(n, derive_seed(seed, &[n as u64]))
}

pub fn lemma1_cell(n: usize, seed: u64, w: u64, step_limit: u64, index: &ComplexityIndex) -> Result<Lemma1Cell> {
    let pop = ladder_population(n, seed)?;
    let outcomes: Vec<_> = pop.members.par_iter().map(|p| run_bounded(p, w, step_limit)).collect::<Result<_>>()?;
    let max_value = outcomes.iter().filter(|o| o.halted).map(|o| o.value).max().unwrap_or(0);
    let proxy_bits = index.complexity(max_value);
    Ok(Lemma1Cell { n, seed, max_value, proxy_bits, deficit: (n as f64).log2() - proxy_bits as f64 })
}

/// Every `(n, seed)` cell, ordered by `n` then seed.
pub fn lemma1_ladder(
    sizes: &[usize],
    seeds: &[u64],
    w: u64,
    step_limit: u64,
    index: &ComplexityIndex,
) -> Result<Vec<Lemma1Cell>> {
    sizes
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .map(|(n, s)| lemma1_cell(n, s, w, step_limit, index))
        .collect()
}

/// Smallest integer `C_4` with `deficit <= C_4` on every cell.
pub fn fit_c4(cells: &[Lemma1Cell]) -> Result<i64> {
    cells
        .iter()
        .map(|c| c.deficit.ceil() as i64)
        .max()
        .ok_or_else(|| Error::param("no cells to fit"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub c4: i64,
    /// Fraction of cells with `deficit <= C_4`.
    pub pass_fraction: f64,
    /// Worst deficit on the lower and upper halves of the ladder.
    pub lower_worst: f64,
    pub upper_worst: f64,
    /// The upper half needs no larger constant than the lower half.
    pub non_worsening: bool,
    /// Mean deficit per rung, in ladder order.
    pub rung_means: Vec<(usize, f64)>,
    /// Slope of the mean deficit against `lg N`.
    pub mean_slope: f64,
}

/// Hold `c4` fixed and evaluate it on `cells`.
pub fn check_lemma1(c4: i64, cells: &[Lemma1Cell]) -> Result<Lemma1Check> {
    let mut sizes: Vec<usize> = cells.iter().map(|c| c.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::param("need at least two ladder rungs"));
    }
    let pass = cells.iter().filter(|c| c.deficit <= c4 as f64).count();
    let worst = |ns: &[usize]| {
        cells.iter().filter(|c| ns.contains(&c.n)).map(|c| c.deficit).fold(f64::NEG_INFINITY, f64::max)
    };
    let half = sizes.len().div_ceil(2);
    let lower_worst = worst(&sizes[..half]);
    let upper_worst = worst(&sizes[sizes.len() - sizes.len() / 2..]);
    let rung_means: Vec<(usize, f64)> = sizes
        .iter()
        .map(|&n| {
            let d: Vec<f64> = cells.iter().filter(|c| c.n == n).map(|c| c.deficit).collect();
            (n, d.iter().sum::<f64>() / d.len() as f64)
        })
        .collect();
    let pts: Vec<(f64, f64)> = rung_means.iter().map(|&(n, d)| ((n as f64).log2(), d)).collect();
    Ok(Lemma1Check {
        c4,
        pass_fraction: pass as f64 / cells.len() as f64,
        lower_worst,
        upper_worst,
        non_worsening: upper_worst <= lower_worst,
        rung_means,
        mean_slope: least_squares(&pts).0,
    })
}

/// Both sides of the Gibbs-inequality step on an enumerated halting set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsReport {
    pub omega: f64,
    /// `sum |p| 2^-|p|` over halting programs.
    pub weighted_length: f64,
    /// `weighted_length / omega + lg omega`.
    pub lhs: f64,
    /// Number of enumerated programs.
    pub programs: usize,
    pub halting: usize,
    /// `lg(omega * programs)`.
    pub rhs: f64,
    /// `lg(omega * halting)`, a tighter right side.
    pub rhs_halting: f64,
    pub holds: bool,
}

/// Check on the programs of `table` that halt in every isolated cycle up
/// to `c`.
pub fn gibbs_check(table: &EnumerationTable, c: u32) -> Result<GibbsReport> {
    if c == 0 {
        return Err(Error::param("cycle budget must be at least 1"));
    }
    let lens: Vec<u32> = table
        .entries
        .par_iter()
        .filter(|e| {
            if c == 1 {
                e.outcome.halted
            } else {
                halting_cycles(&e.program, table.w, c, table.step_limit) == c
            }
        })
        .map(|e| e.program.len_bits())
        .collect();
    if lens.is_empty() {
        return Err(Error::domain("no enumerated program halts"));
    }
    let omega: f64 = lens.iter().map(|&l| (-(l as f64)).exp2()).sum();
    let weighted_length: f64 = lens.iter().map(|&l| l as f64 * (-(l as f64)).exp2()).sum();
    let lhs = weighted_length / omega + omega.log2();
    let programs = table.entries.len();
    let rhs = (omega * programs as f64).log2();
    Ok(GibbsReport {
        omega,
        weighted_length,
        lhs,
        programs,
        halting: lens.len(),
        rhs,
        rhs_halting: (omega * lens.len() as f64).log2(),
        holds: lhs <= rhs,
    })
}

/// Halting and non-halting sums of one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatedSums {
    pub n: usize,
    pub seed: u64,
    pub cycles: u32,
    pub cap: u32,
    /// `sum |p| / N` over members of at most `cap` bits halting for `cycles`.
    pub halting_length: f64,
    /// Same sum without the length cap.
    pub halting_length_all: f64,
    /// `sum C_0 / N` over members of at most `cap` bits that do not halt.
    pub nonhalting_complexity: f64,
    pub nonhalting_complexity_all: f64,
}

pub fn isolated_sums(pop: &Population, w: u64, cycles: u32, step_limit: u64, cap: u32, c0: u32) -> Result<IsolatedSums> {
    if cycles == 0 {
        return Err(Error::param("cycle budget must be at least 1"));
    }
    let per: Vec<(u32, bool)> = pop
        .members
        .par_iter()
        .map(|p| (p.len_bits(), halting_cycles(p, w, cycles, step_limit) == cycles))
        .collect();
    let n = pop.len() as f64;
    let sum = |f: &dyn Fn(u32, bool) -> f64| per.iter().map(|&(l, h)| f(l, h)).sum::<f64>() / n;
    let c0 = c0 as f64;
    Ok(IsolatedSums {
        n: pop.len(),
        seed: pop.seed,
        cycles,
        cap,
        halting_length: sum(&|l, h| if h && l <= cap { l as f64 } else { 0.0 }),
        halting_length_all: sum(&|l, h| if h { l as f64 } else { 0.0 }),
        nonhalting_complexity: sum(&|l, h| if !h && l <= cap { c0 } else { 0.0 }),
        nonhalting_complexity_all: sum(&|_, h| if h { 0.0 } else { c0 }),
    })
}

/// Halting-length sum against `omega lg N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Check {
    /// `(n, mean halting_length - omega lg n)` per rung, ladder order.
    pub slack: Vec<(usize, f64)>,
    /// Slack never grows from one rung to the next.
    pub shrinking: bool,
    /// The inequality holds without slack at the top rung.
    pub holds_at_top: bool,
}

pub fn check_lemma4(sums: &[IsolatedSums], omega: f64) -> Result<Lemma4Check> {
    let slack = per_rung(sums, |s| s.halting_length - omega * (s.n as f64).log2())?;
    let shrinking = slack.windows(2).all(|w| w[1].1 <= w[0].1);
    let holds_at_top = slack.last().map(|&(_, s)| s <= 0.0).unwrap_or(false);
    Ok(Lemma4Check { slack, shrinking, holds_at_top })
}

/// Non-halting complexity sum against `C_0 (kraft - omega)`, the truncated
/// form of `C_0 (1 - omega)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma5Check {
    pub expected: f64,
    /// Untruncated right side `C_0 (1 - omega)`, for reference.
    pub expected_untruncated: f64,
    /// `(n, mean observed)` per rung.
    pub observed: Vec<(usize, f64)>,
    /// Largest `|observed - expected|` in binomial standard errors.
    pub worst_z: f64,
}

pub fn check_lemma5(sums: &[IsolatedSums], c0: u32, kraft: f64, omega: f64) -> Result<Lemma5Check> {
    let q = kraft - omega;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("kraft - omega = {q} is not a probability")));
    }
    let c0 = c0 as f64;
    let expected = c0 * q;
    let mut worst_z: f64 = 0.0;
    for s in sums {
        let se = c0 * (q * (1.0 - q) / s.n as f64).sqrt();
        let d = (s.nonhalting_complexity - expected).abs();
        worst_z = worst_z.max(if se > 0.0 { d / se } else if d > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok(Lemma5Check {
        expected,
        expected_untruncated: c0 * (1.0 - omega),
        observed: per_rung(sums, |s| s.nonhalting_complexity)?,
        worst_z,
    })
}

fn per_rung(sums: &[IsolatedSums], f: impl Fn(&IsolatedSums) -> f64) -> Result<Vec<(usize, f64)>> {
    if sums.is_empty() {
        return Err(Error::param("no populations"));
    }
    let mut sizes: Vec<usize> = sums.iter().map(|s| s.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    Ok(sizes
        .into_iter()
        .map(|n| {
            let v: Vec<f64> = sums.iter().filter(|s| s.n == n).map(&f).collect();
            (n, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect())
}
