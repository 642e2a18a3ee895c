//! Continuous-time SIS on a static network, independent of the program
//! payload, for checking the stationary-prevalence law.
//!
//! Each infected node recovers at rate 1 and infects each neighbor at rate
//! `lambda`. Events are drawn Gillespie style: infected nodes are picked
//! with probability proportional to degree by rejection against the
//! largest degree, and an infection attempt on an already infected
//! neighbor is a phantom event. When the last infection recovers, one
//! random node is reinfected so the run samples the active state.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prevalence::{detect_stationary, StationarityReport};
use crate::error::{Error, Result};
use crate::graph::{least_squares, StaticNetwork};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SisRun {
    /// Infection rate per edge; recovery rate is 1.
    pub lambda: f64,
    /// Samples are taken at times `0, 1, ..., horizon`.
    pub horizon: u32,
    /// Fraction of nodes infected at time 0 (at least one node).
    pub initial_fraction: f64,
}

impl SisRun {
    pub fn new(lambda: f64, horizon: u32) -> Self {
        SisRun { lambda, horizon, initial_fraction: 1.0 }
    }
}

/// Density of infected nodes on the unit time grid.
pub fn simulate_sis<R: Rng>(net: &StaticNetwork, run: &SisRun, rng: &mut R) -> Result<Vec<f64>> {
    if run.lambda.is_nan() || run.lambda <= 0.0 {
        return Err(Error::domain(format!("lambda must be positive, got {}", run.lambda)));
    }
    let n = net.node_count();
    if n == 0 {
        return Err(Error::param("empty network"));
    }
    let degrees: Vec<u32> = net.degrees().iter().map(|&d| d as u32).collect();
    let k_max = degrees.iter().copied().max().unwrap_or(0).max(1) as f64;

    let mut infected: Vec<u32> = Vec::with_capacity(n);
    let mut slot = vec![u32::MAX; n];
    let mut arcs_out: u64 = 0;
    let infect = |v: u32, infected: &mut Vec<u32>, slot: &mut [u32], arcs_out: &mut u64| {
        slot[v as usize] = infected.len() as u32;
        infected.push(v);
        *arcs_out += degrees[v as usize] as u64;
    };

    let initial = ((run.initial_fraction.clamp(0.0, 1.0) * n as f64).round() as usize).max(1);
    if initial == n {
        for v in 0..n as u32 {
            infect(v, &mut infected, &mut slot, &mut arcs_out);
        }
    } else {
        while infected.len() < initial {
            let v = rng.gen_range(0..n as u64) as u32;
            if slot[v as usize] == u32::MAX {
                infect(v, &mut infected, &mut slot, &mut arcs_out);
            }
        }
    }

    let mut samples = Vec::with_capacity(run.horizon as usize + 1);
    let mut t = 0.0f64;
    while samples.len() <= run.horizon as usize {
        let recover_rate = infected.len() as f64;
        let total = recover_rate + run.lambda * arcs_out as f64;
        let dt = -(1.0 - rng.gen::<f64>()).ln() / total;
        let next = t + dt;
        while samples.len() <= run.horizon as usize && samples.len() as f64 <= next {
            samples.push(infected.len() as f64 / n as f64);
        }
        t = next;
        if rng.gen::<f64>() * total < recover_rate {
            let i = rng.gen_range(0..infected.len() as u64) as usize;
            let v = infected.swap_remove(i);
            slot[v as usize] = u32::MAX;
            if let Some(&moved) = infected.get(i) {
                slot[moved as usize] = i as u32;
            }
            arcs_out -= degrees[v as usize] as u64;
            if infected.is_empty() {
                let u = rng.gen_range(0..n as u64) as u32;
                infect(u, &mut infected, &mut slot, &mut arcs_out);
            }
        } else {
            let u = loop {
                let u = infected[rng.gen_range(0..infected.len() as u64) as usize];
                if rng.gen::<f64>() * k_max < degrees[u as usize] as f64 {
                    break u;
                }
            };
            let nbrs = net.neighbors(u as usize);
            let v = nbrs[rng.gen_range(0..nbrs.len() as u64) as usize];
            if slot[v as usize] == u32::MAX {
                infect(v, &mut infected, &mut slot, &mut arcs_out);
            }
        }
    }
    Ok(samples)
}

/// Stationary prevalence estimate at one spreading rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SisEstimate {
    pub lambda: f64,
    pub trials: u32,
    pub rho_hat: Option<f64>,
    pub stationarity: StationarityReport,
    pub mean_series: Vec<f64>,
}

/// Average `trials` independent runs and detect stationarity on the mean.
pub fn estimate_prevalence(
    net: &StaticNetwork,
    run: &SisRun,
    trials: u32,
    seed: u64,
    window: usize,
    tol: f64,
) -> Result<SisEstimate> {
    if trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    let series: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|k| simulate_sis(net, run, &mut rng_from_seed(derive_seed(seed, &[run.lambda.to_bits(), k as u64]))))
        .collect::<Result<_>>()?;
    let len = run.horizon as usize + 1;
    let mean: Vec<f64> = (0..len).map(|i| series.iter().map(|s| s[i]).sum::<f64>() / trials as f64).collect();
    let stationarity = detect_stationary(&mean, window, tol)?;
    Ok(SisEstimate { lambda: run.lambda, trials, rho_hat: stationarity.level, stationarity, mean_series: mean })
}

/// Least-squares slope of `ln rho` against `1 / lambda`.
pub fn prevalence_law_slope(points: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(l, r)| *l > 0.0 && *r > 0.0)
        .map(|&(l, r)| (1.0 / l, r.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::domain("need two positive points to fit a slope"));
    }
    Ok(least_squares(&pts).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_ba, BaParams};

    #[test]
    fn samples_cover_the_grid() {
        let net = generate_ba(BaParams::new(300, 3, 1)).unwrap();
        let s = simulate_sis(&net, &SisRun::new(0.5, 40), &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.len(), 41);
        assert_eq!(s[0], 1.0);
        assert!(s.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn subcritical_run_stays_alive_by_reflection() {
        let net = generate_ba(BaParams::new(200, 2, 2)).unwrap();
        let s = simulate_sis(&net, &SisRun::new(0.01, 30), &mut rng_from_seed(2)).unwrap();
        assert!(s[30] > 0.0 && s[30] < 0.05);
    }

    #[test]
    fn complete_graph_matches_mean_field() {
        // On K_n the stationary density is close to 1 - 1 / (lambda (n - 1)).
        let n = 200u32;
        let pairs: Vec<(u32, u32)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let net = StaticNetwork::from_undirected(n as usize, &pairs).unwrap();
        let lambda = 2.0 / (n - 1) as f64;
        let est = estimate_prevalence(&net, &SisRun::new(lambda, 200), 8, 5, 20, 0.01).unwrap();
        let rho = est.rho_hat.unwrap();
        assert!((rho - 0.5).abs() < 0.05, "{rho}");
    }

    #[test]
    fn slope_of_exact_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.2, 0.3].iter().map(|&l| (l, (-1.0 / (3.0 * l)).exp())).collect();
        assert!((prevalence_law_slope(&pts).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        assert!(prevalence_law_slope(&[(0.1, 0.2)]).is_err());
    }

    #[test]
    fn rejects_bad_lambda() {
        let net = generate_ba(BaParams::new(10, 1, 2)).unwrap();
        assert!(simulate_sis(&net, &SisRun::new(0.0, 5), &mut rng_from_seed(0)).is_err());
    }
}
