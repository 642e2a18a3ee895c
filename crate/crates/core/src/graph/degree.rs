//! Degree statistics and tail-exponent fits.

use serde::{Deserialize, Serialize};

use super::ba::StaticNetwork;
use crate::error::{Error, Result};

/// Points of the empirical CCDF backed by fewer nodes than this are left
/// out of the fit; the far tail is too noisy to carry weight.
pub const MIN_TAIL_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub nodes: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    /// Exponent `gamma` of `P(k) ~ k^-gamma`, from the CCDF fit.
    pub exponent: Option<f64>,
}

impl DegreeSummary {
    pub fn of(g: &StaticNetwork, k_min: usize) -> Self {
        let degrees = g.degrees();
        let n = degrees.len();
        DegreeSummary {
            nodes: n,
            edges: g.edge_count(),
            min_degree: degrees.iter().copied().min().unwrap_or(0),
            max_degree: degrees.iter().copied().max().unwrap_or(0),
            mean_degree: if n == 0 { 0.0 } else { degrees.iter().sum::<usize>() as f64 / n as f64 },
            exponent: fit_ccdf_exponent(&degrees, k_min).ok(),
        }
    }
}

/// Fit `gamma` by least squares on the log-log empirical CCDF.
///
/// For `P(k) ~ k^-gamma` the CCDF falls as `k^(1-gamma)`, so
/// `gamma = 1 - slope`. Only degrees `>= k_min` whose CCDF count is at
/// least [`MIN_TAIL_COUNT`] enter the regression.
pub fn fit_ccdf_exponent(degrees: &[usize], k_min: usize) -> Result<f64> {
    let k_min = k_min.max(1);
    let mut sorted: Vec<usize> = degrees.iter().copied().filter(|&k| k >= k_min).collect();
    sorted.sort_unstable();
    let total = sorted.len();
    let mut points = Vec::new();
    let mut i = 0;
    while i < total {
        let k = sorted[i];
        let at_least = total - i;
        if at_least < MIN_TAIL_COUNT {
            break;
        }
        points.push(((k as f64).ln(), (at_least as f64 / total as f64).ln()));
        while i < total && sorted[i] == k {
            i += 1;
        }
    }
    if points.len() < 3 {
        return Err(Error::domain("too few distinct degrees to fit a tail"));
    }
    let (slope, _) = least_squares(&points);
    Ok(1.0 - slope)
}

/// Ordinary least squares `y = a x + b`, returning `(a, b)`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}
