//! Densities of infected nodes, their averages, and stationarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{Tag, Trace};

/// Fraction of nodes whose value at instant `t_prime` equals the largest
/// value present at instant `t_i`. Requires `t_i <= t <= t_prime` within the
/// trace; `t` only delimits the observation window.
pub fn density_infected(trace: &Trace, t_i: usize, t: usize, t_prime: usize) -> Result<f64> {
    let (best, now) = window(trace, t_i, t, t_prime)?;
    let hits = now.iter().filter(|r| r.value == best).count();
    Ok(hits as f64 / now.len() as f64)
}

/// Fraction of nodes tagged infected at `t_prime`. Differs from
/// [`density_infected`] when cured sources or tie values are present.
pub fn density_tagged(trace: &Trace, t_i: usize, t: usize, t_prime: usize) -> Result<f64> {
    let (_, now) = window(trace, t_i, t, t_prime)?;
    let hits = now.iter().filter(|r| r.tag == Tag::Infected).count();
    Ok(hits as f64 / now.len() as f64)
}

fn window(trace: &Trace, t_i: usize, t: usize, t_prime: usize) -> Result<(u64, &[crate::protocol::PartialOutput])> {
    if !(t_i <= t && t <= t_prime) {
        return Err(Error::range(format!("need t_i <= t <= t', got {t_i}, {t}, {t_prime}")));
    }
    let last = trace.instant_count();
    let at = |s: usize| {
        trace
            .at_instant(s)
            .ok_or_else(|| Error::range(format!("instant {s} outside the trace's 0..{last}")))
    };
    let best = at(t_i)?.iter().map(|r| r.value).max().unwrap_or(0);
    Ok((best, at(t_prime)?))
}

/// Unweighted mean over mappings (and trials) of per-run densities.
pub fn average_prevalence(per_run: &[f64]) -> Result<f64> {
    if per_run.is_empty() {
        return Err(Error::param("need at least one mapping"));
    }
    Ok(per_run.iter().sum::<f64>() / per_run.len() as f64)
}

/// Per-run density series and their average, indexed by instant from
/// `start` to the last instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceSeries {
    pub start: usize,
    /// `runs[k][i]` is run `k`'s value-based density at instant `start + i`.
    pub runs: Vec<Vec<f64>>,
    /// Tag-based densities in the same layout.
    pub tagged: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub mean_tagged: Vec<f64>,
}

impl PrevalenceSeries {
    pub fn from_traces(traces: &[Trace], start: usize) -> Result<Self> {
        let first = traces.first().ok_or_else(|| Error::param("no traces"))?;
        let last = first.instant_count();
        if start >= last {
            return Err(Error::range(format!("start instant {start} outside 0..{last}")));
        }
        let mut runs = Vec::with_capacity(traces.len());
        let mut tagged = Vec::with_capacity(traces.len());
        for tr in traces {
            let n = tr.instant_count().min(last);
            runs.push((start..n).map(|s| density_infected(tr, start, s, s)).collect::<Result<Vec<_>>>()?);
            tagged.push((start..n).map(|s| density_tagged(tr, start, s, s)).collect::<Result<Vec<_>>>()?);
        }
        let mean = column_means(&runs)?;
        let mean_tagged = column_means(&tagged)?;
        Ok(PrevalenceSeries { start, runs, tagged, mean, mean_tagged })
    }

    /// Averaged density at the last instant.
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

fn column_means(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let len = rows.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| average_prevalence(&rows.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect()
}

/// Default trailing-window width, in samples.
pub const DEFAULT_WINDOW: usize = 20;
/// Default tolerance on the difference of window means.
pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub detected: bool,
    /// Samples from the series start to the first of the two windows.
    pub delta_star: Option<usize>,
    pub window: usize,
    pub tolerance: f64,
    /// Mean of the series from the detection windows to the end.
    pub level: Option<f64>,
}

/// Earliest index `i` at which the means of samples `i-2w+1..=i-w` and
/// `i-w+1..=i` differ by at most `tol`.
pub fn detect_stationary(series: &[f64], window: usize, tol: f64) -> Result<StationarityReport> {
    if window == 0 {
        return Err(Error::param("window must be positive"));
    }
    if series.len() < 2 * window {
        return Err(Error::param(format!("series of {} samples is shorter than two windows of {window}", series.len())));
    }
    let mut prefix = Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    for &x in series {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mean = |a: usize, b: usize| (prefix[b] - prefix[a]) / (b - a) as f64;
    for end in 2 * window..=series.len() {
        let first = mean(end - 2 * window, end - window);
        let second = mean(end - window, end);
        if (first - second).abs() <= tol {
            let begin = end - 2 * window;
            let tail = &series[begin..];
            return Ok(StationarityReport {
                detected: true,
                delta_star: Some(begin),
                window,
                tolerance: tol,
                level: Some(tail.iter().sum::<f64>() / tail.len() as f64),
            });
        }
    }
    Ok(StationarityReport { detected: false, delta_star: None, window, tolerance: tol, level: None })
}

/// Stationary prevalence `exp(-1 / (m lambda))` of SIS on a BA network.
pub fn theoretical_prevalence(m: f64, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    if m.is_nan() || m < 1.0 {
        return Err(Error::domain(format!("m must be at least 1, got {m}")));
    }
    Ok((-1.0 / (m * lambda)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_stationary_at_once() {
        let r = detect_stationary(&[0.3; 50], 10, 0.005).unwrap();
        assert!(r.detected);
        assert_eq!(r.delta_star, Some(0));
        assert!((r.level.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn linear_growth_never_settles() {
        let s: Vec<f64> = (0..100).map(|i| 0.001 * i as f64).collect();
        // Window means differ by slope * window = 0.01.
        assert!(!detect_stationary(&s, 10, 0.009).unwrap().detected);
        assert!(detect_stationary(&s, 10, 0.011).unwrap().detected);
    }

    #[test]
    fn settles_after_a_ramp() {
        let s: Vec<f64> = (0..200).map(|i| if i < 50 { i as f64 / 50.0 } else { 1.0 }).collect();
        let r = detect_stationary(&s, 20, 0.005).unwrap();
        assert!(r.detected);
        let d = r.delta_star.unwrap();
        assert!((40..=50).contains(&d), "{d}");
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(detect_stationary(&[0.0; 5], 3, 0.1).is_err());
        assert!(detect_stationary(&[0.0; 5], 0, 0.1).is_err());
    }

    #[test]
    fn prevalence_formula() {
        assert!((theoretical_prevalence(3.0, 1.0 / 3.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((theoretical_prevalence(3.0, 0.1).unwrap() - 0.035674).abs() < 1e-6);
        assert!(theoretical_prevalence(3.0, 0.0).is_err());
        assert!(theoretical_prevalence(3.0, -1.0).is_err());
        assert!(theoretical_prevalence(3.0, 1e9).unwrap() > 0.999);
    }

    #[test]
    fn averages() {
        assert_eq!(average_prevalence(&[0.25]).unwrap(), 0.25);
        assert!((average_prevalence(&[0.2, 0.4]).unwrap() - 0.3).abs() < 1e-15);
        assert!(average_prevalence(&[]).is_err());
    }
}
