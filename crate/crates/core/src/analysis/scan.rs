//! Scanning contagion start instants for a finite-scale estimate of the
//! central time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::least_squares;

/// One experiment of the family: start instant `z`, population size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub start: u32,
    pub n: u64,
    pub eeac: f64,
    pub bound: f64,
}

/// Least-squares slope of `eeac` against `lg n`.
pub fn ladder_slope(points: &[ScanPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::param("need at least two ladder rungs"));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|p| ((p.n as f64).log2(), p.eeac)).collect();
    Ok(least_squares(&pts).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    /// Smallest scanned start whose ladder grows and whose bound is
    /// positive at the top rung. An upper-bound estimate at this scale only.
    pub estimate: Option<u32>,
}

impl ScanResult {
    pub fn describe(&self) -> String {
        match self.estimate {
            Some(z) => format!("central time at most t{z} (estimate at this scale)"),
            None => "not detected at this scale".to_string(),
        }
    }
}

/// Evaluate `eval(start, n)` over every start and ladder size, in the
/// given order, and report the first qualifying start.
pub fn central_time_scan<F>(starts: &[u32], ladder: &[u64], mut eval: F) -> Result<ScanResult>
where
    F: FnMut(u32, u64) -> Result<ScanPoint>,
{
    if starts.is_empty() {
        return Err(Error::param("no start instants to scan"));
    }
    let mut sizes = ladder.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::param("need at least two ladder sizes"));
    }
    let mut points = Vec::new();
    let mut estimate = None;
    for &z in starts {
        let rung: Vec<ScanPoint> = sizes.iter().map(|&n| eval(z, n)).collect::<Result<_>>()?;
        let grows = ladder_slope(&rung)? > 0.0;
        let positive = rung.last().map(|p| p.bound > 0.0).unwrap_or(false);
        if estimate.is_none() && grows && positive {
            estimate = Some(z);
        }
        points.extend(rung);
    }
    Ok(ScanResult { points, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(start: u32, n: u64, eeac: f64, bound: f64) -> ScanPoint {
        ScanPoint { start, n, eeac, bound }
    }

    #[test]
    fn equivalent_instants_give_the_first_start() {
        let r = central_time_scan(&[0, 1, 2], &[64, 128, 256], |z, n| {
            let lg = (n as f64).log2();
            Ok(point(z, n, lg, lg - 5.0))
        })
        .unwrap();
        assert_eq!(r.estimate, Some(0));
        assert_eq!(r.points.len(), 9);
    }

    #[test]
    fn flat_ladder_is_not_detected() {
        let r = central_time_scan(&[0, 1], &[64, 128], |z, n| Ok(point(z, n, 0.0, 1.0))).unwrap();
        assert_eq!(r.estimate, None);
        assert_eq!(r.describe(), "not detected at this scale");
    }

    #[test]
    fn later_start_can_qualify() {
        let r = central_time_scan(&[0, 3], &[64, 128], |z, n| {
            let bound = if z == 0 { -1.0 } else { 2.0 };
            Ok(point(z, n, (n as f64).log2(), bound))
        })
        .unwrap();
        assert_eq!(r.estimate, Some(3));
    }

    #[test]
    fn argument_checks() {
        assert!(central_time_scan(&[], &[64, 128], |z, n| Ok(point(z, n, 0.0, 0.0))).is_err());
        assert!(central_time_scan(&[0], &[64, 64], |z, n| Ok(point(z, n, 0.0, 0.0))).is_err());
    }
}
