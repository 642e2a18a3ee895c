//! Algorithmic-probability sampling: fair coin flips fed to the decoder.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::vm::{Opcode, Program};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

/// Longest program the sampler will build before abandoning the draw.
/// A draw reaches it with probability (7/8)^4095, so in practice the
/// sampled law is exactly 2^-|p| over all programs.
pub const MAX_SAMPLED_OPS: usize = 4096;

/// Draws programs one fair bit at a time and counts abandoned draws.
#[derive(Debug)]
pub struct ProgramSampler<R> {
    rng: R,
    buffer: u64,
    buffered: u32,
    draws: u64,
    resamples: u64,
}

impl<R: RngCore> ProgramSampler<R> {
    pub fn new(rng: R) -> Self {
        ProgramSampler { rng, buffer: 0, buffered: 0, draws: 0, resamples: 0 }
    }

    fn bit(&mut self) -> bool {
        if self.buffered == 0 {
            self.buffer = self.rng.next_u64();
            self.buffered = 64;
        }
        let b = self.buffer >> 63 == 1;
        self.buffer <<= 1;
        self.buffered -= 1;
        b
    }

    fn opcode(&mut self) -> Opcode {
        let code = (0..3).fold(0u8, |acc, _| (acc << 1) | self.bit() as u8);
        Opcode::from_code(code)
    }

    pub fn sample(&mut self) -> Program {
        loop {
            self.draws += 1;
            let mut ops = Vec::new();
            while ops.len() < MAX_SAMPLED_OPS {
                let op = self.opcode();
                ops.push(op);
                if op == Opcode::Halt {
                    return Program::new(ops).expect("decoder stops at HALT");
                }
            }
            self.resamples += 1;
        }
    }

    /// Fraction of draws that hit a decoder dead-end and were redrawn.
    pub fn resample_rate(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.resamples as f64 / self.draws as f64
        }
    }

    pub fn resamples(&self) -> u64 {
        self.resamples
    }
}

/// Draws one program with probability 2^-|p|.
pub fn sample_program<R: RngCore>(rng: &mut R) -> Program {
    ProgramSampler::new(rng).sample()
}

/// A randomly generated population. Repetitions are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub members: Vec<Program>,
    pub seed: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `n` i.i.d. draws from a ChaCha stream seeded with `seed`.
pub fn sample_population(n: usize, seed: u64) -> Result<Population> {
    if n == 0 {
        return Err(Error::param("population size must be at least 1"));
    }
    let mut sampler = ProgramSampler::new(rng_from_seed(seed));
    let members = (0..n).map(|_| sampler.sample()).collect();
    Ok(Population { members, seed })
}

/// Same as [`sample_population`] but drawing from a caller-owned RNG.
pub fn sample_population_with(n: usize, rng: &mut SimRng) -> Result<Population> {
    if n == 0 {
        return Err(Error::param("population size must be at least 1"));
    }
    let mut sampler = ProgramSampler::new(rng);
    let members = (0..n).map(|_| sampler.sample()).collect();
    Ok(Population { members, seed: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn singleton_population() {
        let pop = sample_population(1, 3).unwrap();
        assert_eq!(pop.len(), 1);
        assert!(sample_population(0, 3).is_err());
    }

    #[test]
    fn equal_seeds_equal_sequences() {
        let a = sample_population(200, 11).unwrap();
        let b = sample_population(200, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_population(200, 12).unwrap());
    }

    #[test]
    fn shortest_program_frequency_within_three_sigma() {
        // The 3-bit HALT program has probability 1/8.
        let draws = 1_000_000u64;
        let mut sampler = ProgramSampler::new(rng_from_seed(2024));
        let hits = (0..draws).filter(|_| sampler.sample().len_bits() == 3).count() as f64;
        let p = 0.125;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - mean).abs() < 3.0 * sigma, "hits {hits}, mean {mean}, sigma {sigma}");
        assert_eq!(sampler.resamples(), 0);
    }

    #[test]
    fn length_law_matches_geometric() {
        // P(|p| = 3k) = 7^(k-1) / 8^k.
        let mut sampler = ProgramSampler::new(rng_from_seed(5));
        let n = 200_000;
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for _ in 0..n {
            *counts.entry(sampler.sample().len_bits() / 3).or_default() += 1;
        }
        for k in 1..=4u32 {
            let p = 7f64.powi(k as i32 - 1) / 8f64.powi(k as i32);
            let freq = counts[&k] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * sigma, "k={k}: {freq} vs {p}");
        }
    }
}
