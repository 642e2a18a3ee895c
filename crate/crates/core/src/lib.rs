//! Simulator and analysis toolkit for algorithmic networks: randomly
//! generated programs placed on a (time-varying) graph, sharing the largest
//! first-cycle output through a susceptible-infected-susceptible contagion.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod machine;
pub mod protocol;
pub mod rng;

pub use error::{Error, Result};
