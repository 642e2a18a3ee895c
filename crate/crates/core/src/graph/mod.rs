//! Time-varying and static graphs, Barabási–Albert generation, temporal
//! reachability and the interchange format.

mod ba;
mod degree;
mod io;
mod temporal;

pub use ba::{generate_ba, BaParams, StaticNetwork};
pub use degree::{fit_ccdf_exponent, least_squares, DegreeSummary, MIN_TAIL_COUNT};
pub use io::{read_graph, write_static, write_temporal, GraphFile};
pub use temporal::{diffusion_diameter, temporal_bfs, temporal_reach, Csr, Diameter, TemporalGraph, TimedEdge};
