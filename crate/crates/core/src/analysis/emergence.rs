//! Emergent algorithmic complexity of nodes, measured with a complexity
//! proxy on networked and isolated final outputs.

use crate::error::{Error, Result};
use crate::protocol::Trace;

/// `proxy(networked) - proxy(isolated)` in bits.
pub fn eac_node<F: Fn(u64) -> u32>(networked: u64, isolated: u64, complexity: F) -> i64 {
    complexity(networked) as i64 - complexity(isolated) as i64
}

/// EAC of every node of one trace. `isolated[m]` is member `m`'s isolated
/// final output; nodes are matched to members through the trace's mapping.
pub fn eac_per_node<F: Fn(u64) -> u32>(trace: &Trace, isolated: &[u64], complexity: F) -> Result<Vec<i64>> {
    if isolated.len() != trace.node_count() {
        return Err(Error::config(format!(
            "{} isolated outputs for a trace of {} nodes",
            isolated.len(),
            trace.node_count()
        )));
    }
    Ok(trace
        .finals
        .iter()
        .enumerate()
        .map(|(v, &net)| eac_node(net, isolated[trace.mapping.member(v)], &complexity))
        .collect())
}

/// Mean EAC over nodes, then over traces.
pub fn eeac<F: Fn(u64) -> u32>(traces: &[Trace], isolated: &[u64], complexity: F) -> Result<f64> {
    if traces.is_empty() {
        return Err(Error::param("no traces"));
    }
    let mut total = 0.0;
    for t in traces {
        let per = eac_per_node(t, isolated, &complexity)?;
        total += per.iter().sum::<i64>() as f64 / per.len() as f64;
    }
    Ok(total / traces.len() as f64)
}
