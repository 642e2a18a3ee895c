//! Full synchronous traces, their CSV form and canonical digest.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::record::{put_varint, PartialOutput, Tag};
use super::state::{IfpVariant, NetworkState, NodeMapping, SisParams};
use crate::error::{Error, Result};
use crate::graph::TemporalGraph;

pub const TRACE_CSV_HEADER: &str = "trial,mapping,cycle,node,tag,origin,value";

/// One run of the protocol: records for every non-final cycle and the
/// final outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub trial: u32,
    pub mapping_index: u32,
    pub seed: u64,
    pub params: SisParams,
    pub variant: IfpVariant,
    pub input: u64,
    pub contagion_start: usize,
    pub mapping: NodeMapping,
    /// `records[c - 1]` holds cycle `c`. A single-cycle run has one entry;
    /// otherwise cycles `1..cycles` are stored and the final cycle lives in
    /// `finals`.
    pub records: Vec<Vec<PartialOutput>>,
    pub finals: Vec<u64>,
}

impl Trace {
    pub fn node_count(&self) -> usize {
        self.finals.len()
    }

    pub fn cycles(&self) -> u32 {
        self.mapping.cycles
    }

    pub fn cycle(&self, c: u32) -> Option<&[PartialOutput]> {
        c.checked_sub(1).and_then(|i| self.records.get(i as usize)).map(Vec::as_slice)
    }

    /// Largest first-cycle value.
    pub fn global_max(&self) -> u64 {
        self.records[0].iter().map(|r| r.value).max().unwrap_or(0)
    }

    /// Records at graph instant `t`, if a stored cycle sits on it.
    pub fn at_instant(&self, t: usize) -> Option<&[PartialOutput]> {
        self.cycle(t as u32 + 1 + self.mapping.c0)
    }

    /// Number of graph instants covered by stored cycles.
    pub fn instant_count(&self) -> usize {
        (self.records.len() as u32).saturating_sub(self.mapping.c0) as usize
    }

    /// Canonical bytes: header varints, then every record in cycle-major,
    /// node-minor order, then the finals.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"BBTRACE1");
        for x in [
            self.trial as u64,
            self.mapping_index as u64,
            self.seed,
            self.params.nu.to_bits(),
            self.params.delta.to_bits(),
            self.variant as u64,
            self.input,
            self.contagion_start as u64,
            self.mapping.c0 as u64,
            self.mapping.cycles as u64,
            self.node_count() as u64,
        ] {
            put_varint(&mut out, x);
        }
        for &m in self.mapping.assignment() {
            put_varint(&mut out, m as u64);
        }
        for cycle in &self.records {
            for r in cycle {
                r.encode(&mut out);
            }
        }
        for &f in &self.finals {
            put_varint(&mut out, f);
        }
        out
    }

    pub fn digest(&self) -> String {
        hex_digest(&self.canonical_bytes())
    }

    /// Rows `trial,mapping,cycle,node,tag,origin,value`. Final outputs of a
    /// multi-cycle run appear at the last cycle with tag `F`.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for cycle in &self.records {
            for (v, r) in cycle.iter().enumerate() {
                writeln!(out, "{},{},{},{},{},{},{}", self.trial, self.mapping_index, r.cycle, v, r.tag.letter(), r.origin, r.value)?;
            }
        }
        if self.cycles() > 1 {
            let last = self.records.last().expect("at least one cycle");
            for (v, (&f, r)) in self.finals.iter().zip(last).enumerate() {
                writeln!(out, "{},{},{},{},F,{},{}", self.trial, self.mapping_index, self.cycles(), v, r.origin, f)?;
            }
        }
        Ok(())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_traces_csv<W: Write>(traces: &[Trace], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for t in traces {
        t.write_csv_rows(out)?;
    }
    Ok(())
}

/// One parsed line of a trace CSV. `tag` is `None` for final-output rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub trial: u32,
    pub mapping: u32,
    pub cycle: u32,
    pub node: u32,
    pub tag: Option<Tag>,
    pub origin: u32,
    pub value: u64,
}

pub fn read_trace_rows<R: BufRead>(input: R) -> Result<Vec<TraceRow>> {
    #[derive(Deserialize)]
    struct Raw {
        trial: u32,
        mapping: u32,
        cycle: u32,
        node: u32,
        tag: String,
        origin: u32,
        value: u64,
    }
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let line_of = |e: &csv::Error| e.position().map_or(0, |p| p.line() as usize);
    let header = reader.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    if header.iter().collect::<Vec<_>>().join(",") != TRACE_CSV_HEADER {
        return Err(Error::Parse { line: 1, msg: format!("expected header {TRACE_CSV_HEADER:?}") });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse { line: line_of(&e), msg: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let raw: Raw = record.deserialize(None).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let tag = match raw.tag.as_str() {
            "F" => None,
            t => Some(Tag::from_letter(t).map_err(|_| Error::Parse { line, msg: format!("bad tag {t:?}") })?),
        };
        rows.push(TraceRow {
            trial: raw.trial,
            mapping: raw.mapping,
            cycle: raw.cycle,
            node: raw.node,
            tag,
            origin: raw.origin,
            value: raw.value,
        });
    }
    Ok(rows)
}

/// Everything a single run needs besides its population values.
#[derive(Debug, Clone, Copy)]
pub struct RunSpec<'a> {
    pub graph: &'a TemporalGraph,
    pub params: SisParams,
    pub variant: IfpVariant,
    pub input: u64,
    /// Transitions leaving instants before this one carry no contagion.
    pub contagion_start: usize,
}

/// Run cycle 1, every contagion cycle, and the final cycle.
pub fn run_trace<R: rand::Rng>(
    spec: &RunSpec<'_>,
    member_values: &[u64],
    mapping: &NodeMapping,
    trial: u32,
    mapping_index: u32,
    seed: u64,
    rng: &mut R,
) -> Result<Trace> {
    if spec.graph.node_count() != mapping.len() {
        return Err(Error::config(format!(
            "graph has {} nodes but the population has {}",
            spec.graph.node_count(),
            mapping.len()
        )));
    }
    let mut state = NetworkState::init_cycle_one(member_values, mapping, spec.input)?;
    let mut records = vec![state.records().to_vec()];
    for c in 2..mapping.cycles {
        let layer = mapping
            .layer_for_cycle(c)
            .filter(|&l| l >= spec.contagion_start && l + 1 < spec.graph.time_count())
            .and_then(|l| spec.graph.layer(l));
        state.step_cycle(layer, spec.params, spec.variant, rng)?;
        records.push(state.records().to_vec());
    }
    let finals = state.finalize()?;
    Ok(Trace {
        trial,
        mapping_index,
        seed,
        params: spec.params,
        variant: spec.variant,
        input: spec.input,
        contagion_start: spec.contagion_start,
        mapping: mapping.clone(),
        records,
        finals,
    })
}
