//! Exhaustive enumeration of every program up to a bit cap, with bounded
//! Busy Beaver and halting-probability estimates built on top of it.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vm::{execute, Opcode, Program, RunOutcome, Stop, OPCODE_BITS, VM_VERSION};
use crate::error::{Error, Result};

const CACHE_MAGIC: &[u8; 8] = b"BBNETAB\0";
const CACHE_FORMAT: u32 = 1;

/// Default bit cap for enumeration.
pub const DEFAULT_MAX_LEN: u32 = 16;
/// Default step budget standing in for the halting oracle.
pub const DEFAULT_STEP_LIMIT: u64 = 100_000;

/// All programs of at most `max_len` bits, in shortlex order.
pub fn enumerate_programs(max_len: u32) -> Vec<Program> {
    let max_ops = max_len / OPCODE_BITS;
    let mut out = Vec::new();
    for n_ops in 1..=max_ops {
        let body_len = (n_ops - 1) as usize;
        for index in 0..count_with_ops(n_ops) {
            // base-7 digits, most significant first
            let mut body = vec![Opcode::Inc; body_len];
            let mut rest = index;
            for slot in body.iter_mut().rev() {
                *slot = Opcode::BODY[(rest % 7) as usize];
                rest /= 7;
            }
            out.push(Program::from_body(&body).expect("body has no HALT"));
        }
    }
    out
}

/// Number of programs with exactly `n_ops` opcodes.
pub fn count_with_ops(n_ops: u32) -> u64 {
    if n_ops == 0 {
        0
    } else {
        7u64.pow(n_ops - 1)
    }
}

/// A probability mass that is an exact multiple of 2^-scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicMass {
    pub units: u64,
    pub scale: u32,
}

impl DyadicMass {
    pub fn zero(scale: u32) -> Self {
        DyadicMass { units: 0, scale }
    }

    pub fn add_program(&mut self, len_bits: u32) {
        debug_assert!(len_bits <= self.scale);
        self.units += 1u64 << (self.scale - len_bits);
    }

    pub fn value(&self) -> f64 {
        self.units as f64 / (self.scale as f64).exp2()
    }
}

/// One enumerated program and its outcome on the table's input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub program: Program,
    pub outcome: RunOutcome,
}

/// Outcomes of every program of at most `max_len` bits on one input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationTable {
    pub max_len: u32,
    pub step_limit: u64,
    pub w: u64,
    pub entries: Vec<TableEntry>,
}

impl EnumerationTable {
    pub fn build(max_len: u32, w: u64, step_limit: u64) -> Result<Self> {
        if step_limit == 0 {
            return Err(Error::param("step_limit must be at least 1"));
        }
        if max_len > 30 {
            return Err(Error::param(format!("bit cap {max_len} is beyond desk scale (max 30)")));
        }
        let entries = enumerate_programs(max_len)
            .into_par_iter()
            .map(|program| {
                let outcome = execute(&program, w, step_limit);
                TableEntry { program, outcome }
            })
            .collect();
        Ok(EnumerationTable { max_len, step_limit, w, entries })
    }

    /// Loads the table from `dir` when a matching cache file exists,
    /// otherwise builds it and writes the cache.
    pub fn load_or_build(dir: Option<&Path>, max_len: u32, w: u64, step_limit: u64) -> Result<Self> {
        let Some(dir) = dir else {
            return Self::build(max_len, w, step_limit);
        };
        let path = Self::cache_path(dir, max_len, w, step_limit);
        if let Ok(file) = File::open(&path) {
            if let Ok(table) = Self::read_cache(&mut BufReader::new(file)) {
                if table.max_len == max_len && table.w == w && table.step_limit == step_limit {
                    return Ok(table);
                }
            }
        }
        let table = Self::build(max_len, w, step_limit)?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            table.write_cache(&mut out)?;
            out.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(table)
    }

    pub fn cache_path(dir: &Path, max_len: u32, w: u64, step_limit: u64) -> PathBuf {
        dir.join(format!("enum-vm{VM_VERSION}-k{max_len}-s{step_limit}-w{w}.bin"))
    }

    pub fn write_cache<W: Write>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_u32::<LittleEndian>(CACHE_FORMAT)?;
        out.write_u32::<LittleEndian>(VM_VERSION)?;
        out.write_u32::<LittleEndian>(self.max_len)?;
        out.write_u64::<LittleEndian>(self.step_limit)?;
        out.write_u64::<LittleEndian>(self.w)?;
        out.write_u64::<LittleEndian>(self.entries.len() as u64)?;
        for e in &self.entries {
            let ops = e.program.ops();
            out.write_u16::<LittleEndian>(ops.len() as u16)?;
            for op in ops {
                out.write_u8(op.code())?;
            }
            out.write_u8(match e.outcome.stop {
                Stop::Halted => 0,
                Stop::StepLimit => 1,
                Stop::Overflow => 2,
            })?;
            out.write_u64::<LittleEndian>(e.outcome.value)?;
            out.write_u64::<LittleEndian>(e.outcome.steps_used)?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(input: &mut R) -> Result<Self> {
        let bad = |msg: &str| Error::Decode(format!("enumeration cache: {msg}"));
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        if input.read_u32::<LittleEndian>()? != CACHE_FORMAT {
            return Err(bad("unsupported format version"));
        }
        if input.read_u32::<LittleEndian>()? != VM_VERSION {
            return Err(bad("stale VM version"));
        }
        let max_len = input.read_u32::<LittleEndian>()?;
        let step_limit = input.read_u64::<LittleEndian>()?;
        let w = input.read_u64::<LittleEndian>()?;
        let count = input.read_u64::<LittleEndian>()?;
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let n = input.read_u16::<LittleEndian>()? as usize;
            let mut ops = Vec::with_capacity(n);
            for _ in 0..n {
                ops.push(Opcode::from_code(input.read_u8()?));
            }
            let program = Program::new(ops)?;
            let stop = match input.read_u8()? {
                0 => Stop::Halted,
                1 => Stop::StepLimit,
                2 => Stop::Overflow,
                _ => return Err(bad("bad stop tag")),
            };
            let value = input.read_u64::<LittleEndian>()?;
            let steps_used = input.read_u64::<LittleEndian>()?;
            let outcome = RunOutcome { value, halted: stop == Stop::Halted, steps_used, stop };
            entries.push(TableEntry { program, outcome });
        }
        let table = EnumerationTable { max_len, step_limit, w, entries };
        if table.entries.len() != enumerate_programs(max_len).len() {
            return Err(bad("entry count does not match the bit cap"));
        }
        Ok(table)
    }

    /// `program_bits,length,halted,value,steps`
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "program_bits,length,halted,value,steps")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.program.bit_string(),
                e.program.len_bits(),
                e.outcome.halted as u8,
                e.outcome.value,
                e.outcome.steps_used
            )?;
        }
        Ok(())
    }

    /// Bounded Busy Beaver: the largest halting value among programs of at
    /// most `k` bits, with the first maximizer in shortlex order.
    pub fn busy_beaver(&self, k: u32) -> Result<(u64, Option<Program>)> {
        if k > self.max_len {
            return Err(Error::Cap { requested: k, cap: self.max_len });
        }
        let mut best: (u64, Option<&Program>) = (0, None);
        for e in self.entries.iter().filter(|e| e.program.len_bits() <= k) {
            if e.outcome.halted && (best.1.is_none() || e.outcome.value > best.0) {
                best = (e.outcome.value, Some(&e.program));
            }
        }
        Ok((best.0, best.1.cloned()))
    }

    /// Kraft sum of the enumerated programs.
    pub fn kraft_mass(&self) -> DyadicMass {
        let mut m = DyadicMass::zero(self.max_len);
        for e in &self.entries {
            m.add_program(e.program.len_bits());
        }
        m
    }

    /// Programs whose outcome differs between two tables over the same
    /// programs and input, typically run at two step budgets.
    pub fn frontier<'a>(&'a self, other: &'a EnumerationTable) -> Vec<(&'a Program, RunOutcome, RunOutcome)> {
        self.entries
            .iter()
            .zip(&other.entries)
            .filter(|(a, b)| a.outcome.halted != b.outcome.halted || a.outcome.value != b.outcome.value)
            .map(|(a, b)| (&a.program, a.outcome, b.outcome))
            .collect()
    }
}

/// Builds a fresh table and returns its bounded Busy Beaver value.
pub fn busy_beaver_bounded(k: u32, w: u64, step_limit: u64, cap: u32) -> Result<(u64, Option<Program>)> {
    if k > cap {
        return Err(Error::Cap { requested: k, cap });
    }
    EnumerationTable::build(cap, w, step_limit)?.busy_beaver(k)
}

/// Runs `program` in isolation for up to `cycles` cycles, each cycle fed the
/// previous partial output. Stops at the first cycle that does not halt.
pub fn isolated_trajectory(program: &Program, w: u64, cycles: u32, step_limit: u64) -> Vec<RunOutcome> {
    let mut out = Vec::with_capacity(cycles as usize);
    let mut input = w;
    for _ in 0..cycles {
        let r = execute(program, input, step_limit);
        out.push(r);
        if !r.halted {
            break;
        }
        input = r.value;
    }
    out
}

/// Number of leading isolated cycles (at most `cycles`) on which the program
/// halts.
pub fn halting_cycles(program: &Program, w: u64, cycles: u32, step_limit: u64) -> u32 {
    isolated_trajectory(program, w, cycles, step_limit)
        .iter()
        .take_while(|r| r.halted)
        .count() as u32
}

/// Cycle-bounded halting mass for every cycle count `1..=max_cycles`:
/// entry `c - 1` sums 2^-|p| over programs of at most `max_len` bits that halt
/// in every isolated cycle up to `c`.
pub fn omega_profile(w: u64, max_cycles: u32, max_len: u32, step_limit: u64) -> Result<Vec<DyadicMass>> {
    if max_cycles == 0 {
        return Err(Error::param("cycle budget must be at least 1"));
    }
    if step_limit == 0 {
        return Err(Error::param("step_limit must be at least 1"));
    }
    let survived: Vec<(u32, u32)> = enumerate_programs(max_len)
        .into_par_iter()
        .map(|p| (p.len_bits(), halting_cycles(&p, w, max_cycles, step_limit)))
        .collect();
    let mut profile = vec![DyadicMass::zero(max_len); max_cycles as usize];
    for (len, ok) in survived {
        for mass in profile.iter_mut().take(ok as usize) {
            mass.add_program(len);
        }
    }
    Ok(profile)
}

/// Cycle-bounded conditional halting probability, estimated over all
/// programs of at most `max_len` bits.
pub fn estimate_omega(w: u64, c: u32, max_len: u32, step_limit: u64) -> Result<f64> {
    if c == 0 {
        return Err(Error::param("cycle budget must be at least 1"));
    }
    Ok(omega_profile(w, c, max_len, step_limit)?[c as usize - 1].value())
}

/// The enumerated programs (at most `max_len` bits) that halt in every
/// isolated cycle up to `c`.
pub fn halting_set(w: u64, c: u32, max_len: u32, step_limit: u64) -> Vec<Program> {
    enumerate_programs(max_len)
        .into_par_iter()
        .filter(|p| halting_cycles(p, w, c, step_limit) == c)
        .collect()
}
