//! The toy accumulator machine and its self-delimiting program encoding.
//!
//! A program is a sequence of 3-bit opcodes, written most significant bit
//! first, terminated by the first `HALT`. Every opcode other than `HALT` is a
//! valid continuation, so the set of programs is a complete prefix-free code:
//! its Kraft sum tends to 1 as the length cap grows.
//!
//! The machine has two registers: the accumulator `a` (the output) and the
//! counter `b`. `MARK` and `JNZ` pair up like brackets. A `JNZ` jumps back to
//! just after its matching `MARK` when `b != 0`; a `JNZ` with no open `MARK`
//! jumps to the start of the program.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits per opcode.
pub const OPCODE_BITS: u32 = 3;

/// Bumped whenever opcode semantics change; keys the enumeration cache.
pub const VM_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Opcode {
    /// Output `a` and stop.
    Halt = 0,
    Inc = 1,
    Dbl = 2,
    /// `a <- w`
    Load = 3,
    Swap = 4,
    /// `b <- b - 1`, saturating at zero.
    Dec = 5,
    Mark = 6,
    Jnz = 7,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Halt,
        Opcode::Inc,
        Opcode::Dbl,
        Opcode::Load,
        Opcode::Swap,
        Opcode::Dec,
        Opcode::Mark,
        Opcode::Jnz,
    ];

    /// Every opcode that does not terminate the program, in code order.
    pub const BODY: [Opcode; 7] = [
        Opcode::Inc,
        Opcode::Dbl,
        Opcode::Load,
        Opcode::Swap,
        Opcode::Dec,
        Opcode::Mark,
        Opcode::Jnz,
    ];

    pub fn from_code(code: u8) -> Opcode {
        Opcode::ALL[(code & 0b111) as usize]
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Halt => "HALT",
            Opcode::Inc => "INC",
            Opcode::Dbl => "DBL",
            Opcode::Load => "LOAD",
            Opcode::Swap => "SWAP",
            Opcode::Dec => "DEC",
            Opcode::Mark => "MARK",
            Opcode::Jnz => "JNZ",
        }
    }
}

/// A self-delimiting program. Always ends in exactly one `HALT`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Program {
    ops: Vec<Opcode>,
}

impl Program {
    /// Builds a program from a `HALT`-terminated opcode list.
    pub fn new(ops: Vec<Opcode>) -> Result<Self> {
        match ops.iter().position(|&op| op == Opcode::Halt) {
            Some(i) if i + 1 == ops.len() => Ok(Program { ops }),
            Some(_) => Err(Error::Decode("opcodes after HALT".into())),
            None => Err(Error::Decode("program does not end in HALT".into())),
        }
    }

    /// Appends `HALT` to a body of non-terminating opcodes.
    pub fn from_body(body: &[Opcode]) -> Result<Self> {
        let mut ops = body.to_vec();
        ops.push(Opcode::Halt);
        Program::new(ops)
    }

    /// Decodes a bit string. The string must be exactly one complete program.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if !bits.len().is_multiple_of(OPCODE_BITS as usize) {
            return Err(Error::Decode(format!(
                "{} bits is not a whole number of opcodes",
                bits.len()
            )));
        }
        let mut ops = Vec::with_capacity(bits.len() / 3);
        for chunk in bits.chunks(3) {
            if ops.last() == Some(&Opcode::Halt) {
                return Err(Error::Decode("trailing bits after HALT".into()));
            }
            let code = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8);
            ops.push(Opcode::from_code(code));
        }
        if ops.last() != Some(&Opcode::Halt) {
            return Err(Error::Decode("incomplete program: no HALT".into()));
        }
        Ok(Program { ops })
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Decode(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Program::from_bits(&bits)
    }

    pub fn ops(&self) -> &[Opcode] {
        &self.ops
    }

    /// Length in bits.
    pub fn len_bits(&self) -> u32 {
        self.ops.len() as u32 * OPCODE_BITS
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.ops
            .iter()
            .flat_map(|op| {
                let c = op.code();
                [c & 0b100 != 0, c & 0b010 != 0, c & 0b001 != 0]
            })
            .collect()
    }

    pub fn bit_string(&self) -> String {
        self.to_bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Probability of drawing this program with fair coin flips.
    pub fn weight(&self) -> f64 {
        (-(self.len_bits() as f64)).exp2()
    }

    /// Jump targets for every `JNZ`, resolved by bracket matching.
    fn jump_targets(&self) -> Vec<usize> {
        let mut targets = vec![0; self.ops.len()];
        let mut open = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            match op {
                Opcode::Mark => open.push(i),
                Opcode::Jnz => targets[i] = open.pop().map_or(0, |m| m + 1),
                _ => {}
            }
        }
        targets
    }
}

/// Shortlex: shorter programs first, then bitwise.
impl Ord for Program {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.ops
            .len()
            .cmp(&other.ops.len())
            .then_with(|| self.ops.cmp(&other.ops))
    }
}

impl PartialOrd for Program {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Program({self})")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.ops.iter().map(|op| op.mnemonic()).collect();
        f.write_str(&names.join(" "))
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stop {
    Halted,
    /// Step budget exhausted: the computable stand-in for "does not halt".
    StepLimit,
    /// A register left the 64-bit range. Counted as non-halting, like the
    /// step limit, since the run exceeded its resource bound.
    Overflow,
}

/// Result of one bounded run. `value` follows the oracle-machine convention:
/// raw output plus one on halt, zero otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunOutcome {
    pub value: u64,
    pub halted: bool,
    pub steps_used: u64,
    pub stop: Stop,
}

impl RunOutcome {
    fn halted(raw: u64, steps: u64) -> Self {
        match raw.checked_add(1) {
            Some(value) => RunOutcome { value, halted: true, steps_used: steps, stop: Stop::Halted },
            None => RunOutcome::failed(Stop::Overflow, steps),
        }
    }

    fn failed(stop: Stop, steps: u64) -> Self {
        RunOutcome { value: 0, halted: false, steps_used: steps, stop }
    }

    /// The raw machine output, if the run halted.
    pub fn raw(&self) -> Option<u64> {
        self.halted.then(|| self.value - 1)
    }
}

/// Runs `program` on input `w` for at most `step_limit` instructions.
pub fn run_bounded(program: &Program, w: u64, step_limit: u64) -> Result<RunOutcome> {
    if step_limit == 0 {
        return Err(Error::param("step_limit must be at least 1"));
    }
    Ok(execute(program, w, step_limit))
}

/// Runs a raw bit string; malformed code is a decode error, never a non-halt.
pub fn run_bits(bits: &[bool], w: u64, step_limit: u64) -> Result<RunOutcome> {
    let program = Program::from_bits(bits)?;
    run_bounded(&program, w, step_limit)
}

pub(crate) fn execute(program: &Program, w: u64, step_limit: u64) -> RunOutcome {
    let ops = program.ops();
    let targets = program.jump_targets();
    let (mut a, mut b) = (0u64, 0u64);
    let mut pc = 0usize;
    let mut steps = 0u64;
    while steps < step_limit {
        steps += 1;
        match ops[pc] {
            Opcode::Halt => return RunOutcome::halted(a, steps),
            Opcode::Inc => match a.checked_add(1) {
                Some(v) => a = v,
                None => return RunOutcome::failed(Stop::Overflow, steps),
            },
            Opcode::Dbl => match a.checked_mul(2) {
                Some(v) => a = v,
                None => return RunOutcome::failed(Stop::Overflow, steps),
            },
            Opcode::Load => a = w,
            Opcode::Swap => std::mem::swap(&mut a, &mut b),
            Opcode::Dec => b = b.saturating_sub(1),
            Opcode::Mark => {}
            Opcode::Jnz => {
                if b != 0 {
                    pc = targets[pc];
                    continue;
                }
            }
        }
        pc += 1;
    }
    RunOutcome::failed(Stop::StepLimit, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Opcode::*;

    fn prog(body: &[Opcode]) -> Program {
        Program::from_body(body).unwrap()
    }

    #[test]
    fn output_zero_program() {
        let p = prog(&[]);
        assert_eq!(p.len_bits(), 3);
        for w in [0, 1, 99] {
            let out = run_bounded(&p, w, 10).unwrap();
            assert_eq!(out.value, 1);
            assert!(out.halted);
        }
    }

    #[test]
    fn unconditional_loop_never_halts() {
        // INC SWAP leaves b = 1 forever, so the jump to start always fires.
        let p = prog(&[Inc, Swap, Jnz]);
        let out = run_bounded(&p, 0, 1_000_000).unwrap();
        assert_eq!(out, RunOutcome { value: 0, halted: false, steps_used: 1_000_000, stop: Stop::StepLimit });
    }

    #[test]
    fn counted_loop_halts() {
        // b = 3, then three passes of `a += 2`.
        let p = prog(&[Inc, Inc, Inc, Swap, Mark, Inc, Inc, Dec, Jnz]);
        let out = run_bounded(&p, 0, 1000).unwrap();
        assert!(out.halted);
        assert_eq!(out.raw(), Some(6));
    }

    #[test]
    fn load_reads_input() {
        let p = prog(&[Load, Dbl, Inc]);
        assert_eq!(run_bounded(&p, 5, 100).unwrap().raw(), Some(11));
    }

    #[test]
    fn overflow_counts_as_non_halting() {
        // b = w, a = 1, then w doublings.
        let p = prog(&[Load, Swap, Inc, Mark, Dbl, Dec, Jnz]);
        let ok = run_bounded(&p, 10, 10_000).unwrap();
        assert_eq!(ok.raw(), Some(1 << 10));
        let out = run_bounded(&p, 70, 10_000).unwrap();
        assert_eq!(out.stop, Stop::Overflow);
        assert_eq!(out.value, 0);
        assert!(!out.halted);
    }

    #[test]
    fn bits_round_trip_and_decode_errors() {
        let p = prog(&[Inc, Mark, Jnz]);
        assert_eq!(p.bit_string(), "001110111000");
        assert_eq!(Program::parse_bits(&p.bit_string()).unwrap(), p);
        assert!(matches!(Program::parse_bits("0010"), Err(Error::Decode(_))));
        assert!(matches!(Program::parse_bits("001"), Err(Error::Decode(_))));
        assert!(matches!(Program::parse_bits("000001"), Err(Error::Decode(_))));
        assert!(matches!(run_bits(&[true, false], 0, 10), Err(Error::Decode(_))));
    }

    #[test]
    fn zero_step_limit_rejected() {
        assert!(run_bounded(&prog(&[]), 0, 0).is_err());
    }

    #[test]
    fn nested_brackets_match_innermost() {
        let p = prog(&[Mark, Mark, Jnz, Jnz, Jnz]);
        assert_eq!(p.jump_targets(), vec![0, 0, 2, 1, 0, 0]);
    }
}
