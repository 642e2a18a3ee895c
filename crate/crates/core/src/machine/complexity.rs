//! Resource-bounded stand-in for prefix complexity.

use std::collections::HashMap;

use super::enumerate::EnumerationTable;

/// Smallest `k` with `2^k >= n` (zero for `n <= 1`).
pub fn ceil_lg(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

/// Literal self-delimiting code length for `x` without the language constant:
/// `ceil(lg(x+1)) + 2 ceil(lg(ceil(lg(x+2)) + 1))`.
pub fn literal_bits(x: u64) -> u32 {
    let x = x as u128;
    let len = ceil_lg(x + 2) as u128;
    ceil_lg(x + 1) + 2 * ceil_lg(len + 1)
}

/// Shortest enumerated program for each output, plus a literal-encoding
/// fallback for outputs the enumeration never produced.
#[derive(Clone, Debug)]
pub struct ComplexityIndex {
    shortest: HashMap<u64, u32>,
    /// Additive constant of the literal fallback, calibrated so that the
    /// fallback never undercuts an enumerated program.
    pub c_l: u32,
    pub max_len: u32,
    pub w: u64,
}

impl ComplexityIndex {
    /// Indexes raw outputs of halting programs. Build it from the `w = 0`
    /// table for unconditional complexity.
    pub fn from_table(table: &EnumerationTable) -> Self {
        let mut shortest: HashMap<u64, u32> = HashMap::new();
        for e in &table.entries {
            if let Some(raw) = e.outcome.raw() {
                let len = e.program.len_bits();
                shortest.entry(raw).and_modify(|l| *l = (*l).min(len)).or_insert(len);
            }
        }
        let c_l = shortest
            .iter()
            .map(|(&x, &len)| len.saturating_sub(literal_bits(x)))
            .max()
            .unwrap_or(0);
        ComplexityIndex { shortest, c_l, max_len: table.max_len, w: table.w }
    }

    /// Length of the shortest enumerated program printing `x`, if any.
    pub fn enumerated(&self, x: u64) -> Option<u32> {
        self.shortest.get(&x).copied()
    }

    pub fn fallback(&self, x: u64) -> u32 {
        literal_bits(x) + self.c_l
    }

    /// Complexity proxy in bits.
    pub fn complexity(&self, x: u64) -> u32 {
        self.enumerated(x).unwrap_or_else(|| self.fallback(x))
    }

    /// `C_0`: the proxy complexity of zero, the final output of a
    /// non-halting node.
    pub fn c0(&self) -> u32 {
        self.complexity(0)
    }

    /// Every output value the enumeration produced.
    pub fn outputs(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.shortest.iter().map(|(&x, &l)| (x, l))
    }
}

/// Proxy complexity of `x` against `table`.
pub fn complexity_proxy(x: u64, table: &EnumerationTable) -> u32 {
    ComplexityIndex::from_table(table).complexity(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::vm::{Opcode::*, Program};

    #[test]
    fn ceil_lg_values() {
        assert_eq!(ceil_lg(0), 0);
        assert_eq!(ceil_lg(1), 0);
        assert_eq!(ceil_lg(2), 1);
        assert_eq!(ceil_lg(3), 2);
        assert_eq!(ceil_lg(4), 2);
        assert_eq!(ceil_lg(5), 3);
        assert_eq!(ceil_lg(u64::MAX as u128 + 2), 65);
    }

    #[test]
    fn shortest_program_wins() {
        let t = EnumerationTable::build(15, 0, 10_000).unwrap();
        let idx = ComplexityIndex::from_table(&t);
        assert_eq!(idx.complexity(0), 3);
        assert_eq!(idx.c0(), 3);
        assert_eq!(idx.complexity(1), 6);
        // 2 = INC DBL or INC INC
        assert_eq!(idx.complexity(2), 9);
        // 8 needs INC DBL DBL DBL
        let p = Program::from_body(&[Inc, Dbl, Dbl, Dbl]).unwrap();
        assert_eq!(idx.complexity(8), p.len_bits());
    }

    #[test]
    fn enumerated_never_exceeds_fallback() {
        let t = EnumerationTable::build(15, 0, 10_000).unwrap();
        let idx = ComplexityIndex::from_table(&t);
        for (x, len) in idx.outputs() {
            assert!(len <= idx.fallback(x), "x={x}");
            assert_eq!(idx.complexity(x), len);
        }
        // far beyond anything 15 bits can print
        let big = 1u64 << 40;
        assert!(idx.enumerated(big).is_none());
        assert_eq!(idx.complexity(big), idx.fallback(big));
    }
}
