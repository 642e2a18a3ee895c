//! Partial-output records and their canonical byte encoding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Susceptible,
    Infected,
    /// Output of a single-cycle run, which never enters the contagion.
    Raw,
}

impl Tag {
    pub fn letter(self) -> char {
        match self {
            Tag::Susceptible => 'S',
            Tag::Infected => 'I',
            Tag::Raw => 'R',
        }
    }

    pub fn from_letter(c: &str) -> Result<Tag> {
        match c {
            "S" => Ok(Tag::Susceptible),
            "I" => Ok(Tag::Infected),
            "R" => Ok(Tag::Raw),
            other => Err(Error::Decode(format!("unknown tag {other:?}"))),
        }
    }

    fn code(self) -> u8 {
        match self {
            Tag::Susceptible => 0,
            Tag::Infected => 1,
            Tag::Raw => 2,
        }
    }
}

/// What a node emits at the end of a cycle: tag, cycle, network input,
/// the node whose first-cycle output the value came from, and the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialOutput {
    pub tag: Tag,
    pub cycle: u32,
    pub input: u64,
    pub origin: u32,
    pub value: u64,
}

impl PartialOutput {
    /// Append the canonical encoding: one tag byte, then LEB128 varints for
    /// cycle, input, origin and value in that order.
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.tag.code());
        for x in [self.cycle as u64, self.input, self.origin as u64, self.value] {
            put_varint(out, x);
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<(PartialOutput, usize)> {
        let tag = match bytes.first() {
            Some(0) => Tag::Susceptible,
            Some(1) => Tag::Infected,
            Some(2) => Tag::Raw,
            Some(b) => return Err(Error::Decode(format!("bad tag byte {b}"))),
            None => return Err(Error::Decode("empty record".into())),
        };
        let mut pos = 1;
        let mut next = || -> Result<u64> {
            let (x, used) = get_varint(&bytes[pos..])?;
            pos += used;
            Ok(x)
        };
        let cycle = u32::try_from(next()?).map_err(|_| Error::Decode("cycle overflows u32".into()))?;
        let input = next()?;
        let origin = u32::try_from(next()?).map_err(|_| Error::Decode("origin overflows u32".into()))?;
        let value = next()?;
        Ok((PartialOutput { tag, cycle, input, origin, value }, pos))
    }
}

pub(crate) fn put_varint(out: &mut Vec<u8>, mut x: u64) {
    while x >= 0x80 {
        out.push((x as u8 & 0x7f) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

pub(crate) fn get_varint(bytes: &[u8]) -> Result<(u64, usize)> {
    let mut x = 0u64;
    for (i, &b) in bytes.iter().enumerate().take(10) {
        x |= ((b & 0x7f) as u64) << (7 * i);
        if b & 0x80 == 0 {
            return Ok((x, i + 1));
        }
    }
    Err(Error::Decode("truncated or oversized varint".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let r = PartialOutput { tag: Tag::Infected, cycle: 300, input: 0, origin: 17, value: u64::MAX };
        let mut buf = Vec::new();
        r.encode(&mut buf);
        assert_eq!(buf[0], 1);
        let (back, used) = PartialOutput::decode(&buf).unwrap();
        assert_eq!(back, r);
        assert_eq!(used, buf.len());
    }

    #[test]
    fn varint_edges() {
        for x in [0u64, 1, 127, 128, 16383, 16384, u64::MAX] {
            let mut buf = Vec::new();
            put_varint(&mut buf, x);
            assert_eq!(get_varint(&buf).unwrap(), (x, buf.len()));
        }
        assert!(get_varint(&[0x80]).is_err());
        assert!(PartialOutput::decode(&[7]).is_err());
    }

    #[test]
    fn tag_letters() {
        for t in [Tag::Susceptible, Tag::Infected, Tag::Raw] {
            assert_eq!(Tag::from_letter(&t.letter().to_string()).unwrap(), t);
        }
        assert!(Tag::from_letter("X").is_err());
    }
}
