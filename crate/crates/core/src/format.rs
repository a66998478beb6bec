//! On-disk formats for [`SequenceSample`].
//!
//! Binary layout, all integers little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"SFQS"`                         |
//! | 4      | 4    | version (`u32`, currently 1)            |
//! | 8      | 8    | `p` (`u64`)                             |
//! | 16     | 4    | `s` (`u32`)                             |
//! | 20     | 8    | `max_index` (`u64`)                     |
//! | 28     | 8·W  | bitset words, `W = ⌈(max_index+1)/64⌉`  |
//!
//! Bit `i % 64` of word `i / 64` is set iff index `i` is a member. Bits past
//! `max_index` are zero.
//!
//! The text format is one member index per line, preceded by a
//! `# p=<p> s=<s> max_index=<max>` header line.

use std::io::{BufRead, Read, Write};

use bitvec::prelude::*;

use crate::counts::SequenceSample;
use crate::error::{Error, Result};
use crate::field::FieldSpec;

pub const MAGIC: [u8; 4] = *b"SFQS";
pub const VERSION: u32 = 1;

pub fn write_binary<W: Write>(spec: &FieldSpec, seq: &SequenceSample, mut w: W) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&spec.p().to_le_bytes())?;
    w.write_all(&spec.s().to_le_bytes())?;
    w.write_all(&seq.max_index().to_le_bytes())?;
    let len = seq.max_index() as usize + 1;
    let words = seq.raw_words();
    for (i, &word) in words.iter().enumerate() {
        let word = if i + 1 == words.len() && !len.is_multiple_of(64) {
            word & ((1u64 << (len % 64)) - 1)
        } else {
            word
        };
        w.write_all(&word.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<R: Read, const K: usize>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated input".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(FieldSpec, SequenceSample)> {
    if read_array::<_, 4>(&mut r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let p = u64::from_le_bytes(read_array(&mut r)?);
    let s = u32::from_le_bytes(read_array(&mut r)?);
    let spec = FieldSpec::new(p, s)?;
    let max_index = u64::from_le_bytes(read_array(&mut r)?);
    let len = max_index
        .checked_add(1)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::Format("max_index too large".into()))?;
    let words = len.div_ceil(64);
    let mut raw = Vec::with_capacity(words);
    for _ in 0..words {
        raw.push(u64::from_le_bytes(read_array(&mut r)?));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after bitset".into()));
    }
    let mut bits = BitVec::<u64, Lsb0>::from_vec(raw);
    if bits[len..].any() {
        return Err(Error::Format("bits set past max_index".into()));
    }
    bits.truncate(len);
    Ok((spec, SequenceSample::from_bits(bits)))
}

pub fn write_text<W: Write>(spec: &FieldSpec, seq: &SequenceSample, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# p={} s={} max_index={}",
        spec.p(),
        spec.s(),
        seq.max_index()
    )?;
    for m in seq.members() {
        writeln!(w, "{m}")?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<(FieldSpec, SequenceSample)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty input".into()))??;
    let mut p = None;
    let mut s = None;
    let mut max_index = None;
    for field in header.trim_start_matches('#').split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header `{field}`")))?;
        let bad = || Error::Format(format!("bad header value `{field}`"));
        match key {
            "p" => p = Some(value.parse::<u64>().map_err(|_| bad())?),
            "s" => s = Some(value.parse::<u32>().map_err(|_| bad())?),
            "max_index" => max_index = Some(value.parse::<u64>().map_err(|_| bad())?),
            _ => return Err(Error::Format(format!("unknown header key `{key}`"))),
        }
    }
    let (Some(p), Some(s), Some(max_index)) = (p, s, max_index) else {
        return Err(Error::Format("header must give p, s and max_index".into()));
    };
    let spec = FieldSpec::new(p, s)?;
    let mut seq = SequenceSample::empty(max_index);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let m = line
            .parse::<u64>()
            .map_err(|_| Error::Format(format!("bad index `{line}`")))?;
        seq.insert(m)?;
    }
    Ok((spec, seq))
}
