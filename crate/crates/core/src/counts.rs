//! Representation counts `r_N(ω)`, `t_N(ω)`, `t_{N,u}(ω)` and the counting
//! function `s*_N(ω)` over a realized sequence.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Degree, FieldSpec};
use crate::pairing::{DiffPairs, SumPairs};

/// A realized sequence `ω`, stored as a membership bitset over
/// `[0, max_index]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSample {
    max_index: u64,
    bits: BitVec<u64, Lsb0>,
}

impl SequenceSample {
    pub fn empty(max_index: u64) -> Self {
        SequenceSample {
            max_index,
            bits: bitvec![u64, Lsb0; 0; (max_index + 1) as usize],
        }
    }

    pub fn full(max_index: u64) -> Self {
        SequenceSample {
            max_index,
            bits: bitvec![u64, Lsb0; 1; (max_index + 1) as usize],
        }
    }

    pub fn from_members<I: IntoIterator<Item = u64>>(max_index: u64, members: I) -> Result<Self> {
        let mut s = Self::empty(max_index);
        for m in members {
            s.insert(m)?;
        }
        Ok(s)
    }

    pub(crate) fn from_bits(bits: BitVec<u64, Lsb0>) -> Self {
        debug_assert!(!bits.is_empty());
        SequenceSample {
            max_index: bits.len() as u64 - 1,
            bits,
        }
    }

    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    fn check(&self, index: u64) -> Result<()> {
        if index <= self.max_index {
            Ok(())
        } else {
            Err(Error::IndexOutOfBounds {
                index,
                max_index: self.max_index,
            })
        }
    }

    pub fn contains(&self, index: u64) -> Result<bool> {
        self.check(index)?;
        Ok(self.bits[index as usize])
    }

    #[inline]
    pub(crate) fn has(&self, index: u64) -> bool {
        self.bits[index as usize]
    }

    pub fn insert(&mut self, index: u64) -> Result<()> {
        self.check(index)?;
        self.bits.set(index as usize, true);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    /// Members in increasing order.
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|i| i as u64)
    }

    pub(crate) fn raw_words(&self) -> &[u64] {
        self.bits.as_raw_slice()
    }
}

/// Which representation function to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    /// Unordered sums `p_a + p_b`, `a < b`.
    Sum,
    /// Ordered differences `p_a - p_b`.
    Diff,
}

fn prepare(spec: &FieldSpec, seq: &SequenceSample, target: u64) -> Result<u32> {
    let n = match spec.poly_deg(target) {
        Degree::NegInf => return Err(Error::DegenerateTarget),
        Degree::Finite(n) => n,
    };
    let needed = spec.block_len(n)? - 1;
    if needed > seq.max_index() {
        return Err(Error::SequenceTooShort {
            needed,
            max_index: seq.max_index(),
        });
    }
    Ok(n)
}

/// `r_N(ω)`: the number of sum pairs with both members in `ω`.
pub fn r_count(spec: &FieldSpec, seq: &SequenceSample, target: u64) -> Result<u64> {
    prepare(spec, seq, target)?;
    Ok(SumPairs::new(spec, target)?
        .filter(|&(a, b)| seq.has(a) && seq.has(b))
        .count() as u64)
}

/// `t_{N,u}(ω)`: difference pairs with `p_a ∈ S_{u,n}`.
pub fn t_count_u(spec: &FieldSpec, seq: &SequenceSample, target: u64, class: u64) -> Result<u64> {
    prepare(spec, seq, target)?;
    Ok(DiffPairs::new(spec, target, class)?
        .filter(|&(a, b)| seq.has(a) && seq.has(b))
        .count() as u64)
}

/// `t_N(ω) = Σ_u t_{N,u}(ω)`.
pub fn t_count(spec: &FieldSpec, seq: &SequenceSample, target: u64) -> Result<u64> {
    (0..spec.q()).map(|u| t_count_u(spec, seq, target, u)).sum()
}

/// Direct double loop over all `(a, b)` of degree at most `deg p_N`, testing the
/// defining equation with `index_add` / `index_neg`. Used as an oracle for
/// [`r_count`] and [`t_count`].
pub fn count_bruteforce(
    spec: &FieldSpec,
    seq: &SequenceSample,
    target: u64,
    kind: CountKind,
) -> Result<u64> {
    let n = prepare(spec, seq, target)?;
    let end = spec.block_len(n)?;
    let mut count = 0u64;
    for a in (0..end).filter(|&a| seq.has(a)) {
        for b in (0..end).filter(|&b| seq.has(b)) {
            let hit = match kind {
                CountKind::Sum => a < b && spec.index_add(a, b)? == target,
                CountKind::Diff => spec.index_add(a, spec.index_neg(b)?)? == target,
            };
            count += hit as u64;
        }
    }
    Ok(count)
}

/// `s*_N(ω)`: members of `ω` with index at most `N`.
pub fn s_star(seq: &SequenceSample, n: u64) -> Result<u64> {
    seq.check(n)?;
    Ok(seq.bits[..=n as usize].count_ones() as u64)
}

/// Representation counts of every target `N < q^{top+1}` at once, obtained by
/// enumerating pairs of members instead of pairs of the decomposition. Cheap
/// when `ω` is sparse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationTable {
    pub kind: CountKind,
    pub top_degree: u32,
    /// `counts[N]` is `r_N` or `t_N`; `counts[0]` is unused.
    pub counts: Vec<u32>,
    /// For differences, `class_counts[N * q + u]` is `t_{N,u}`.
    pub class_counts: Vec<u32>,
}

impl RepresentationTable {
    pub fn build(
        spec: &FieldSpec,
        seq: &SequenceSample,
        top_degree: u32,
        kind: CountKind,
    ) -> Result<Self> {
        let end = spec.block_len(top_degree)?;
        if end - 1 > seq.max_index() {
            return Err(Error::SequenceTooShort {
                needed: end - 1,
                max_index: seq.max_index(),
            });
        }
        let members: Vec<u64> = seq.members().take_while(|&m| m < end).collect();
        let degrees: Vec<Degree> = members.iter().map(|&m| spec.poly_deg(m)).collect();
        let q = spec.q() as usize;
        let mut counts = vec![0u32; end as usize];
        let mut class_counts = match kind {
            CountKind::Sum => Vec::new(),
            CountKind::Diff => vec![0u32; end as usize * q],
        };
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                let h = match kind {
                    CountKind::Sum if i < j => spec.add_in_block(a, b),
                    CountKind::Diff if i != j => spec.sub_in_block(a, b),
                    _ => continue,
                };
                // deg p_a, deg p_b <= deg p_h; h = 0 has degree -inf and drops out.
                let dh = spec.poly_deg(h);
                if degrees[i] > dh || degrees[j] > dh {
                    continue;
                }
                counts[h as usize] += 1;
                if kind == CountKind::Diff {
                    let n = dh.finite().expect("nonzero difference");
                    let u = spec.digit(a, n) as usize;
                    class_counts[h as usize * q + u] += 1;
                }
            }
        }
        Ok(RepresentationTable {
            kind,
            top_degree,
            counts,
            class_counts,
        })
    }

    pub fn count(&self, target: u64) -> u32 {
        self.counts[target as usize]
    }

    pub fn class_count(&self, q: u64, target: u64, class: u64) -> u32 {
        self.class_counts[(target * q + class) as usize]
    }
}
