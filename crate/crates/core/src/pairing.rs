//! Complete decompositions of `p_N` into sums and differences of polynomials
//! of degree at most `deg p_N`.
//!
//! For sums, every index below `q^{n+1}` has exactly one partner `ã` with
//! `p_a + p_ã = p_N`. Keeping `a < ã` gives `M` disjoint pairs; in odd
//! characteristic one index `N₀` is its own partner (`2 p_{N₀} = p_N`).
//! For differences the ordered pairs are grouped by the `T^n` coefficient `u`
//! of `p_a`: the class `S_{u,n} = [u q^n, (u+1) q^n)` contributes `q^n` pairs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Degree, FieldSpec};

fn target_degree(spec: &FieldSpec, target: u64) -> Result<u32> {
    match spec.poly_deg(target) {
        Degree::NegInf => Err(Error::DegenerateTarget),
        Degree::Finite(n) => Ok(n),
    }
}

/// `M(N)`: the number of unordered pairs `a < ã` with `p_a + p_ã = p_N`.
pub fn sum_pair_count(spec: &FieldSpec, target: u64) -> Result<u64> {
    let n = target_degree(spec, target)?;
    let len = spec.block_len(n)?;
    Ok(if spec.p() == 2 {
        len / 2
    } else {
        (len - 1) / 2
    })
}

/// Largest `digits · q` for which per-digit lookup tables are built.
const TABLE_LIMIT: u64 = 1 << 16;

/// Tracks `f(a) = Σ_i g_i(a_i) q^i` while `a` counts upward through the low
/// `tables.len()` digits, at amortized constant cost per step.
#[derive(Clone, Debug)]
struct DigitWalk {
    /// `tables[i][x] = g_i(x) · q^i`.
    tables: Vec<Vec<u64>>,
    digits: Vec<usize>,
    image: u64,
}

impl DigitWalk {
    fn new(
        spec: &FieldSpec,
        positions: u32,
        g: impl Fn(u32, u64) -> Result<u64>,
    ) -> Result<Option<Self>> {
        let q = spec.q();
        if positions as u64 * q > TABLE_LIMIT {
            return Ok(None);
        }
        let mut tables = Vec::with_capacity(positions as usize);
        for i in 0..positions {
            let place = spec.pow(i)?;
            tables.push(
                (0..q)
                    .map(|x| Ok(g(i, x)? * place))
                    .collect::<Result<Vec<u64>>>()?,
            );
        }
        let image = tables.iter().map(|t| t[0]).sum();
        Ok(Some(DigitWalk {
            tables,
            digits: vec![0; positions as usize],
            image,
        }))
    }

    #[inline]
    fn step(&mut self) {
        for (d, table) in self.digits.iter_mut().zip(&self.tables) {
            self.image -= table[*d];
            *d += 1;
            if *d < table.len() {
                self.image += table[*d];
                return;
            }
            *d = 0;
            self.image += table[0];
        }
    }
}

/// Streams the sum pairs `(a_k, ã_k)` of a target in increasing `a_k`.
#[derive(Clone, Debug)]
pub struct SumPairs {
    spec: FieldSpec,
    target: u64,
    next: u64,
    end: u64,
    walk: Option<DigitWalk>,
}

impl SumPairs {
    pub fn new(spec: &FieldSpec, target: u64) -> Result<Self> {
        let n = target_degree(spec, target)?;
        let end = spec.block_len(n)?;
        let walk = if spec.p() == 2 {
            None
        } else {
            DigitWalk::new(spec, n + 1, |i, x| spec.elem_sub(spec.digit(target, i), x))?
        };
        Ok(SumPairs {
            spec: *spec,
            target,
            next: 0,
            end,
            walk,
        })
    }

    #[inline]
    fn partner_and_advance(&mut self) -> u64 {
        match &mut self.walk {
            Some(w) => {
                let partner = w.image;
                w.step();
                partner
            }
            None => self.spec.sub_in_block(self.target, self.next),
        }
    }
}

impl Iterator for SumPairs {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        while self.next < self.end {
            let partner = self.partner_and_advance();
            let a = self.next;
            self.next += 1;
            if a < partner {
                return Some((a, partner));
            }
        }
        None
    }
}

/// The full sum decomposition of `p_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumPairing {
    pub target: u64,
    pub degree: u32,
    /// `M`.
    pub pair_count: u64,
    pub pairs: Vec<(u64, u64)>,
    /// `N₀` with `2 p_{N₀} = p_N`, present iff `p` is odd.
    pub self_index: Option<u64>,
}

pub fn sum_pairing(spec: &FieldSpec, target: u64) -> Result<SumPairing> {
    let degree = target_degree(spec, target)?;
    let end = spec.block_len(degree)?;
    let mut pairs = Vec::new();
    let mut self_index = None;
    for a in 0..end {
        let partner = spec.sub_in_block(target, a);
        match a.cmp(&partner) {
            std::cmp::Ordering::Less => pairs.push((a, partner)),
            std::cmp::Ordering::Equal => self_index = Some(a),
            std::cmp::Ordering::Greater => {}
        }
    }
    Ok(SumPairing {
        target,
        degree,
        pair_count: pairs.len() as u64,
        pairs,
        self_index,
    })
}

/// Streams the difference pairs `(a_k, â_k)` with `p_a ∈ S_{u,n}` and
/// `p_a - p_â = p_N`, in increasing `a_k`.
#[derive(Clone, Debug)]
pub struct DiffPairs {
    spec: FieldSpec,
    target: u64,
    next: u64,
    end: u64,
    /// Partner digits below `T^n`; the top digit is the constant `top`.
    walk: Option<DigitWalk>,
    top: u64,
}

impl DiffPairs {
    pub fn new(spec: &FieldSpec, target: u64, class: u64) -> Result<Self> {
        let n = target_degree(spec, target)?;
        spec.check_elem(class)?;
        let width = spec.pow(n)?;
        spec.block_len(n)?;
        let top = spec.elem_sub(class, spec.digit(target, n))? * width;
        let walk = if spec.p() == 2 {
            None
        } else {
            DigitWalk::new(spec, n, |i, x| spec.elem_sub(x, spec.digit(target, i)))?
        };
        Ok(DiffPairs {
            spec: *spec,
            target,
            next: class * width,
            end: (class + 1) * width,
            walk,
            top,
        })
    }
}

impl Iterator for DiffPairs {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        if self.next >= self.end {
            return None;
        }
        let a = self.next;
        self.next += 1;
        let partner = match &mut self.walk {
            Some(w) => {
                let low = w.image;
                w.step();
                self.top + low
            }
            None => self.spec.sub_in_block(a, self.target),
        };
        Some((a, partner))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for DiffPairs {}

/// The difference decomposition of `p_N` restricted to one leading class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffPairing {
    pub target: u64,
    pub degree: u32,
    /// `u`: the `T^n` coefficient shared by every `p_a`.
    pub class: u64,
    /// `û = u - lc(p_N)`: the `T^n` coefficient shared by every `p_â`.
    pub partner_class: u64,
    /// `M₀ = q^n`.
    pub pair_count: u64,
    pub pairs: Vec<(u64, u64)>,
}

pub fn diff_pairing(spec: &FieldSpec, target: u64, class: u64) -> Result<DiffPairing> {
    let degree = target_degree(spec, target)?;
    let lead = spec.digit(target, degree);
    let partner_class = spec.elem_sub(class, lead)?;
    let pairs: Vec<(u64, u64)> = DiffPairs::new(spec, target, class)?.collect();
    Ok(DiffPairing {
        target,
        degree,
        class,
        partner_class,
        pair_count: pairs.len() as u64,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn sum_examples() {
        let f3 = make_field(3, 1).unwrap();
        let sp = sum_pairing(&f3, 1).unwrap();
        assert_eq!(sp.pair_count, 1);
        assert_eq!(sp.pairs, vec![(0, 1)]);
        assert_eq!(sp.self_index, Some(2));

        let sp = sum_pairing(&f3, 4).unwrap();
        assert_eq!(sp.pair_count, 4);
        assert_eq!(sp.self_index, Some(8));
        for &(a, b) in &sp.pairs {
            assert!(a < b);
            assert_eq!(f3.index_add(a, b).unwrap(), 4);
        }

        let f2 = make_field(2, 1).unwrap();
        let sp = sum_pairing(&f2, 2).unwrap();
        assert_eq!(sp.pair_count, 2);
        assert_eq!(sp.pairs, vec![(0, 2), (1, 3)]);
        assert_eq!(sp.self_index, None);
    }

    #[test]
    fn zero_target_is_rejected() {
        let f3 = make_field(3, 1).unwrap();
        assert!(matches!(sum_pairing(&f3, 0), Err(Error::DegenerateTarget)));
        assert!(matches!(
            diff_pairing(&f3, 0, 0),
            Err(Error::DegenerateTarget)
        ));
        assert!(matches!(
            sum_pair_count(&f3, 0),
            Err(Error::DegenerateTarget)
        ));
        assert!(SumPairs::new(&f3, 0).is_err());
    }

    #[test]
    fn diff_examples() {
        let f2 = make_field(2, 1).unwrap();
        let dp = diff_pairing(&f2, 2, 1).unwrap();
        assert_eq!(dp.pair_count, 2);
        assert_eq!(dp.pairs, vec![(2, 0), (3, 1)]);
        assert_eq!(dp.partner_class, 0);
        let dp = diff_pairing(&f2, 2, 0).unwrap();
        assert_eq!(dp.pairs, vec![(0, 2), (1, 3)]);
        assert_eq!(dp.partner_class, 1);
        assert!(diff_pairing(&f2, 2, 2).is_err());
    }

    #[test]
    fn diff_degree_zero_matches_exhaustive_scan() {
        let f3 = make_field(3, 1).unwrap();
        for u in 0..3 {
            let dp = diff_pairing(&f3, 1, u).unwrap();
            let mut scan = Vec::new();
            for a in 0..3u64 {
                for b in 0..3u64 {
                    if (a + 3 - b) % 3 == 1 && a == u {
                        scan.push((a, b));
                    }
                }
            }
            assert_eq!(dp.pairs, scan);
            assert_eq!(dp.pair_count, 1);
        }
        assert_eq!(diff_pairing(&f3, 1, 0).unwrap().pairs, vec![(0, 2)]);
    }

    #[test]
    fn streaming_matches_materialized() {
        for (p, s) in [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)] {
            let k = make_field(p, s).unwrap();
            for target in 1..k.pow(3).unwrap() {
                let sp = sum_pairing(&k, target).unwrap();
                let streamed: Vec<_> = SumPairs::new(&k, target).unwrap().collect();
                assert_eq!(streamed, sp.pairs);
                assert_eq!(sum_pair_count(&k, target).unwrap(), sp.pair_count);
            }
        }
    }

    #[test]
    fn difference_classes_cover_the_block_once() {
        for (p, s) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let k = make_field(p, s).unwrap();
            for target in 1..k.pow(3).unwrap() {
                let n = k.poly_deg(target).finite().unwrap();
                let len = k.block_len(n).unwrap() as usize;
                let (mut seen_a, mut seen_b) = (vec![0u8; len], vec![0u8; len]);
                let mut total = 0;
                for u in 0..k.q() {
                    let dp = diff_pairing(&k, target, u).unwrap();
                    assert_eq!(dp.pair_count, k.pow(n).unwrap());
                    assert_ne!(dp.partner_class, u);
                    total += dp.pair_count;
                    for &(a, b) in &dp.pairs {
                        assert_eq!(k.index_add(a, k.index_neg(b).unwrap()).unwrap(), target);
                        assert_eq!(k.digit(a, n), u);
                        assert_eq!(k.digit(b, n), dp.partner_class);
                        seen_a[a as usize] += 1;
                        seen_b[b as usize] += 1;
                    }
                }
                assert_eq!(total, len as u64);
                assert!(seen_a.iter().chain(&seen_b).all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn large_field_skips_digit_tables() {
        let k = make_field(65_537, 1).unwrap();
        for target in [5u64, 65_537 * 3 + 2] {
            let mut sums = SumPairs::new(&k, target).unwrap();
            assert!(sums.walk.is_none());
            let (a, b) = sums.nth(10).unwrap();
            assert_eq!(k.index_add(a, b).unwrap(), target);
            let (a, b) = DiffPairs::new(&k, target, 7).unwrap().last().unwrap();
            assert_eq!(k.index_sub(a, b).unwrap(), target);
        }
    }
}
