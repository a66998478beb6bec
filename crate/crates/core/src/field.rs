//! Additive arithmetic of `F_q` and of polynomial indices.
//!
//! A non-negative integer `N = c_0 + c_1 q + ... + c_n q^n` names the
//! polynomial `p_N = ι(c_0) + ι(c_1) T + ... + ι(c_n) T^n`. The digit map `ι`
//! sends `x ∈ [0, q)` to the vector of its base-`p` digits, read as coordinates
//! in the canonical `F_p`-basis of `F_q`. Only the additive group
//! `(Z/p)^s` is modelled; nothing here multiplies field elements.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default ceiling on polynomial indices.
pub const DEFAULT_INDEX_BOUND: u64 = 1 << 62;

/// The finite field `F_q`, `q = p^s`, together with the index bound every
/// operation is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FieldSpec {
    p: u64,
    s: u32,
    q: u64,
    #[serde(skip)]
    bound: u64,
}

/// Degree of a polynomial, with `deg 0 = -∞` as a separate variant.
///
/// The derived ordering puts `NegInf` below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    NegInf,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInf => None,
            Degree::Finite(n) => Some(n),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInf => f.write_str("-inf"),
            Degree::Finite(n) => write!(f, "{n}"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Builds `F_{p^s}` with the default index bound.
pub fn make_field(p: u64, s: u32) -> Result<FieldSpec> {
    FieldSpec::with_bound(p, s, DEFAULT_INDEX_BOUND)
}

impl FieldSpec {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        make_field(p, s)
    }

    /// Builds `F_{p^s}` whose polynomial indices may not exceed `bound`.
    pub fn with_bound(p: u64, s: u32, bound: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if s < 1 {
            return Err(Error::InvalidExtension(s));
        }
        let mut q: u64 = 1;
        for _ in 0..s {
            q = match q.checked_mul(p) {
                Some(v) if v <= bound => v,
                _ => return Err(Error::FieldTooLarge { p, s, bound }),
            };
        }
        Ok(FieldSpec { p, s, q, bound })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn index_bound(&self) -> u64 {
        self.bound
    }

    pub(crate) fn check_elem(&self, x: u64) -> Result<()> {
        if x < self.q {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange { x, q: self.q })
        }
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n <= self.bound {
            Ok(())
        } else {
            Err(Error::IndexOverflow {
                index: n as u128,
                bound: self.bound,
            })
        }
    }

    // Componentwise mod-p addition of base-p digit vectors; inputs are trusted.
    #[inline]
    fn add_elem_raw(&self, x: u64, y: u64) -> u64 {
        if self.s == 1 {
            return (x + y) % self.p;
        }
        let p = self.p;
        let (mut x, mut y, mut place, mut out) = (x, y, 1u64, 0u64);
        for _ in 0..self.s {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        out
    }

    #[inline]
    fn neg_elem_raw(&self, x: u64) -> u64 {
        if self.s == 1 {
            return (self.p - x % self.p) % self.p;
        }
        let p = self.p;
        let (mut x, mut place, mut out) = (x, 1u64, 0u64);
        for _ in 0..self.s {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        out
    }

    /// Index of `ι(x) + ι(y)`.
    pub fn elem_add(&self, x: u64, y: u64) -> Result<u64> {
        self.check_elem(x)?;
        self.check_elem(y)?;
        Ok(self.add_elem_raw(x, y))
    }

    /// Index of `-ι(x)`.
    pub fn elem_neg(&self, x: u64) -> Result<u64> {
        self.check_elem(x)?;
        Ok(self.neg_elem_raw(x))
    }

    /// Index of `ι(x) - ι(y)`.
    pub fn elem_sub(&self, x: u64, y: u64) -> Result<u64> {
        self.check_elem(x)?;
        self.check_elem(y)?;
        Ok(self.add_elem_raw(x, self.neg_elem_raw(y)))
    }

    /// Base-`q` digits of `n`, lowest degree first. `n = 0` gives an empty list.
    pub fn index_coeffs(&self, n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut t = n;
        while t > 0 {
            out.push(t % self.q);
            t /= self.q;
        }
        out
    }

    /// Inverse of [`FieldSpec::index_coeffs`].
    pub fn index_from_coeffs(&self, coeffs: &[u64]) -> Result<u64> {
        let mut acc: u128 = 0;
        for &c in coeffs.iter().rev() {
            self.check_elem(c)?;
            acc = acc * self.q as u128 + c as u128;
            if acc > self.bound as u128 {
                return Err(Error::IndexOverflow {
                    index: acc,
                    bound: self.bound,
                });
            }
        }
        Ok(acc as u64)
    }

    /// `deg p_n`, computed with integer division only.
    pub fn poly_deg(&self, n: u64) -> Degree {
        if n == 0 {
            return Degree::NegInf;
        }
        let mut t = n;
        let mut d = 0u32;
        while t >= self.q {
            t /= self.q;
            d += 1;
        }
        Degree::Finite(d)
    }

    /// `q^n`, if it fits under the index bound.
    pub fn pow(&self, n: u32) -> Result<u64> {
        let mut acc: u64 = 1;
        for _ in 0..n {
            acc = acc.checked_mul(self.q).filter(|&v| v <= self.bound).ok_or(
                Error::IndexOverflow {
                    index: (self.q as u128).saturating_pow(n),
                    bound: self.bound,
                },
            )?;
        }
        Ok(acc)
    }

    /// The number of polynomials of degree at most `n`, i.e. `q^{n+1}`.
    pub fn block_len(&self, n: u32) -> Result<u64> {
        self.pow(n + 1)
    }

    /// The `T^n` coefficient of `p_x`, as an element index.
    pub fn digit(&self, x: u64, n: u32) -> u64 {
        let mut t = x;
        for _ in 0..n {
            t /= self.q;
            if t == 0 {
                return 0;
            }
        }
        t % self.q
    }

    #[inline]
    fn combine(&self, x: u64, y: u64, negate_y: bool) -> u128 {
        if self.p == 2 {
            return (x ^ y) as u128;
        }
        let q = self.q;
        let (mut x, mut y) = (x, y);
        let mut out: u128 = 0;
        let mut place: u128 = 1;
        while x > 0 || y > 0 {
            let dy = if negate_y {
                self.neg_elem_raw(y % q)
            } else {
                y % q
            };
            out += self.add_elem_raw(x % q, dy) as u128 * place;
            x /= q;
            y /= q;
            place *= q as u128;
        }
        out
    }

    fn finish(&self, v: u128) -> Result<u64> {
        if v > self.bound as u128 {
            Err(Error::IndexOverflow {
                index: v,
                bound: self.bound,
            })
        } else {
            Ok(v as u64)
        }
    }

    /// Index of `p_n + p_m`.
    pub fn index_add(&self, n: u64, m: u64) -> Result<u64> {
        self.check_index(n)?;
        self.check_index(m)?;
        self.finish(self.combine(n, m, false))
    }

    /// Index of `-p_n`.
    pub fn index_neg(&self, n: u64) -> Result<u64> {
        self.check_index(n)?;
        self.finish(self.combine(0, n, true))
    }

    /// Index of `p_n - p_m`.
    pub fn index_sub(&self, n: u64, m: u64) -> Result<u64> {
        self.check_index(n)?;
        self.check_index(m)?;
        self.finish(self.combine(n, m, true))
    }

    /// Unchecked `p_n - p_m` for inputs already known to lie in one degree
    /// block below the bound; the result then stays in the same block.
    #[inline]
    pub(crate) fn sub_in_block(&self, n: u64, m: u64) -> u64 {
        self.combine(n, m, true) as u64
    }

    #[inline]
    pub(crate) fn add_in_block(&self, n: u64, m: u64) -> u64 {
        self.combine(n, m, false) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64, s: u32) -> FieldSpec {
        make_field(p, s).unwrap()
    }

    #[test]
    fn construction() {
        assert_eq!(f(2, 1).q(), 2);
        assert_eq!(f(3, 1).q(), 3);
        assert_eq!(f(2, 2).q(), 4);
        assert!(matches!(make_field(4, 1), Err(Error::NotPrime(4))));
        assert!(matches!(make_field(1, 1), Err(Error::NotPrime(1))));
        assert!(matches!(make_field(3, 0), Err(Error::InvalidExtension(0))));
        assert!(matches!(
            make_field(2, 63),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(matches!(
            FieldSpec::with_bound(3, 3, 20),
            Err(Error::FieldTooLarge { .. })
        ));
    }

    #[test]
    fn gf4_addition_is_componentwise_mod_2() {
        let k = f(2, 2);
        for x in 0..4u64 {
            for y in 0..4u64 {
                let want = ((x & 1) ^ (y & 1)) | (((x >> 1) ^ (y >> 1)) << 1);
                assert_eq!(k.elem_add(x, y).unwrap(), want);
            }
        }
        assert_eq!(k.elem_add(1, 2).unwrap(), 3);
        assert_eq!(k.elem_add(3, 3).unwrap(), 0);
    }

    #[test]
    fn element_arithmetic() {
        let k = f(3, 1);
        assert_eq!(k.elem_add(1, 2).unwrap(), 0);
        assert_eq!(k.elem_add(2, 2).unwrap(), 1);
        assert_eq!(k.elem_neg(1).unwrap(), 2);
        assert_eq!(k.elem_neg(0).unwrap(), 0);
        assert_eq!(f(2, 1).elem_neg(1).unwrap(), 1);
        assert!(matches!(
            k.elem_add(3, 0),
            Err(Error::ElementOutOfRange { x: 3, q: 3 })
        ));
        assert!(k.elem_neg(7).is_err());
    }

    #[test]
    fn digits_and_degree() {
        assert_eq!(f(3, 1).index_coeffs(5), vec![2, 1]);
        assert_eq!(f(2, 1).index_coeffs(3), vec![1, 1]);
        assert!(f(5, 1).index_coeffs(0).is_empty());
        let k = f(3, 1);
        assert_eq!(k.poly_deg(8), Degree::Finite(1));
        assert_eq!(k.poly_deg(9), Degree::Finite(2));
        assert_eq!(k.poly_deg(0), Degree::NegInf);
        assert!(Degree::NegInf < Degree::Finite(0));
        // Exact at every power of q, where a float log would wobble.
        for (p, s) in [(2, 1), (3, 1), (5, 1), (7, 2)] {
            let k = f(p, s);
            let mut pw = 1u64;
            for n in 0..(60 / (k.q().ilog2() + 1)) {
                assert_eq!(k.poly_deg(pw), Degree::Finite(n));
                if pw > 1 {
                    assert_eq!(k.poly_deg(pw - 1), Degree::Finite(n - 1));
                }
                pw *= k.q();
            }
        }
    }

    #[test]
    fn index_arithmetic_examples() {
        let k = f(3, 1);
        assert_eq!(k.index_add(1, 3).unwrap(), 4);
        assert_eq!(k.index_add(4, 4).unwrap(), 8);
        assert_eq!(k.index_add(17, 0).unwrap(), 17);
        assert_eq!(k.index_add(1, 2).unwrap(), 0);
        assert_eq!(k.index_neg(4).unwrap(), 8);
        assert_eq!(k.index_neg(0).unwrap(), 0);
        let b = f(2, 1);
        for n in 0..64 {
            assert_eq!(b.index_neg(n).unwrap(), n);
        }
    }

    #[test]
    fn index_bound_is_enforced() {
        let k = FieldSpec::with_bound(3, 1, 26).unwrap();
        assert!(k.index_add(26, 0).is_ok());
        assert!(matches!(
            k.index_add(27, 0),
            Err(Error::IndexOverflow { .. })
        ));
        // (1+T+T^2) doubled is 2+2T+2T^2 = p_26.
        assert_eq!(k.index_add(13, 13).unwrap(), 26);
        let tight = FieldSpec::with_bound(3, 1, 20).unwrap();
        assert!(matches!(
            tight.index_add(13, 13),
            Err(Error::IndexOverflow { .. })
        ));
        assert!(k.pow(3).is_err());
        assert_eq!(k.pow(2).unwrap(), 9);
    }

    #[test]
    fn addition_table_matches_vector_arithmetic() {
        // Independent table: explicit (Z/p)^s vectors.
        for (p, s) in [(2u64, 1u32), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
            let k = f(p, s);
            let to_vec = |x: u64| -> Vec<u64> {
                let mut v = Vec::new();
                let mut t = x;
                for _ in 0..s {
                    v.push(t % p);
                    t /= p;
                }
                v
            };
            let from_vec = |v: &[u64]| v.iter().rev().fold(0u64, |acc, &d| acc * p + d);
            for x in 0..k.q() {
                for y in 0..k.q() {
                    let (vx, vy) = (to_vec(x), to_vec(y));
                    let sum: Vec<u64> = vx.iter().zip(&vy).map(|(a, b)| (a + b) % p).collect();
                    assert_eq!(
                        k.elem_add(x, y).unwrap(),
                        from_vec(&sum),
                        "q={} {x}+{y}",
                        k.q()
                    );
                }
                let neg: Vec<u64> = to_vec(x).iter().map(|a| (p - a) % p).collect();
                assert_eq!(k.elem_neg(x).unwrap(), from_vec(&neg));
            }
        }
    }

    fn field_strategy() -> impl Strategy<Value = FieldSpec> {
        prop::sample::select(vec![(2u64, 1u32), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2)])
            .prop_map(|(p, s)| make_field(p, s).unwrap())
    }

    proptest! {
        #[test]
        fn group_laws(k in field_strategy(), a in 0u64..1_000_000, b in 0u64..1_000_000, c in 0u64..1_000_000) {
            let lim = k.pow(6).unwrap();
            let (a, b, c) = (a % lim, b % lim, c % lim);
            prop_assert_eq!(k.index_add(a, b).unwrap(), k.index_add(b, a).unwrap());
            let ab_c = k.index_add(k.index_add(a, b).unwrap(), c).unwrap();
            let a_bc = k.index_add(a, k.index_add(b, c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert_eq!(k.index_add(a, 0).unwrap(), a);
            let mut acc = 0;
            for _ in 0..k.p() {
                acc = k.index_add(acc, a).unwrap();
            }
            prop_assert_eq!(acc, 0);
            prop_assert_eq!(k.index_add(a, k.index_neg(a).unwrap()).unwrap(), 0);
            prop_assert_eq!(k.index_sub(a, b).unwrap(), k.index_add(a, k.index_neg(b).unwrap()).unwrap());
            let dsum = k.poly_deg(k.index_add(a, b).unwrap());
            prop_assert!(dsum <= k.poly_deg(a).max(k.poly_deg(b)));
            prop_assert_eq!(k.index_from_coeffs(&k.index_coeffs(a)).unwrap(), a);
        }
    }
}
