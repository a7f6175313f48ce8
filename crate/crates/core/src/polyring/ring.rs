//! Coefficient rings.
//!
//! Arithmetic is routed through a ring *context* value rather than through
//! operator traits on the elements, so that a prime field chosen at runtime
//! and polynomial rings over a declared variable list can share one
//! interface. Two contexts are fields: [`Rationals`] and [`PrimeField`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PolyError;

/// A commutative ring with identity, described by a context value.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    /// Multiplicative inverse, if it exists.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Image of a rational number. Fails when the denominator is not
    /// invertible in the ring.
    fn from_rational(&self, q: &BigRational) -> Result<Self::Elem, PolyError>;

    fn from_int(&self, v: i64) -> Self::Elem;

    /// Characteristic of the ring; `0` for characteristic zero.
    fn characteristic(&self) -> u64;

    fn fmt_elem(&self, a: &Self::Elem, f: &mut fmt::Formatter<'_>) -> fmt::Result;

    /// Whether `a` should be printed with a leading minus sign (and `neg(a)`
    /// printed after it). Only meaningful for ordered rings.
    fn is_negative(&self, _a: &Self::Elem) -> bool {
        false
    }
}

/// The field of rational numbers, with arbitrary-precision elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn from_rational(&self, q: &BigRational) -> Result<BigRational, PolyError> {
        Ok(q.clone())
    }
    fn from_int(&self, v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn fmt_elem(&self, a: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{a}")
    }
    fn is_negative(&self, a: &BigRational) -> bool {
        a.is_negative()
    }
}

/// Largest prime below 2^62; the default modulus for rank computations.
pub const DEFAULT_PRIME: u64 = 4_611_686_018_427_387_847;

/// Exclusive upper bound for supported moduli.
pub const MAX_PRIME: u64 = 1 << 62;

/// The field Z/pZ for a word-sized prime p < 2^62.
///
/// Elements are plain `u64` residues in `[0, p)`. Besides the reference
/// arithmetic this carries Montgomery constants for the dense elimination
/// kernels in [`crate::linalg`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
    /// -p^{-1} mod 2^64
    p_neg_inv: u64,
    /// 2^128 mod p
    r2: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, PolyError> {
        if !(3..MAX_PRIME).contains(&p) || !is_prime_u64(p) {
            return Err(PolyError::InvalidPrime(p));
        }
        // Newton iteration for p^{-1} mod 2^64 (p odd).
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        debug_assert_eq!(p.wrapping_mul(inv), 1);
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Ok(PrimeField { p, p_neg_inv: inv.wrapping_neg(), r2 })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        (x % self.p as u128) as u64
    }

    #[inline]
    pub fn add_mod(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_mod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul_mod(&self, a: u64, b: u64) -> u64 {
        self.reduce_u128(a as u128 * b as u128)
    }

    pub fn pow_mod(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_mod(acc, base);
            }
            base = self.mul_mod(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv_mod(&self, a: u64) -> Option<u64> {
        (a % self.p != 0).then(|| self.pow_mod(a, self.p - 2))
    }

    /// Montgomery product: `a * b * 2^-64 mod p`.
    #[inline(always)]
    pub fn mont_mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        let m = (t as u64).wrapping_mul(self.p_neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    /// Converts a residue into Montgomery form (`a * 2^64 mod p`).
    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.mont_mul(a, self.r2)
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        let r = v.mod_floor(&BigInt::from(self.p));
        r.to_u64().expect("residue fits in u64")
    }
}

impl Ring for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.add_mod(*a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mul_mod(*a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.sub_mod(*a, *b)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        self.inv_mod(*a)
    }
    fn from_rational(&self, q: &BigRational) -> Result<u64, PolyError> {
        let den = self.from_bigint(q.denom());
        let inv = self.inv_mod(den).ok_or(PolyError::NotInvertible {
            value: q.to_string(),
            prime: self.p,
        })?;
        Ok(self.mul_mod(self.from_bigint(q.numer()), inv))
    }
    fn from_int(&self, v: i64) -> u64 {
        let r = (v as i128).rem_euclid(self.p as i128);
        r as u64
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn fmt_elem(&self, a: &u64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{a}")
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powm = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulm(acc, b);
            }
            b = mulm(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = powm(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulm(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Parses `"a"`, `"-a"` or `"a/b"` into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Integer-valued rational shorthand used throughout the crate.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_prime_is_prime_and_in_range() {
        assert!(is_prime_u64(DEFAULT_PRIME));
        assert!(DEFAULT_PRIME < MAX_PRIME);
        assert!(!is_prime_u64(DEFAULT_PRIME + 2));
        assert!(PrimeField::new(DEFAULT_PRIME).is_ok());
    }

    #[test]
    fn rejects_composites_and_oversized_moduli() {
        assert!(PrimeField::new(91).is_err());
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new((1u64 << 62) + 135).is_err());
    }

    #[test]
    fn montgomery_product_matches_reference() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let samples = [0u64, 1, 2, 12345, DEFAULT_PRIME - 1, DEFAULT_PRIME / 3];
        for &a in &samples {
            for &b in &samples {
                assert_eq!(f.mont_mul(f.to_mont(a), b), f.mul_mod(a, b));
            }
        }
    }

    #[test]
    fn rational_images() {
        let f = PrimeField::new(101).unwrap();
        let half = f.from_rational(&rat(1, 2)).unwrap();
        assert_eq!(f.mul_mod(half, 2), 1);
        assert_eq!(f.from_rational(&rat(-3, 1)).unwrap(), 98);
        assert!(f.from_rational(&rat(1, 202)).is_err());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rational(" 7 "), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
