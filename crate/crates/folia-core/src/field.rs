//! Exact coefficient arithmetic.
//!
//! A coefficient domain is a lightweight context object implementing [`Ring`]
//! (or [`Field`] when division is available); elements are plain data. Two
//! fields are provided, the rationals with arbitrary-precision integers and a
//! prime field `F_p` for a configurable odd prime, together with the ring of
//! dual numbers `K[eps]/(eps^2)` used to validate derivative formulas.
//!
//! There is no rounding anywhere: all operations are exact.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Commutative ring context with exact arithmetic.
// element constructors take the context receiver
#[allow(clippy::wrong_self_convention)]
pub trait Ring: Clone + PartialEq + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// Canonical string form, inverse of [`Ring::parse`].
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem>;

    /// Human-readable description of the coefficient domain.
    fn describe(&self) -> FieldDesc;

    /// Accumulate `a + c*b` in place.
    fn add_mul_assign(&self, a: &mut Self::Elem, c: &Self::Elem, b: &Self::Elem) {
        *a = self.add(a, &self.mul(c, b));
    }
}

/// Ring in which every nonzero element is invertible.
pub trait Field: Ring {
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    /// Deterministic draw used by instance samplers.
    fn sample(&self, rng: &mut SplitMix64) -> Self::Elem;
}

/// Identifies the coefficient domain of a value or report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldDesc {
    Rationals,
    Prime(u64),
    Dual(alloc::boxed::Box<FieldDesc>),
}

impl core::fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FieldDesc::Rationals => write!(f, "Q"),
            FieldDesc::Prime(p) => write!(f, "F_{p}"),
            FieldDesc::Dual(base) => write!(f, "{base}[eps]"),
        }
    }
}

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

/// The field of rational numbers with arbitrary-precision integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn format(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn parse(&self, s: &str) -> Result<BigRational> {
        let s = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not a rational number"));
        match s.split_once('/') {
            Some((num, den)) => {
                let n: BigInt = num.trim().parse().map_err(|_| bad())?;
                let d: BigInt = den.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("`{s}` has zero denominator")));
                }
                Ok(BigRational::new(n, d))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(BigRational::from_integer(n))
            }
        }
    }

    fn describe(&self) -> FieldDesc {
        FieldDesc::Rationals
    }
}

impl Field for Rationals {
    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }

    /// Small dense integers. Keeps exact elimination over Q cheap while
    /// leaving every genericity condition satisfiable.
    fn sample(&self, rng: &mut SplitMix64) -> BigRational {
        self.from_i64(rng.signed(20))
    }
}

// ---------------------------------------------------------------------------
// Prime fields
// ---------------------------------------------------------------------------

/// The prime field `F_p` for an odd prime `p < 2^62`.
///
/// Elements are canonical representatives in `[0, p)` stored as `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Validates that `p` is an odd prime.
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(Error::Degenerate(format!("{p} is not an odd prime")));
        }
        if p >= 1 << 62 {
            return Err(Error::Degenerate(format!("prime {p} too large")));
        }
        if !is_prime_u64(p) {
            return Err(Error::Degenerate(format!("{p} is composite")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_i128(&self, n: i128) -> u64 {
        let p = self.p as i128;
        (((n % p) + p) % p) as u64
    }

    fn reduce_bigint(&self, n: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let mut r = n % &p;
        if r.sign() == num_bigint::Sign::Minus {
            r += &p;
        }
        u64::try_from(r).expect("residue fits in u64")
    }

    /// Reduces a rational number modulo p. Fails when the denominator is
    /// divisible by p.
    pub fn reduce_rational(&self, x: &BigRational) -> Result<u64> {
        let den = self.reduce_bigint(x.denom());
        if den == 0 {
            return Err(Error::Degenerate(format!(
                "denominator divisible by {}",
                self.p
            )));
        }
        let num = self.reduce_bigint(x.numer());
        Ok(self.mul(&num, &self.inv(&den)))
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

    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i128(n as i128)
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }

    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn format(&self, a: &u64) -> String {
        a.to_string()
    }

    fn parse(&self, s: &str) -> Result<u64> {
        let s = s.trim();
        let n: i128 = s
            .parse()
            .map_err(|_| Error::Parse(format!("`{s}` is not an integer mod {}", self.p)))?;
        Ok(self.reduce_i128(n))
    }

    fn describe(&self) -> FieldDesc {
        FieldDesc::Prime(self.p)
    }

    #[inline]
    fn add_mul_assign(&self, a: &mut u64, c: &u64, b: &u64) {
        *a = ((*a as u128 + *c as u128 * *b as u128) % self.p as u128) as u64;
    }
}

impl Field for PrimeField {
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero mod {}", self.p);
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (*a as i128, self.p as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        self.reduce_i128(s0)
    }

    fn sample(&self, rng: &mut SplitMix64) -> u64 {
        rng.below(self.p)
    }
}

/// Deterministic Miller-Rabin for u64.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc: u64 = 1;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % modulus as u128) as u64;
        }
        base = ((base as u128 * base as u128) % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Dual numbers
// ---------------------------------------------------------------------------

/// Element of `K[eps]/(eps^2)`: value plus infinitesimal part.
#[derive(Clone, Debug, PartialEq)]
pub struct DualElem<E> {
    pub val: E,
    pub eps: E,
}

/// The ring of dual numbers over a field `K`. Products track first-order
/// perturbations exactly, so running a multilinear construction over
/// `Dual<K>` computes its derivative with no truncation error.
///
/// This is a local ring, not a field: elements with zero value part are not
/// invertible, and nothing in this crate divides dual numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<K: Field> {
    pub base: K,
}

impl<K: Field> Dual<K> {
    pub fn new(base: K) -> Self {
        Dual { base }
    }

    pub fn constant(&self, v: K::Elem) -> DualElem<K::Elem> {
        DualElem {
            val: v,
            eps: self.base.zero(),
        }
    }

    pub fn with_eps(&self, val: K::Elem, eps: K::Elem) -> DualElem<K::Elem> {
        DualElem { val, eps }
    }
}

impl<K: Field> Ring for Dual<K> {
    type Elem = DualElem<K::Elem>;

    fn zero(&self) -> Self::Elem {
        DualElem {
            val: self.base.zero(),
            eps: self.base.zero(),
        }
    }

    fn one(&self) -> Self::Elem {
        DualElem {
            val: self.base.one(),
            eps: self.base.zero(),
        }
    }

    fn from_i64(&self, n: i64) -> Self::Elem {
        DualElem {
            val: self.base.from_i64(n),
            eps: self.base.zero(),
        }
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DualElem {
            val: self.base.add(&a.val, &b.val),
            eps: self.base.add(&a.eps, &b.eps),
        }
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DualElem {
            val: self.base.sub(&a.val, &b.val),
            eps: self.base.sub(&a.eps, &b.eps),
        }
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        DualElem {
            val: self.base.neg(&a.val),
            eps: self.base.neg(&a.eps),
        }
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DualElem {
            val: self.base.mul(&a.val, &b.val),
            eps: self.base.add(
                &self.base.mul(&a.val, &b.eps),
                &self.base.mul(&a.eps, &b.val),
            ),
        }
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.base.is_zero(&a.val) && self.base.is_zero(&a.eps)
    }

    fn format(&self, a: &Self::Elem) -> String {
        format!(
            "{}+{}eps",
            self.base.format(&a.val),
            self.base.format(&a.eps)
        )
    }

    fn parse(&self, s: &str) -> Result<Self::Elem> {
        Ok(self.constant(self.base.parse(s)?))
    }

    fn describe(&self) -> FieldDesc {
        FieldDesc::Dual(alloc::boxed::Box::new(self.base.describe()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_is_canonical() {
        let f = PrimeField::new(32003).unwrap();
        assert_eq!(f.from_i64(-1), 32002);
        assert_eq!(f.add(&32002, &2), 1);
        let a = 12345u64;
        assert_eq!(f.mul(&a, &f.inv(&a)), 1);
    }

    #[test]
    fn prime_validation() {
        assert!(PrimeField::new(32003).is_ok());
        assert!(PrimeField::new(65537).is_ok());
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new(32001).is_err()); // 3 * 10667
        assert!(PrimeField::new(1).is_err());
    }

    #[test]
    fn rational_roundtrip() {
        let q = Rationals;
        for s in ["0", "5", "-3", "2/7", "-10/3"] {
            let e = q.parse(s).unwrap();
            assert_eq!(q.parse(&q.format(&e)).unwrap(), e);
        }
        assert_eq!(q.format(&q.parse("4/6").unwrap()), "2/3");
        assert!(q.parse("1/0").is_err());
        assert!(q.parse("x").is_err());
    }

    #[test]
    fn dual_product_rule() {
        let f = PrimeField::new(101).unwrap();
        let d = Dual::new(f);
        // (2 + 3eps)(5 + 7eps) = 10 + (14 + 15)eps
        let a = d.with_eps(2, 3);
        let b = d.with_eps(5, 7);
        let p = d.mul(&a, &b);
        assert_eq!(p.val, 10);
        assert_eq!(p.eps, 29);
        // eps^2 = 0
        let e = d.with_eps(0, 1);
        assert!(d.is_zero(&d.mul(&e, &e)));
    }
}
