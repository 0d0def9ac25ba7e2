//! Prime-field arithmetic over GF(p).
//!
//! Bulk code paths (encoding, repair) work on raw `u64` residues through a
//! [`PrimeField`] context. [`FieldElement`] carries its modulus along and is
//! the checked, self-describing form used at API boundaries.

use std::fmt;

use thiserror::Error;

/// Largest modulus accepted. Products of two residues must fit in a `u64`.
pub const MAX_MODULUS: u64 = (1 << 32) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_MODULUS}")]
    ModulusTooLarge(u64),
    #[error("elements belong to different fields (GF({0}) vs GF({1}))")]
    FieldMismatch(u64, u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Deterministic primality test by trial division; moduli are below 2^32.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) || p.is_multiple_of(3) {
        return false;
    }
    let mut f = 5u64;
    while f * f <= p {
        if p.is_multiple_of(f) || p.is_multiple_of(f + 2) {
            return false;
        }
        f += 6;
    }
    true
}

/// Smallest prime `>= min`.
pub fn next_prime(min: u64) -> u64 {
    let mut p = min.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// The field GF(p) for a prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    /// The field whose modulus is the smallest prime `>= min`.
    pub fn smallest_at_least(min: u64) -> Result<Self, FieldError> {
        Self::new(next_prime(min))
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Wraps a residue, reducing it mod p.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            modulus: self.p,
        }
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        let s = x + y;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        if x >= y {
            x - y
        } else {
            x + self.p - y
        }
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        if x == 0 {
            0
        } else {
            self.p - x
        }
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        (x * y) % self.p
    }

    /// `x^e`, with `pow(x, 0) = 1` for every `x` including zero.
    pub fn pow(&self, x: u64, mut e: u64) -> u64 {
        let mut base = x % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat, `x^(p-2)`.
    pub fn inv(&self, x: u64) -> Result<u64, FieldError> {
        let x = x % self.p;
        if x == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(x, self.p - 2))
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

/// A residue tagged with its modulus. Invariant: `value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<PrimeField, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::FieldMismatch(self.modulus, other.modulus));
        }
        Ok(self.field())
    }

    pub fn add(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(&rhs)?;
        Ok(f.element(f.add(self.value, rhs.value)))
    }

    pub fn sub(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(&rhs)?;
        Ok(f.element(f.sub(self.value, rhs.value)))
    }

    pub fn mul(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(&rhs)?;
        Ok(f.element(f.mul(self.value, rhs.value)))
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        let f = self.field();
        Ok(f.element(f.inv(self.value)?))
    }

    pub fn pow(self, e: u64) -> Self {
        let f = self.field();
        f.element(f.pow(self.value, e))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn el(p: u64, v: u64) -> FieldElement {
        PrimeField::new(p).unwrap().element(v)
    }

    #[test]
    fn add_examples() {
        assert_eq!(el(7, 3).add(el(7, 5)).unwrap().value(), 1);
        assert_eq!(el(7, 0).add(el(7, 4)).unwrap().value(), 4);
        assert_eq!(el(11, 10).add(el(11, 10)).unwrap().value(), 9);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(el(7, 3).mul(el(7, 5)).unwrap().value(), 1);
        assert_eq!(el(7, 1).mul(el(7, 6)).unwrap().value(), 6);
        assert_eq!(el(11, 4).mul(el(11, 9)).unwrap().value(), 3);
    }

    #[test]
    fn inv_examples() {
        assert_eq!(el(7, 3).inv().unwrap().value(), 5);
        assert_eq!(el(7, 1).inv().unwrap().value(), 1);
        assert_eq!(el(11, 2).inv().unwrap().value(), 6);
        assert_eq!(el(11, 0).inv(), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn pow_examples() {
        assert_eq!(el(7, 3).pow(2).value(), 2);
        assert_eq!(el(7, 0).pow(0).value(), 1);
        assert_eq!(el(11, 2).pow(5).value(), 10);
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        assert_eq!(el(7, 1).add(el(11, 1)), Err(FieldError::FieldMismatch(7, 11)));
        assert!(el(7, 1).mul(el(13, 1)).is_err());
    }

    #[test]
    fn rejects_composite_and_oversized_moduli() {
        assert_eq!(PrimeField::new(15), Err(FieldError::NotPrime(15)));
        assert_eq!(PrimeField::new(1), Err(FieldError::NotPrime(1)));
        assert!(matches!(
            PrimeField::new(1 << 33),
            Err(FieldError::ModulusTooLarge(_))
        ));
    }

    #[test]
    fn next_prime_values() {
        assert_eq!(next_prime(0), 2);
        assert_eq!(next_prime(13), 13);
        assert_eq!(next_prime(16), 17);
        assert_eq!(next_prime(25), 29);
        assert_eq!(next_prime(257), 257);
    }

    #[test]
    fn field_axioms_on_random_triples() {
        for p in [2u64, 7, 13, 257, 65521] {
            let f = PrimeField::new(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            for _ in 0..10_000 {
                let (x, y, z) = (rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p));
                assert_eq!(f.add(f.add(x, y), z), f.add(x, f.add(y, z)));
                assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
                assert_eq!(f.add(x, y), f.add(y, x));
                assert_eq!(f.mul(x, y), f.mul(y, x));
                assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                assert_eq!(f.add(x, f.neg(x)), 0);
                assert_eq!(f.sub(f.add(x, y), y), x);
                if x != 0 {
                    assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let f = PrimeField::new(17).unwrap();
        for x in 0..17 {
            let mut acc = 1;
            for e in 0..=16 {
                assert_eq!(f.pow(x, e), acc, "x={x} e={e}");
                acc = f.mul(acc, x);
            }
        }
    }
}
