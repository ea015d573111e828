//! Prime-field arithmetic.
//!
//! Every input, key and message symbol lives in `F_q` for a prime `q < 2^31`.
//! Elements carry their [`FieldSpec`] so that mixing fields is caught instead of
//! silently reduced.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::RandomStream;

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is outside [2, 2^31)")]
    ModulusOutOfRange(u64),
    #[error("modulus {0} is not prime")]
    Composite(u64),
    #[error("field mismatch: F_{left} vs F_{right}")]
    SpecMismatch { left: u32, right: u32 },
    #[error("division by zero in F_{0}")]
    DivisionByZero(u32),
    #[error("value {value} is not a canonical element of F_{q}")]
    NotCanonical { value: u64, q: u32 },
}

/// A prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawFieldSpec")]
pub struct FieldSpec {
    q: u32,
}

#[derive(Deserialize)]
struct RawFieldSpec {
    q: u64,
}

impl TryFrom<RawFieldSpec> for FieldSpec {
    type Error = FieldError;

    fn try_from(raw: RawFieldSpec) -> Result<Self, Self::Error> {
        FieldSpec::new(raw.q)
    }
}

/// Deterministic primality by trial division; `n < 2^31` keeps this under ~23k divisions.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

impl FieldSpec {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if !(2..MAX_MODULUS).contains(&q) {
            return Err(FieldError::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(FieldError::Composite(q));
        }
        Ok(Self { q: q as u32 })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    /// Element with representative `value mod q`.
    pub fn element(self, value: u64) -> FieldElement {
        FieldElement { value: (value % self.q as u64) as u32, spec: self }
    }

    /// Element for a signed integer, e.g. `-1 -> q - 1`.
    pub fn element_signed(self, value: i64) -> FieldElement {
        FieldElement { value: value.rem_euclid(self.q as i64) as u32, spec: self }
    }

    /// Element from a value that must already be canonical.
    pub fn canonical(self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.q as u64 {
            return Err(FieldError::NotCanonical { value, q: self.q });
        }
        Ok(FieldElement { value: value as u32, spec: self })
    }

    pub fn zero(self) -> FieldElement {
        FieldElement { value: 0, spec: self }
    }

    pub fn one(self) -> FieldElement {
        FieldElement { value: 1, spec: self }
    }

    /// Uniform draw from `F_q` by rejection sampling on 32-bit words.
    pub fn uniform_sample(self, stream: &mut RandomStream) -> FieldElement {
        FieldElement { value: self.sample_raw(stream), spec: self }
    }

    pub(crate) fn sample_raw(self, stream: &mut RandomStream) -> u32 {
        let q = self.q as u64;
        // largest multiple of q that fits in 2^32
        let zone = (1u64 << 32) / q * q;
        loop {
            let word = stream.next_u32() as u64;
            if word < zone {
                return (word % q) as u32;
            }
        }
    }

    #[inline]
    pub(crate) fn add_raw(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let q = self.q as u64;
        (if s >= q { s - q } else { s }) as u32
    }

    #[inline]
    pub(crate) fn sub_raw(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.q as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub(crate) fn neg_raw(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub(crate) fn mul_raw(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    /// Inverse via the extended Euclidean algorithm.
    pub(crate) fn inv_raw(self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.q as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(t0.rem_euclid(self.q as i64) as u32)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

/// A canonical element of a prime field. Serializes as a bare integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    spec: FieldSpec,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn spec(self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<FieldSpec, FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::SpecMismatch { left: self.spec.q, right: other.spec.q });
        }
        Ok(self.spec)
    }

    pub fn try_add(self, other: Self) -> Result<Self, FieldError> {
        let spec = self.same_field(other)?;
        Ok(Self { value: spec.add_raw(self.value, other.value), spec })
    }

    pub fn try_sub(self, other: Self) -> Result<Self, FieldError> {
        let spec = self.same_field(other)?;
        Ok(Self { value: spec.sub_raw(self.value, other.value), spec })
    }

    pub fn try_mul(self, other: Self) -> Result<Self, FieldError> {
        let spec = self.same_field(other)?;
        Ok(Self { value: spec.mul_raw(self.value, other.value), spec })
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        self.spec
            .inv_raw(self.value)
            .map(|value| Self { value, spec: self.spec })
            .ok_or(FieldError::DivisionByZero(self.spec.q))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// The operator impls panic on a field mismatch; use the `try_*` methods to get an error instead.
impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: self.spec.neg_raw(self.value), spec: self.spec }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.value)
    }
}
