//! Prime-field arithmetic.
//!
//! [`Field`] is a validated prime modulus and does raw `u64` arithmetic for the
//! hot loops in [`crate::linalg`]. [`FieldElement`] carries its modulus with it
//! and refuses to mix fields.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::Error;

/// Largest modulus accepted; keeps every product below 2^64.
pub const MAX_MODULUS: u64 = 1 << 32;

/// Deterministic primality test by trial division (moduli are at most 2^32).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The least prime `>= n`.
pub fn smallest_prime_geq(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// A prime field F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    q: u64,
}

impl Field {
    pub fn new(q: u64) -> Result<Self, Error> {
        if q >= MAX_MODULUS || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Field { q })
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        a % self.q
    }

    /// Reduces a signed integer into `[0, q)`.
    pub fn from_i64(self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self, a: u64) -> Result<u64, Error> {
        if a.is_multiple_of(self.q) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn elem(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            modulus: self.q,
        }
    }
}

/// An element of F_q tagged with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

/// Operation selector for [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    /// `a^b.value()`
    Pow,
    /// Inverse of `a`; `b` is ignored apart from the modulus check.
    Inv,
}

impl FieldElement {
    /// Builds an element, checking that `modulus` is prime.
    pub fn new(value: u64, modulus: u64) -> Result<Self, Error> {
        Ok(Field::new(modulus)?.elem(value))
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn field(self) -> Field {
        Field { q: self.modulus }
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: FieldElement) -> Result<Field, Error> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(self.field())
    }

    pub fn try_add(self, o: FieldElement) -> Result<FieldElement, Error> {
        field_arith(self, o, FieldOp::Add)
    }

    pub fn try_sub(self, o: FieldElement) -> Result<FieldElement, Error> {
        field_arith(self, o, FieldOp::Sub)
    }

    pub fn try_mul(self, o: FieldElement) -> Result<FieldElement, Error> {
        field_arith(self, o, FieldOp::Mul)
    }

    pub fn try_div(self, o: FieldElement) -> Result<FieldElement, Error> {
        field_arith(self, o, FieldOp::Div)
    }

    pub fn inv(self) -> Result<FieldElement, Error> {
        field_arith(self, self, FieldOp::Inv)
    }

    pub fn pow(self, exp: u64) -> FieldElement {
        let f = self.field();
        f.elem(f.pow(self.value, exp))
    }
}

/// Checked arithmetic on two tagged elements.
pub fn field_arith(a: FieldElement, b: FieldElement, op: FieldOp) -> Result<FieldElement, Error> {
    let f = a.check(b)?;
    let v = match op {
        FieldOp::Add => f.add(a.value, b.value),
        FieldOp::Sub => f.sub(a.value, b.value),
        FieldOp::Mul => f.mul(a.value, b.value),
        FieldOp::Div => f.mul(a.value, f.inv(b.value)?),
        FieldOp::Pow => f.pow(a.value, b.value),
        FieldOp::Inv => f.inv(a.value)?,
    };
    Ok(f.elem(v))
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// The operator forms panic on mismatched moduli; use `try_*` to get an error.
macro_rules! binop {
    ($tr:ident, $m:ident, $op:expr) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                field_arith(self, rhs, $op).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

binop!(Add, add, FieldOp::Add);
binop!(Sub, sub, FieldOp::Sub);
binop!(Mul, mul, FieldOp::Mul);
binop!(Div, div, FieldOp::Div);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let f = self.field();
        f.elem(f.neg(self.value))
    }
}
