//! Arithmetic in binary extension fields GF(2^m), 3 <= m <= 16.
//!
//! Elements are polynomials over GF(2) packed into the low `m` bits of a
//! `u16` (bit `i` is the coefficient of `x^i`). Addition is XOR and needs no
//! field context; multiplication reduces modulo the field's irreducible
//! polynomial. For `m <= 12` a log/antilog table built from the smallest
//! primitive element is used; the carry-less shift-and-reduce path is always
//! available as [`Field::mul_direct`].

use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest extension degree for which log/antilog tables are built.
pub const MAX_TABLE_DEGREE: u32 = 12;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u16);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Elem {
    type Output = Elem;
    #[inline]
    fn add(self, rhs: Elem) -> Elem {
        Elem(self.0 ^ rhs.0)
    }
}

// Characteristic 2: subtraction is addition.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Elem {
    type Output = Elem;
    #[inline]
    fn sub(self, rhs: Elem) -> Elem {
        Elem(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for Elem {
    #[inline]
    fn add_assign(&mut self, rhs: Elem) {
        self.0 ^= rhs.0;
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl SubAssign for Elem {
    #[inline]
    fn sub_assign(&mut self, rhs: Elem) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for Elem {
    fn sum<I: Iterator<Item = Elem>>(iter: I) -> Elem {
        iter.fold(Elem::ZERO, |a, b| a + b)
    }
}

#[derive(Clone)]
struct Tables {
    // exp has length 2*(q-1) so that exp[log a + log b] never wraps.
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// A binary extension field GF(2^m) defined by an irreducible modulus.
#[derive(Clone)]
pub struct Field {
    m: u32,
    modulus: u32,
    generator: Elem,
    tables: Option<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for Field {}

/// Default primitive polynomial for each supported degree.
pub fn default_modulus(m: u32) -> Option<u32> {
    Some(match m {
        3 => 0b1011,
        4 => 0b1_0011,
        5 => 0b10_0101,
        6 => 0b100_0011,
        7 => 0b1000_1001,
        8 => 0b1_0001_1101,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201B,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100B,
        _ => return None,
    })
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division against every polynomial of degree 1..=m/2.
pub fn is_irreducible(modulus: u32) -> bool {
    let p = modulus as u64;
    let m = degree(p);
    if m < 1 {
        return false;
    }
    for dd in 1..=(m / 2) {
        for q in (1u64 << dd)..(1u64 << (dd + 1)) {
            if poly_mod(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Field {
    pub fn new(m: u32, modulus: u32) -> Result<Self> {
        if !(3..=16).contains(&m) {
            return Err(Error::InvalidField(format!("degree {m} outside 3..=16")));
        }
        if degree(modulus as u64) != m as i32 {
            return Err(Error::InvalidField(format!(
                "modulus {modulus:#x} does not have degree {m}"
            )));
        }
        if !is_irreducible(modulus) {
            return Err(Error::InvalidField(format!("modulus {modulus:#x} is reducible")));
        }
        let mut field = Field { m, modulus, generator: Elem::ONE, tables: None };
        field.generator = field.find_generator();
        if m <= MAX_TABLE_DEGREE {
            field.tables = Some(field.build_tables());
        }
        Ok(field)
    }

    pub fn with_default_modulus(m: u32) -> Result<Self> {
        let modulus = default_modulus(m)
            .ok_or_else(|| Error::InvalidField(format!("degree {m} outside 3..=16")))?;
        Field::new(m, modulus)
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of field elements, 2^m.
    #[inline]
    pub fn size(&self) -> usize {
        1usize << self.m
    }

    /// Smallest element of multiplicative order 2^m - 1.
    #[inline]
    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn elem(&self, value: u32) -> Result<Elem> {
        if (value as usize) < self.size() {
            Ok(Elem(value as u16))
        } else {
            Err(Error::ElementOutOfRange { value, m: self.m })
        }
    }

    #[inline]
    pub fn contains(&self, a: Elem) -> bool {
        (a.0 as usize) < self.size()
    }

    /// Carry-less multiply followed by reduction modulo the field polynomial.
    pub fn mul_direct(&self, a: Elem, b: Elem) -> Elem {
        let mut acc: u32 = 0;
        let mut x = a.0 as u32;
        let mut y = b.0 as u32;
        let top = 1u32 << self.m;
        while y != 0 {
            if y & 1 != 0 {
                acc ^= x;
            }
            y >>= 1;
            x <<= 1;
            if x & top != 0 {
                x ^= self.modulus;
            }
        }
        Elem(acc as u16)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        match &self.tables {
            Some(t) => Elem(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize]),
            None => self.mul_direct(a, b),
        }
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(match &self.tables {
            Some(t) => {
                let q1 = self.size() - 1;
                Elem(t.exp[(q1 - t.log[a.0 as usize] as usize) % q1])
            }
            // a^(2^m - 2)
            None => self.pow(a, self.size() as u64 - 2),
        })
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// g^i for the field generator g.
    pub fn gen_pow(&self, i: u64) -> Elem {
        self.pow(self.generator, i % (self.size() as u64 - 1))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Elem) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let q1 = self.size() as u64 - 1;
        let mut ord = q1;
        for p in prime_factors(q1) {
            while ord.is_multiple_of(p) && self.pow(a, ord / p) == Elem::ONE {
                ord /= p;
            }
        }
        Ok(ord)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.size()).map(|v| Elem(v as u16))
    }

    fn find_generator(&self) -> Elem {
        let q1 = self.size() as u64 - 1;
        (2..self.size())
            .map(|v| Elem(v as u16))
            .find(|&a| self.order(a).ok() == Some(q1))
            // GF(2^m)* is cyclic, so some element always has full order.
            .unwrap_or(Elem::ONE)
    }

    fn build_tables(&self) -> Tables {
        let q1 = self.size() - 1;
        let mut exp = vec![0u16; 2 * q1];
        let mut log = vec![0u16; self.size()];
        let mut x = Elem::ONE;
        for i in 0..q1 {
            exp[i] = x.0;
            log[x.0 as usize] = i as u16;
            x = self.mul_direct(x, self.generator);
        }
        for i in q1..2 * q1 {
            exp[i] = exp[i - q1];
        }
        Tables { exp, log }
    }
}
