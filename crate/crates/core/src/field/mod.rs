//! Arithmetic in GF(2^p) for 1 <= p <= 16.
//!
//! Elements are stored as their polynomial-basis bit patterns. Addition is XOR;
//! multiplication and inversion go through log/antilog tables built once from a
//! generator of the multiplicative group when the [`Field`] is constructed.

mod matrix;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use matrix::{Basis, Matrix};

/// Largest supported extension degree. Tables for p = 16 take ~384 KiB.
pub const MAX_BITS: u32 = 16;

/// Default modulus for GF(2^8): x^8 + x^4 + x^3 + x^2 + 1.
pub const DEFAULT_MODULUS_8: u32 = 0x11D;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("unsupported field width p={0} (expected 1..=16)")]
    UnsupportedWidth(u32),
    #[error("field order {0} is not a power of two in 2..=65536")]
    InvalidOrder(u64),
    #[error("modulus {modulus:#x} does not have degree {p}")]
    WrongDegree { p: u32, modulus: u32 },
    #[error("modulus {0:#x} is reducible over GF(2)")]
    Reducible(u32),
    #[error("element {value:#x} is not in GF(2^{p})")]
    OutOfRange { value: u16, p: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular system (rank {rank} < {needed})")]
    Singular { rank: usize, needed: usize },
    #[error("inconsistent linear system")]
    Inconsistent,
}

/// One symbol of GF(2^p).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub u16);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl From<u8> for Elem {
    fn from(v: u8) -> Self {
        Elem(v as u16)
    }
}

/// Primitive polynomials used when the caller does not pick a modulus.
pub fn default_modulus(p: u32) -> Option<u32> {
    Some(match p {
        1 => 0x3,
        2 => 0x7,
        3 => 0xB,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => DEFAULT_MODULUS_8,
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

/// Carry-less multiply of two polynomials over GF(2), reduced by `modulus`.
///
/// This is the bit-by-bit schoolbook routine; the table-driven [`Field::mul`]
/// is checked against it.
pub fn clmul_mod(a: u32, b: u32, modulus: u32) -> u32 {
    let deg = 31 - modulus.leading_zeros();
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << deg) != 0 {
            a ^= modulus;
        }
    }
    acc
}

fn poly_degree(x: u32) -> i32 {
    31 - x.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(modulus: u32) -> bool {
    let deg = poly_degree(modulus);
    if deg < 1 {
        return false;
    }
    let half = deg / 2;
    for d in 1..=half {
        for low in 0..(1u32 << d) {
            let divisor = (1u32 << d) | low;
            if poly_rem(modulus, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

#[derive(Debug)]
struct Tables {
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// A binary extension field GF(2^p) with precomputed log/antilog tables.
///
/// Cloning is cheap; the tables are shared.
#[derive(Clone)]
pub struct Field {
    p: u32,
    modulus: u32,
    generator: u16,
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Default for Field {
    fn default() -> Self {
        Field::new(8, DEFAULT_MODULUS_8).expect("default field is valid")
    }
}

impl Field {
    pub fn new(p: u32, modulus: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_BITS).contains(&p) {
            return Err(FieldError::UnsupportedWidth(p));
        }
        if poly_degree(modulus) != p as i32 {
            return Err(FieldError::WrongDegree { p, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        let order = 1usize << p;
        let group = order - 1;

        // The multiplicative group is cyclic; take the smallest element of full order.
        let generator = (1..order as u32)
            .find(|&g| {
                let mut x = 1u32;
                for i in 1..=group {
                    x = clmul_mod(x, g, modulus);
                    if x == 1 {
                        return i == group;
                    }
                }
                false
            })
            .expect("a finite field always has a generator") as u16;

        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u16; order];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().take(group).enumerate() {
            *e = x as u16;
            log[x as usize] = i as u16;
            x = clmul_mod(x, generator as u32, modulus);
        }
        exp.copy_within(0..group, group);
        Ok(Field {
            p,
            modulus,
            generator,
            tables: Arc::new(Tables { exp, log }),
        })
    }

    /// GF(2^p) with the default primitive modulus for `p`.
    pub fn with_bits(p: u32) -> Result<Self, FieldError> {
        let modulus = default_modulus(p).ok_or(FieldError::UnsupportedWidth(p))?;
        Field::new(p, modulus)
    }

    /// Field of order `q`, which must be a power of two in 2..=65536.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        if q < 2 || !q.is_power_of_two() || q > 1 << MAX_BITS {
            return Err(FieldError::InvalidOrder(q));
        }
        Field::with_bits(q.trailing_zeros())
    }

    pub fn bits(&self) -> u32 {
        self.p
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, 2^p.
    pub fn order(&self) -> usize {
        1 << self.p
    }

    pub fn generator(&self) -> Elem {
        Elem(self.generator)
    }

    pub fn element(&self, value: u16) -> Result<Elem, FieldError> {
        if (value as usize) < self.order() {
            Ok(Elem(value))
        } else {
            Err(FieldError::OutOfRange { value, p: self.p })
        }
    }

    fn check(&self, a: Elem) -> Result<(), FieldError> {
        self.element(a.0).map(|_| ())
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        Elem(a.0 ^ b.0)
    }

    /// Addition that rejects operands outside this field.
    pub fn checked_add(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        let t = &self.tables;
        Elem(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
    }

    pub fn checked_mul(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let group = self.order() - 1;
        let l = self.tables.log[a.0 as usize] as usize;
        Ok(Elem(self.tables.exp[(group - l) % group]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Discrete log base [`Field::generator`]; `None` for zero.
    pub fn log(&self, a: Elem) -> Option<u32> {
        if a.is_zero() || a.0 as usize >= self.order() {
            None
        } else {
            Some(self.tables.log[a.0 as usize] as u32)
        }
    }

    /// generator^e
    pub fn exp(&self, e: u64) -> Elem {
        let group = (self.order() - 1) as u64;
        Elem(self.tables.exp[(e % group) as usize])
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        match self.log(a) {
            None => Elem::ZERO,
            Some(l) => self.exp(l as u64 * e),
        }
    }

    /// `dst[i] ^= c * src[i]` over whole blocks.
    pub fn mul_add_slice(&self, c: Elem, src: &[Elem], dst: &mut [Elem]) {
        debug_assert_eq!(src.len(), dst.len());
        match c.0 {
            0 => {}
            1 => dst.iter_mut().zip(src).for_each(|(d, s)| d.0 ^= s.0),
            _ => {
                let t = &self.tables;
                let lc = t.log[c.0 as usize] as usize;
                for (d, s) in dst.iter_mut().zip(src) {
                    if s.0 != 0 {
                        d.0 ^= t.exp[lc + t.log[s.0 as usize] as usize];
                    }
                }
            }
        }
    }

    /// Uniformly random element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        Elem(rng.gen_range(0..self.order()) as u16)
    }

    /// Uniformly random nonzero element.
    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        Elem(rng.gen_range(1..self.order()) as u16)
    }
}
