//! Arithmetic in GF(2^L), 1 <= L <= 16.
//!
//! A [`FieldCtx`] owns the reduction polynomial for its degree and log/antilog
//! tables built from the smallest primitive element. The polynomial for each
//! degree is pinned in [`reduction_poly`] and re-checked for irreducibility at
//! construction.

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 16;

/// Field element; only the low `L` bits may be set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct FieldElem(pub u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Pinned reduction polynomial (bit `i` = coefficient of `x^i`) for degree `l`.
pub fn reduction_poly(l: u32) -> Option<u32> {
    Some(match l {
        1 => 0b11,     // x + 1
        2 => 0x7,      // x^2 + x + 1
        3 => 0xB,      // x^3 + x + 1
        4 => 0x13,     // x^4 + x + 1
        5 => 0x25,     // x^5 + x^2 + 1
        6 => 0x43,     // x^6 + x + 1
        7 => 0x83,     // x^7 + x + 1
        8 => 0x11B,    // x^8 + x^4 + x^3 + x + 1
        9 => 0x211,    // x^9 + x^4 + 1
        10 => 0x409,   // x^10 + x^3 + 1
        11 => 0x805,   // x^11 + x^2 + 1
        12 => 0x1053,  // x^12 + x^6 + x^4 + x + 1
        13 => 0x201B,  // x^13 + x^4 + x^3 + x + 1
        14 => 0x4443,  // x^14 + x^10 + x^6 + x + 1
        15 => 0x8003,  // x^15 + x + 1
        16 => 0x1100B, // x^16 + x^12 + x^3 + x + 1
        _ => return None,
    })
}

fn degree_of(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `m` over GF(2).
fn poly_rem(mut a: u32, m: u32) -> u32 {
    let dm = degree_of(m);
    while a != 0 && degree_of(a) >= dm {
        a ^= m << (degree_of(a) - dm);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(poly: u32) -> bool {
    let d = degree_of(poly);
    if d < 1 {
        return false;
    }
    for f in 2u32..(1 << (d / 2 + 1)) {
        if poly_rem(poly, f) == 0 {
            return false;
        }
    }
    true
}

/// Carry-less product reduced modulo `poly`.
pub fn clmul_mod(a: u32, b: u32, poly: u32, degree: u32) -> u32 {
    let mut acc: u32 = 0;
    let mut a = a;
    let mut b = b;
    let top = 1u32 << degree;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

#[derive(Debug, Clone)]
pub struct FieldCtx {
    degree: u32,
    poly: u32,
    generator: u16,
    exp: Vec<u16>,
    log: Vec<u32>,
}

impl FieldCtx {
    pub fn new(degree: u32) -> Result<Self> {
        let poly = reduction_poly(degree).ok_or(Error::UnsupportedDegree(degree))?;
        Self::with_poly(degree, poly)
    }

    pub fn with_poly(degree: u32, poly: u32) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree));
        }
        if degree_of(poly) != degree as i32 || !is_irreducible(poly) {
            return Err(Error::ReducibleModulus { degree, poly });
        }
        let order = (1u32 << degree) - 1;
        let generator = (1..=order)
            .find(|&g| has_full_order(g, poly, degree))
            .expect("multiplicative group of a field is cyclic") as u16;
        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u32; 1 << degree];
        let mut x = 1u32;
        for i in 0..order {
            exp[i as usize] = x as u16;
            exp[(i + order) as usize] = x as u16;
            log[x as usize] = i;
            x = clmul_mod(x, generator as u32, poly, degree);
        }
        Ok(Self {
            degree,
            poly,
            generator,
            exp,
            log,
        })
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Field size `q = 2^L`.
    #[inline]
    pub fn size(&self) -> u32 {
        1 << self.degree
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem(self.generator)
    }

    #[inline]
    pub fn contains(&self, a: FieldElem) -> bool {
        (a.0 as u32) < self.size()
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.degree == 1 {
            return FieldElem(a.0 & b.0);
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElem(self.exp[s as usize])
    }

    /// Table-free product, kept as an independent path for cross-checks.
    pub fn mul_clmul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(clmul_mod(a.0 as u32, b.0 as u32, self.poly, self.degree) as u16)
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        if self.degree == 1 {
            return Ok(FieldElem::ONE);
        }
        let order = self.size() - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElem(self.exp[((order - l) % order) as usize]))
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        if self.degree == 1 {
            return FieldElem::ONE;
        }
        let order = (self.size() - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        FieldElem(self.exp[((l * (e % order)) % order) as usize])
    }

    /// An element of multiplicative order exactly `L+1`.
    ///
    /// Exists iff `L+1` divides `2^L - 1`; returned as `g^((2^L-1)/(L+1))` for the
    /// table generator `g`, so the choice is deterministic.
    pub fn beta_element(&self) -> Result<FieldElem> {
        let order = (self.size() - 1) as u64;
        let want = self.degree as u64 + 1;
        let err = Error::NoSuchElement {
            degree: self.degree,
            order: want as u32,
        };
        if !order.is_multiple_of(want) {
            return Err(err);
        }
        let beta = self.pow(self.generator(), order / want);
        let exact = (1..want).all(|k| self.pow(beta, k) != FieldElem::ONE);
        if exact && self.pow(beta, want) == FieldElem::ONE {
            Ok(beta)
        } else {
            Err(err)
        }
    }
}

fn prime_factors(mut n: u32) -> Vec<u32> {
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

fn has_full_order(g: u32, poly: u32, degree: u32) -> bool {
    let order = (1u32 << degree) - 1;
    if order == 1 {
        return g == 1;
    }
    let pow = |mut b: u32, mut e: u32| {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = clmul_mod(acc, b, poly, degree);
            }
            b = clmul_mod(b, b, poly, degree);
            e >>= 1;
        }
        acc
    };
    prime_factors(order)
        .into_iter()
        .all(|p| pow(g, order / p) != 1)
}
