//! Packet payloads and symbol-wise operations.
//!
//! A packet is a row of `M/L` symbols, one symbol per `u32` word. Symbols are
//! `L` bits wide as transmitted, or `L+1` bits wide after parity expansion.
//! Bit `i` of a word is coordinate `i` of the symbol viewed as a row vector,
//! so multiplying by the cyclic permutation `C^l` is a left rotation of the
//! word by `l` within `L+1` bits.
//!
//! Binary operations are tallied in an [`OpCounter`] using a fixed cost model:
//! XOR of two `b`-bit symbols costs `b`, a GF(2^L) multiplication by anything
//! other than 0 or 1 costs `2L^2`, rotations are free and parity expansion
//! costs `L-1` per symbol.

use crate::circring::{RingElem, ShiftParams};
use crate::error::{Error, Result};
use crate::gf2e::{FieldCtx, FieldElem};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpCounter {
    pub binary_ops: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.binary_ops += n;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    symbol_bits: u32,
    data: Vec<u32>,
}

#[inline]
fn rotl(x: u32, by: u32, width: u32) -> u32 {
    let by = by % width;
    if by == 0 {
        return x;
    }
    let mask = if width == 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    };
    ((x << by) | (x >> (width - by))) & mask
}

impl Packet {
    pub fn zeros(symbol_bits: u32, num_symbols: usize) -> Self {
        Self {
            symbol_bits,
            data: vec![0; num_symbols],
        }
    }

    pub fn from_symbols(symbol_bits: u32, data: Vec<u32>) -> Result<Self> {
        let mask = Self::mask_for(symbol_bits);
        if let Some(bad) = data.iter().find(|&&w| w & !mask != 0) {
            return Err(Error::ShapeMismatch(format!(
                "symbol {bad:#x} does not fit in {symbol_bits} bits"
            )));
        }
        Ok(Self { symbol_bits, data })
    }

    pub fn random(symbol_bits: u32, num_symbols: usize, rng: &mut Stream) -> Self {
        let mask = Self::mask_for(symbol_bits) as u64;
        let data = (0..num_symbols)
            .map(|_| (rng.next_u64() & mask) as u32)
            .collect();
        Self { symbol_bits, data }
    }

    fn mask_for(bits: u32) -> u32 {
        if bits >= 32 {
            u32::MAX
        } else {
            (1u32 << bits) - 1
        }
    }

    #[inline]
    pub fn symbol_bits(&self) -> u32 {
        self.symbol_bits
    }

    #[inline]
    pub fn num_symbols(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn symbols(&self) -> &[u32] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Cost of one packet-wide XOR at the current symbol width.
    #[inline]
    fn xor_cost(&self) -> u64 {
        self.data.len() as u64 * self.symbol_bits as u64
    }

    fn check_shape(&self, other: &Packet) -> Result<()> {
        if self.symbol_bits != other.symbol_bits || self.data.len() != other.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.data.len(),
                self.symbol_bits,
                other.data.len(),
                other.symbol_bits
            )));
        }
        Ok(())
    }

    fn expect_bits(&self, bits: u32) -> Result<()> {
        if self.symbol_bits != bits {
            return Err(Error::WrongState {
                expected: bits,
                found: self.symbol_bits,
            });
        }
        Ok(())
    }

    /// `self ^= src`.
    pub fn xor_into(&mut self, src: &Packet, ctr: &mut OpCounter) -> Result<()> {
        self.check_shape(src)?;
        for (d, s) in self.data.iter_mut().zip(&src.data) {
            *d ^= s;
        }
        ctr.add(self.xor_cost());
        Ok(())
    }

    /// Bits packed LSB-first, `symbol_bits` per symbol, zero-padded to a byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let total = self.data.len() * self.symbol_bits as usize;
        let mut out = vec![0u8; total.div_ceil(8)];
        let mut pos = 0usize;
        for &w in &self.data {
            for b in 0..self.symbol_bits {
                if (w >> b) & 1 == 1 {
                    out[pos / 8] |= 1 << (pos % 8);
                }
                pos += 1;
            }
        }
        out
    }

    pub fn from_bytes(symbol_bits: u32, num_symbols: usize, bytes: &[u8]) -> Result<Self> {
        let total = num_symbols * symbol_bits as usize;
        if bytes.len() * 8 < total {
            return Err(Error::ShapeMismatch(format!(
                "{} bytes cannot hold {num_symbols} symbols of {symbol_bits} bits",
                bytes.len()
            )));
        }
        let mut data = vec![0u32; num_symbols];
        let mut pos = 0usize;
        for w in data.iter_mut() {
            for b in 0..symbol_bits {
                if (bytes[pos / 8] >> (pos % 8)) & 1 == 1 {
                    *w |= 1 << b;
                }
                pos += 1;
            }
        }
        Ok(Self { symbol_bits, data })
    }
}

/// Every symbol rotated by `l` within `L+1` bits. Costs nothing.
pub fn apply_shift(p: &ShiftParams, pkt: &Packet, l: u32) -> Result<Packet> {
    pkt.expect_bits(p.width())?;
    let w = p.width();
    Ok(Packet {
        symbol_bits: w,
        data: pkt.data.iter().map(|&s| rotl(s, l, w)).collect(),
    })
}

/// `dst ^= C^l ∘ src`.
pub fn xor_shifted_into(
    p: &ShiftParams,
    dst: &mut Packet,
    src: &Packet,
    l: u32,
    ctr: &mut OpCounter,
) -> Result<()> {
    dst.check_shape(src)?;
    dst.expect_bits(p.width())?;
    let w = p.width();
    for (d, &s) in dst.data.iter_mut().zip(&src.data) {
        *d ^= rotl(s, l, w);
    }
    ctr.add(dst.xor_cost());
    Ok(())
}

/// `G ∘ pkt`: append the parity of each `L`-bit symbol as bit `L`.
pub fn expand_g(p: &ShiftParams, pkt: &Packet, ctr: &mut OpCounter) -> Result<Packet> {
    pkt.expect_bits(p.l())?;
    let l = p.l();
    let data = pkt
        .data
        .iter()
        .map(|&s| s | ((s.count_ones() & 1) << l))
        .collect();
    ctr.add(pkt.data.len() as u64 * (l as u64 - 1));
    Ok(Packet {
        symbol_bits: l + 1,
        data,
    })
}

/// `H ∘ pkt`: drop bit `L` of each symbol. Costs nothing.
pub fn project_h(p: &ShiftParams, pkt: &Packet) -> Result<Packet> {
    pkt.expect_bits(p.width())?;
    let mask = (1u32 << p.l()) - 1;
    Ok(Packet {
        symbol_bits: p.l(),
        data: pkt.data.iter().map(|&s| s & mask).collect(),
    })
}

/// `e ∘ pkt` for a ring element `e`: XOR of the rotations selected by `e`.
/// Costs `(w-1)(L+1)` per symbol for weight `w >= 1`.
pub fn apply_ring(
    p: &ShiftParams,
    e: RingElem,
    pkt: &Packet,
    ctr: &mut OpCounter,
) -> Result<Packet> {
    pkt.expect_bits(p.width())?;
    let w = p.width();
    let shifts: Vec<u32> = e.exponents().collect();
    let data = pkt
        .data
        .iter()
        .map(|&s| shifts.iter().fold(0u32, |acc, &l| acc ^ rotl(s, l, w)))
        .collect();
    if shifts.len() > 1 {
        ctr.add((shifts.len() as u64 - 1) * pkt.xor_cost());
    }
    Ok(Packet {
        symbol_bits: w,
        data,
    })
}

/// `dst ^= e ∘ src`; costs `w(L+1)` per symbol.
pub fn xor_ring_into(
    p: &ShiftParams,
    dst: &mut Packet,
    e: RingElem,
    src: &Packet,
    ctr: &mut OpCounter,
) -> Result<()> {
    dst.check_shape(src)?;
    dst.expect_bits(p.width())?;
    let w = p.width();
    let shifts: Vec<u32> = e.exponents().collect();
    for (d, &s) in dst.data.iter_mut().zip(&src.data) {
        *d ^= shifts.iter().fold(0u32, |acc, &l| acc ^ rotl(s, l, w));
    }
    ctr.add(shifts.len() as u64 * dst.xor_cost());
    Ok(())
}

/// Cost of one GF(2^L) multiplication by `c` under the counting model.
#[inline]
pub fn field_mul_cost(ctx: &FieldCtx, c: FieldElem) -> u64 {
    if c.0 <= 1 {
        0
    } else {
        2 * (ctx.degree() as u64).pow(2)
    }
}

/// `c · pkt` over GF(2^L), symbol-wise.
pub fn scale(ctx: &FieldCtx, c: FieldElem, pkt: &Packet, ctr: &mut OpCounter) -> Result<Packet> {
    pkt.expect_bits(ctx.degree())?;
    let data = pkt
        .data
        .iter()
        .map(|&s| ctx.mul(c, FieldElem(s as u16)).0 as u32)
        .collect();
    ctr.add(pkt.data.len() as u64 * field_mul_cost(ctx, c));
    Ok(Packet {
        symbol_bits: pkt.symbol_bits,
        data,
    })
}

/// `dst += c · src` over GF(2^L). No-op (and free) for `c = 0`.
pub fn axpy(
    ctx: &FieldCtx,
    dst: &mut Packet,
    c: FieldElem,
    src: &Packet,
    ctr: &mut OpCounter,
) -> Result<()> {
    dst.check_shape(src)?;
    dst.expect_bits(ctx.degree())?;
    if c.is_zero() {
        return Ok(());
    }
    for (d, &s) in dst.data.iter_mut().zip(&src.data) {
        *d ^= ctx.mul(c, FieldElem(s as u16)).0 as u32;
    }
    ctr.add(dst.data.len() as u64 * (field_mul_cost(ctx, c) + ctx.degree() as u64));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BitMatrix;
    use proptest::prelude::*;

    fn p4() -> ShiftParams {
        ShiftParams::new(4).unwrap()
    }

    #[test]
    fn xor_examples() {
        let mut s = Stream::new(3);
        let p = Packet::random(5, 16, &mut s);
        let mut ctr = OpCounter::new();
        let mut a = p.clone();
        a.xor_into(&Packet::zeros(5, 16), &mut ctr).unwrap();
        assert_eq!(a, p);
        assert_eq!(ctr.binary_ops, 80);
        a.xor_into(&p, &mut ctr).unwrap();
        assert!(a.is_zero());
        assert!(a.xor_into(&Packet::zeros(4, 16), &mut ctr).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = p4();
        let pkt = Packet::from_symbols(5, vec![0b00001, 0b10110]).unwrap();
        assert_eq!(apply_shift(&p, &pkt, 5).unwrap(), pkt);
        assert_eq!(apply_shift(&p, &pkt, 1).unwrap().symbols()[0], 0b00010);
        let twice = apply_shift(&p, &apply_shift(&p, &pkt, 3).unwrap(), 4).unwrap();
        assert_eq!(twice, apply_shift(&p, &pkt, 7 % 5).unwrap());
        let short = Packet::zeros(4, 2);
        assert_eq!(
            apply_shift(&p, &short, 1),
            Err(Error::WrongState {
                expected: 5,
                found: 4
            })
        );
    }

    #[test]
    fn expand_and_project_examples() {
        let p = p4();
        let mut ctr = OpCounter::new();
        let pkt = Packet::from_symbols(4, vec![0b0111, 0]).unwrap();
        let e = expand_g(&p, &pkt, &mut ctr).unwrap();
        assert_eq!(e.symbols(), &[0b10111, 0]);
        assert_eq!(project_h(&p, &e).unwrap(), pkt);
        assert_eq!(
            project_h(&p, &Packet::zeros(5, 3)).unwrap(),
            Packet::zeros(4, 3)
        );

        let mut ctr = OpCounter::new();
        expand_g(&p, &Packet::zeros(4, 16), &mut ctr).unwrap();
        assert_eq!(ctr.binary_ops, 48);
        assert!(expand_g(&p, &e, &mut ctr).is_err());
    }

    #[test]
    fn ring_application_examples() {
        let p = p4();
        let pkt = Packet::from_symbols(5, vec![0b00001]).unwrap();
        let mut ctr = OpCounter::new();
        assert_eq!(apply_ring(&p, RingElem::ONE, &pkt, &mut ctr).unwrap(), pkt);
        assert_eq!(ctr.binary_ops, 0);
        assert!(apply_ring(&p, RingElem::ZERO, &pkt, &mut ctr)
            .unwrap()
            .is_zero());
        assert_eq!(ctr.binary_ops, 0);
        let e = RingElem::from_exponents(&[1, 3]);
        let out = apply_ring(&p, e, &pkt, &mut ctr).unwrap();
        assert_eq!(out.symbols(), &[0b01010]);
        assert_eq!(ctr.binary_ops, 5);
    }

    /// Row-vector times dense binary matrix, bit `i` = coordinate `i`.
    fn dense_apply(s: u32, m: &BitMatrix) -> u32 {
        let v = m.vec_mul(&[s as u64]);
        v[0] as u32
    }

    #[test]
    fn shift_coefficient_matches_dense_matrix_exhaustively() {
        let p = p4();
        for l in 1..=5 {
            let gamma = p.dense_conjugate(RingElem::monomial(&p, l));
            for s in 0..16u32 {
                let mut ctr = OpCounter::new();
                let pkt = Packet::from_symbols(4, vec![s]).unwrap();
                let got = project_h(
                    &p,
                    &apply_shift(&p, &expand_g(&p, &pkt, &mut ctr).unwrap(), l).unwrap(),
                )
                .unwrap();
                assert_eq!(got.symbols()[0], dense_apply(s, &gamma), "l={l} s={s:#06b}");
            }
        }
    }

    #[test]
    fn byte_packing_roundtrip() {
        let mut s = Stream::new(9);
        let pkt = Packet::random(5, 13, &mut s);
        let bytes = pkt.to_bytes();
        assert_eq!(bytes.len(), 9);
        assert_eq!(Packet::from_bytes(5, 13, &bytes).unwrap(), pkt);
    }

    proptest! {
        #[test]
        fn apply_ring_is_linear(mask in 0u32..32, seed: u64) {
            let p = p4();
            let mut s = Stream::new(seed);
            let a = Packet::random(5, 8, &mut s);
            let b = Packet::random(5, 8, &mut s);
            let e = RingElem(mask);
            let mut ctr = OpCounter::new();
            let mut ab = a.clone();
            ab.xor_into(&b, &mut ctr).unwrap();
            let lhs = apply_ring(&p, e, &ab, &mut ctr).unwrap();
            let mut rhs = apply_ring(&p, e, &a, &mut ctr).unwrap();
            rhs.xor_into(&apply_ring(&p, e, &b, &mut ctr).unwrap(), &mut ctr).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
