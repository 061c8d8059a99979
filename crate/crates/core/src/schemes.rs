//! Encoders and header codecs.
//!
//! Four kinds cover the five schemes: `ConvGF` (GF(2) is `ConvGF` with
//! `L = 1`), the abstract `Perfect` scheme, circular-shift coding `Circ`, and
//! its one-bit-redundant variant `CircRed` whose payload symbols are `L+1`
//! bits wide.
//!
//! Wire layout of one coded packet (little-endian):
//!
//! ```text
//! u16 kind | u16 P | u16 L | header bytes | payload bytes
//! ```
//!
//! Kind codes are 0 = ConvGF, 2 = Circ, 3 = CircRed (1 = Perfect is never
//! serialized). A ConvGF header is `P*L` bits, coefficient `j` in bits
//! `jL..(j+1)L`. A Circ/CircRed header is the base-`(L+2)` number whose digit
//! `j` (least significant first) is 0 for `Zero` and `l` for `Shift(l)`,
//! stored in exactly `ceil(P*log2(L+2))` bits. Header and payload are each
//! zero-padded to a byte boundary; payload bits are packed LSB-first, one
//! symbol after another. Systematic packets are written with unit headers and
//! read back as [`Header::Systematic`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bits::{axpy, expand_g, project_h, xor_shifted_into, OpCounter, Packet};
use crate::circring::{Coeff, ShiftParams};
use crate::error::{Error, Result};
use crate::gf2e::{FieldCtx, FieldElem, MAX_DEGREE};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    ConvGF,
    Perfect,
    Circ,
    CircRed,
}

impl SchemeKind {
    pub fn wire_code(self) -> u16 {
        match self {
            SchemeKind::ConvGF => 0,
            SchemeKind::Perfect => 1,
            SchemeKind::Circ => 2,
            SchemeKind::CircRed => 3,
        }
    }

    pub fn from_wire_code(code: u16) -> Result<Self> {
        Ok(match code {
            0 => SchemeKind::ConvGF,
            1 => SchemeKind::Perfect,
            2 => SchemeKind::Circ,
            3 => SchemeKind::CircRed,
            _ => {
                return Err(Error::MalformedHeader(format!(
                    "unknown scheme kind {code}"
                )))
            }
        })
    }

    pub fn is_circ(self) -> bool {
        matches!(self, SchemeKind::Circ | SchemeKind::CircRed)
    }
}

/// Exact rational `num/den`, written `N/D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidP0(format!("{num}/{den}")));
        }
        Ok(Self { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidP0(format!("{s:?} (expected N/D with integers N, D)"));
        let (n, d) = s.trim().split_once('/').ok_or_else(bad)?;
        let num = n.trim().parse().map_err(|_| bad())?;
        let den = d.trim().parse().map_err(|_| bad())?;
        Ratio::new(num, den)
    }
}

impl TryFrom<String> for Ratio {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Ratio> for String {
    fn from(r: Ratio) -> String {
        r.to_string()
    }
}

fn check_p0(p0: Ratio, l: u32) -> Result<()> {
    let (a, b) = (p0.num as u64, p0.den as u64);
    if a >= b || a * (l as u64 + 2) < b {
        return Err(Error::InvalidP0(format!(
            "{p0} must satisfy 1/{} <= p0 < 1",
            l + 2
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Symbol length in bits.
    pub l: u32,
    /// Packets per generation.
    pub p: usize,
    /// Packet length in bits.
    pub m: usize,
    pub p0: Option<Ratio>,
    /// Draw conventional coefficients from the nonzero elements only.
    #[serde(default)]
    pub force_nonzero: bool,
}

impl SchemeConfig {
    pub fn conv(l: u32, p: usize, m: usize) -> Result<Self> {
        let c = Self {
            kind: SchemeKind::ConvGF,
            l,
            p,
            m,
            p0: None,
            force_nonzero: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn perfect(p: usize, m: usize) -> Result<Self> {
        let c = Self {
            kind: SchemeKind::Perfect,
            l: 1,
            p,
            m,
            p0: None,
            force_nonzero: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn circ(l: u32, p: usize, m: usize, p0: Ratio) -> Result<Self> {
        let c = Self {
            kind: SchemeKind::Circ,
            l,
            p,
            m,
            p0: Some(p0),
            force_nonzero: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn circ_red(l: u32, p: usize, m: usize, p0: Ratio) -> Result<Self> {
        let c = Self {
            kind: SchemeKind::CircRed,
            l,
            p,
            m,
            p0: Some(p0),
            force_nonzero: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidConfig("P must be at least 1".into()));
        }
        match self.kind {
            SchemeKind::Perfect => return Ok(()),
            SchemeKind::ConvGF => {
                if !(1..=MAX_DEGREE).contains(&self.l) {
                    return Err(Error::UnsupportedDegree(self.l));
                }
            }
            SchemeKind::Circ | SchemeKind::CircRed => {
                ShiftParams::new_capped(self.l, MAX_DEGREE)?;
                check_p0(
                    self.p0.ok_or_else(|| Error::InvalidP0("missing".into()))?,
                    self.l,
                )?;
            }
        }
        if self.m == 0 || !self.m.is_multiple_of(self.l as usize) {
            return Err(Error::InvalidConfig(format!(
                "M = {} must be a positive multiple of L = {}",
                self.m, self.l
            )));
        }
        Ok(())
    }

    /// Symbols per packet, `M/L`.
    pub fn symbols(&self) -> usize {
        self.m / self.l as usize
    }

    /// Width of payload symbols on the wire.
    pub fn wire_symbol_bits(&self) -> u32 {
        if self.kind == SchemeKind::CircRed {
            self.l + 1
        } else {
            self.l
        }
    }
}

/// Coding coefficients of one received packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Header {
    /// Uncoded original `j`.
    Systematic(usize),
    Field(Vec<FieldElem>),
    Shift(Vec<Coeff>),
}

impl Header {
    /// Field coefficients with unit vectors for systematic packets.
    pub fn field_coeffs(&self, p: usize) -> Result<Vec<FieldElem>> {
        match self {
            Header::Systematic(j) => Ok((0..p)
                .map(|i| {
                    if i == *j {
                        FieldElem::ONE
                    } else {
                        FieldElem::ZERO
                    }
                })
                .collect()),
            Header::Field(v) => Ok(v.clone()),
            Header::Shift(_) => Err(Error::MalformedHeader(
                "shift header where field header expected".into(),
            )),
        }
    }

    /// Shift coefficients with identity shifts `C^{L+1}` for systematic packets.
    pub fn shift_coeffs(&self, p: usize, l: u32) -> Result<Vec<Coeff>> {
        match self {
            Header::Systematic(j) => Ok((0..p)
                .map(|i| {
                    if i == *j {
                        Coeff::Shift(l + 1)
                    } else {
                        Coeff::Zero
                    }
                })
                .collect()),
            Header::Shift(v) => Ok(v.clone()),
            Header::Field(_) => Err(Error::MalformedHeader(
                "field header where shift header expected".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub header: Header,
    pub payload: Packet,
}

/// Draw one circular-shift coefficient with `Pr(Zero) = p0` exactly.
///
/// A uniform integer in `[0, b(L+1))` is mapped to `Zero` on its first
/// `a(L+1)` values and to `Shift(l)` on the `l`-th following block of `b-a`.
pub fn draw_p0_coeff(p0: Ratio, l: u32, rng: &mut Stream) -> Result<Coeff> {
    check_p0(p0, l)?;
    let (a, b, n) = (p0.num as u64, p0.den as u64, l as u64 + 1);
    let v = rng.below(b * n);
    Ok(if v < a * n {
        Coeff::Zero
    } else {
        Coeff::Shift(((v - a * n) / (b - a) + 1) as u32)
    })
}

/// A validated configuration with its arithmetic contexts.
#[derive(Debug, Clone)]
pub struct Scheme {
    cfg: SchemeConfig,
    field: Option<FieldCtx>,
    shift: Option<ShiftParams>,
}

/// The `P` originals of one generation, plus their parity expansions for the
/// circular-shift kinds.
#[derive(Debug, Clone)]
pub struct Generation {
    originals: Vec<Packet>,
    expanded: Vec<Packet>,
}

impl Generation {
    pub fn originals(&self) -> &[Packet] {
        &self.originals
    }
}

impl Scheme {
    pub fn new(cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let (field, shift) = match cfg.kind {
            SchemeKind::ConvGF => (Some(FieldCtx::new(cfg.l)?), None),
            SchemeKind::Circ | SchemeKind::CircRed => {
                (Some(FieldCtx::new(cfg.l)?), Some(ShiftParams::new(cfg.l)?))
            }
            SchemeKind::Perfect => (None, None),
        };
        Ok(Self { cfg, field, shift })
    }

    pub fn cfg(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// GF(2^L) context (conventional and circular-shift kinds).
    pub fn field(&self) -> Option<&FieldCtx> {
        self.field.as_ref()
    }

    pub fn shift(&self) -> Option<&ShiftParams> {
        self.shift.as_ref()
    }

    fn need_payloads(&self) -> Result<()> {
        if self.cfg.kind == SchemeKind::Perfect {
            return Err(Error::InvalidConfig(
                "the perfect scheme carries no payload arithmetic".into(),
            ));
        }
        Ok(())
    }

    pub fn random_originals(&self, rng: &mut Stream) -> Vec<Packet> {
        (0..self.cfg.p)
            .map(|_| Packet::random(self.cfg.l, self.cfg.symbols(), rng))
            .collect()
    }

    pub fn generation(&self, originals: Vec<Packet>) -> Result<Generation> {
        self.need_payloads()?;
        if originals.len() != self.cfg.p {
            return Err(Error::ShapeMismatch(format!(
                "{} originals for P = {}",
                originals.len(),
                self.cfg.p
            )));
        }
        if let Some(bad) = originals
            .iter()
            .find(|o| o.symbol_bits() != self.cfg.l || o.num_symbols() != self.cfg.symbols())
        {
            return Err(Error::ShapeMismatch(format!(
                "original of {}x{} bits, expected {}x{}",
                bad.num_symbols(),
                bad.symbol_bits(),
                self.cfg.symbols(),
                self.cfg.l
            )));
        }
        let expanded = match &self.shift {
            Some(sp) => {
                let mut ctr = OpCounter::new();
                originals
                    .iter()
                    .map(|o| expand_g(sp, o, &mut ctr))
                    .collect::<Result<_>>()?
            }
            None => Vec::new(),
        };
        Ok(Generation {
            originals,
            expanded,
        })
    }

    /// The `P` uncoded broadcasts of phase one.
    pub fn encode_systematic(&self, g: &Generation) -> Vec<CodedPacket> {
        let wire = if self.cfg.kind == SchemeKind::CircRed {
            &g.expanded
        } else {
            &g.originals
        };
        wire.iter()
            .enumerate()
            .map(|(j, m)| CodedPacket {
                header: Header::Systematic(j),
                payload: m.clone(),
            })
            .collect()
    }

    /// Draw the coefficients of one coded packet.
    pub fn draw_header(&self, rng: &mut Stream) -> Result<Header> {
        let cfg = &self.cfg;
        match cfg.kind {
            SchemeKind::ConvGF => {
                let q = 1u64 << cfg.l;
                Ok(Header::Field(
                    (0..cfg.p)
                        .map(|_| {
                            FieldElem(if cfg.force_nonzero {
                                1 + rng.below(q - 1)
                            } else {
                                rng.below(q)
                            } as u16)
                        })
                        .collect(),
                ))
            }
            SchemeKind::Circ | SchemeKind::CircRed => {
                let p0 = cfg.p0.expect("validated");
                Ok(Header::Shift(
                    (0..cfg.p)
                        .map(|_| draw_p0_coeff(p0, cfg.l, rng))
                        .collect::<Result<_>>()?,
                ))
            }
            SchemeKind::Perfect => Err(Error::InvalidConfig(
                "the perfect scheme has no coefficients".into(),
            )),
        }
    }

    /// Payload described by `header`, recomputed from the generation.
    pub fn payload_for(&self, g: &Generation, header: &Header) -> Result<Packet> {
        self.need_payloads()?;
        let cfg = &self.cfg;
        if let Header::Systematic(j) = header {
            return self
                .encode_systematic(g)
                .into_iter()
                .nth(*j)
                .map(|c| c.payload)
                .ok_or(Error::IndexOutOfRange(*j, cfg.p));
        }
        let mut ctr = OpCounter::new();
        match (cfg.kind, header) {
            (SchemeKind::ConvGF, Header::Field(cs)) => {
                let ctx = self.field.as_ref().expect("conv has a field");
                self.check_len(cs.len())?;
                let mut acc = Packet::zeros(cfg.l, cfg.symbols());
                for (c, m) in cs.iter().zip(&g.originals) {
                    axpy(ctx, &mut acc, *c, m, &mut ctr)?;
                }
                Ok(acc)
            }
            (SchemeKind::Circ | SchemeKind::CircRed, Header::Shift(cs)) => {
                let sp = self.shift.as_ref().expect("circ has shift params");
                self.check_len(cs.len())?;
                let mut acc = Packet::zeros(cfg.l + 1, cfg.symbols());
                for (c, m) in cs.iter().zip(&g.expanded) {
                    if let Coeff::Shift(l) = *c {
                        xor_shifted_into(sp, &mut acc, m, l, &mut ctr)?;
                    }
                }
                if cfg.kind == SchemeKind::Circ {
                    project_h(sp, &acc)
                } else {
                    Ok(acc)
                }
            }
            _ => Err(Error::MalformedHeader(
                "header type does not match the scheme".into(),
            )),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.cfg.p {
            return Err(Error::MalformedHeader(format!(
                "{n} coefficients for P = {}",
                self.cfg.p
            )));
        }
        Ok(())
    }

    pub fn encode_coded_conv(&self, g: &Generation, rng: &mut Stream) -> Result<CodedPacket> {
        if self.cfg.kind != SchemeKind::ConvGF {
            return Err(Error::InvalidConfig("not a conventional scheme".into()));
        }
        self.encode_coded(g, rng)
    }

    pub fn encode_coded_circ(&self, g: &Generation, rng: &mut Stream) -> Result<CodedPacket> {
        if !self.cfg.kind.is_circ() {
            return Err(Error::InvalidConfig("not a circular-shift scheme".into()));
        }
        self.encode_coded(g, rng)
    }

    /// One coded packet with freshly drawn coefficients.
    pub fn encode_coded(&self, g: &Generation, rng: &mut Stream) -> Result<CodedPacket> {
        let header = self.draw_header(rng)?;
        let payload = self.payload_for(g, &header)?;
        Ok(CodedPacket { header, payload })
    }

    /// Header width in bits.
    pub fn header_width(&self) -> usize {
        header_width(&self.cfg)
    }

    pub fn to_wire(&self, pkt: &CodedPacket) -> Result<Vec<u8>> {
        self.need_payloads()?;
        let cfg = &self.cfg;
        let mut out = Vec::new();
        for v in [cfg.kind.wire_code(), cfg.p as u16, cfg.l as u16] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match cfg.kind {
            SchemeKind::ConvGF => {
                out.extend(pack_field_header(cfg, &pkt.header.field_coeffs(cfg.p)?)?)
            }
            _ => out.extend(header_pack(cfg, &pkt.header.shift_coeffs(cfg.p, cfg.l)?)?),
        }
        out.extend(pkt.payload.to_bytes());
        Ok(out)
    }
}

/// Bits needed for one header: `P*L` for ConvGF, `ceil(P*log2(L+2))` for
/// the circular-shift kinds.
pub fn header_width(cfg: &SchemeConfig) -> usize {
    match cfg.kind {
        SchemeKind::ConvGF => cfg.p * cfg.l as usize,
        SchemeKind::Perfect => 0,
        _ => {
            let max = BigUint::from(cfg.l + 2).pow(cfg.p as u32) - 1u32;
            max.bits() as usize
        }
    }
}

fn header_bytes(cfg: &SchemeConfig) -> usize {
    header_width(cfg).div_ceil(8)
}

/// Mixed-radix packing of a circular-shift header.
pub fn header_pack(cfg: &SchemeConfig, coeffs: &[Coeff]) -> Result<Vec<u8>> {
    if coeffs.len() != cfg.p {
        return Err(Error::MalformedHeader(format!(
            "{} coefficients for P = {}",
            coeffs.len(),
            cfg.p
        )));
    }
    let radix = cfg.l + 2;
    let mut digits = Vec::with_capacity(cfg.p);
    for c in coeffs {
        let d = c.digit();
        if d > cfg.l + 1 {
            return Err(Error::MalformedHeader(format!(
                "shift {d} exceeds L+1 = {}",
                cfg.l + 1
            )));
        }
        digits.push(d as u8);
    }
    let value = BigUint::from_radix_le(&digits, radix).expect("digits below radix");
    let mut bytes = value.to_bytes_le();
    if value == BigUint::default() {
        bytes.clear();
    }
    bytes.resize(header_bytes(cfg), 0);
    Ok(bytes)
}

pub fn header_unpack(cfg: &SchemeConfig, bytes: &[u8]) -> Result<Vec<Coeff>> {
    if bytes.len() != header_bytes(cfg) {
        return Err(Error::MalformedHeader(format!(
            "{} header bytes, expected {}",
            bytes.len(),
            header_bytes(cfg)
        )));
    }
    let radix = cfg.l + 2;
    let value = BigUint::from_bytes_le(bytes);
    if value >= BigUint::from(radix).pow(cfg.p as u32) {
        return Err(Error::MalformedHeader("header value out of range".into()));
    }
    let mut digits = value.to_radix_le(radix);
    digits.resize(cfg.p, 0);
    Ok(digits
        .into_iter()
        .map(|d| Coeff::from_digit(d as u32))
        .collect())
}

fn pack_field_header(cfg: &SchemeConfig, coeffs: &[FieldElem]) -> Result<Vec<u8>> {
    if coeffs.len() != cfg.p {
        return Err(Error::MalformedHeader(format!(
            "{} coefficients for P = {}",
            coeffs.len(),
            cfg.p
        )));
    }
    let pkt = Packet::from_symbols(cfg.l, coeffs.iter().map(|c| c.0 as u32).collect())
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    Ok(pkt.to_bytes())
}

/// Decode a wire packet. `m` is the payload length in bits, which the wire
/// format does not carry.
pub fn from_wire(bytes: &[u8], m: usize) -> Result<(SchemeConfig, CodedPacket)> {
    if bytes.len() < 6 {
        return Err(Error::MalformedHeader("truncated prefix".into()));
    }
    let word = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let kind = SchemeKind::from_wire_code(word(0))?;
    let (p, l) = (word(2) as usize, word(4) as u32);
    // p0 is not on the wire; any valid value keeps the config consistent
    let cfg = SchemeConfig {
        kind,
        l,
        p,
        m,
        p0: kind.is_circ().then_some(Ratio { num: 1, den: 2 }),
        force_nonzero: false,
    };
    if kind == SchemeKind::Perfect {
        return Err(Error::MalformedHeader(
            "perfect-scheme packets are not serialized".into(),
        ));
    }
    cfg.validate()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let hb = header_bytes(&cfg);
    let body = &bytes[6..];
    let sym_bits = cfg.wire_symbol_bits();
    let payload_bytes = (cfg.symbols() * sym_bits as usize).div_ceil(8);
    if body.len() != hb + payload_bytes {
        return Err(Error::MalformedHeader(format!(
            "{} body bytes, expected {}",
            body.len(),
            hb + payload_bytes
        )));
    }
    let header = if kind == SchemeKind::ConvGF {
        let raw = Packet::from_bytes(l, p, &body[..hb])?;
        let cs: Vec<FieldElem> = raw.symbols().iter().map(|&s| FieldElem(s as u16)).collect();
        match unit_index(&cs, |c| c.is_zero(), |c| *c == FieldElem::ONE) {
            Some(j) => Header::Systematic(j),
            None => Header::Field(cs),
        }
    } else {
        let cs = header_unpack(&cfg, &body[..hb])?;
        match unit_index(&cs, |c| c.is_zero(), |c| *c == Coeff::Shift(l + 1)) {
            Some(j) => Header::Systematic(j),
            None => Header::Shift(cs),
        }
    };
    let payload = Packet::from_bytes(sym_bits, cfg.symbols(), &body[hb..])?;
    Ok((cfg, CodedPacket { header, payload }))
}

fn unit_index<T>(v: &[T], zero: impl Fn(&T) -> bool, one: impl Fn(&T) -> bool) -> Option<usize> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| !zero(&v[i])).collect();
    (nz.len() == 1 && one(&v[nz[0]])).then(|| nz[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circ_cfg(l: u32, p: usize, p0: &str) -> SchemeConfig {
        SchemeConfig::circ(l, p, 16 * l as usize, p0.parse().unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::conv(17, 4, 64).is_err());
        assert!(SchemeConfig::conv(4, 4, 30).is_err());
        assert!(SchemeConfig::circ(4, 4, 64, "1/7".parse().unwrap()).is_err());
        assert!(SchemeConfig::circ(4, 4, 64, "1/6".parse().unwrap()).is_ok());
        assert!(SchemeConfig::circ(4, 4, 64, "1/1".parse().unwrap()).is_err());
        assert!(matches!(
            SchemeConfig::circ(6, 4, 60, "1/2".parse().unwrap()),
            Err(Error::InadmissibleLength(6, _))
        ));
        assert!(matches!(
            SchemeConfig::circ(18, 4, 72, "1/2".parse().unwrap()),
            Err(Error::InadmissibleLength(18, _))
        ));
        assert!("0.25".parse::<Ratio>().is_err());
        assert_eq!("3/ 8".parse::<Ratio>().unwrap(), Ratio { num: 3, den: 8 });
    }

    #[test]
    fn draw_examples() {
        let mut s = Stream::new(1);
        // p0 = 1/(L+2): all L+2 outcomes equally likely
        let mut counts = [0u32; 6];
        for _ in 0..60_000 {
            counts[draw_p0_coeff(Ratio { num: 1, den: 6 }, 4, &mut s)
                .unwrap()
                .digit() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 4.0 * (10_000.0f64 * 5.0 / 6.0).sqrt());
        }
        assert!(draw_p0_coeff(Ratio { num: 1, den: 7 }, 4, &mut s).is_err());
    }

    #[test]
    fn coefficient_frequencies() {
        let mut s = Stream::new(2);
        let n = 1_000_000;
        let mut counts = [0u64; 6];
        for _ in 0..n {
            counts[draw_p0_coeff(Ratio { num: 1, den: 4 }, 4, &mut s)
                .unwrap()
                .digit() as usize] += 1;
        }
        for (d, &c) in counts.iter().enumerate() {
            let p = if d == 0 { 0.25 } else { 0.15 };
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (c as f64 - n as f64 * p).abs() <= 3.0 * sigma,
                "digit {d}: {c}"
            );
        }
        // chi-square, 5 degrees of freedom, 0.001 critical value 20.515
        let chi: f64 = counts
            .iter()
            .enumerate()
            .map(|(d, &c)| {
                let e = n as f64 * if d == 0 { 0.25 } else { 0.15 };
                (c as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi < 20.515, "chi2 = {chi}");
    }

    #[test]
    fn header_width_examples() {
        assert_eq!(header_width(&circ_cfg(4, 20, "1/4")), 52);
        assert_eq!(header_width(&circ_cfg(2, 3, "1/4")), 6);
        for p in 1..40usize {
            let w = header_width(&circ_cfg(10, p, "1/4"));
            assert_eq!(w, (p as f64 * 12f64.log2()).ceil() as usize, "P={p}");
        }
    }

    #[test]
    fn header_roundtrip_exhaustive_small() {
        let cfg = circ_cfg(2, 3, "1/4");
        for code in 0..64u32 {
            let cs: Vec<Coeff> = (0..3)
                .map(|k| Coeff::from_digit(code / 4u32.pow(k) % 4))
                .collect();
            let packed = header_pack(&cfg, &cs).unwrap();
            assert_eq!(header_unpack(&cfg, &packed).unwrap(), cs);
        }
        assert!(header_pack(&cfg, &[Coeff::Zero; 3])
            .unwrap()
            .iter()
            .all(|&b| b == 0));
        assert!(header_unpack(&cfg, &[0xFF]).is_err());
        assert!(header_pack(&cfg, &[Coeff::Shift(4), Coeff::Zero, Coeff::Zero]).is_err());
    }

    #[test]
    fn systematic_examples() {
        let cfg = SchemeConfig::conv(4, 1, 32).unwrap();
        let sch = Scheme::new(cfg).unwrap();
        let mut s = Stream::new(3);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let sys = sch.encode_systematic(&g);
        assert_eq!(sys.len(), 1);
        assert_eq!(sys[0].payload, g.originals()[0]);

        let cfg = circ_cfg(4, 5, "1/4");
        let red = SchemeConfig {
            kind: SchemeKind::CircRed,
            ..cfg.clone()
        };
        let sch = Scheme::new(red).unwrap();
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let sp = ShiftParams::new(4).unwrap();
        for (j, pkt) in sch.encode_systematic(&g).iter().enumerate() {
            assert_eq!(pkt.header, Header::Systematic(j));
            assert_eq!(
                pkt.payload,
                expand_g(&sp, &g.originals()[j], &mut OpCounter::new()).unwrap()
            );
        }
    }

    #[test]
    fn conv_encoder_examples() {
        let sch = Scheme::new(SchemeConfig::conv(4, 3, 40).unwrap()).unwrap();
        let mut s = Stream::new(4);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let zero = sch
            .payload_for(&g, &Header::Field(vec![FieldElem::ZERO; 3]))
            .unwrap();
        assert!(zero.is_zero());
        let copy = sch
            .payload_for(
                &g,
                &Header::Field(vec![FieldElem::ZERO, FieldElem::ONE, FieldElem::ZERO]),
            )
            .unwrap();
        assert_eq!(copy, g.originals()[1]);

        // independent recomputation with carry-less multiplication
        let ctx = sch.field().unwrap();
        let pkt = sch.encode_coded_conv(&g, &mut s).unwrap();
        let Header::Field(cs) = &pkt.header else {
            panic!()
        };
        for t in 0..10 {
            let mut want = 0u16;
            for (c, m) in cs.iter().zip(g.originals()) {
                want ^= ctx.mul_clmul(*c, FieldElem(m.symbols()[t] as u16)).0;
            }
            assert_eq!(pkt.payload.symbols()[t], want as u32);
        }
    }

    #[test]
    fn circ_encoder_examples() {
        let cfg = circ_cfg(4, 3, "1/4");
        let sch = Scheme::new(cfg.clone()).unwrap();
        let mut s = Stream::new(5);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        assert!(sch
            .payload_for(&g, &Header::Shift(vec![Coeff::Zero; 3]))
            .unwrap()
            .is_zero());
        let id = sch
            .payload_for(
                &g,
                &Header::Shift(vec![Coeff::Zero, Coeff::Zero, Coeff::Shift(5)]),
            )
            .unwrap();
        assert_eq!(id, g.originals()[2]);

        // expand(circ payload) equals the redundant variant's payload
        let red = Scheme::new(SchemeConfig {
            kind: SchemeKind::CircRed,
            ..cfg
        })
        .unwrap();
        let gr = red.generation(g.originals().to_vec()).unwrap();
        let sp = sch.shift().unwrap();
        for _ in 0..50 {
            let h = sch.draw_header(&mut s).unwrap();
            let a = sch.payload_for(&g, &h).unwrap();
            let b = red.payload_for(&gr, &h).unwrap();
            assert_eq!(expand_g(sp, &a, &mut OpCounter::new()).unwrap(), b);
        }
    }

    #[test]
    fn perfect_has_no_payloads() {
        let sch = Scheme::new(SchemeConfig::perfect(4, 64).unwrap()).unwrap();
        assert!(sch.generation(vec![]).is_err());
        assert!(sch.draw_header(&mut Stream::new(0)).is_err());
    }

    #[test]
    fn wire_roundtrip_all_kinds() {
        let mut s = Stream::new(6);
        let cfgs = vec![
            SchemeConfig::conv(1, 7, 24).unwrap(),
            SchemeConfig::conv(10, 5, 120).unwrap(),
            circ_cfg(4, 20, "1/4"),
            SchemeConfig {
                kind: SchemeKind::CircRed,
                ..circ_cfg(10, 6, "1/2")
            },
        ];
        for cfg in cfgs {
            let sch = Scheme::new(cfg.clone()).unwrap();
            let g = sch.generation(sch.random_originals(&mut s)).unwrap();
            let mut pkts = sch.encode_systematic(&g);
            for _ in 0..20 {
                pkts.push(sch.encode_coded(&g, &mut s).unwrap());
            }
            for pkt in pkts {
                let bytes = sch.to_wire(&pkt).unwrap();
                let (got_cfg, got) = from_wire(&bytes, cfg.m).unwrap();
                assert_eq!(
                    (got_cfg.kind, got_cfg.p, got_cfg.l),
                    (cfg.kind, cfg.p, cfg.l)
                );
                match (&pkt.header, &got.header) {
                    (a, b) if a == b => {}
                    // a drawn unit vector reads back as systematic
                    (_, Header::Systematic(j)) => {
                        assert_eq!(got.payload, sch.encode_systematic(&g)[*j].payload)
                    }
                    (a, b) => panic!("{a:?} vs {b:?}"),
                }
                assert_eq!(got.payload, pkt.payload);
            }
        }
        let sch = Scheme::new(circ_cfg(4, 20, "1/4")).unwrap();
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let bytes = sch.to_wire(&sch.encode_coded(&g, &mut s).unwrap()).unwrap();
        assert_eq!(bytes.len(), 6 + 7 + 64 / 8);
        assert!(from_wire(&bytes[..bytes.len() - 1], 64).is_err());
        assert!(from_wire(&[9, 0, 0, 0, 0, 0], 64).is_err());
    }
}
