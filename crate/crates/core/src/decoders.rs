//! Two-phase decoders with binary-operation accounting.
//!
//! Both decoders take the `P` packets a receiver kept (its uncoded packets
//! plus enough innovative coded ones) and return the originals. Phase one
//! removes the uncoded packets from the coded ones. Step one of phase two
//! repeatedly resolves a coded packet with a single remaining nonzero
//! coefficient. Step two inverts what is left.
//!
//! [`DecodeOutput::ops`] counts payload work only. The cost of computing the
//! step-two inverse goes to [`DecodeOutput::inverse_ops`] instead.

use crate::bits::{
    apply_ring, apply_shift, axpy, expand_g, project_h, scale, xor_ring_into, xor_shifted_into,
    OpCounter, Packet,
};
use crate::circring::{
    block_inverse_tallied, coeff_to_ring, inverse_by_elimination_tallied, ring_add, ring_mul,
    Coeff, RingElem, RingMatrix, ShiftParams,
};
use crate::error::{Error, Result};
use crate::gf2e::{FieldCtx, FieldElem};
use crate::schemes::{CodedPacket, Header, Scheme, SchemeKind};

/// Residual systems up to this size are inverted with the determinant formula;
/// larger ones by elimination in the quotient field (same result).
pub const FORMULA_INVERSE_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    pub originals: Vec<Packet>,
    pub ops: OpCounter,
    /// Estimated binary operations spent computing the step-two inverse.
    pub inverse_ops: u64,
    /// Uncoded packets among the inputs.
    pub uncoded: usize,
    /// Size of the residual system after step one.
    pub residual: usize,
}

/// Lowest-index row of `a` with exactly one nonzero entry in the columns
/// `ap`, with that column.
pub fn singleton_scan<T>(
    rows: &[Vec<T>],
    a: &[usize],
    ap: &[usize],
    nonzero: impl Fn(&T) -> bool,
) -> Option<(usize, usize)> {
    a.iter().find_map(|&r| {
        let mut hits = ap.iter().filter(|&&c| nonzero(&rows[r][c]));
        match (hits.next(), hits.next()) {
            (Some(&c), None) => Some((r, c)),
            _ => None,
        }
    })
}

/// A receiver's `P` packets, ready to decode.
#[derive(Debug, Clone)]
pub struct DecodeSession<'a> {
    scheme: &'a Scheme,
    received: Vec<CodedPacket>,
}

impl<'a> DecodeSession<'a> {
    pub fn new(scheme: &'a Scheme, received: Vec<CodedPacket>) -> Result<Self> {
        let p = scheme.cfg().p;
        if received.len() != p {
            return Err(Error::ShapeMismatch(format!(
                "{} packets received, P = {p}",
                received.len()
            )));
        }
        let mut seen = vec![false; p];
        for pkt in &received {
            if let Header::Systematic(j) = pkt.header {
                if j >= p || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::Singular);
                }
            }
        }
        Ok(Self { scheme, received })
    }

    pub fn decode(self) -> Result<DecodeOutput> {
        match self.scheme.cfg().kind {
            SchemeKind::ConvGF => decode_conv(self),
            SchemeKind::Circ => decode_circ(self),
            SchemeKind::CircRed => decode_circ_red(self),
            SchemeKind::Perfect => Err(Error::InvalidConfig(
                "the perfect scheme is not decoded".into(),
            )),
        }
    }
}

/// Splits packets into uncoded `(index, payload)` and coded `(header, payload)`.
fn split(received: Vec<CodedPacket>) -> (Vec<(usize, Packet)>, Vec<(Header, Packet)>) {
    let mut uncoded = Vec::new();
    let mut coded = Vec::new();
    for pkt in received {
        match pkt.header {
            Header::Systematic(j) => uncoded.push((j, pkt.payload)),
            h => coded.push((h, pkt.payload)),
        }
    }
    (uncoded, coded)
}

fn field_inverse(
    ctx: &FieldCtx,
    a: &[Vec<FieldElem>],
    tally: &mut u64,
) -> Result<Vec<Vec<FieldElem>>> {
    let n = a.len();
    let (mul, add) = (2 * (ctx.degree() as u64).pow(2), ctx.degree() as u64);
    let mut a = a.to_vec();
    let mut inv: Vec<Vec<FieldElem>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        FieldElem::ONE
                    } else {
                        FieldElem::ZERO
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::Singular)?;
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let pinv = ctx.inv(a[col][col])?;
        for k in 0..n {
            a[col][k] = ctx.mul(pinv, a[col][k]);
            inv[col][k] = ctx.mul(pinv, inv[col][k]);
        }
        *tally += 2 * n as u64 * mul;
        for r in (0..n).filter(|&r| r != col) {
            let f = a[r][col];
            if f.is_zero() {
                continue;
            }
            for k in 0..n {
                a[r][k] = ctx.add(a[r][k], ctx.mul(f, a[col][k]));
                inv[r][k] = ctx.add(inv[r][k], ctx.mul(f, inv[col][k]));
            }
            *tally += 2 * n as u64 * (mul + add);
        }
    }
    Ok(inv)
}

/// Conventional decoder over GF(2^L).
pub fn decode_conv(session: DecodeSession<'_>) -> Result<DecodeOutput> {
    let scheme = session.scheme;
    let cfg = scheme.cfg();
    let ctx = scheme
        .field()
        .ok_or_else(|| Error::InvalidConfig("conventional scheme expected".into()))?;
    let p = cfg.p;
    let mut ops = OpCounter::new();
    let mut inverse_ops = 0;

    let (uncoded, coded) = split(session.received);
    let u_r = uncoded.len();
    let mut known: Vec<Option<Packet>> = vec![None; p];
    for (j, m) in uncoded {
        known[j] = Some(m);
    }
    let mut rows = Vec::with_capacity(coded.len());
    let mut payloads = Vec::with_capacity(coded.len());
    for (h, m) in coded {
        let cs = h.field_coeffs(p)?;
        if cs.len() != p {
            return Err(Error::MalformedHeader(format!(
                "{} coefficients for P = {p}",
                cs.len()
            )));
        }
        rows.push(cs);
        payloads.push(m);
    }

    // phase I
    for (row, pay) in rows.iter().zip(payloads.iter_mut()) {
        for (j, k) in known.iter().enumerate() {
            if let Some(k) = k {
                axpy(ctx, pay, row[j], k, &mut ops)?;
            }
        }
    }

    let mut a: Vec<usize> = (0..rows.len()).collect();
    let mut ap: Vec<usize> = (0..p).filter(|&j| known[j].is_none()).collect();

    // phase II, step 1
    while let Some((r, c)) = singleton_scan(&rows, &a, &ap, |g| !g.is_zero()) {
        let m = scale(ctx, ctx.inv(rows[r][c])?, &payloads[r], &mut ops)?;
        a.retain(|&x| x != r);
        ap.retain(|&x| x != c);
        for &r2 in &a {
            axpy(ctx, &mut payloads[r2], rows[r2][c], &m, &mut ops)?;
        }
        known[c] = Some(m);
    }
    let residual = a.len();

    // phase II, step 2
    if residual > 0 {
        let sub: Vec<Vec<FieldElem>> = a
            .iter()
            .map(|&r| ap.iter().map(|&c| rows[r][c]).collect())
            .collect();
        let d = field_inverse(ctx, &sub, &mut inverse_ops)?;
        for (k, &c) in ap.iter().enumerate() {
            // m_c = sum_i d[k][i] m'_{a[i]}
            let mut acc: Option<Packet> = None;
            for (i, &r) in a.iter().enumerate() {
                let b = d[k][i];
                if b.is_zero() {
                    continue;
                }
                match acc.as_mut() {
                    None => acc = Some(scale(ctx, b, &payloads[r], &mut ops)?),
                    Some(acc) => axpy(ctx, acc, b, &payloads[r], &mut ops)?,
                }
            }
            known[c] = Some(acc.ok_or(Error::Singular)?);
        }
    }

    let originals = known
        .into_iter()
        .map(|k| k.ok_or(Error::Singular))
        .collect::<Result<_>>()?;
    Ok(DecodeOutput {
        originals,
        ops,
        inverse_ops,
        uncoded: u_r,
        residual,
    })
}

/// Circular-shift decoder; payloads arrive with `L`-bit symbols.
pub fn decode_circ(session: DecodeSession<'_>) -> Result<DecodeOutput> {
    decode_shift(session, true)
}

/// Circular-shift decoder for the redundant variant; payloads arrive already
/// expanded to `L+1` bits, so the expansion step is skipped.
pub fn decode_circ_red(session: DecodeSession<'_>) -> Result<DecodeOutput> {
    decode_shift(session, false)
}

#[inline]
fn inv_shift(sp: &ShiftParams, l: u32) -> u32 {
    (sp.width() - l % sp.width()) % sp.width()
}

fn decode_shift(session: DecodeSession<'_>, expand: bool) -> Result<DecodeOutput> {
    let scheme = session.scheme;
    let cfg = scheme.cfg();
    let sp = *scheme
        .shift()
        .ok_or_else(|| Error::InvalidConfig("circular-shift scheme expected".into()))?;
    let p = cfg.p;
    let mut ops = OpCounter::new();
    let mut inverse_ops = 0;

    let (uncoded, coded) = split(session.received);
    let u_r = uncoded.len();
    let widen = |m: Packet, ops: &mut OpCounter| {
        if expand {
            expand_g(&sp, &m, ops)
        } else {
            Ok(m)
        }
    };

    // phase I: expansion, then removal of the uncoded packets
    let mut known: Vec<Option<Packet>> = vec![None; p];
    for (j, m) in uncoded {
        known[j] = Some(widen(m, &mut ops)?);
    }
    let mut rows = Vec::with_capacity(coded.len());
    let mut payloads = Vec::with_capacity(coded.len());
    for (h, m) in coded {
        let cs = h.shift_coeffs(p, sp.l())?;
        if cs.len() != p {
            return Err(Error::MalformedHeader(format!(
                "{} coefficients for P = {p}",
                cs.len()
            )));
        }
        rows.push(cs);
        payloads.push(widen(m, &mut ops)?);
    }
    for (row, pay) in rows.iter().zip(payloads.iter_mut()) {
        for (j, k) in known.iter().enumerate() {
            if let (Some(k), Coeff::Shift(l)) = (k, row[j]) {
                xor_shifted_into(&sp, pay, k, l, &mut ops)?;
            }
        }
    }

    let mut a: Vec<usize> = (0..rows.len()).collect();
    let mut ap: Vec<usize> = (0..p).filter(|&j| known[j].is_none()).collect();

    // phase II, step 1
    while let Some((r, c)) = singleton_scan(&rows, &a, &ap, |g| !g.is_zero()) {
        let Coeff::Shift(l) = rows[r][c] else {
            unreachable!()
        };
        let m = apply_shift(&sp, &payloads[r], inv_shift(&sp, l))?;
        a.retain(|&x| x != r);
        ap.retain(|&x| x != c);
        for &r2 in &a {
            if let Coeff::Shift(l2) = rows[r2][c] {
                xor_shifted_into(&sp, &mut payloads[r2], &m, l2, &mut ops)?;
            }
        }
        known[c] = Some(m);
    }
    let residual = a.len();

    // phase II, step 2
    if residual > 0 {
        let r1 = a[0];
        let c1 = *ap
            .iter()
            .find(|&&c| !rows[r1][c].is_zero())
            .ok_or(Error::Singular)?;
        let Coeff::Shift(l1) = rows[r1][c1] else {
            unreachable!()
        };
        let back = inv_shift(&sp, l1);
        let pivot_row = apply_shift(&sp, &payloads[r1], back)?;
        a.remove(0);
        ap.retain(|&x| x != c1);
        // coefficients of the normalized pivot row: C_{j1 j'} C_{j1 j1'}^{-1}
        let rho: Vec<RingElem> = ap
            .iter()
            .map(|&c| match rows[r1][c] {
                Coeff::Zero => RingElem::ZERO,
                Coeff::Shift(l) => RingElem::monomial(&sp, l + back),
            })
            .collect();

        let n = a.len();
        let mut psi = RingMatrix::zeros(n, n);
        for (i, &r) in a.iter().enumerate() {
            let lead = rows[r][c1];
            if let Coeff::Shift(lr) = lead {
                xor_shifted_into(&sp, &mut payloads[r], &pivot_row, lr, &mut ops)?;
            }
            let lead = coeff_to_ring(&sp, lead);
            for (k, &c) in ap.iter().enumerate() {
                psi.set(
                    i,
                    k,
                    ring_add(coeff_to_ring(&sp, rows[r][c]), ring_mul(&sp, lead, rho[k])),
                );
            }
        }

        let phi = if n <= FORMULA_INVERSE_MAX {
            block_inverse_tallied(&sp, &psi, &mut inverse_ops)?
        } else {
            inverse_by_elimination_tallied(&sp, &psi, &mut inverse_ops)?
        };
        let mut solved = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc: Option<Packet> = None;
            for (i, &r) in a.iter().enumerate() {
                let e = phi.get(k, i);
                if e.is_zero() {
                    continue;
                }
                match acc.as_mut() {
                    None => acc = Some(apply_ring(&sp, e, &payloads[r], &mut ops)?),
                    Some(acc) => xor_ring_into(&sp, acc, e, &payloads[r], &mut ops)?,
                }
            }
            solved.push(acc.ok_or(Error::Singular)?);
        }

        // back substitution for the pivot column
        let mut last = pivot_row;
        for (k, x) in solved.iter().enumerate() {
            if let Some(shift) = rho[k].exponents().next() {
                xor_shifted_into(&sp, &mut last, x, shift, &mut ops)?;
            }
        }
        for (&c, x) in ap.iter().zip(solved) {
            known[c] = Some(x);
        }
        known[c1] = Some(last);
    }

    let originals = known
        .into_iter()
        .map(|k| k.ok_or(Error::Singular).and_then(|m| project_h(&sp, &m)))
        .collect::<Result<_>>()?;
    Ok(DecodeOutput {
        originals,
        ops,
        inverse_ops,
        uncoded: u_r,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{solve_dense_circ, solve_dense_gf, GfRankTracker};
    use crate::rng::Stream;
    use crate::schemes::{Generation, Ratio, SchemeConfig};

    fn decode(scheme: &Scheme, pkts: Vec<CodedPacket>) -> Result<DecodeOutput> {
        DecodeSession::new(scheme, pkts)?.decode()
    }

    /// Uncoded subset chosen by `keep`, then coded packets until full rank.
    fn session(scheme: &Scheme, g: &Generation, keep: &[bool], s: &mut Stream) -> Vec<CodedPacket> {
        let cfg = scheme.cfg();
        let ctx = scheme.field().unwrap();
        let mut t = GfRankTracker::new(ctx, cfg.p);
        let beta = scheme
            .shift()
            .map(|sp| crate::linalg::BetaMap::new(sp, ctx).unwrap());
        let vec_of = |h: &Header| match &beta {
            Some(b) => b.map_vec(&h.shift_coeffs(cfg.p, cfg.l).unwrap()),
            None => h.field_coeffs(cfg.p).unwrap(),
        };
        let mut out = Vec::new();
        for (j, pkt) in scheme.encode_systematic(g).into_iter().enumerate() {
            if keep[j] {
                t.absorb(&vec_of(&pkt.header)).unwrap();
                out.push(pkt);
            }
        }
        while t.rank() < cfg.p {
            let pkt = scheme.encode_coded(g, s).unwrap();
            if t.absorb(&vec_of(&pkt.header)).unwrap() {
                out.push(pkt);
            }
        }
        out
    }

    #[test]
    fn singleton_scan_examples() {
        let diag = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(
            singleton_scan(&diag, &[0, 1, 2], &[0, 1, 2], |&x| x != 0),
            Some((0, 0))
        );
        let dense = vec![vec![1, 1, 1]; 3];
        assert_eq!(
            singleton_scan(&dense, &[0, 1, 2], &[0, 1, 2], |&x| x != 0),
            None
        );
        let crafted = vec![vec![1, 1, 0], vec![1, 1, 1], vec![0, 1, 0]];
        assert_eq!(
            singleton_scan(&crafted, &[0, 1, 2], &[0, 1, 2], |&x| x != 0),
            Some((2, 1))
        );
        // restricting columns can create singletons
        assert_eq!(
            singleton_scan(&crafted, &[0, 1, 2], &[0, 2], |&x| x != 0),
            Some((0, 0))
        );
        // exhaustive 3x3 binary check against a direct count
        for code in 0..512u32 {
            let rows: Vec<Vec<u32>> = (0..3)
                .map(|r| (0..3).map(|c| (code >> (3 * r + c)) & 1).collect())
                .collect();
            let want = (0..3)
                .find(|&r| rows[r].iter().sum::<u32>() == 1)
                .map(|r| (r, rows[r].iter().position(|&x| x == 1).unwrap()));
            assert_eq!(
                singleton_scan(&rows, &[0, 1, 2], &[0, 1, 2], |&x| x != 0),
                want
            );
        }
    }

    #[test]
    fn conv_all_uncoded() {
        let sch = Scheme::new(SchemeConfig::conv(4, 5, 64).unwrap()).unwrap();
        let mut s = Stream::new(1);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let out = decode(&sch, sch.encode_systematic(&g)).unwrap();
        assert_eq!(out.originals, g.originals());
        assert_eq!(out.ops.binary_ops, 0);
        assert_eq!((out.uncoded, out.residual), (5, 0));
    }

    #[test]
    fn conv_gf2_hand_trace() {
        let sch = Scheme::new(SchemeConfig::conv(1, 2, 100).unwrap()).unwrap();
        let mut s = Stream::new(2);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let h = Header::Field(vec![FieldElem::ONE, FieldElem::ONE]);
        let coded = CodedPacket {
            payload: sch.payload_for(&g, &h).unwrap(),
            header: h,
        };
        let pkts = vec![sch.encode_systematic(&g)[0].clone(), coded];
        let out = decode(&sch, pkts).unwrap();
        assert_eq!(out.originals, g.originals());
        assert_eq!(out.ops.binary_ops, 100);
    }

    #[test]
    fn conv_matches_dense_oracle() {
        let sch = Scheme::new(SchemeConfig::conv(4, 8, 64).unwrap()).unwrap();
        let ctx = sch.field().unwrap();
        let mut s = Stream::new(3);
        for t in 0..200 {
            let g = sch.generation(sch.random_originals(&mut s)).unwrap();
            let keep: Vec<bool> = (0..8).map(|j| (t >> j) & 1 == 1).collect();
            let pkts = session(&sch, &g, &keep, &mut s);
            let a: Vec<Vec<FieldElem>> = pkts
                .iter()
                .map(|p| p.header.field_coeffs(8).unwrap())
                .collect();
            let rhs: Vec<Packet> = pkts.iter().map(|p| p.payload.clone()).collect();
            let oracle = solve_dense_gf(ctx, &a, &rhs).unwrap();
            let out = decode(&sch, pkts).unwrap();
            assert_eq!(out.originals, oracle);
            assert_eq!(out.originals, g.originals());
        }
    }

    #[test]
    fn circ_all_uncoded() {
        let p0: Ratio = "1/4".parse().unwrap();
        let sch = Scheme::new(SchemeConfig::circ(4, 6, 64, p0).unwrap()).unwrap();
        let mut s = Stream::new(4);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let out = decode(&sch, sch.encode_systematic(&g)).unwrap();
        assert_eq!(out.originals, g.originals());
        assert_eq!(out.ops.binary_ops, 6 * 16 * 3);

        let red = Scheme::new(SchemeConfig::circ_red(4, 6, 64, p0).unwrap()).unwrap();
        let gr = red.generation(g.originals().to_vec()).unwrap();
        let out = decode(&red, red.encode_systematic(&gr)).unwrap();
        assert_eq!(out.originals, g.originals());
        assert_eq!(out.ops.binary_ops, 0);
    }

    #[test]
    fn circ_step_one_hand_trace() {
        let sch =
            Scheme::new(SchemeConfig::circ(4, 2, 40, "1/4".parse().unwrap()).unwrap()).unwrap();
        let mut s = Stream::new(5);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let h = Header::Shift(vec![Coeff::Shift(2), Coeff::Shift(3)]);
        let coded = CodedPacket {
            payload: sch.payload_for(&g, &h).unwrap(),
            header: h,
        };
        let out = decode(&sch, vec![sch.encode_systematic(&g)[0].clone(), coded]).unwrap();
        assert_eq!(out.originals, g.originals());
        assert_eq!(out.inverse_ops, 0);
        assert_eq!(out.residual, 0);
        // two expansions and one shifted XOR
        assert_eq!(out.ops.binary_ops, 2 * 10 * 3 + 10 * 5);
    }

    #[test]
    fn circ_matches_dense_oracle_and_red_variant() {
        let p0: Ratio = "1/4".parse().unwrap();
        let sch = Scheme::new(SchemeConfig::circ(4, 10, 64, p0).unwrap()).unwrap();
        let red = Scheme::new(SchemeConfig::circ_red(4, 10, 64, p0).unwrap()).unwrap();
        let sp = *sch.shift().unwrap();
        let mut s = Stream::new(6);
        let mut step_two = 0;
        for _ in 0..1000 {
            let g = sch.generation(sch.random_originals(&mut s)).unwrap();
            let keep: Vec<bool> = (0..10).map(|_| s.bernoulli(0.6)).collect();
            let pkts = session(&sch, &g, &keep, &mut s);
            let coeffs: Vec<Vec<Coeff>> = pkts
                .iter()
                .map(|p| p.header.shift_coeffs(10, 4).unwrap())
                .collect();
            let rhs: Vec<Packet> = pkts.iter().map(|p| p.payload.clone()).collect();
            let oracle = solve_dense_circ(&sp, &coeffs, &rhs).unwrap();

            let gr = red.generation(g.originals().to_vec()).unwrap();
            let red_pkts: Vec<CodedPacket> = pkts
                .iter()
                .map(|p| CodedPacket {
                    header: p.header.clone(),
                    payload: red.payload_for(&gr, &p.header).unwrap(),
                })
                .collect();

            let out = decode(&sch, pkts).unwrap();
            let out_red = decode(&red, red_pkts).unwrap();
            assert_eq!(out.originals, oracle);
            assert_eq!(out.originals, g.originals());
            assert_eq!(out_red.originals, out.originals);
            assert_eq!(out.ops.binary_ops - out_red.ops.binary_ops, 10 * 16 * 3);
            if out.residual > 0 {
                step_two += 1;
            }
        }
        assert!(step_two > 50, "step two exercised {step_two} times");
    }

    #[test]
    fn circ_large_residual_uses_elimination() {
        let p0: Ratio = "1/6".parse().unwrap();
        let sch = Scheme::new(SchemeConfig::circ(10, 16, 100, p0).unwrap()).unwrap();
        let mut s = Stream::new(7);
        let mut big = 0;
        for _ in 0..20 {
            let g = sch.generation(sch.random_originals(&mut s)).unwrap();
            let pkts = session(&sch, &g, &[false; 16], &mut s);
            let out = decode(&sch, pkts).unwrap();
            assert_eq!(out.originals, g.originals());
            if out.residual > FORMULA_INVERSE_MAX + 1 {
                big += 1;
            }
        }
        assert!(big > 0);
    }

    #[test]
    fn rejects_bad_sessions() {
        let sch = Scheme::new(SchemeConfig::conv(4, 3, 16).unwrap()).unwrap();
        let mut s = Stream::new(8);
        let g = sch.generation(sch.random_originals(&mut s)).unwrap();
        let sys = sch.encode_systematic(&g);
        assert!(DecodeSession::new(&sch, sys[..2].to_vec()).is_err());
        let dup = vec![sys[0].clone(), sys[0].clone(), sys[1].clone()];
        assert_eq!(DecodeSession::new(&sch, dup).unwrap_err(), Error::Singular);
        let h = Header::Field(vec![FieldElem(3), FieldElem::ZERO, FieldElem::ZERO]);
        let dep = CodedPacket {
            payload: sch.payload_for(&g, &h).unwrap(),
            header: h,
        };
        let pkts = vec![sys[0].clone(), sys[1].clone(), dep];
        assert_eq!(decode(&sch, pkts), Err(Error::Singular));
    }
}
