//! The ring of binary `(L+1)x(L+1)` circulants and block inverses over it.
//!
//! A [`RingElem`] is a mask of exponents: bit `l` set means the term `C^l` is
//! present, where `C` is the cyclic permutation of size `L+1`. The ring is
//! GF(2)[x]/(x^{L+1}+1). Since `L+1` is prime and 2 is primitive mod `L+1`,
//! the all-ones element `1 + x + ... + x^L` is irreducible and the quotient by
//! it is GF(2^L). Conjugating by `G = [I_L | 1]` and `H = [I_L 0]^T` kills the
//! all-ones element, so every element acts on `L`-bit symbols through that
//! quotient.

use crate::error::{Error, Result};
use crate::linalg::BitMatrix;

/// Largest supported symbol length (symbols are held in `u32` words).
pub const MAX_SHIFT_LENGTH: u32 = 30;

/// Largest block dimension accepted by [`ring_det`] and [`block_inverse`].
pub const MAX_DET_DIM: usize = 12;

fn is_prime(n: u32) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn order_of_two(n: u32) -> u32 {
    let mut x = 2 % n;
    let mut k = 1;
    while x != 1 {
        x = x * 2 % n;
        k += 1;
    }
    k
}

fn admissible(l: u32) -> bool {
    l >= 2 && l.is_multiple_of(2) && is_prime(l + 1) && order_of_two(l + 1) == l
}

/// All admissible symbol lengths up to `max`.
pub fn admissible_lengths(max: u32) -> Vec<u32> {
    (2..=max).filter(|&l| admissible(l)).collect()
}

fn admissible_list(max: u32) -> String {
    admissible_lengths(max)
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[inline]
fn rotl(x: u32, by: u32, width: u32) -> u32 {
    let by = by % width;
    if by == 0 {
        return x;
    }
    ((x << by) | (x >> (width - by))) & ((1u32 << width) - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShiftParams {
    l: u32,
}

impl ShiftParams {
    pub fn new(l: u32) -> Result<Self> {
        if l > MAX_SHIFT_LENGTH || !admissible(l) {
            return Err(Error::InadmissibleLength(
                l,
                admissible_list(MAX_SHIFT_LENGTH),
            ));
        }
        Ok(Self { l })
    }

    /// Same check as [`ShiftParams::new`] with a tighter cap, for callers that
    /// also need GF(2^L).
    pub fn new_capped(l: u32, cap: u32) -> Result<Self> {
        if l > cap {
            return Err(Error::InadmissibleLength(l, admissible_list(cap)));
        }
        Self::new(l).map_err(|_| Error::InadmissibleLength(l, admissible_list(cap)))
    }

    /// Symbol length `L`.
    #[inline]
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Expanded width `L+1`.
    #[inline]
    pub fn width(&self) -> u32 {
        self.l + 1
    }

    #[inline]
    pub fn full_mask(&self) -> u32 {
        (1u32 << (self.l + 1)) - 1
    }

    /// The all-ones element `𝟏`.
    #[inline]
    pub fn all_ones(&self) -> RingElem {
        RingElem(self.full_mask())
    }

    /// Row `i` of `G·C^l·H` as an `L`-bit mask, for each `i < L`.
    pub fn coeff_rows(&self, c: Coeff) -> Vec<u32> {
        self.conjugate_rows(coeff_to_ring(self, c))
    }

    /// Rows of `G·e·H` as `L`-bit masks.
    pub fn conjugate_rows(&self, e: RingElem) -> Vec<u32> {
        let n = self.width();
        let low = (1u32 << self.l) - 1;
        (0..self.l)
            .map(|i| {
                let g_row = (1u32 << i) | (1u32 << self.l);
                e.exponents().fold(0u32, |acc, k| acc ^ rotl(g_row, k, n)) & low
            })
            .collect()
    }

    /// `G·e·H` as a dense `L x L` binary matrix.
    pub fn dense_conjugate(&self, e: RingElem) -> BitMatrix {
        let rows = self.conjugate_rows(e);
        BitMatrix::from_fn(self.l as usize, self.l as usize, |r, c| {
            (rows[r] >> c) & 1 == 1
        })
    }

    /// `G = [I_L | 1]`, `L x (L+1)`.
    pub fn dense_g(&self) -> BitMatrix {
        let l = self.l as usize;
        BitMatrix::from_fn(l, l + 1, |r, c| r == c || c == l)
    }

    /// `H = [I_L 0]^T`, `(L+1) x L`.
    pub fn dense_h(&self) -> BitMatrix {
        let l = self.l as usize;
        BitMatrix::from_fn(l + 1, l, |r, c| r == c)
    }

    /// `C^k`, `(L+1) x (L+1)`, acting on row vectors as a left rotation by `k`.
    pub fn dense_c(&self, k: u32) -> BitMatrix {
        let n = self.width() as usize;
        BitMatrix::from_fn(n, n, |r, c| (r + k as usize) % n == c)
    }

    /// `JL x JL` binary expansion with block `(j, j')` equal to `G·m[j][j']·H`.
    pub fn expand_matrix(&self, m: &RingMatrix) -> BitMatrix {
        let l = self.l as usize;
        let mut out = BitMatrix::zeros(m.rows() * l, m.cols() * l);
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.set_block(r * l, c * l, &self.dense_conjugate(m.get(r, c)));
            }
        }
        out
    }
}

/// Element of the circulant ring; bit `l` of the mask is the term `C^l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct RingElem(pub u32);

impl RingElem {
    pub const ZERO: RingElem = RingElem(0);
    pub const ONE: RingElem = RingElem(1);

    pub fn monomial(p: &ShiftParams, l: u32) -> Self {
        RingElem(1 << (l % p.width()))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        RingElem(exps.iter().fold(0, |m, &e| m ^ (1 << e)))
    }

    pub fn exponents(self) -> impl Iterator<Item = u32> {
        let m = self.0;
        (0..32).filter(move |&i| (m >> i) & 1 == 1)
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Zero in the quotient by `𝟏`, i.e. acts as zero after conjugation.
    #[inline]
    pub fn is_null(self, p: &ShiftParams) -> bool {
        self.0 == 0 || self.0 == p.full_mask()
    }
}

#[inline]
pub fn ring_add(a: RingElem, b: RingElem) -> RingElem {
    RingElem(a.0 ^ b.0)
}

pub fn ring_mul(p: &ShiftParams, a: RingElem, b: RingElem) -> RingElem {
    let n = p.width();
    RingElem(a.exponents().fold(0, |acc, i| acc ^ rotl(b.0, i, n)))
}

pub fn ring_pow(p: &ShiftParams, a: RingElem, mut e: u128) -> RingElem {
    let mut base = a;
    let mut acc = RingElem::ONE;
    while e > 0 {
        if e & 1 == 1 {
            acc = ring_mul(p, acc, base);
        }
        base = ring_mul(p, base, base);
        e >>= 1;
    }
    acc
}

/// The representative of `{a, a + 𝟏}` with weight at most `L/2`.
#[inline]
pub fn sigma(p: &ShiftParams, a: RingElem) -> RingElem {
    if a.weight() > p.l() / 2 {
        RingElem(a.0 ^ p.full_mask())
    } else {
        a
    }
}

/// Inverse in the quotient field, σ-normalized. `Singular` for null elements.
pub fn quotient_inverse(p: &ShiftParams, a: RingElem) -> Result<RingElem> {
    if a.is_null(p) {
        return Err(Error::Singular);
    }
    Ok(sigma(p, ring_pow(p, a, (1u128 << p.l()) - 2)))
}

/// A coding coefficient: zero or a single cyclic shift `C^l`, `1 <= l <= L+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coeff {
    Zero,
    Shift(u32),
}

impl Coeff {
    /// `0` is `Zero`, `d >= 1` is `Shift(d)`.
    #[inline]
    pub fn from_digit(d: u32) -> Self {
        if d == 0 {
            Coeff::Zero
        } else {
            Coeff::Shift(d)
        }
    }

    #[inline]
    pub fn digit(self) -> u32 {
        match self {
            Coeff::Zero => 0,
            Coeff::Shift(l) => l,
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self == Coeff::Zero
    }
}

#[inline]
pub fn coeff_to_ring(p: &ShiftParams, c: Coeff) -> RingElem {
    match c {
        Coeff::Zero => RingElem::ZERO,
        Coeff::Shift(l) => RingElem::monomial(p, l),
    }
}

/// Row-major block matrix over the ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RingElem>,
}

impl RingMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RingElem>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![RingElem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, RingElem::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<RingElem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_coeffs(p: &ShiftParams, rows: &[Vec<Coeff>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&c| coeff_to_ring(p, c)).collect())
                .collect(),
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> RingElem {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: RingElem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn mul(&self, p: &ShiftParams, other: &RingMatrix) -> Result<RingMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RingMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let v = (0..self.cols).fold(RingElem::ZERO, |acc, k| {
                    ring_add(acc, ring_mul(p, self.get(r, k), other.get(k, c)))
                });
                out.set(r, c, v);
            }
        }
        Ok(out)
    }

    /// The matrix with row `r` and column `c` removed.
    pub fn without(&self, r: usize, c: usize) -> RingMatrix {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                entries.push(self.get(i, j));
            }
        }
        RingMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            entries,
        }
    }
}

/// Determinant over the ring (no signs in characteristic 2), by dynamic
/// programming over the set of columns used by the leading rows.
pub fn ring_det(p: &ShiftParams, m: &RingMatrix) -> Result<RingElem> {
    ring_det_tallied(p, m, &mut 0)
}

/// Binary-operation estimate of one ring product: one `(L+1)`-bit XOR per
/// term of `a`.
#[inline]
fn rmul(p: &ShiftParams, a: RingElem, b: RingElem, tally: &mut u64) -> RingElem {
    *tally += a.weight() as u64 * p.width() as u64;
    ring_mul(p, a, b)
}

fn rpow(p: &ShiftParams, a: RingElem, e: u128, tally: &mut u64) -> RingElem {
    let r = ring_pow(p, a, e);
    // squarings plus multiplies, each at most L+1 terms
    *tally += 2 * (128 - e.leading_zeros() as u64) * (p.width() as u64).pow(2);
    r
}

/// [`ring_det`], adding an estimate of the binary operations spent to `tally`.
pub fn ring_det_tallied(p: &ShiftParams, m: &RingMatrix, tally: &mut u64) -> Result<RingElem> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "determinant of {}x{} matrix",
            n,
            m.cols()
        )));
    }
    if n > MAX_DET_DIM {
        return Err(Error::DimensionMismatch(format!(
            "block dimension {n} exceeds {MAX_DET_DIM}"
        )));
    }
    if n == 0 {
        return Ok(RingElem::ONE);
    }
    let mut dp = vec![RingElem::ZERO; 1 << n];
    dp[0] = RingElem::ONE;
    for mask in 0..(1usize << n) - 1 {
        let cur = dp[mask];
        if cur.is_zero() {
            continue;
        }
        let r = mask.count_ones() as usize;
        for c in (0..n).filter(|c| mask & (1 << c) == 0) {
            let e = m.get(r, c);
            if !e.is_zero() {
                dp[mask | (1 << c)] = ring_add(dp[mask | (1 << c)], rmul(p, e, cur, tally));
            }
        }
    }
    Ok(dp[(1 << n) - 1])
}

/// Determinant of `m` with block row `j` and block column `jp` removed.
pub fn ring_minor(p: &ShiftParams, m: &RingMatrix, j: usize, jp: usize) -> Result<RingElem> {
    ring_minor_tallied(p, m, j, jp, &mut 0)
}

fn ring_minor_tallied(
    p: &ShiftParams,
    m: &RingMatrix,
    j: usize,
    jp: usize,
    tally: &mut u64,
) -> Result<RingElem> {
    if m.rows() != m.cols() || m.rows() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "minor of {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if j >= m.rows() || jp >= m.cols() {
        return Err(Error::IndexOutOfRange(j, jp));
    }
    ring_det_tallied(p, &m.without(j, jp), tally)
}

/// Block inverse from determinants: entry `[j'][j]` is
/// `σ(Λ^{2^L-2} · minor(j, j'))` with `Λ = det(m)`.
///
/// The result is checked before returning: every entry of `m · B` must equal
/// the identity up to adding `𝟏`, which is the same as the expanded binary
/// product being `I_{JL}`.
pub fn block_inverse(p: &ShiftParams, m: &RingMatrix) -> Result<RingMatrix> {
    block_inverse_tallied(p, m, &mut 0)
}

/// [`block_inverse`], adding an estimate of the binary operations spent to
/// `tally`.
pub fn block_inverse_tallied(
    p: &ShiftParams,
    m: &RingMatrix,
    tally: &mut u64,
) -> Result<RingMatrix> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of {}x{} matrix",
            n,
            m.cols()
        )));
    }
    let lambda = ring_det_tallied(p, m, tally)?;
    if lambda.is_null(p) {
        return Err(Error::Singular);
    }
    let scale = rpow(p, lambda, (1u128 << p.l()) - 2, tally);
    let mut b = RingMatrix::zeros(n, n);
    if n == 1 {
        b.set(0, 0, sigma(p, scale));
    } else {
        for j in 0..n {
            for jp in 0..n {
                let minor = ring_minor_tallied(p, m, j, jp, tally)?;
                b.set(jp, j, sigma(p, rmul(p, minor, scale, tally)));
            }
        }
    }
    verify_inverse(p, m, &b)?;
    Ok(b)
}

fn verify_inverse(p: &ShiftParams, m: &RingMatrix, b: &RingMatrix) -> Result<()> {
    let prod = m.mul(p, b)?;
    for r in 0..prod.rows() {
        for c in 0..prod.cols() {
            let want = if r == c {
                RingElem::ONE
            } else {
                RingElem::ZERO
            };
            if !ring_add(prod.get(r, c), want).is_null(p) {
                return Err(Error::Singular);
            }
        }
    }
    Ok(())
}

/// Same result as [`block_inverse`], computed by Gauss-Jordan elimination in
/// the quotient field. Used when the block dimension is large.
pub fn inverse_by_elimination(p: &ShiftParams, m: &RingMatrix) -> Result<RingMatrix> {
    inverse_by_elimination_tallied(p, m, &mut 0)
}

/// [`inverse_by_elimination`], adding an estimate of the binary operations
/// spent to `tally`.
pub fn inverse_by_elimination_tallied(
    p: &ShiftParams,
    m: &RingMatrix,
    tally: &mut u64,
) -> Result<RingMatrix> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of {}x{} matrix",
            n,
            m.cols()
        )));
    }
    let mut a = m.clone();
    let mut inv = RingMatrix::identity(n);
    let swap_rows = |x: &mut RingMatrix, r1: usize, r2: usize| {
        for c in 0..n {
            let t = x.get(r1, c);
            x.set(r1, c, x.get(r2, c));
            x.set(r2, c, t);
        }
    };
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a.get(r, col).is_null(p))
            .ok_or(Error::Singular)?;
        if pivot != col {
            swap_rows(&mut a, pivot, col);
            swap_rows(&mut inv, pivot, col);
        }
        let pivot_elem = a.get(col, col);
        if pivot_elem.is_null(p) {
            return Err(Error::Singular);
        }
        let pinv = sigma(p, rpow(p, pivot_elem, (1u128 << p.l()) - 2, tally));
        for c in 0..n {
            a.set(col, c, sigma(p, rmul(p, pinv, a.get(col, c), tally)));
            inv.set(col, c, sigma(p, rmul(p, pinv, inv.get(col, c), tally)));
        }
        for r in (0..n).filter(|&r| r != col) {
            let f = a.get(r, col);
            if f.is_null(p) {
                continue;
            }
            for c in 0..n {
                a.set(
                    r,
                    c,
                    sigma(p, ring_add(a.get(r, c), rmul(p, f, a.get(col, c), tally))),
                );
                inv.set(
                    r,
                    c,
                    sigma(
                        p,
                        ring_add(inv.get(r, c), rmul(p, f, inv.get(col, c), tally)),
                    ),
                );
            }
        }
    }
    Ok(inv)
}
