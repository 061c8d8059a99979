//! Rank and inverse machinery over GF(2) and GF(2^L).

use crate::bits::Packet;
use crate::circring::{Coeff, ShiftParams};
use crate::error::{Error, Result};
use crate::gf2e::{FieldCtx, FieldElem};

/// Dense binary matrix, rows packed into `u64` words (bit `c % 64` of word
/// `c / 64` holds column `c`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
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
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &BitMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (src, dst) = (other.row(k).to_vec(), out.row_mut(r));
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector `v` (packed like a row) times this matrix.
    pub fn vec_mul(&self, v: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.words];
        for k in 0..self.rows {
            if (v[k / 64] >> (k % 64)) & 1 == 1 {
                for (d, s) in out.iter_mut().zip(self.row(k)) {
                    *d ^= s;
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rank_gf2(self)
    }

    pub fn inverse(&self) -> Result<BitMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(
                "inverse of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col)).ok_or(Error::Singular)?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            for r in 0..n {
                if r != col && a.get(r, col) {
                    a.xor_rows(r, col);
                    inv.xor_rows(r, col);
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// `row[dst] ^= row[src]`
    fn xor_rows(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            let s = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= s;
        }
    }
}

/// Rank by Gaussian elimination with lowest-index pivots.
pub fn rank_gf2(m: &BitMatrix) -> usize {
    let mut t = Gf2RankTracker::new(m.cols());
    for r in 0..m.rows() {
        t.absorb_vector(m.row(r).to_vec())
            .expect("row width matches");
    }
    t.rank()
}

/// Incremental row-echelon basis over GF(2).
#[derive(Debug, Clone)]
pub struct Gf2RankTracker {
    dim: usize,
    words: usize,
    basis: Vec<(usize, Vec<u64>)>,
}

impl Gf2RankTracker {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            words: dim.div_ceil(64).max(1),
            basis: Vec::new(),
        }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduce `v` against the basis; keep it if independent. Returns whether the
    /// rank grew.
    pub fn absorb_vector(&mut self, mut v: Vec<u64>) -> Result<bool> {
        if v.len() != self.words {
            return Err(Error::DimensionMismatch(format!(
                "vector of {} words, tracker needs {}",
                v.len(),
                self.words
            )));
        }
        for (pivot, row) in &self.basis {
            if (v[pivot / 64] >> (pivot % 64)) & 1 == 1 {
                for (a, b) in v.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
        let lead = v
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        match lead {
            Some(p) if p < self.dim => {
                self.basis.push((p, v));
                Ok(true)
            }
            Some(_) => Err(Error::DimensionMismatch(
                "bits set beyond ambient dimension".into(),
            )),
            None => Ok(false),
        }
    }

    /// Absorb the `L` columns of one block coding vector. The packet is
    /// innovative iff the returned delta equals the number of columns.
    pub fn absorb_column(&mut self, cols: &[Vec<u64>]) -> Result<usize> {
        let mut delta = 0;
        for c in cols {
            if self.absorb_vector(c.clone())? {
                delta += 1;
            }
        }
        Ok(delta)
    }
}

/// Incremental row-echelon basis over GF(2^L).
#[derive(Debug, Clone)]
pub struct GfRankTracker<'a> {
    ctx: &'a FieldCtx,
    dim: usize,
    basis: Vec<(usize, Vec<FieldElem>)>,
}

impl<'a> GfRankTracker<'a> {
    pub fn new(ctx: &'a FieldCtx, dim: usize) -> Self {
        Self {
            ctx,
            dim,
            basis: Vec::new(),
        }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Returns whether `v` raised the rank. Basis rows are kept with a unit pivot.
    pub fn absorb(&mut self, v: &[FieldElem]) -> Result<bool> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {}, tracker dim {}",
                v.len(),
                self.dim
            )));
        }
        let ctx = self.ctx;
        let mut v = v.to_vec();
        for (pivot, row) in &self.basis {
            let c = v[*pivot];
            if !c.is_zero() {
                for (a, &b) in v.iter_mut().zip(row) {
                    *a = ctx.add(*a, ctx.mul(c, b));
                }
            }
        }
        match v.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                let inv = ctx.inv(v[p])?;
                for a in v.iter_mut() {
                    *a = ctx.mul(*a, inv);
                }
                self.basis.push((p, v));
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

/// Maps circular-shift coefficients into GF(2^L) through an element of order `L+1`.
#[derive(Debug, Clone)]
pub struct BetaMap {
    powers: Vec<FieldElem>,
}

impl BetaMap {
    pub fn new(params: &ShiftParams, ctx: &FieldCtx) -> Result<Self> {
        if ctx.degree() != params.l() {
            return Err(Error::DimensionMismatch(format!(
                "field degree {} vs symbol length {}",
                ctx.degree(),
                params.l()
            )));
        }
        let beta = ctx.beta_element()?;
        let powers = (0..=params.l()).map(|k| ctx.pow(beta, k as u64)).collect();
        Ok(Self { powers })
    }

    #[inline]
    pub fn map(&self, c: Coeff) -> FieldElem {
        match c {
            Coeff::Zero => FieldElem::ZERO,
            Coeff::Shift(l) => self.powers[l as usize % self.powers.len()],
        }
    }

    pub fn map_vec(&self, cs: &[Coeff]) -> Vec<FieldElem> {
        cs.iter().map(|&c| self.map(c)).collect()
    }
}

/// Whether the `J` block columns (each a length-`P` coefficient list) have full
/// block rank `JL` over GF(2), decided in GF(2^L) via the β-mapping.
pub fn beta_rank(params: &ShiftParams, ctx: &FieldCtx, columns: &[Vec<Coeff>]) -> Result<bool> {
    let map = BetaMap::new(params, ctx)?;
    let p = columns.first().map_or(0, |c| c.len());
    if columns.len() > p {
        return Ok(false);
    }
    let mut t = GfRankTracker::new(ctx, p);
    for col in columns {
        if !t.absorb(&map.map_vec(col))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `PL x L` binary expansion of one block coding vector, as its `L` columns.
pub fn expand_coding_vector(params: &ShiftParams, coeffs: &[Coeff]) -> Vec<Vec<u64>> {
    let l = params.l() as usize;
    let dim = coeffs.len() * l;
    let words = dim.div_ceil(64).max(1);
    let mut cols = vec![vec![0u64; words]; l];
    for (j, &c) in coeffs.iter().enumerate() {
        let rows = params.coeff_rows(c);
        for (i, &row) in rows.iter().enumerate() {
            for (k, col) in cols.iter_mut().enumerate() {
                if (row >> k) & 1 == 1 {
                    let bit = j * l + i;
                    col[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
    }
    cols
}

/// Solves `a · X = rhs` over GF(2^L) by Gauss-Jordan elimination, where row
/// `j` of `a` holds the coefficients of received packet `j`.
pub fn solve_dense_gf(ctx: &FieldCtx, a: &[Vec<FieldElem>], rhs: &[Packet]) -> Result<Vec<Packet>> {
    let n = a.len();
    if rhs.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(
            "coefficient matrix must be square and match rhs".into(),
        ));
    }
    let mut a: Vec<Vec<FieldElem>> = a.to_vec();
    let mut x: Vec<Vec<u32>> = rhs.iter().map(|p| p.symbols().to_vec()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::Singular)?;
        a.swap(pivot, col);
        x.swap(pivot, col);
        let inv = ctx.inv(a[col][col])?;
        for v in a[col].iter_mut() {
            *v = ctx.mul(*v, inv);
        }
        for s in x[col].iter_mut() {
            *s = ctx.mul(inv, FieldElem(*s as u16)).0 as u32;
        }
        for r in 0..n {
            let c = a[r][col];
            if r == col || c.is_zero() {
                continue;
            }
            let (pr, pc) = (a[col].clone(), x[col].clone());
            for (v, p) in a[r].iter_mut().zip(pr) {
                *v = ctx.add(*v, ctx.mul(c, p));
            }
            for (s, p) in x[r].iter_mut().zip(pc) {
                *s ^= ctx.mul(c, FieldElem(p as u16)).0 as u32;
            }
        }
    }
    x.into_iter()
        .map(|d| Packet::from_symbols(ctx.degree(), d))
        .collect()
}

/// Solves a circular-shift coded system through its `PL x PL` binary expansion.
/// `coeffs[j]` is the coefficient list of received packet `j`; payloads carry
/// `L`-bit symbols.
pub fn solve_dense_circ(
    params: &ShiftParams,
    coeffs: &[Vec<Coeff>],
    rhs: &[Packet],
) -> Result<Vec<Packet>> {
    let p = coeffs.len();
    let l = params.l() as usize;
    if rhs.len() != p || coeffs.iter().any(|c| c.len() != p) {
        return Err(Error::DimensionMismatch(
            "coefficient matrix must be square and match rhs".into(),
        ));
    }
    // block (original j', received j) = Γ_{j j'}
    let mut f = BitMatrix::zeros(p * l, p * l);
    for (j, row) in coeffs.iter().enumerate() {
        for (jp, &c) in row.iter().enumerate() {
            for (i, &bits) in params.coeff_rows(c).iter().enumerate() {
                for k in 0..l {
                    if (bits >> k) & 1 == 1 {
                        f.set(jp * l + i, j * l + k, true);
                    }
                }
            }
        }
    }
    let finv = f.inverse()?;
    let symbols = rhs.first().map_or(0, |r| r.num_symbols());
    let mut out = vec![vec![0u32; symbols]; p];
    let words = (p * l).div_ceil(64).max(1);
    let mask = (1u64 << l) - 1;
    for t in 0..symbols {
        let mut y = vec![0u64; words];
        for (j, pkt) in rhs.iter().enumerate() {
            let s = pkt.symbols()[t] as u64;
            for k in 0..l {
                if (s >> k) & 1 == 1 {
                    let bit = j * l + k;
                    y[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        let x = finv.vec_mul(&y);
        for (jp, o) in out.iter_mut().enumerate() {
            let mut s = 0u64;
            for k in 0..l {
                let bit = jp * l + k;
                s |= ((x[bit / 64] >> (bit % 64)) & 1) << k;
            }
            o[t] = (s & mask) as u32;
        }
    }
    out.into_iter()
        .map(|d| Packet::from_symbols(params.l(), d))
        .collect()
}
