//! Analytic completion delay and decoding-complexity formulas.
//!
//! Delay distributions are tabulated on `d = 0..=d_max`. For the conventional
//! scheme the conditional law of `D_r` given `U_r = u` is a sum of `P-u`
//! independent geometric variables; it is built by convolving one geometric at
//! a time, going from `u = P-1` down to `u = 0`, so every `u` is produced in a
//! single pass.

use serde::Serialize;

use rayon::prelude::*;

use crate::circring::{Coeff, ShiftParams};
use crate::error::{Error, Result};
use crate::gf2e::{FieldCtx, MAX_DEGREE};
use crate::linalg::beta_rank;
use crate::rng::{Purpose, Stream};
use crate::schemes::{draw_p0_coeff, Ratio, SchemeConfig, SchemeKind};
use crate::sim::{run_experiment_with, ChannelRedraw, ChannelRule, CodingMode, ExperimentSpec};

/// Summand threshold for the expected-delay series.
pub const TAIL_EPS: f64 = 1e-12;

/// Largest `d` tabulated for `P` packets.
pub fn default_d_max(p: usize) -> usize {
    (64 * p).max(2048)
}

/// Probability that a coded packet is received and innovative when the
/// receiver already holds rank `rank` out of `p`. `q` may be infinite.
pub fn p_prime(q: f64, p_r: f64, rank: usize, p: usize) -> f64 {
    p_r * (1.0 - q.powf(rank as f64 - p as f64))
}

/// `h * Geom(g)` on `0..=d_max`, geometric support starting at 1.
fn convolve_geometric(h: &[f64], g: f64) -> Vec<f64> {
    let mut out = vec![0.0; h.len()];
    for d in 1..h.len() {
        out[d] = g * h[d - 1] + (1.0 - g) * out[d - 1];
    }
    out
}

/// `Pr(D_r = d | U_r = u)` for `d = 0..=d_max`.
pub fn delay_pmf_conditional(q: f64, p_r: f64, p: usize, u: usize, d_max: usize) -> Vec<f64> {
    let mut h = vec![0.0; d_max + 1];
    h[0] = 1.0;
    for k in (u..p).rev() {
        h = convolve_geometric(&h, p_prime(q, p_r, k, p));
    }
    h
}

/// Natural log of the binomial pmf `C(p,u) x^u (1-x)^(p-u)` for all `u`.
fn ln_binomial_pmf(p: usize, x: f64) -> Vec<f64> {
    let mut ln_c = vec![0.0; p + 1];
    for u in 1..=p {
        ln_c[u] = ln_c[u - 1] + ((p - u + 1) as f64).ln() - (u as f64).ln();
    }
    (0..=p)
        .map(|u| {
            let a = if u == 0 { 0.0 } else { u as f64 * x.ln() };
            let b = if u == p {
                0.0
            } else {
                (p - u) as f64 * (1.0 - x).ln()
            };
            ln_c[u] + a + b
        })
        .collect()
}

/// Tabulated distribution of one receiver's delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayDist {
    pub pmf: Vec<f64>,
}

impl DelayDist {
    /// Conventional scheme over GF(q); `q = f64::INFINITY` gives the perfect
    /// scheme's law through the same recursion.
    pub fn conv(q: f64, p_r: f64, p: usize, d_max: usize) -> Self {
        Self {
            pmf: delay_pmf(q, p_r, p, d_max),
        }
    }

    pub fn perfect(p_r: f64, p: usize, d_max: usize) -> Self {
        Self {
            pmf: perfect_delay_pmf(p_r, p, d_max),
        }
    }

    pub fn d_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.pmf
            .iter()
            .map(|x| {
                acc += x;
                acc.min(1.0)
            })
            .collect()
    }

    /// Probability mass beyond `d_max`.
    pub fn tail(&self) -> f64 {
        (1.0 - self.pmf.iter().sum::<f64>()).max(0.0)
    }
}

/// `Pr(D_r = d)` for the conventional scheme.
pub fn delay_pmf(q: f64, p_r: f64, p: usize, d_max: usize) -> Vec<f64> {
    let w: Vec<f64> = ln_binomial_pmf(p, p_r).into_iter().map(f64::exp).collect();
    let mut out = vec![0.0; d_max + 1];
    out[0] = w[p];
    let mut h = vec![0.0; d_max + 1];
    h[0] = 1.0;
    for u in (0..p).rev() {
        h = convolve_geometric(&h, p_prime(q, p_r, u, p));
        for (o, x) in out.iter_mut().zip(&h) {
            *o += w[u] * x;
        }
    }
    out
}

fn perfect_delay_pmf(p_r: f64, p: usize, d_max: usize) -> Vec<f64> {
    if p_r >= 1.0 {
        let mut v = vec![0.0; d_max + 1];
        v[0] = 1.0;
        return v;
    }
    // C(P+d-1, P-1) p^P (1-p)^d in log space
    let mut ln = p as f64 * p_r.ln();
    let ln_fail = (1.0 - p_r).ln();
    let mut out = Vec::with_capacity(d_max + 1);
    out.push(ln.exp());
    for d in 1..=d_max {
        ln += ((p + d - 1) as f64).ln() - (d as f64).ln() + ln_fail;
        out.push(ln.exp());
    }
    out
}

/// `Pr(D_r <= d) = I_{p_r}(P, d+1)` for the perfect scheme.
pub fn perfect_delay_cdf(p_r: f64, p: usize, d: usize) -> f64 {
    perfect_delay_pmf(p_r, p, d).iter().sum::<f64>().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayEstimate {
    pub mean: f64,
    /// Bound on the neglected part of the series.
    pub remainder: f64,
    /// Number of summands used.
    pub terms: usize,
}

/// `E[D] = sum_d (1 - prod_r Pr(D_r <= d))` for independent receivers.
pub fn expected_system_delay(dists: &[DelayDist], tail_eps: f64) -> Result<DelayEstimate> {
    let d_max = dists.iter().map(DelayDist::d_max).min().unwrap_or(0);
    if dists.is_empty() {
        return Ok(DelayEstimate {
            mean: 0.0,
            remainder: 0.0,
            terms: 0,
        });
    }
    let cdfs: Vec<Vec<f64>> = dists.iter().map(DelayDist::cdf).collect();
    let mut mean = 0.0;
    let mut prev = f64::NAN;
    for d in 0..=d_max {
        let s = (1.0 - cdfs.iter().map(|c| c[d]).product::<f64>()).max(0.0);
        if s < tail_eps {
            // once past the mode the summands decay at least geometrically
            let ratio = if prev.is_finite() && prev > 0.0 {
                (s / prev).min(1.0 - 1e-9)
            } else {
                0.5
            };
            let remainder = s / (1.0 - ratio);
            return Ok(DelayEstimate {
                mean: mean + s,
                remainder,
                terms: d + 1,
            });
        }
        mean += s;
        prev = s;
    }
    Err(Error::NonConvergence {
        eps: tail_eps,
        d_max,
    })
}

/// `E[D]` for the conventional scheme over GF(q) with the given channels.
pub fn expected_delay_conv(q: f64, p: &[f64], packets: usize) -> Result<DelayEstimate> {
    let d_max = default_d_max(packets);
    let dists: Vec<DelayDist> = p
        .iter()
        .map(|&pr| DelayDist::conv(q, pr, packets, d_max))
        .collect();
    expected_system_delay(&dists, TAIL_EPS)
}

/// `E[D]` for the perfect scheme with the given channels.
pub fn expected_delay_perfect(p: &[f64], packets: usize) -> Result<DelayEstimate> {
    let d_max = default_d_max(packets);
    let dists: Vec<DelayDist> = p
        .iter()
        .map(|&pr| DelayDist::perfect(pr, packets, d_max))
        .collect();
    expected_system_delay(&dists, TAIL_EPS)
}

/// `Pr(N_r = P + n | U = P - gap)` for the GF(2) scheme.
pub fn appendix_a_table(gap: usize, n: usize) -> f64 {
    let a: f64 = (1..=gap).map(|j| 1.0 - 0.5f64.powi(j as i32)).product();
    if n == 0 {
        return a;
    }
    // a1[j] = A'_{j,k}, starting from k = 1
    let mut a1 = vec![1.0; gap + 1];
    for _ in 1..n {
        let mut next = vec![0.0; gap + 1];
        let mut acc = 0.0;
        for j in 1..=gap {
            acc += 0.5f64.powi(j as i32) * a1[j];
            next[j] = acc;
        }
        a1 = next;
    }
    a * (1..=gap)
        .map(|j| 0.5f64.powi(j as i32) * a1[j])
        .sum::<f64>()
}

/// Sum of `j - 1` for `j` from `a+1` to `b`, extended to real bounds.
fn sum_j_minus_one(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    (b * (b - 1.0) - a * (a - 1.0)) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvComplexity {
    pub phase1: f64,
    pub step1: f64,
    pub step2: f64,
    pub total: f64,
    /// `M P [(2L+1)P - 1](1 - p_r)`, the large-`L` approximation.
    pub large_l: f64,
    /// Lower bound used when `L = 1`.
    pub gf2_lower_bound: Option<f64>,
}

/// `M P [(2L+1)P - 1](1 - p_r)`.
pub fn conv_large_l_approx(m: usize, p: usize, l: u32, p_r: f64) -> f64 {
    m as f64 * p as f64 * ((2 * l as usize + 1) as f64 * p as f64 - 1.0) * (1.0 - p_r)
}

/// `(M/2)[(P^2 - P) p_r (1 - p_r) + 3|A| - 2]`.
pub fn gf2_lower_bound(m: usize, p: usize, p_r_var: f64, mean_a: f64) -> f64 {
    let p = p as f64;
    m as f64 / 2.0 * ((p * p - p) * p_r_var + 3.0 * mean_a - 2.0)
}

/// Expected conventional decoding cost. Phase one and step one follow the
/// per-term model with `E[U_r] = P p_r`, step two takes `phi(D) = |A|^2`.
pub fn conv_complexity_expect(cfg: &SchemeConfig, p_r: f64, mean_a: f64) -> Result<ConvComplexity> {
    if cfg.kind != SchemeKind::ConvGF {
        return Err(Error::InvalidArgs(
            "conventional configuration expected".into(),
        ));
    }
    let (m, p, l) = (cfg.m as f64, cfg.p as f64, cfg.l as f64);
    let nz = 1.0 - 2f64.powf(-l);
    let e_u = p * p_r;
    let e_u2 = p * p_r * (p * p_r - p_r + 1.0);
    let per_term = m / l * (2.0 * l * l + l);
    let phase1 = (p * e_u - e_u2) * nz * per_term;
    let b = p - e_u;
    let step1 =
        (b - mean_a).max(0.0) * m / l * 2.0 * l * l + sum_j_minus_one(mean_a, b) * nz * per_term;
    let phi = mean_a * mean_a;
    let step2 = phi * m / l * 2.0 * l * l + (phi - mean_a) * m / l * l;
    Ok(ConvComplexity {
        phase1,
        step1,
        step2,
        total: phase1 + step1 + step2,
        large_l: conv_large_l_approx(cfg.m, cfg.p, cfg.l, p_r),
        gf2_lower_bound: (cfg.l == 1)
            .then(|| gf2_lower_bound(cfg.m, cfg.p, p_r * (1.0 - p_r), mean_a)),
    })
}

/// Expected circular-shift decoding cost with the supplied means of `|A|`
/// and `U_r`; the redundant variant omits the expansion term.
pub fn circ_complexity_expect(
    cfg: &SchemeConfig,
    p_r: f64,
    mean_a: f64,
    mean_ur: f64,
) -> Result<f64> {
    circ_complexity_expect_with(cfg, p_r * (1.0 - p_r), mean_a, mean_ur)
}

/// As [`circ_complexity_expect`] with `p_r(1 - p_r)` supplied directly, for
/// channels that vary across receivers.
pub fn circ_complexity_expect_with(
    cfg: &SchemeConfig,
    p_r_var: f64,
    mean_a: f64,
    mean_ur: f64,
) -> Result<f64> {
    if !cfg.kind.is_circ() {
        return Err(Error::InvalidArgs(
            "circular-shift configuration expected".into(),
        ));
    }
    let p0 = cfg
        .p0
        .ok_or_else(|| Error::InvalidP0("missing".into()))?
        .value();
    let (m, p, l) = (cfg.m as f64, cfg.p as f64, cfg.l as f64);
    let expansion = if cfg.kind == SchemeKind::Circ {
        p * (l - 1.0)
    } else {
        0.0
    };
    let a = mean_a;
    let inner =
        p * p * p_r_var * (1.0 - p0) + (a - 1.0).powi(2) * (l / 2.0 - 1.0) + (a - 1.0) * (a - p0);
    let step1 = sum_j_minus_one(a, p - mean_ur) * m / l * (1.0 - p0) * (l + 1.0);
    Ok(m / l * (expansion + (l + 1.0) * inner) + step1)
}

/// Cost model for one circular-shift receiver with `u` uncoded packets and a
/// residual of `abs_a`, using expected nonzero counts and the weight bound
/// `L/2` for the inverse entries. Step two costs nothing when no residual is
/// left.
pub fn circ_complexity_bound(cfg: &SchemeConfig, u: usize, abs_a: usize) -> Result<f64> {
    if !cfg.kind.is_circ() {
        return Err(Error::InvalidArgs(
            "circular-shift configuration expected".into(),
        ));
    }
    let p0 = cfg
        .p0
        .ok_or_else(|| Error::InvalidP0("missing".into()))?
        .value();
    let (m, p, l) = (cfg.m as f64, cfg.p as f64, cfg.l as f64);
    let (u, a) = (u as f64, abs_a as f64);
    let expansion = if cfg.kind == SchemeKind::Circ {
        p * (l - 1.0)
    } else {
        0.0
    };
    let step2 = if abs_a > 0 {
        (a - 1.0).powi(2) * (l / 2.0 - 1.0) + (a - 1.0) * (a - p0)
    } else {
        0.0
    };
    let inner = (p - u) * u * (1.0 - p0) + step2;
    Ok(m / l * (expansion + (l + 1.0) * inner)
        + sum_j_minus_one(a, p - u) * m / l * (1.0 - p0) * (l + 1.0))
}

/// `(1 - p0^(P-J+1), 1 - q^-(P-J+1))`.
pub fn full_rank_bounds(p0: f64, p: usize, j: usize, q: f64) -> Result<(f64, f64)> {
    if q * p0 > 1.0 + 1e-12 {
        return Err(Error::InvalidArgs(format!(
            "q = {q} exceeds 1/p0 = {}",
            1.0 / p0
        )));
    }
    if j > p {
        return Err(Error::InvalidArgs(format!("J = {j} exceeds P = {p}")));
    }
    let e = (p - j + 1) as i32;
    Ok((1.0 - p0.powi(e), 1.0 - q.powi(-e)))
}

/// Monte Carlo frequency with which `J` random block columns of length `P`
/// have full rank, against the circular-shift bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullRankEstimate {
    pub frequency: f64,
    pub bound: f64,
    /// Standard error of `frequency` at the bound.
    pub sigma: f64,
    pub samples: usize,
}

pub fn full_rank_monte_carlo(
    l: u32,
    p0: Ratio,
    p: usize,
    j: usize,
    samples: usize,
    seed: u64,
) -> Result<FullRankEstimate> {
    let params = ShiftParams::new_capped(l, MAX_DEGREE)?;
    let ctx = FieldCtx::new(l)?;
    let (bound, _) = full_rank_bounds(p0.value(), p, j, 2.0)?;
    let hits: usize = (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = Stream::derived(seed, Purpose::Verify, i);
            let cols: Vec<Vec<Coeff>> = (0..j)
                .map(|_| (0..p).map(|_| draw_p0_coeff(p0, l, &mut rng)).collect())
                .collect::<Result<_>>()?;
            Ok(beta_rank(&params, &ctx, &cols)? as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let n = samples as f64;
    Ok(FullRankEstimate {
        frequency: hits as f64 / n,
        bound,
        sigma: (bound * (1.0 - bound) / n).sqrt(),
        samples,
    })
}

/// Pointwise comparison of a receiver's delay CDF under the circular-shift
/// scheme (Monte Carlo) with the GF(q) scheme (analytic).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub q: f64,
    pub p_r: f64,
    pub trials: usize,
    pub circ_cdf: Vec<f64>,
    pub gfq_cdf: Vec<f64>,
    /// DKW half-width at confidence `1 - alpha`.
    pub slack: f64,
    /// Delays where the circular-shift CDF falls below the GF(q) one by more
    /// than `slack`.
    pub violations: Vec<usize>,
    pub circ_mean: f64,
    pub circ_ci95: f64,
    pub gfq_mean: f64,
}

pub const DKW_ALPHA: f64 = 1e-3;

/// DKW half-width `sqrt(ln(2/alpha) / 2n)`.
pub fn dkw_slack(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

pub fn dominance_compare(
    circ: &SchemeConfig,
    q: f64,
    p_r: f64,
    trials: usize,
    seed: u64,
) -> Result<DominanceReport> {
    if !circ.kind.is_circ() {
        return Err(Error::InvalidArgs(
            "circular-shift configuration expected".into(),
        ));
    }
    let p0 = circ
        .p0
        .ok_or_else(|| Error::InvalidP0("missing".into()))?
        .value();
    full_rank_bounds(p0, circ.p, 1, q)?;
    let spec = ExperimentSpec {
        scheme: circ.clone(),
        channel: ChannelRule::Fixed(vec![p_r]),
        redraw: ChannelRedraw::PerExperiment,
        coding: CodingMode::Broadcast,
        trials,
        base_seed: seed,
        decode: false,
    };
    let mut counts: Vec<usize> = Vec::new();
    let stats = run_experiment_with(&spec, |t| {
        let d = t.d;
        if counts.len() <= d {
            counts.resize(d + 1, 0);
        }
        counts[d] += 1;
    })?;
    let dist = DelayDist::conv(q, p_r, circ.p, default_d_max(circ.p));
    let analytic = dist.cdf();
    let hi = counts.len().max(1);
    let mut acc = 0;
    let circ_cdf: Vec<f64> = counts
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / trials as f64
        })
        .collect();
    let gfq_cdf: Vec<f64> = (0..hi)
        .map(|d| analytic[d.min(analytic.len() - 1)])
        .collect();
    let slack = dkw_slack(trials, DKW_ALPHA);
    let violations = (0..hi)
        .filter(|&d| circ_cdf[d] + slack < gfq_cdf[d])
        .collect();
    let gfq_mean = expected_system_delay(&[dist], TAIL_EPS)?.mean;
    Ok(DominanceReport {
        q,
        p_r,
        trials,
        circ_cdf,
        gfq_cdf,
        slack,
        violations,
        circ_mean: stats.mean_d,
        circ_ci95: stats.ci95_d,
        gfq_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn p_prime_examples() {
        assert!(close(p_prime(2.0, 0.9, 1, 2), 0.45, 1e-15));
        assert!(close(p_prime(f64::INFINITY, 0.7, 3, 5), 0.7, 0.0));
        assert!(close(p_prime(2.0, 1.0, 0, 1), 0.5, 0.0));
    }

    /// Sum over all compositions of `d` into `n` positive parts.
    fn composition_oracle(ps: &[f64], d: usize) -> f64 {
        fn rec(ps: &[f64], d: usize) -> f64 {
            match ps {
                [] => (d == 0) as u8 as f64,
                [g, rest @ ..] => (1..=d)
                    .map(|a| (1.0 - g).powi(a as i32 - 1) * g * rec(rest, d - a))
                    .sum(),
            }
        }
        rec(ps, d)
    }

    #[test]
    fn conditional_pmf_matches_compositions() {
        for &q in &[2.0, 4.0, 16.0] {
            for &pr in &[0.3, 0.8, 1.0] {
                for p in 1..=6usize {
                    for u in p.saturating_sub(4)..=p {
                        let pmf = delay_pmf_conditional(q, pr, p, u, 12);
                        let ps: Vec<f64> = (u..p).map(|k| p_prime(q, pr, k, p)).collect();
                        for (d, x) in pmf.iter().enumerate() {
                            assert!(
                                close(*x, composition_oracle(&ps, d), 1e-12),
                                "q={q} p={p} u={u} d={d}"
                            );
                        }
                    }
                }
            }
        }
        // P-u = 3, d = 5: six compositions
        let pmf = delay_pmf_conditional(2.0, 0.8, 5, 2, 10);
        let ps: Vec<f64> = (2..5).map(|k| p_prime(2.0, 0.8, k, 5)).collect();
        let mut explicit = 0.0;
        for a in 1..=3 {
            for b in 1..=(4 - a) {
                let c = 5 - a - b;
                explicit += (1.0 - ps[0]).powi(a - 1)
                    * ps[0]
                    * (1.0 - ps[1]).powi(b - 1)
                    * ps[1]
                    * (1.0 - ps[2]).powi(c - 1)
                    * ps[2];
            }
        }
        assert!(close(pmf[5], explicit, 1e-15));
        let one = delay_pmf_conditional(2.0, 0.8, 4, 3, 8);
        let g = p_prime(2.0, 0.8, 3, 4);
        for d in 1..=8 {
            assert!(close(one[d], (1.0 - g).powi(d as i32 - 1) * g, 1e-15));
        }
        assert_eq!(
            delay_pmf_conditional(2.0, 0.8, 4, 4, 3),
            vec![1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn pmf_examples() {
        // P = 1: Pr(0) = p, Pr(d) = (1-p) geom(p (1 - 1/q))
        let (q, pr) = (2.0, 0.6);
        let pmf = delay_pmf(q, pr, 1, 50);
        assert!(close(pmf[0], pr, 1e-15));
        let g = pr * (1.0 - 1.0 / q);
        for d in 1..=50 {
            assert!(close(
                pmf[d],
                (1.0 - pr) * (1.0 - g).powi(d as i32 - 1) * g,
                1e-15
            ));
        }
        let big = delay_pmf(2.0, 0.85, 10, 2048);
        assert!(close(big.iter().sum::<f64>(), 1.0, 1e-12));
        // huge q approaches the perfect scheme
        let near = DelayDist::conv(1e12, 0.8, 6, 400).cdf();
        for d in 0..400 {
            assert!(close(near[d], perfect_delay_cdf(0.8, 6, d), 1e-10));
        }
        let exact = DelayDist::conv(f64::INFINITY, 0.8, 6, 400).cdf();
        for d in 0..400 {
            assert!(close(exact[d], perfect_delay_cdf(0.8, 6, d), 1e-12));
        }
    }

    #[test]
    fn perfect_cdf_examples() {
        for d in 0..30 {
            assert!(close(
                perfect_delay_cdf(0.3, 1, d),
                1.0 - 0.7f64.powi(d as i32 + 1),
                1e-14
            ));
        }
        assert!(close(perfect_delay_cdf(0.85, 15, 2000), 1.0, 1e-12));
        // against a direct sum with exact binomials
        let p = 0.85f64;
        let mut direct = 0.0;
        let mut c = 1.0f64;
        for j in 0..=5 {
            if j > 0 {
                c *= (14 + j) as f64 / j as f64;
            }
            direct += c * p.powi(15) * (1.0 - p).powi(j);
        }
        assert!(close(perfect_delay_cdf(p, 15, 5), direct, 1e-14));
    }

    #[test]
    fn expected_delay_examples() {
        let e = expected_delay_perfect(&[0.5], 1).unwrap();
        assert!(close(e.mean, 1.0, 1e-11), "{e:?}");
        assert!(e.remainder < 1e-11);
        assert_eq!(expected_delay_perfect(&[1.0; 7], 5).unwrap().mean, 0.0);
        assert!(expected_delay_conv(2.0, &[1.0; 7], 5).unwrap().mean < 1e-12);
        // the GF(2) delay exceeds the GF(16) delay, which exceeds the perfect one
        let ps = vec![0.85; 10];
        let g2 = expected_delay_conv(2.0, &ps, 10).unwrap().mean;
        let g16 = expected_delay_conv(16.0, &ps, 10).unwrap().mean;
        let perf = expected_delay_perfect(&ps, 10).unwrap().mean;
        assert!(g2 > g16 && g16 > perf);
        let short = DelayDist::conv(2.0, 0.01, 20, 10);
        assert!(matches!(
            expected_system_delay(&[short], TAIL_EPS),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn monotone_cdfs() {
        for dist in [
            DelayDist::conv(2.0, 0.7, 8, 600),
            DelayDist::perfect(0.7, 8, 600),
        ] {
            let c = dist.cdf();
            assert!(c.windows(2).all(|w| w[1] >= w[0]));
            assert!(c.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!(dist.tail() < 1e-12);
        }
    }

    #[test]
    fn table_examples() {
        assert_eq!(appendix_a_table(1, 0), 0.5);
        assert!(close(appendix_a_table(5, 1), 0.2887, 5e-5));
        let v = appendix_a_table(20, 20);
        assert!(close(v, 9.5367e-7, 5e-11), "{v:e}");
        for gap in [1, 5, 10, 15, 20] {
            for n in 0..30 {
                assert!(appendix_a_table(gap, n + 1) <= appendix_a_table(gap, n) + 1e-15);
            }
        }
    }

    #[test]
    fn complexity_examples() {
        assert_eq!(conv_large_l_approx(64, 10, 10, 0.85).round(), 20_064.0);
        let cfg = SchemeConfig::conv(10, 10, 640).unwrap();
        let c = conv_complexity_expect(&cfg, 1.0, 0.0).unwrap();
        assert_eq!(c.phase1, 0.0);
        let gf2 = SchemeConfig::conv(1, 10, 64).unwrap();
        let c = conv_complexity_expect(&gf2, 0.85, 2.0).unwrap();
        assert!(close(c.gf2_lower_bound.unwrap(), 64.0 * 7.7375, 1e-9));

        let circ = SchemeConfig::circ(4, 15, 1024, "1/4".parse().unwrap()).unwrap();
        let full = circ_complexity_expect(&circ, 0.85, 1.0, 12.75).unwrap();
        let red = circ_complexity_expect(
            &SchemeConfig {
                kind: SchemeKind::CircRed,
                ..circ.clone()
            },
            0.85,
            1.0,
            12.75,
        )
        .unwrap();
        assert!(close(full - red, 15.0 * 256.0 * 3.0, 1e-6));
        // |A| = 1 leaves no step-two quadratic terms
        let base = 256.0 * (45.0 + 5.0 * 225.0 * 0.85 * 0.75 * 0.15)
            + sum_j_minus_one(1.0, 2.25) * 256.0 * 0.75 * 5.0;
        assert!(close(full, base, 1e-6));
        // p0 -> 1 removes the (1 - p0) terms
        let near_one = SchemeConfig {
            p0: Some("999999/1000000".parse().unwrap()),
            ..circ
        };
        let v = circ_complexity_expect(&near_one, 0.85, 1.0, 12.75).unwrap();
        assert!(close(v, 256.0 * 45.0, 1.0));
    }

    #[test]
    fn full_rank_examples() {
        let (a, b) = full_rank_bounds(0.5, 3, 2, 2.0).unwrap();
        assert_eq!((a, b), (0.75, 0.75));
        let (a, b) = full_rank_bounds(0.5, 9, 4, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(full_rank_bounds(0.25, 6, 4, 8.0).is_err());
        let est = full_rank_monte_carlo(4, "1/4".parse().unwrap(), 6, 4, 4000, 1).unwrap();
        assert!(est.frequency >= est.bound - 3.0 * est.sigma, "{est:?}");
    }

    #[test]
    fn dominance_small() {
        let cfg = SchemeConfig::circ(4, 6, 4, "1/4".parse().unwrap()).unwrap();
        let r = dominance_compare(&cfg, 4.0, 0.8, 4000, 3).unwrap();
        assert!(r.violations.is_empty(), "{r:?}");
        let sure = dominance_compare(&cfg, 4.0, 1.0, 100, 3).unwrap();
        assert_eq!(sure.circ_cdf, vec![1.0]);
        assert!((sure.gfq_cdf[0] - 1.0).abs() < 1e-12);
        assert!(dominance_compare(&cfg, 8.0, 0.8, 10, 3).is_err());
    }

    #[test]
    fn gf2_gap_trend() {
        for r in [1usize, 10] {
            let diffs: Vec<f64> = [10usize, 20, 40, 80]
                .iter()
                .map(|&p| {
                    let ps = vec![0.85; r];
                    (expected_delay_conv(2.0, &ps, p).unwrap().mean
                        - expected_delay_perfect(&ps, p).unwrap().mean)
                        / p as f64
                })
                .collect();
            assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
        }
    }
}
