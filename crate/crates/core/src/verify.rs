//! Executable checks of the algebraic and statistical claims, collected into a
//! single report.
//!
//! Each `check_*` function is self-contained and deterministic for a given
//! seed. [`verify_all`] runs them in parallel and lists them in a fixed order.
//! Timing is deliberately left out of the report so its bytes depend only on
//! the budget and seed.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    appendix_a_table, circ_complexity_bound, circ_complexity_expect_with, conv_large_l_approx,
    dominance_compare, expected_delay_conv, expected_delay_perfect, full_rank_monte_carlo,
    gf2_lower_bound,
};
use crate::circring::{
    block_inverse, inverse_by_elimination, ring_det, ring_minor, ring_mul, ring_pow, sigma, Coeff,
    RingElem, RingMatrix, ShiftParams,
};
use crate::decoders::DecodeSession;
use crate::error::{Error, Result};
use crate::linalg::{solve_dense_circ, solve_dense_gf, BetaMap, BitMatrix, GfRankTracker};
use crate::rng::{Purpose, Stream};
use crate::schemes::{CodedPacket, Header, Ratio, Scheme, SchemeConfig, SchemeKind};
use crate::sim::{
    run_experiment, run_experiment_with, ChannelRedraw, ChannelRule, CodingMode, ExperimentSpec,
    ExperimentStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    Quick,
    Full,
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Budget::Quick),
            "full" => Ok(Budget::Full),
            _ => Err(Error::InvalidArgs(format!(
                "unknown budget {s:?}, expected quick or full"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Failed a check whose claim is known not to hold as stated.
    Deviation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, anchor: &str, ok: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    fn from_result(name: &str, anchor: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((ok, detail)) => Self::new(name, anchor, ok, detail),
            Err(e) => Self::new(name, anchor, false, format!("error: {e}")),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Turns a failure into a known deviation.
    pub fn known_deviation(mut self) -> Self {
        if self.status == Status::Fail {
            self.status = Status::Deviation;
        }
        self
    }

    /// One line: `PASS name [anchor] detail`.
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Deviation => "DEVIATION",
        };
        format!("{tag} {} [{}] {}", self.name, self.anchor, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub budget: Budget,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl Report {
    /// No check failed; known deviations are allowed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            writeln!(s, "{}", c.line()).unwrap();
        }
        let count = |st| self.checks.iter().filter(|c| c.status == st).count();
        writeln!(
            s,
            "{} checks, {} failed, {} known deviations",
            self.checks.len(),
            count(Status::Fail),
            count(Status::Deviation)
        )
        .unwrap();
        s
    }

    pub fn to_jsonl(&self) -> String {
        self.checks
            .iter()
            .map(|c| serde_json::to_string(c).expect("serializable") + "\n")
            .collect()
    }
}

/// Identities of `Γ = G C^l H` against dense binary products, every `l`.
pub fn check_shift_identities(lengths: &[u32]) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let mut count = 0;
        for &l in lengths {
            let p = ShiftParams::new(l)?;
            let (g, h) = (p.dense_g(), p.dense_h());
            for k in 1..=l + 1 {
                let c = p.dense_c(k);
                let gamma = g.mul(&c)?.mul(&h)?;
                let ok = gamma == p.dense_conjugate(RingElem::monomial(&p, k))
                    && gamma.mul(&g)? == g.mul(&c)?
                    && gamma.mul(&g.mul(&p.dense_c(l + 1 - k))?.mul(&h)?)?
                        == BitMatrix::identity(l as usize);
                if !ok {
                    return Ok((false, format!("L={l} l={k}")));
                }
                count += 1;
            }
        }
        Ok((true, format!("{count} shifts over L in {lengths:?}")))
    };
    CheckResult::from_result("shift_identities", "Proposition 1", run())
}

fn e(exps: &[u32]) -> RingElem {
    RingElem::from_exponents(exps)
}

/// The worked 3x3 example over L = 4.
pub fn golden_matrix(p: &ShiftParams) -> RingMatrix {
    let c = |k| RingElem::monomial(p, k);
    RingMatrix::from_rows(vec![
        vec![c(0), c(1), c(1)],
        vec![c(0), c(2), c(3)],
        vec![c(0), c(3), c(4)],
    ])
    .expect("square")
}

/// The printed inverse of [`golden_matrix`].
pub fn golden_inverse() -> RingMatrix {
    RingMatrix::from_rows(vec![
        vec![e(&[]), e(&[2, 4]), e(&[1, 3])],
        vec![e(&[1, 3]), e(&[1]), e(&[3])],
        vec![e(&[0, 2]), e(&[3]), e(&[1, 4])],
    ])
    .expect("square")
}

/// Determinant, inverse and expanded product of the worked example.
pub fn check_golden() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let p = ShiftParams::new(4)?;
        let m = golden_matrix(&p);
        let det = ring_det(&p, &m)?;
        let b = block_inverse(&p, &m)?;
        let prod = p.expand_matrix(&m).mul(&p.expand_matrix(&b))?;
        let ok = det == e(&[0, 3]) && b == golden_inverse() && prod == BitMatrix::identity(12);
        Ok((
            ok,
            format!(
                "det={:?} inverse_matches={} product_is_identity={}",
                det.exponents().collect::<Vec<_>>(),
                b == golden_inverse(),
                prod == BitMatrix::identity(12)
            ),
        ))
    };
    CheckResult::from_result("golden_block_inverse", "Example 1", run())
}

/// Rebuilds the example's inverse entry by entry with `normalize` in place of
/// the weight-reducing map and compares with the printed matrix.
pub fn check_golden_formula(normalize: fn(&ShiftParams, RingElem) -> RingElem) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let p = ShiftParams::new(4)?;
        let m = golden_matrix(&p);
        let factor = ring_pow(&p, ring_det(&p, &m)?, (1u128 << p.l()) - 2);
        let want = golden_inverse();
        let mut wrong = 0;
        for j in 0..3 {
            for jp in 0..3 {
                let v = normalize(&p, ring_mul(&p, factor, ring_minor(&p, &m, j, jp)?));
                wrong += (v != want.get(jp, j)) as usize;
            }
        }
        Ok((wrong == 0, format!("{wrong} of 9 entries differ")))
    };
    CheckResult::from_result("golden_formula", "Example 1", run())
}

/// Random invertible block matrices: the formula inverse expands to the
/// identity and agrees with elimination.
pub fn check_block_inverse(instances: usize, seed: u64) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let mut s = Stream::derived(seed, Purpose::Verify, 3);
        let (mut checked, mut singular) = (0, 0);
        while checked < instances {
            let l = if checked % 2 == 0 { 4 } else { 10 };
            let p = ShiftParams::new(l)?;
            let n = 1 + checked % 6;
            let digits: Vec<Vec<Coeff>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| Coeff::from_digit(s.below(l as u64 + 2) as u32))
                        .collect()
                })
                .collect();
            let m = RingMatrix::from_coeffs(&p, &digits)?;
            match block_inverse(&p, &m) {
                Ok(b) => {
                    let id = p.expand_matrix(&m).mul(&p.expand_matrix(&b))?
                        == BitMatrix::identity(n * l as usize);
                    if !id || inverse_by_elimination(&p, &m)? != b {
                        return Ok((false, format!("instance {checked}: L={l} J={n}")));
                    }
                    checked += 1;
                }
                Err(Error::Singular) => singular += 1,
                Err(other) => return Err(other),
            }
        }
        Ok((
            true,
            format!("{checked} invertible instances, {singular} singular draws skipped"),
        ))
    };
    CheckResult::from_result("block_inverse_random", "Theorem 3", run())
}

/// Packets kept by one receiver: a random subset of the uncoded ones plus
/// innovative coded ones until full rank.
pub fn random_session(
    scheme: &Scheme,
    g: &crate::schemes::Generation,
    s: &mut Stream,
) -> Result<Vec<CodedPacket>> {
    let cfg = scheme.cfg();
    let ctx = scheme
        .field()
        .ok_or_else(|| Error::InvalidConfig("no field".into()))?;
    let beta = scheme.shift().map(|sp| BetaMap::new(sp, ctx)).transpose()?;
    let vec_of = |h: &Header| match &beta {
        Some(b) => h.shift_coeffs(cfg.p, cfg.l).map(|c| b.map_vec(&c)),
        None => h.field_coeffs(cfg.p),
    };
    let mut t = GfRankTracker::new(ctx, cfg.p);
    let mut out = Vec::new();
    let keep = s.unit();
    for pkt in scheme.encode_systematic(g) {
        if s.bernoulli(keep) {
            t.absorb(&vec_of(&pkt.header)?)?;
            out.push(pkt);
        }
    }
    while t.rank() < cfg.p {
        let pkt = scheme.encode_coded(g, s)?;
        if t.absorb(&vec_of(&pkt.header)?)? {
            out.push(pkt);
        }
    }
    Ok(out)
}

fn dense_oracle(scheme: &Scheme, packets: &[CodedPacket]) -> Result<Vec<crate::bits::Packet>> {
    let cfg = scheme.cfg();
    match cfg.kind {
        SchemeKind::ConvGF => {
            let a: Vec<_> = packets
                .iter()
                .map(|p| p.header.field_coeffs(cfg.p))
                .collect::<Result<_>>()?;
            let rhs: Vec<_> = packets.iter().map(|p| p.payload.clone()).collect();
            solve_dense_gf(scheme.field().expect("field"), &a, &rhs)
        }
        _ => {
            let sp = scheme.shift().expect("shift");
            let a: Vec<_> = packets
                .iter()
                .map(|p| p.header.shift_coeffs(cfg.p, cfg.l))
                .collect::<Result<_>>()?;
            let rhs: Vec<_> = packets
                .iter()
                .map(|p| {
                    if cfg.kind == SchemeKind::CircRed {
                        crate::bits::project_h(sp, &p.payload)
                    } else {
                        Ok(p.payload.clone())
                    }
                })
                .collect::<Result<_>>()?;
            solve_dense_circ(sp, &a, &rhs)
        }
    }
}

/// Decoded packets equal the originals and the dense solution, for every scheme
/// and `sessions` random receivers each.
pub fn check_roundtrips(sessions: usize, seed: u64) -> CheckResult {
    let quarter: Ratio = "1/4".parse().expect("ratio");
    let mut cfgs = Vec::new();
    for (l, p) in [(1u32, 20usize), (2, 12), (4, 16), (10, 8)] {
        cfgs.push(SchemeConfig::conv(l, p, 20 * l as usize).expect("valid"));
    }
    for l in [2u32, 4, 10] {
        cfgs.push(SchemeConfig::circ(l, 20, 10 * l as usize, quarter).expect("valid"));
        cfgs.push(
            SchemeConfig::circ_red(l, 12, 10 * l as usize, "1/2".parse().expect("ratio"))
                .expect("valid"),
        );
    }
    let results: Vec<Result<(usize, usize)>> = cfgs
        .par_iter()
        .enumerate()
        .map(|(ci, cfg)| {
            let scheme = Scheme::new(cfg.clone())?;
            let mut bad = 0;
            for i in 0..sessions {
                let mut s = Stream::derived(seed, Purpose::Verify, ((ci as u64) << 32) | i as u64);
                let g = scheme.generation(scheme.random_originals(&mut s))?;
                let packets = random_session(&scheme, &g, &mut s)?;
                let oracle = dense_oracle(&scheme, &packets)?;
                let out = DecodeSession::new(&scheme, packets)?.decode()?;
                bad += (out.originals != g.originals() || oracle != g.originals()) as usize;
            }
            Ok((sessions, bad))
        })
        .collect();
    let run = || -> Result<(bool, String)> {
        let mut total = 0;
        let mut bad = 0;
        for r in results {
            let (n, b) = r?;
            total += n;
            bad += b;
        }
        Ok((
            bad == 0,
            format!(
                "{total} sessions over {} configurations, {bad} mismatches",
                cfgs.len()
            ),
        ))
    };
    CheckResult::from_result("decoder_roundtrip", "decoding procedure", run())
}

/// Printed cells: `(gap, n, value, digits)`, where `digits` are decimal places
/// for plain entries and significant figures for scientific ones.
pub const TABLE_I: [(usize, usize, f64, Precision); 25] = {
    use Precision::{Dp, Sf};
    [
        (1, 0, 0.5, Dp(1)),
        (1, 1, 0.25, Dp(2)),
        (1, 5, 1.5625e-2, Sf(5)),
        (1, 10, 4.8828e-4, Sf(5)),
        (1, 20, 4.7684e-7, Sf(5)),
        (5, 0, 0.298, Dp(3)),
        (5, 1, 0.2887, Dp(4)),
        (5, 5, 2.9395e-2, Sf(5)),
        (5, 10, 9.4518e-4, Sf(5)),
        (5, 20, 9.2387e-7, Sf(5)),
        (10, 0, 0.2891, Dp(4)),
        (10, 1, 0.2888, Dp(4)),
        (10, 5, 3.0256e-2, Sf(5)),
        (10, 10, 9.7466e-4, Sf(5)),
        (10, 20, 9.5274e-7, Sf(5)),
        (15, 0, 0.2888, Dp(4)),
        (15, 1, 0.2888, Dp(4)),
        (15, 5, 3.0283e-2, Sf(5)),
        (15, 10, 9.7558e-4, Sf(5)),
        (15, 20, 9.5364e-7, Sf(5)),
        (20, 0, 0.2888, Dp(4)),
        (20, 1, 0.2888, Dp(4)),
        (20, 5, 3.0284e-2, Sf(5)),
        (20, 10, 9.7561e-4, Sf(5)),
        (20, 20, 9.5367e-7, Sf(5)),
    ]
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Dp(i32),
    Sf(i32),
}

impl Precision {
    /// Whether `x` rounds to `printed` at this precision.
    pub fn matches(self, x: f64, printed: f64) -> bool {
        let unit = match self {
            Precision::Dp(d) => 10f64.powi(-d),
            Precision::Sf(s) => 10f64.powi(printed.abs().log10().floor() as i32 - s + 1),
        };
        ((x / unit).round() - (printed / unit).round()).abs() < 0.5
    }
}

pub fn check_table1() -> CheckResult {
    let misses: Vec<String> = TABLE_I
        .iter()
        .filter(|(gap, n, v, prec)| !prec.matches(appendix_a_table(*gap, *n), *v))
        .map(|(gap, n, _, _)| format!("({gap},{n})={:.6e}", appendix_a_table(*gap, *n)))
        .collect();
    CheckResult::new(
        "table1",
        "Table I",
        misses.is_empty(),
        format!(
            "{} of 25 cells match {}",
            25 - misses.len(),
            misses.join(" ")
        ),
    )
}

/// Simulated mean delay of the conventional scheme against the analytic value.
/// The analytic value multiplies per-receiver CDFs, which is exact only when
/// receivers' delays are independent; [`CodingMode::PerReceiver`] provides
/// that, broadcast coding does not.
pub fn check_delay_vs_sim(trials: usize, seed: u64, coding: CodingMode) -> CheckResult {
    let grid: Vec<(u32, usize, usize)> = [1u32, 4]
        .iter()
        .flat_map(|&l| {
            [5usize, 10]
                .into_iter()
                .flat_map(move |p| [1usize, 10].into_iter().map(move |r| (l, p, r)))
        })
        .collect();
    let rows: Vec<Result<(bool, String)>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(l, p, r))| {
            let ps = vec![0.85; r];
            let exact = expected_delay_conv(2f64.powi(l as i32), &ps, p)?.mean;
            let spec = ExperimentSpec {
                scheme: SchemeConfig::conv(l, p, l as usize)?,
                channel: ChannelRule::Fixed(ps),
                redraw: ChannelRedraw::PerExperiment,
                coding,
                trials,
                base_seed: seed.wrapping_add(i as u64),
                decode: false,
            };
            let st = run_experiment(&spec)?;
            let ok = (st.mean_d - exact).abs() <= st.ci95_d;
            Ok((
                ok,
                format!(
                    "q={} P={p} R={r}: sim {:.4}±{:.4} exact {:.4}",
                    1u32 << l,
                    st.mean_d,
                    st.ci95_d,
                    exact
                ),
            ))
        })
        .collect();
    let name = match coding {
        CodingMode::Broadcast => "delay_vs_sim",
        CodingMode::PerReceiver => "delay_vs_sim_independent",
    };
    collect_rows(name, "delay distribution", rows)
}

fn collect_rows(name: &str, anchor: &str, rows: Vec<Result<(bool, String)>>) -> CheckResult {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in rows {
        match r {
            Ok((good, d)) => {
                ok &= good;
                parts.push(if good { d } else { format!("MISS {d}") });
            }
            Err(e) => {
                ok = false;
                parts.push(format!("error: {e}"));
            }
        }
    }
    CheckResult::new(name, anchor, ok, parts.join("; "))
}

/// Full-rank frequency of random block columns against the lower bound.
pub fn check_full_rank(samples: usize, seed: u64) -> CheckResult {
    let grid = [
        (6usize, 4usize, 4u32, "1/4"),
        (6, 6, 4, "1/4"),
        (8, 3, 2, "1/2"),
        (5, 5, 4, "1/2"),
        (10, 8, 10, "1/4"),
    ];
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &(p, j, l, p0))| {
            let est =
                full_rank_monte_carlo(l, p0.parse()?, p, j, samples, seed.wrapping_add(i as u64))?;
            let ok = est.frequency >= est.bound - 3.0 * est.sigma;
            Ok((
                ok,
                format!(
                    "(P,J,L,p0)=({p},{j},{l},{p0}): {:.5} vs bound {:.5}",
                    est.frequency, est.bound
                ),
            ))
        })
        .collect();
    collect_rows("full_rank", "Lemma 1", rows)
}

/// Receiver delay CDF dominance, and the system-delay corollary.
pub fn check_dominance(trials: usize, seed: u64) -> CheckResult {
    let mut rows: Vec<Result<(bool, String)>> = [(2.0, "1/2", 8usize), (4.0, "1/4", 8)]
        .iter()
        .enumerate()
        .map(|(i, &(q, p0, p))| {
            let cfg = SchemeConfig::circ(4, p, 4, p0.parse()?)?;
            let r = dominance_compare(&cfg, q, 0.8, trials, seed.wrapping_add(i as u64))?;
            Ok((
                r.violations.is_empty(),
                format!(
                    "q={q} p0={p0} P={p}: {} violations, slack {:.4}",
                    r.violations.len(),
                    r.slack
                ),
            ))
        })
        .collect();
    for (i, (p0, p)) in [("1/4", 10usize), ("1/4", 20), ("1/2", 10), ("1/2", 20)]
        .into_iter()
        .enumerate()
    {
        rows.push((|| {
            let ps = vec![0.85; 10];
            let gf2 = expected_delay_conv(2.0, &ps, p)?.mean;
            let spec = ExperimentSpec {
                scheme: SchemeConfig::circ(4, p, 4, p0.parse()?)?,
                channel: ChannelRule::Fixed(ps),
                redraw: ChannelRedraw::PerExperiment,
                coding: CodingMode::Broadcast,
                trials,
                base_seed: seed.wrapping_add(100 + i as u64),
                decode: false,
            };
            let st = run_experiment(&spec)?;
            Ok((
                st.mean_d <= gf2 + st.ci95_d,
                format!(
                    "p0={p0} P={p}: circ {:.4}±{:.4} vs GF(2) {:.4}",
                    st.mean_d, st.ci95_d, gf2
                ),
            ))
        })());
    }
    collect_rows("delay_dominance", "Theorem 2, Corollary 1", rows)
}

fn reference_setup(scheme: SchemeConfig, trials: usize, seed: u64, decode: bool) -> ExperimentSpec {
    ExperimentSpec {
        scheme,
        channel: ChannelRule::Uniform {
            receivers: 60,
            lo: 0.8,
            hi: 0.9,
        },
        redraw: ChannelRedraw::PerTrial,
        coding: CodingMode::Broadcast,
        trials,
        base_seed: seed,
        decode,
    }
}

/// Outcome of the evaluation-section comparison at the default setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Headline {
    pub circ: ExperimentStats,
    pub perfect: ExperimentStats,
    pub gf2: ExperimentStats,
    pub delay_ratio: f64,
    pub gf2_bound: f64,
    pub ops_ratio: f64,
}

pub fn headline(trials: usize, seed: u64) -> Result<Headline> {
    let quarter: Ratio = "1/4".parse()?;
    let circ = run_experiment(&reference_setup(
        SchemeConfig::circ(4, 15, 1024, quarter)?,
        trials,
        seed,
        true,
    ))?;
    let perfect = run_experiment(&reference_setup(
        SchemeConfig::perfect(15, 1024)?,
        trials,
        seed,
        false,
    ))?;
    let gf2 = run_experiment(&reference_setup(
        SchemeConfig::conv(1, 15, 1024)?,
        trials,
        seed,
        true,
    ))?;
    let gf2_bound = gf2_lower_bound(1024, 15, gf2.mean_p_var, gf2.mean_abs_a.unwrap_or(0.0));
    Ok(Headline {
        delay_ratio: circ.mean_d / perfect.mean_d,
        ops_ratio: circ.mean_ops.unwrap_or(f64::NAN) / gf2_bound,
        gf2_bound,
        circ,
        perfect,
        gf2,
    })
}

pub fn check_headline(trials: usize, seed: u64) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let h = headline(trials, seed)?;
        let ok = h.delay_ratio <= 1.05 && (2.0..=4.0).contains(&h.ops_ratio);
        Ok((
            ok,
            format!(
                "delay {:.4} vs perfect {:.4} (ratio {:.4}); ops {:.1} vs GF(2) bound {:.1} (ratio {:.3})",
                h.circ.mean_d,
                h.perfect.mean_d,
                h.delay_ratio,
                h.circ.mean_ops.unwrap_or(f64::NAN),
                h.gf2_bound,
                h.ops_ratio
            ),
        ))
    };
    CheckResult::from_result("headline", "numerical results", run())
}

/// Measured decode cost against the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpReconciliation {
    pub circ_measured: f64,
    pub circ_formula: f64,
    /// Mean of the per-receiver cost model, an upper bound on the measured cost.
    pub circ_bound: f64,
    pub conv_measured: f64,
    pub conv_formula: f64,
}

pub fn op_reconciliation(trials: usize, seed: u64) -> Result<OpReconciliation> {
    let circ_cfg = SchemeConfig::circ(4, 15, 1024, "1/4".parse()?)?;
    let spec = ExperimentSpec {
        scheme: circ_cfg.clone(),
        channel: ChannelRule::Fixed(vec![0.85]),
        redraw: ChannelRedraw::PerExperiment,
        coding: CodingMode::Broadcast,
        trials,
        base_seed: seed,
        decode: true,
    };
    let mut bound = 0.0;
    let mut count = 0usize;
    let mut failure = None;
    let c = run_experiment_with(&spec, |t| {
        for r in &t.receivers {
            match circ_complexity_bound(&circ_cfg, r.u, r.residual.unwrap_or(0)) {
                Ok(v) => bound += v,
                Err(e) => failure = Some(e),
            }
            count += 1;
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let circ_formula = circ_complexity_expect_with(
        &circ_cfg,
        c.mean_p_var,
        c.mean_abs_a.unwrap_or(0.0),
        c.mean_ur,
    )?;
    let conv_cfg = SchemeConfig {
        force_nonzero: true,
        ..SchemeConfig::conv(10, 10, 640)?
    };
    let spec = ExperimentSpec {
        scheme: conv_cfg,
        channel: ChannelRule::Fixed(vec![0.85]),
        trials: trials / 4 + 1,
        ..spec
    };
    let v = run_experiment(&spec)?;
    Ok(OpReconciliation {
        circ_measured: c.mean_ops.unwrap_or(f64::NAN),
        circ_formula,
        circ_bound: bound / count as f64,
        conv_measured: v.mean_ops.unwrap_or(f64::NAN),
        conv_formula: conv_large_l_approx(640, 10, 10, 0.85),
    })
}

/// Circular-shift cost against the closed form at the empirical means, and
/// the conventional forced-nonzero cost against its large-`L` approximation.
pub fn check_opcounts(trials: usize, seed: u64) -> Vec<CheckResult> {
    let (circ_name, circ_anchor) = ("opcount_circ", "decoding complexity, circular-shift");
    let (conv_name, conv_anchor) = ("opcount_conv", "decoding complexity, conventional");
    match op_reconciliation(trials, seed) {
        Ok(r) => check_opcounts_from(&r),
        Err(e) => vec![
            CheckResult::new(circ_name, circ_anchor, false, format!("error: {e}")),
            CheckResult::new(conv_name, conv_anchor, false, format!("error: {e}")),
        ],
    }
}

/// The two op-count checks for an already measured reconciliation.
pub fn check_opcounts_from(r: &OpReconciliation) -> Vec<CheckResult> {
    let (circ_name, circ_anchor) = ("opcount_circ", "decoding complexity, circular-shift");
    let (conv_name, conv_anchor) = ("opcount_conv", "decoding complexity, conventional");
    let circ = r.circ_measured / r.circ_formula;
    let conv = r.conv_measured / r.conv_formula;
    vec![
        CheckResult::new(
            circ_name,
            circ_anchor,
            (circ - 1.0).abs() <= 0.05,
            format!(
                "measured {:.1} vs formula at means {:.1} (ratio {:.4}, tol 5%); per-receiver bound {:.1} (measured/bound {:.4})",
                r.circ_measured,
                r.circ_formula,
                circ,
                r.circ_bound,
                r.circ_measured / r.circ_bound
            ),
        ),
        CheckResult::new(
            conv_name,
            conv_anchor,
            (conv - 1.0).abs() <= 0.10,
            format!("measured {:.1} vs approximation {:.1} (ratio {:.4}, tol 10%)", r.conv_measured, r.conv_formula, conv),
        ),
    ]
}

/// Per-packet gap between the GF(2) and perfect delays shrinks with `P`.
pub fn check_gap_trend() -> CheckResult {
    let rows = [1usize, 10]
        .iter()
        .map(|&r| {
            let ps = vec![0.85; r];
            let gaps = [10usize, 20, 40, 80]
                .iter()
                .map(|&p| {
                    Ok((expected_delay_conv(2.0, &ps, p)?.mean
                        - expected_delay_perfect(&ps, p)?.mean)
                        / p as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            let ok = gaps.windows(2).all(|w| w[1] < w[0]);
            Ok((
                ok,
                format!(
                    "R={r}: {}",
                    gaps.iter()
                        .map(|g| format!("{g:.5}"))
                        .collect::<Vec<_>>()
                        .join(" > ")
                ),
            ))
        })
        .collect();
    collect_rows("gf2_gap_trend", "Theorem 1", rows)
}

/// Same experiment on pools of different sizes gives identical statistics.
pub fn check_determinism(trials: usize, seed: u64) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let spec = reference_setup(
            SchemeConfig::circ(4, 10, 64, "1/4".parse()?)?,
            trials,
            seed,
            true,
        );
        let mut outs = Vec::new();
        for threads in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let st = pool.install(|| run_experiment(&spec))?;
            outs.push(serde_json::to_string(&st).expect("serializable"));
        }
        let ok = outs.windows(2).all(|w| w[0] == w[1]);
        Ok((ok, format!("{trials} trials on 1, 3 and 8 workers")))
    };
    CheckResult::from_result("determinism", "reproducibility", run())
}

struct Sizes {
    block_inverse: usize,
    sessions: usize,
    delay: usize,
    full_rank: usize,
    dominance: usize,
    headline: usize,
    ops: usize,
    det: usize,
}

fn sizes(b: Budget) -> Sizes {
    match b {
        Budget::Quick => Sizes {
            block_inverse: 200,
            sessions: 100,
            delay: 10_000,
            full_rank: 10_000,
            dominance: 10_000,
            headline: 500,
            ops: 2_000,
            det: 50,
        },
        Budget::Full => Sizes {
            block_inverse: 1_000,
            sessions: 1_000,
            delay: 100_000,
            full_rank: 100_000,
            dominance: 100_000,
            headline: 10_000,
            ops: 10_000,
            det: 500,
        },
    }
}

/// Runs every check.
pub fn verify_all(budget: Budget, seed: u64) -> Report {
    let n = sizes(budget);
    let jobs: Vec<Box<dyn Fn() -> Vec<CheckResult> + Send + Sync>> = vec![
        Box::new(|| vec![check_shift_identities(&[2, 4, 10, 12])]),
        Box::new(|| vec![check_golden()]),
        Box::new(|| vec![check_golden_formula(sigma)]),
        Box::new(move || vec![check_block_inverse(n.block_inverse, seed)]),
        Box::new(move || vec![check_roundtrips(n.sessions, seed)]),
        Box::new(|| vec![check_table1()]),
        // the analytic value assumes independent receivers, which shared
        // broadcast coefficients break
        Box::new(move || {
            vec![check_delay_vs_sim(n.delay, seed, CodingMode::Broadcast).known_deviation()]
        }),
        Box::new(move || vec![check_delay_vs_sim(n.delay, seed, CodingMode::PerReceiver)]),
        Box::new(move || vec![check_full_rank(n.full_rank, seed)]),
        Box::new(move || vec![check_dominance(n.dominance, seed)]),
        Box::new(move || vec![check_headline(n.headline, seed)]),
        // the closed form is convex in the residual size, so evaluating it at
        // the mean understates the cost
        Box::new(move || {
            let mut v = check_opcounts(n.ops, seed);
            v[0] = v[0].clone().known_deviation();
            v
        }),
        Box::new(|| vec![check_gap_trend()]),
        Box::new(move || vec![check_determinism(n.det, seed)]),
    ];
    let checks = jobs.par_iter().map(|f| f()).collect::<Vec<_>>().concat();
    Report {
        budget,
        seed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Keeps the heavier of `a` and `a + 𝟏`.
    fn flipped_sigma(p: &ShiftParams, a: RingElem) -> RingElem {
        let s = sigma(p, a);
        RingElem(s.0 ^ p.full_mask())
    }

    #[test]
    fn example_checks() {
        assert!(check_golden().passed());
        assert!(check_golden_formula(sigma).passed());
        let broken = check_golden_formula(flipped_sigma);
        assert!(!broken.passed(), "{}", broken.line());
    }

    #[test]
    fn table_precision() {
        assert!(Precision::Dp(4).matches(0.28872, 0.2887));
        assert!(!Precision::Dp(4).matches(0.28878, 0.2887));
        assert!(Precision::Sf(5).matches(9.53674e-7, 9.5367e-7));
        assert!(!Precision::Sf(5).matches(9.5368e-7, 9.5367e-7));
        assert!(check_table1().passed(), "{}", check_table1().line());
    }

    #[test]
    fn small_checks() {
        for c in [
            check_shift_identities(&[2, 4]),
            check_block_inverse(30, 1),
            check_roundtrips(5, 1),
            check_gap_trend(),
            check_determinism(8, 2),
        ] {
            assert!(c.passed(), "{}", c.line());
        }
    }

    #[test]
    fn report_format() {
        let r = Report {
            budget: Budget::Quick,
            seed: 1,
            checks: vec![
                check_table1(),
                CheckResult::new("x", "y", false, "z".into()),
            ],
        };
        assert!(!r.passed());
        let dev = Report {
            checks: vec![CheckResult::new("x", "y", false, "z".into()).known_deviation()],
            ..r.clone()
        };
        assert!(dev.passed());
        assert!(dev.to_text().starts_with("DEVIATION x [y] z"));
        let text = r.to_text();
        assert!(text.starts_with("PASS table1 [Table I]"));
        assert!(text.contains("FAIL x [y] z"));
        assert_eq!(r.to_jsonl().lines().count(), 2);
        assert!("full".parse::<Budget>().is_ok() && "fast".parse::<Budget>().is_err());
    }
}
