//! Monte Carlo broadcast over independent erasure channels.
//!
//! A trial sends the `P` originals uncoded, then coded packets until every
//! receiver holds `P` independent coding vectors. Each receiver's delay `D_r`
//! is the number of coded slots up to and including the one that completed
//! it; `D` is the largest. Erasures are drawn for every receiver in every
//! slot, finished or not, so a trial's channel realisation does not depend on
//! the scheme.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::DecodeSession;
use crate::error::{Error, Result};
use crate::linalg::{BetaMap, GfRankTracker};
use crate::rng::{derive_seed, Purpose, Stream};
use crate::schemes::{CodedPacket, Header, Scheme, SchemeConfig, SchemeKind};

/// Coded slots after which a trial is abandoned.
pub const MAX_SLOTS: usize = 10_000_000;

/// Trials are simulated in blocks of this size to bound memory.
const BLOCK: usize = 4096;

/// Per-receiver success probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub p: Vec<f64>,
}

impl ChannelConfig {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one receiver is required".into(),
            ));
        }
        if let Some(bad) = p.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "success probability {bad} outside (0, 1]"
            )));
        }
        Ok(Self { p })
    }

    pub fn receivers(&self) -> usize {
        self.p.len()
    }
}

/// How channels are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelRule {
    /// Explicit list, one entry per receiver.
    Fixed(Vec<f64>),
    /// `receivers` values drawn uniformly from `[lo, hi]`.
    Uniform { receivers: usize, lo: f64, hi: f64 },
}

impl ChannelRule {
    pub fn receivers(&self) -> usize {
        match self {
            ChannelRule::Fixed(p) => p.len(),
            ChannelRule::Uniform { receivers, .. } => *receivers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelRule::Fixed(p) => ChannelConfig::new(p.clone()).map(|_| ()),
            ChannelRule::Uniform { receivers, lo, hi } => {
                if *receivers == 0 {
                    return Err(Error::InvalidConfig(
                        "at least one receiver is required".into(),
                    ));
                }
                if !(*lo > 0.0 && lo <= hi && *hi <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "range {lo}:{hi} is not inside (0, 1]"
                    )));
                }
                Ok(())
            }
        }
    }
}

pub fn draw_channel(rule: &ChannelRule, seed: u64) -> Result<ChannelConfig> {
    rule.validate()?;
    match rule {
        ChannelRule::Fixed(p) => ChannelConfig::new(p.clone()),
        ChannelRule::Uniform { receivers, lo, hi } => {
            let mut rng = Stream::new(seed);
            ChannelConfig::new((0..*receivers).map(|_| rng.uniform(*lo, *hi)).collect())
        }
    }
}

/// Whether drawn channels are shared by all trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ChannelRedraw {
    #[default]
    PerTrial,
    PerExperiment,
}

/// Who draws the coefficients of a coded slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CodingMode {
    /// One coded packet per slot, heard by every receiver.
    #[default]
    Broadcast,
    /// Each receiver sees its own independently coded packet. Receivers'
    /// delays are then independent, as the product form of the analytic
    /// expectation assumes.
    PerReceiver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scheme: SchemeConfig,
    pub channel: ChannelRule,
    #[serde(default)]
    pub redraw: ChannelRedraw,
    #[serde(default)]
    pub coding: CodingMode,
    pub trials: usize,
    pub base_seed: u64,
    /// Generate payloads and decode them at every receiver.
    pub decode: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.channel.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.decode && self.scheme.kind == SchemeKind::Perfect {
            return Err(Error::InvalidConfig(
                "the perfect scheme cannot decode payloads".into(),
            ));
        }
        Ok(())
    }

    /// Channel used by trial `index`.
    pub fn channel_for(&self, index: u64) -> Result<ChannelConfig> {
        let i = match self.redraw {
            ChannelRedraw::PerTrial => index,
            ChannelRedraw::PerExperiment => u64::MAX,
        };
        draw_channel(
            &self.channel,
            derive_seed(self.base_seed, Purpose::Channel, i),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialSeeds {
    pub channel: u64,
    pub erasure: u64,
    pub coefficients: u64,
    pub payload: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReceiverResult {
    pub d: usize,
    /// Uncoded packets caught in phase one.
    pub u: usize,
    /// Packets received up to completion.
    pub n: usize,
    /// Final tracker rank in binary dimensions.
    pub binary_rank: usize,
    /// Residual system size, when decoded.
    pub residual: Option<usize>,
    pub ops: Option<u64>,
    pub inverse_ops: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub index: u64,
    pub d: usize,
    pub p: Vec<f64>,
    pub receivers: Vec<ReceiverResult>,
    pub seeds: TrialSeeds,
}

enum Tracker<'a> {
    Field(GfRankTracker<'a>),
    Beta(GfRankTracker<'a>, &'a BetaMap),
    Count(usize),
}

impl Tracker<'_> {
    fn rank(&self) -> usize {
        match self {
            Tracker::Field(t) | Tracker::Beta(t, _) => t.rank(),
            Tracker::Count(n) => *n,
        }
    }

    fn absorb(&mut self, header: &Header, p: usize) -> Result<bool> {
        match (self, header) {
            (Tracker::Count(n), _) => {
                *n += 1;
                Ok(true)
            }
            (t, Header::Systematic(j)) => {
                let mut v = vec![crate::gf2e::FieldElem::ZERO; p];
                v[*j] = crate::gf2e::FieldElem::ONE;
                match t {
                    Tracker::Field(t) | Tracker::Beta(t, _) => t.absorb(&v),
                    Tracker::Count(_) => unreachable!(),
                }
            }
            (Tracker::Field(t), Header::Field(cs)) => t.absorb(cs),
            (Tracker::Beta(t, map), Header::Shift(cs)) => t.absorb(&map.map_vec(cs)),
            _ => Err(Error::MalformedHeader(
                "header type does not match the scheme".into(),
            )),
        }
    }
}

struct Receiver<'a> {
    tracker: Tracker<'a>,
    kept: Vec<CodedPacket>,
    u: usize,
    n: usize,
    d: Option<usize>,
}

/// Runs trial `index` of `spec`.
pub fn run_trial(spec: &ExperimentSpec, index: u64) -> Result<TrialResult> {
    let scheme = Scheme::new(spec.scheme.clone())?;
    run_trial_with(spec, &scheme, beta_for(&scheme)?.as_ref(), index)
}

fn beta_for(scheme: &Scheme) -> Result<Option<BetaMap>> {
    match (scheme.shift(), scheme.field()) {
        (Some(sp), Some(ctx)) => Ok(Some(BetaMap::new(sp, ctx)?)),
        _ => Ok(None),
    }
}

fn run_trial_with(
    spec: &ExperimentSpec,
    scheme: &Scheme,
    beta: Option<&BetaMap>,
    index: u64,
) -> Result<TrialResult> {
    let cfg = scheme.cfg();
    let p = cfg.p;
    let base = spec.base_seed;
    let seeds = TrialSeeds {
        channel: derive_seed(base, Purpose::Channel, index),
        erasure: derive_seed(base, Purpose::Erasure, index),
        coefficients: derive_seed(base, Purpose::Coefficients, index),
        payload: derive_seed(base, Purpose::Payload, index),
    };
    let channel = spec.channel_for(index)?;
    let mut erasure = Stream::new(seeds.erasure);
    let mut coeffs = Stream::new(seeds.coefficients);
    let mut own: Vec<Stream> = match spec.coding {
        CodingMode::Broadcast => Vec::new(),
        CodingMode::PerReceiver => (0..channel.p.len() as u64)
            .map(|r| Stream::derived(seeds.coefficients, Purpose::Coefficients, r))
            .collect(),
    };

    let generation = if spec.decode {
        let mut rng = Stream::new(seeds.payload);
        Some(scheme.generation(scheme.random_originals(&mut rng))?)
    } else {
        None
    };
    let systematic = generation.as_ref().map(|g| scheme.encode_systematic(g));

    let mut rx: Vec<Receiver> = channel
        .p
        .iter()
        .map(|_| Receiver {
            tracker: match (cfg.kind, beta) {
                (SchemeKind::Perfect, _) => Tracker::Count(0),
                (SchemeKind::ConvGF, _) => {
                    Tracker::Field(GfRankTracker::new(scheme.field().expect("field"), p))
                }
                (_, Some(map)) => {
                    Tracker::Beta(GfRankTracker::new(scheme.field().expect("field"), p), map)
                }
                (_, None) => unreachable!("circular-shift schemes carry a beta map"),
            },
            kept: Vec::new(),
            u: 0,
            n: 0,
            d: None,
        })
        .collect();

    for j in 0..p {
        let header = Header::Systematic(j);
        for (r, &pr) in rx.iter_mut().zip(&channel.p) {
            if erasure.bernoulli(pr) {
                r.tracker.absorb(&header, p)?;
                r.u += 1;
                r.n += 1;
                if let Some(sys) = &systematic {
                    r.kept.push(sys[j].clone());
                }
            }
        }
    }
    for r in rx.iter_mut().filter(|r| r.u == p) {
        r.d = Some(0);
    }

    let mut slot = 0;
    while rx.iter().any(|r| r.d.is_none()) {
        slot += 1;
        if slot > MAX_SLOTS {
            return Err(Error::InvalidConfig(format!(
                "trial {index} did not finish within {MAX_SLOTS} slots"
            )));
        }
        let shared = match (cfg.kind, spec.coding) {
            (SchemeKind::Perfect, _) => Some(Header::Systematic(0)),
            (_, CodingMode::Broadcast) => Some(scheme.draw_header(&mut coeffs)?),
            (_, CodingMode::PerReceiver) => None,
        };
        let mut payload = None;
        for (i, (r, &pr)) in rx.iter_mut().zip(&channel.p).enumerate() {
            let got = erasure.bernoulli(pr);
            if !got || r.d.is_some() {
                continue;
            }
            let header = match &shared {
                Some(h) => h.clone(),
                None => {
                    payload = None;
                    scheme.draw_header(&mut own[i])?
                }
            };
            r.n += 1;
            if r.tracker.absorb(&header, p)? {
                if let Some(g) = &generation {
                    if payload.is_none() {
                        payload = Some(scheme.payload_for(g, &header)?);
                    }
                    r.kept.push(CodedPacket {
                        header: header.clone(),
                        payload: payload.clone().expect("set"),
                    });
                }
                if r.tracker.rank() == p {
                    r.d = Some(slot);
                }
            }
        }
    }

    let width = if cfg.kind.is_circ() {
        cfg.l as usize
    } else {
        1
    };
    let mut receivers = Vec::with_capacity(rx.len());
    for r in rx {
        let binary_rank = r.tracker.rank() * width;
        let (residual, ops, inverse_ops) = match &generation {
            Some(g) => {
                let out = DecodeSession::new(scheme, r.kept)?.decode()?;
                if out.originals != g.originals() {
                    return Err(Error::AssertionFailure(format!(
                        "trial {index}: a receiver decoded incorrectly"
                    )));
                }
                (
                    Some(out.residual),
                    Some(out.ops.binary_ops),
                    Some(out.inverse_ops),
                )
            }
            None => (None, None, None),
        };
        receivers.push(ReceiverResult {
            d: r.d.expect("finished"),
            u: r.u,
            n: r.n,
            binary_rank,
            residual,
            ops,
            inverse_ops,
        });
    }
    Ok(TrialResult {
        index,
        d: receivers.iter().map(|r| r.d).max().unwrap_or(0),
        p: channel.p,
        receivers,
        seeds,
    })
}

/// Runs trials `range` in parallel, returned in index order.
pub fn run_trials(spec: &ExperimentSpec, range: std::ops::Range<u64>) -> Result<Vec<TrialResult>> {
    spec.validate()?;
    let scheme = Scheme::new(spec.scheme.clone())?;
    let beta = beta_for(&scheme)?;
    range
        .into_par_iter()
        .map(|i| run_trial_with(spec, &scheme, beta.as_ref(), i))
        .collect()
}

/// Aggregate statistics of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub trials: usize,
    pub receivers: usize,
    pub mean_d: f64,
    pub mean_d_per_p: f64,
    /// Half-width of the normal-approximation 95% interval for `mean_d`.
    pub ci95_d: f64,
    /// Mean decode cost per receiver.
    pub mean_ops: Option<f64>,
    /// `mean_ops / (P M)`.
    pub mean_ops_per_bit: Option<f64>,
    pub mean_inverse_ops: Option<f64>,
    pub mean_ur: f64,
    pub mean_abs_a: Option<f64>,
    /// Mean of `p_r (1 - p_r)` over receivers and trials.
    pub mean_p_var: f64,
    pub mean_p: f64,
}

#[derive(Default)]
struct Acc {
    n: usize,
    rx: usize,
    d: f64,
    d2: f64,
    ops: f64,
    inv: f64,
    decoded: usize,
    ur: f64,
    abs_a: f64,
    p_var: f64,
    p: f64,
}

impl Acc {
    fn push(&mut self, t: &TrialResult) {
        self.n += 1;
        self.d += t.d as f64;
        self.d2 += (t.d as f64).powi(2);
        for (r, &p) in t.receivers.iter().zip(&t.p) {
            self.rx += 1;
            self.ur += r.u as f64;
            self.p += p;
            self.p_var += p * (1.0 - p);
            if let (Some(ops), Some(res), Some(inv)) = (r.ops, r.residual, r.inverse_ops) {
                self.decoded += 1;
                self.ops += ops as f64;
                self.abs_a += res as f64;
                self.inv += inv as f64;
            }
        }
    }

    fn finish(&self, cfg: &SchemeConfig, receivers: usize) -> ExperimentStats {
        let n = self.n as f64;
        let mean_d = self.d / n;
        let var = if self.n > 1 {
            ((self.d2 - n * mean_d * mean_d) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let rx = self.rx as f64;
        let dec = (self.decoded > 0).then_some(self.decoded as f64);
        let mean_ops = dec.map(|k| self.ops / k);
        ExperimentStats {
            trials: self.n,
            receivers,
            mean_d,
            mean_d_per_p: mean_d / cfg.p as f64,
            ci95_d: 1.96 * (var / n).sqrt(),
            mean_ops,
            mean_ops_per_bit: mean_ops.map(|o| o / (cfg.p * cfg.m) as f64),
            mean_inverse_ops: dec.map(|k| self.inv / k),
            mean_ur: self.ur / rx,
            mean_abs_a: dec.map(|k| self.abs_a / k),
            mean_p_var: self.p_var / rx,
            mean_p: self.p / rx,
        }
    }
}

/// Runs every trial and reduces in index order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentStats> {
    run_experiment_with(spec, |_| ())
}

/// As [`run_experiment`], also handing each trial to `visit` in index order.
pub fn run_experiment_with(
    spec: &ExperimentSpec,
    mut visit: impl FnMut(&TrialResult),
) -> Result<ExperimentStats> {
    spec.validate()?;
    let mut acc = Acc::default();
    let total = spec.trials as u64;
    let mut start = 0;
    while start < total {
        let end = (start + BLOCK as u64).min(total);
        for t in run_trials(spec, start..end)? {
            acc.push(&t);
            visit(&t);
        }
        start = end;
    }
    Ok(acc.finish(&spec.scheme, spec.channel.receivers()))
}
