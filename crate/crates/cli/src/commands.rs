use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use csrlnc::analysis::{
    circ_complexity_expect, circ_complexity_expect_with, conv_complexity_expect,
    expected_delay_conv, expected_delay_perfect, gf2_lower_bound, DelayEstimate,
};
use csrlnc::rng::{derive_seed, Purpose};
use csrlnc::schemes::{Ratio, SchemeConfig, SchemeKind};
use csrlnc::sim::{draw_channel, run_experiment, ChannelRule, ExperimentStats};
use csrlnc::verify::{verify_all, Budget};
use rayon::prelude::*;

use crate::args::*;

/// Deterministic number formatting: shortest round-trip decimal.
fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

pub const SIMULATE_HEADER: [&str; 15] = [
    "scheme",
    "L",
    "p0",
    "P",
    "M",
    "R",
    "trials",
    "seed",
    "mean_D",
    "mean_D_per_P",
    "ci95_D",
    "mean_ops",
    "mean_ops_per_bit",
    "mean_Ur",
    "mean_absA",
];

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let scheme = resolve_scheme(&a.scheme, a.run.m.unwrap_or(DEFAULT_M), true)?;
    let decode = decode_default(scheme.cfg.kind, a.decode);
    let spec = experiment(&scheme, &a.run, decode, 1000)?;
    let s = run_experiment(&spec)?;
    let row = vec![
        scheme.name.as_str().to_owned(),
        scheme.l_column(),
        scheme.p0_column(),
        spec.scheme.p.to_string(),
        spec.scheme.m.to_string(),
        spec.channel.receivers().to_string(),
        s.trials.to_string(),
        spec.base_seed.to_string(),
        num(s.mean_d),
        num(s.mean_d_per_p),
        num(s.ci95_d),
        opt(s.mean_ops),
        opt(s.mean_ops_per_bit),
        num(s.mean_ur),
        opt(s.mean_abs_a),
    ];
    emit(&csv_text(&SIMULATE_HEADER, &[row])?, a.out.as_deref())
}

pub const ANALYZE_HEADER: [&str; 9] = [
    "scheme",
    "L",
    "p0",
    "P",
    "M",
    "R",
    "quantity",
    "value",
    "remainder_bound",
];

/// Means of `|A|` and `U_r` read from a simulation CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Means {
    abs_a: f64,
    ur: Option<f64>,
}

fn read_means(path: &Path, scheme: &Scheme) -> Result<Means> {
    let mut rd =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{}: no {name} column", path.display()))
    };
    let (c_scheme, c_l, c_p0, c_p, c_a) = (
        col("scheme")?,
        col("L")?,
        col("p0")?,
        col("P")?,
        col("mean_absA")?,
    );
    let c_ur = col("mean_Ur").ok();
    let key = [
        scheme.name.as_str().to_owned(),
        scheme.l_column(),
        scheme.p0_column(),
        scheme.cfg.p.to_string(),
    ];
    for rec in rd.records() {
        let rec = rec?;
        if [c_scheme, c_l, c_p0, c_p]
            .iter()
            .zip(&key)
            .all(|(&c, k)| &rec[c] == k)
        {
            let abs_a = rec[c_a].parse().with_context(|| {
                format!(
                    "{}: mean_absA {:?} is not a number",
                    path.display(),
                    &rec[c_a]
                )
            })?;
            let ur = c_ur.and_then(|c| rec[c].parse().ok());
            return Ok(Means { abs_a, ur });
        }
    }
    bail!(
        "{}: no row with scheme={} L={} p0={} P={}",
        path.display(),
        key[0],
        key[1],
        key[2],
        key[3]
    )
}

/// Channels the closed forms are averaged over: the fixed list, or the
/// same draws a simulation with these flags would use.
fn analysis_channels(r: &RunArgs) -> Result<Vec<Vec<f64>>> {
    let rule = resolve_channel(r)?;
    if let ChannelRule::Fixed(p) = rule {
        return Ok(vec![p]);
    }
    let seed = r.seed.unwrap_or(DEFAULT_SEED);
    let indices: Vec<u64> = if r.fixed_channel.unwrap_or(false) {
        vec![u64::MAX]
    } else {
        (0..r.trials.unwrap_or(100) as u64).collect()
    };
    indices
        .into_iter()
        .map(|i| Ok(draw_channel(&rule, derive_seed(seed, Purpose::Channel, i))?.p))
        .collect()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

pub fn analyze(a: AnalyzeArgs) -> Result<()> {
    let scheme = resolve_scheme(&a.scheme, a.run.m.unwrap_or(DEFAULT_M), false)?;
    let cfg = &scheme.cfg;
    let what = a.what.unwrap_or(What::Both);
    let delay = matches!(what, What::Delay | What::Both);
    let complexity = matches!(what, What::Complexity | What::Both);
    if delay && cfg.kind.is_circ() {
        bail!(
            "no closed-form delay for the circular-shift schemes; use `csrlnc simulate`, or the GF(1/p0) \
             delay of `csrlnc analyze --scheme gf`, which bounds it"
        );
    }
    if complexity && cfg.kind == SchemeKind::Perfect {
        bail!("the perfect scheme has no decoding cost model; use --what delay");
    }
    let channels = analysis_channels(&a.run)?;
    let receivers = channels[0].len();
    let mut rows = Vec::new();
    let mut push = |quantity: &str, value: f64, remainder: Option<f64>| {
        rows.push(vec![
            scheme.name.as_str().to_owned(),
            scheme.l_column(),
            scheme.p0_column(),
            cfg.p.to_string(),
            cfg.m.to_string(),
            receivers.to_string(),
            quantity.to_owned(),
            num(value),
            opt(remainder),
        ]);
    };
    if delay {
        let est: Vec<DelayEstimate> = channels
            .par_iter()
            .map(|p| match cfg.kind {
                SchemeKind::Perfect => expected_delay_perfect(p, cfg.p),
                _ => expected_delay_conv(2f64.powi(cfg.l as i32), p, cfg.p),
            })
            .collect::<csrlnc::Result<_>>()?;
        let e = mean(est.iter().map(|e| e.mean));
        let rem = mean(est.iter().map(|e| e.remainder));
        push("E_D", e, Some(rem));
        push("E_D_per_P", e / cfg.p as f64, Some(rem / cfg.p as f64));
    }
    if complexity {
        let means = a
            .means_from
            .as_deref()
            .map(|p| read_means(p, &scheme))
            .transpose()?;
        let abs_a = means.map_or(1.0, |m| m.abs_a);
        let ps: Vec<f64> = channels.iter().flatten().copied().collect();
        let bits = (cfg.p * cfg.m) as f64;
        if cfg.kind.is_circ() {
            let total = ps
                .iter()
                .map(|&p_r| {
                    let ur = means.and_then(|m| m.ur).unwrap_or(cfg.p as f64 * p_r);
                    circ_complexity_expect(cfg, p_r, abs_a, ur)
                })
                .collect::<csrlnc::Result<Vec<f64>>>()?;
            let total = mean(total);
            push("ops_total", total, None);
            push("ops_per_bit", total / bits, None);
        } else {
            let c = ps
                .iter()
                .map(|&p_r| conv_complexity_expect(cfg, p_r, abs_a))
                .collect::<csrlnc::Result<Vec<_>>>()?;
            let total = mean(c.iter().map(|c| c.total));
            push("ops_phase1", mean(c.iter().map(|c| c.phase1)), None);
            push("ops_step1", mean(c.iter().map(|c| c.step1)), None);
            push("ops_step2", mean(c.iter().map(|c| c.step2)), None);
            push("ops_total", total, None);
            push("ops_per_bit", total / bits, None);
            push("ops_large_L", mean(c.iter().map(|c| c.large_l)), None);
            if cfg.l == 1 {
                let lb = mean(c.iter().filter_map(|c| c.gf2_lower_bound));
                push("ops_gf2_lower_bound", lb, None);
            }
        }
    }
    emit(&csv_text(&ANALYZE_HEADER, &rows)?, a.out.as_deref())
}

pub const SWEEP_HEADER: [&str; 19] = [
    "figure",
    "scheme",
    "L",
    "p0",
    "P",
    "M",
    "R",
    "trials",
    "seed",
    "mean_D",
    "mean_D_per_P",
    "ci95_D",
    "delay_norm",
    "ops_measured",
    "ops_measured_per_bit",
    "ops_formula",
    "ops_formula_per_bit",
    "ops_norm",
    "lower_bound",
];

/// Schemes plotted in each figure; the perfect and GF(2) references come first.
fn figure_schemes(figure: u8) -> Result<Vec<(SchemeName, u32, Option<Ratio>)>> {
    let r = |num, den| Some(Ratio { num, den });
    let mut v = vec![(SchemeName::Perfect, 1, None), (SchemeName::Gf2, 1, None)];
    match figure {
        1 | 2 => {
            v.push((SchemeName::Gf, 4, None));
            if figure == 2 {
                v.push((SchemeName::Gf, 10, None));
            } else {
                v.push((SchemeName::Gf, 8, None));
            }
            for l in [4, 10] {
                for p0 in [r(1, 4), r(1, 2)] {
                    v.push((SchemeName::Circ, l, p0));
                }
            }
        }
        3 => {
            for name in [SchemeName::Circ, SchemeName::CircRed] {
                for (n, d) in [(1, 6), (1, 4), (1, 3), (1, 2), (2, 3), (5, 6)] {
                    v.push((name, 4, r(n, d)));
                }
            }
        }
        f => bail!("--figure must be 1, 2 or 3, got {f}"),
    }
    Ok(v)
}

/// Closed-form decode cost at the simulated means.
fn ops_formula(cfg: &SchemeConfig, name: SchemeName, s: &ExperimentStats) -> Result<Option<f64>> {
    let Some(abs_a) = s.mean_abs_a else {
        return Ok(None);
    };
    Ok(match name {
        SchemeName::Perfect => None,
        SchemeName::Gf2 => Some(gf2_lower_bound(cfg.m, cfg.p, s.mean_p_var, abs_a)),
        SchemeName::Gf => Some(conv_complexity_expect(cfg, s.mean_p, abs_a)?.total),
        SchemeName::Circ | SchemeName::CircRed => Some(circ_complexity_expect_with(
            cfg,
            s.mean_p_var,
            abs_a,
            s.mean_ur,
        )?),
    })
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let figure = a.figure.ok_or_else(|| anyhow!("--figure is required"))?;
    let schemes = figure_schemes(figure)?;
    let sizes = parse_packets_range(a.packets_range.as_deref().unwrap_or("5:30:5"))?;
    let m = a.run.m.unwrap_or(DEFAULT_M);
    let mut rows = Vec::new();
    for &p in &sizes {
        let mut perfect_d = None;
        let mut gf2_ops = None;
        for &(name, l, p0) in &schemes {
            let args = SchemeArgs {
                scheme: Some(name),
                l: (name != SchemeName::Perfect).then_some(l),
                p0,
                packets: Some(p),
                force_nonzero: None,
            };
            // packet length rounded down to whole symbols
            let m_l = if l > 1 {
                m / l as usize * l as usize
            } else {
                m
            };
            let scheme = resolve_scheme(&args, m_l, true)?;
            let decode = figure != 1 && name != SchemeName::Perfect;
            let spec = experiment(&scheme, &a.run, decode, 1000)?;
            let s = run_experiment(&spec)?;
            let formula = ops_formula(&scheme.cfg, name, &s)?;
            match name {
                SchemeName::Perfect => perfect_d = Some(s.mean_d),
                SchemeName::Gf2 => gf2_ops = formula,
                _ => {}
            }
            let bits = (p * scheme.cfg.m) as f64;
            let delay_norm = perfect_d.filter(|&d| d > 0.0).map(|d| s.mean_d / d);
            let ops_norm = formula.zip(gf2_ops).map(|(f, g)| f / g);
            let lower_bound = formula
                .map(|_| (name == SchemeName::Gf2).to_string())
                .unwrap_or_default();
            rows.push(vec![
                figure.to_string(),
                name.as_str().to_owned(),
                scheme.l_column(),
                scheme.p0_column(),
                p.to_string(),
                scheme.cfg.m.to_string(),
                spec.channel.receivers().to_string(),
                s.trials.to_string(),
                spec.base_seed.to_string(),
                num(s.mean_d),
                num(s.mean_d_per_p),
                num(s.ci95_d),
                opt(delay_norm),
                opt(s.mean_ops),
                opt(s.mean_ops_per_bit),
                opt(formula),
                opt(formula.map(|f| f / bits)),
                opt(ops_norm),
                lower_bound,
            ]);
        }
    }
    emit(&csv_text(&SWEEP_HEADER, &rows)?, a.out.as_deref())
}

pub fn verify(a: VerifyArgs) -> Result<()> {
    let budget = match a.budget.unwrap_or(BudgetArg::Quick) {
        BudgetArg::Quick => Budget::Quick,
        BudgetArg::Full => Budget::Full,
    };
    let report = verify_all(budget, a.seed.unwrap_or(DEFAULT_SEED));
    let text = match a.format.unwrap_or(Format::Text) {
        Format::Text => report.to_text(),
        Format::Jsonl => report.to_jsonl(),
    };
    emit(&text, a.out.as_deref())?;
    if !report.passed() {
        bail!("verification failed");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        assert_eq!(num(20064.0), "20064");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn figure_lists() {
        for f in 1..=3 {
            let v = figure_schemes(f).unwrap();
            assert_eq!(v[0].0, SchemeName::Perfect);
            assert_eq!(v[1].0, SchemeName::Gf2);
        }
        assert!(figure_schemes(4).is_err());
    }
}
