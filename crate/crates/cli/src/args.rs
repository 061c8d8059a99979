use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use csrlnc::schemes::{Ratio, SchemeConfig, SchemeKind};
use csrlnc::sim::{ChannelRedraw, ChannelRule, CodingMode, ExperimentSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "csrlnc",
    version,
    about = "Circular-shift and conventional RLNC for erasure broadcast"
)]
pub struct Cli {
    /// TOML file whose keys are flag names; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo delay and decoding cost of one scheme.
    Simulate(SimulateArgs),
    /// Closed-form delay and complexity.
    Analyze(AnalyzeArgs),
    /// Figure data over a range of generation sizes.
    Sweep(SweepArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Gf2,
    Gf,
    Perfect,
    Circ,
    CircRed,
}

impl SchemeName {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::Gf2 => "gf2",
            SchemeName::Gf => "gf",
            SchemeName::Perfect => "perfect",
            SchemeName::Circ => "circ",
            SchemeName::CircRed => "circ-red",
        }
    }

    pub fn is_circ(self) -> bool {
        matches!(self, SchemeName::Circ | SchemeName::CircRed)
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OnOff {
    On,
    Off,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Coding {
    /// One coded packet per slot for all receivers.
    Broadcast,
    /// Independent coefficients for every receiver.
    PerReceiver,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum What {
    Delay,
    Complexity,
    Both,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetArg {
    Quick,
    Full,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Jsonl,
}

/// Scheme selection.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case")]
pub struct SchemeArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
    /// Symbol length in bits.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    /// Zero-coefficient probability as N/D.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<Ratio>,
    /// Packets per generation.
    #[arg(long = "P")]
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub packets: Option<usize>,
    /// Draw conventional coefficients from the nonzero elements only.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force_nonzero: Option<bool>,
}

/// Channel and run size.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case")]
pub struct RunArgs {
    /// Packet length in bits.
    #[arg(long = "M")]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Number of receivers.
    #[arg(long = "R")]
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub receivers: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Success probabilities, one per receiver (a single value is repeated R times).
    #[arg(long, value_delimiter = ',', conflicts_with = "p_range")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    /// Success probabilities drawn uniformly from lo:hi.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_range: Option<String>,
    /// Draw the channel once per run instead of once per trial.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_channel: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coding: Option<Coding>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Decode payloads and count binary operations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decode: Option<OnOff>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case")]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub what: Option<What>,
    /// Simulation CSV supplying mean |A| and mean U_r.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub means_from: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
    /// Generation sizes as a:b:step.
    #[arg(long = "P-range")]
    #[serde(rename = "P-range", skip_serializing_if = "Option::is_none")]
    pub packets_range: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Keys that replace each other when one layer sets either.
const EXCLUSIVE: [(&str, &str); 1] = [("p-list", "p-range")];

/// Overlays command-line values on the config file.
pub fn layered<T>(cli: &T, config: Option<&Path>) -> Result<T>
where
    T: Args + Serialize + DeserializeOwned,
{
    let Some(path) = config else {
        return serde_path(toml::Table::try_from(cli)?);
    };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut file: toml::Table = text
        .parse()
        .with_context(|| format!("parsing {}", path.display()))?;
    let known: HashSet<String> = T::augment_args(clap::Command::new("x"))
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_owned))
        .collect();
    if let Some(bad) = file.keys().find(|k| !known.contains(*k)) {
        bail!("{}: unknown key {bad:?}", path.display());
    }
    let cli = toml::Table::try_from(cli)?;
    for (a, b) in EXCLUSIVE {
        if cli.contains_key(a) {
            file.remove(b);
        }
        if cli.contains_key(b) {
            file.remove(a);
        }
    }
    file.extend(cli);
    serde_path(file).with_context(|| format!("in {}", path.display()))
}

fn serde_path<T: DeserializeOwned>(t: toml::Table) -> Result<T> {
    Ok(toml::Value::Table(t).try_into()?)
}

pub const DEFAULT_M: usize = 1024;
pub const DEFAULT_R: usize = 60;
pub const DEFAULT_P: usize = 15;
pub const DEFAULT_P_RANGE: &str = "0.8:0.9";
pub const DEFAULT_SEED: u64 = 1;

/// Parses `lo:hi`.
pub fn parse_p_range(s: &str) -> Result<(f64, f64)> {
    let bad = || anyhow!("--p-range {s:?}: expected lo:hi");
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

/// Parses `a:b:step` into the listed values.
pub fn parse_packets_range(s: &str) -> Result<Vec<usize>> {
    let bad = || anyhow!("--P-range {s:?}: expected a:b:step with 1 <= a <= b and step >= 1");
    let parts: Vec<usize> = s
        .split(':')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, step] => (a, b, step),
        _ => return Err(bad()),
    };
    if a == 0 || a > b || step == 0 {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

/// Resolved scheme: the name as given plus a configuration.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub name: SchemeName,
    pub cfg: SchemeConfig,
}

impl Scheme {
    /// Value of the `L` column.
    pub fn l_column(&self) -> String {
        match self.name {
            SchemeName::Perfect => String::new(),
            _ => self.cfg.l.to_string(),
        }
    }

    pub fn p0_column(&self) -> String {
        self.cfg.p0.map(|r| r.to_string()).unwrap_or_default()
    }
}

/// Builds the scheme. With `check_m` false the packet length only scales
/// closed forms and need not be a multiple of `L`.
pub fn resolve_scheme(a: &SchemeArgs, m: usize, check_m: bool) -> Result<Scheme> {
    let name = a.scheme.ok_or_else(|| anyhow!("--scheme is required"))?;
    let p = a.packets.unwrap_or(DEFAULT_P);
    if a.p0.is_some() && !name.is_circ() {
        bail!("--p0 applies only to the circ and circ-red schemes");
    }
    let force_nonzero = a.force_nonzero.unwrap_or(false);
    if force_nonzero && !matches!(name, SchemeName::Gf | SchemeName::Gf2) {
        bail!("--force-nonzero applies only to the gf and gf2 schemes");
    }
    let l = match name {
        SchemeName::Gf2 => match a.l {
            None | Some(1) => 1,
            Some(l) => bail!("--scheme gf2 has L = 1, got --L {l}"),
        },
        SchemeName::Gf => a.l.ok_or_else(|| anyhow!("--scheme gf needs --L"))?,
        SchemeName::Perfect => 1,
        SchemeName::Circ | SchemeName::CircRed => a.l.unwrap_or(4),
    };
    let m_cfg = if check_m { m } else { l as usize };
    let p0 = a.p0.unwrap_or(Ratio { num: 1, den: 4 });
    let mut cfg = match name {
        SchemeName::Gf2 | SchemeName::Gf => SchemeConfig::conv(l, p, m_cfg)?,
        SchemeName::Perfect => SchemeConfig::perfect(p, m_cfg)?,
        SchemeName::Circ => SchemeConfig::circ(l, p, m_cfg, p0)?,
        SchemeName::CircRed => SchemeConfig::circ_red(l, p, m_cfg, p0)?,
    };
    cfg.m = m;
    cfg.force_nonzero = force_nonzero;
    Ok(Scheme { name, cfg })
}

pub fn resolve_channel(r: &RunArgs) -> Result<ChannelRule> {
    let rule = match &r.p_list {
        Some(list) => {
            let list = match (list.len(), r.receivers) {
                (1, Some(n)) => vec![list[0]; n],
                (len, Some(n)) if len != n => {
                    bail!("--p-list has {len} entries but --R is {n}")
                }
                _ => list.clone(),
            };
            ChannelRule::Fixed(list)
        }
        None => {
            let (lo, hi) = parse_p_range(r.p_range.as_deref().unwrap_or(DEFAULT_P_RANGE))?;
            ChannelRule::Uniform {
                receivers: r.receivers.unwrap_or(DEFAULT_R),
                lo,
                hi,
            }
        }
    };
    rule.validate()?;
    Ok(rule)
}

pub fn experiment(
    scheme: &Scheme,
    r: &RunArgs,
    decode: bool,
    default_trials: usize,
) -> Result<ExperimentSpec> {
    let spec = ExperimentSpec {
        scheme: scheme.cfg.clone(),
        channel: resolve_channel(r)?,
        redraw: if r.fixed_channel.unwrap_or(false) {
            ChannelRedraw::PerExperiment
        } else {
            ChannelRedraw::PerTrial
        },
        coding: match r.coding.unwrap_or(Coding::Broadcast) {
            Coding::Broadcast => CodingMode::Broadcast,
            Coding::PerReceiver => CodingMode::PerReceiver,
        },
        trials: r.trials.unwrap_or(default_trials),
        base_seed: r.seed.unwrap_or(DEFAULT_SEED),
        decode,
    };
    spec.validate()?;
    Ok(spec)
}

/// Default decoding: on for coded schemes, off for the perfect one.
pub fn decode_default(kind: SchemeKind, flag: Option<OnOff>) -> bool {
    match flag {
        Some(f) => f == OnOff::On,
        None => kind != SchemeKind::Perfect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_p_range("0.8:0.9").unwrap(), (0.8, 0.9));
        assert!(parse_p_range("0.8").is_err());
        assert_eq!(
            parse_packets_range("5:30:5").unwrap(),
            vec![5, 10, 15, 20, 25, 30]
        );
        assert_eq!(parse_packets_range("3:4").unwrap(), vec![3, 4]);
        assert!(parse_packets_range("0:4:1").is_err());
        assert!(parse_packets_range("5:4:1").is_err());
    }

    #[test]
    fn layering_prefers_the_command_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "scheme = \"circ\"\nL = 10\np0 = \"1/2\"\np-range = \"0.5:0.6\"\ntrials = 7\n",
        )
        .unwrap();
        let cli = SimulateArgs {
            scheme: SchemeArgs {
                l: Some(4),
                ..Default::default()
            },
            run: RunArgs {
                p_list: Some(vec![0.9]),
                ..Default::default()
            },
            ..Default::default()
        };
        let merged = layered(&cli, Some(&path)).unwrap();
        assert_eq!(merged.scheme.scheme, Some(SchemeName::Circ));
        assert_eq!(merged.scheme.l, Some(4));
        assert_eq!(merged.scheme.p0, Some(Ratio { num: 1, den: 2 }));
        assert_eq!(merged.run.trials, Some(7));
        assert_eq!(merged.run.p_list, Some(vec![0.9]));
        assert_eq!(merged.run.p_range, None);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "schem = \"circ\"\n").unwrap();
        let err = layered(&SimulateArgs::default(), Some(&path)).unwrap_err();
        assert!(err.to_string().contains("schem"), "{err}");
    }

    #[test]
    fn scheme_resolution() {
        let args = |name, l| SchemeArgs {
            scheme: Some(name),
            l,
            ..Default::default()
        };
        let s = resolve_scheme(&args(SchemeName::Circ, Some(6)), 1024, true).unwrap_err();
        assert!(s.to_string().contains("2, 4, 10, 12"), "{s}");
        assert!(resolve_scheme(&args(SchemeName::Gf2, Some(4)), 1024, true).is_err());
        assert!(resolve_scheme(&args(SchemeName::Gf, Some(10)), 64, true).is_err());
        let s = resolve_scheme(&args(SchemeName::Gf, Some(10)), 64, false).unwrap();
        assert_eq!(s.cfg.m, 64);
        let s = resolve_scheme(&args(SchemeName::Perfect, None), 1024, true).unwrap();
        assert_eq!(s.l_column(), "");
    }

    #[test]
    fn single_probability_repeats() {
        let r = RunArgs {
            receivers: Some(3),
            p_list: Some(vec![0.5]),
            ..Default::default()
        };
        assert_eq!(
            resolve_channel(&r).unwrap(),
            ChannelRule::Fixed(vec![0.5; 3])
        );
        let r = RunArgs {
            receivers: Some(3),
            p_list: Some(vec![0.5, 0.6]),
            ..Default::default()
        };
        assert!(resolve_channel(&r).is_err());
    }
}
