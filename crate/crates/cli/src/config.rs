//! Run configuration: a JSON file and/or command-line flags, merged and validated
//! into a [`RunConfig`] per command.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dualpace::experiments::Metric;
use dualpace::{PacerKind, StepRule};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("`{field}` must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{0}")]
    UnknownPacer(String),
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("unknown environment {0:?}; expected exponential, adversarial-ros, adversarial-budget:<mu0>, campaign:<path> or synthetic:<index>")]
    UnknownEnv(String),
    #[error("invalid `{field}`: {msg}")]
    Invalid { field: &'static str, msg: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Run,
    Scale,
    DemoSeq,
    Fleet,
    Oracle,
}

/// A value or a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// `"auto"` or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepValue {
    Number(f64),
    Word(String),
}

impl StepValue {
    fn resolve(&self, field: &'static str) -> Result<StepRule, ConfigError> {
        match self {
            StepValue::Number(x) if *x >= 0.0 && x.is_finite() => Ok(StepRule::Fixed(*x)),
            StepValue::Number(x) => Err(ConfigError::Invalid {
                field,
                msg: format!("step size must be nonnegative, got {x}"),
            }),
            StepValue::Word(w) if w == "auto" => Ok(StepRule::Auto),
            StepValue::Word(w) => Err(ConfigError::Invalid {
                field,
                msg: format!("expected \"auto\" or a number, got {w:?}"),
            }),
        }
    }
}

impl FromStr for StepValue {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        if s == "auto" {
            return Ok(StepValue::Word(s.into()));
        }
        s.parse().map(StepValue::Number).map_err(|_| ConfigError::Invalid {
            field: "step",
            msg: format!("expected \"auto\" or a number, got {s:?}"),
        })
    }
}

/// Unvalidated fields as they appear in a config file. Flags use the same shape and
/// take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pacer: Option<OneOrMany<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<String>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
    #[serde(rename = "T_list", skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<StepValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<StepValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub campaigns: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assert: Option<bool>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: RawConfig) -> RawConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RawConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            pacer, env, horizon, horizons, rho, alpha, eta, lambda_init, mu_init, seeds,
            master_seed, out, metric, mu0, lambda0, threshold, campaigns, step_grid,
            mc_samples, assert
        )
    }
}

/// Which environment to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EnvSpec {
    Exponential,
    AdversarialRos,
    AdversarialBudget(f64),
    /// A landscape JSON file.
    Campaign(PathBuf),
    /// Synthetic campaign number `i` under the master seed.
    Synthetic(u64),
}

impl FromStr for EnvSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let unknown = || ConfigError::UnknownEnv(s.to_string());
        match s {
            "exponential" => return Ok(EnvSpec::Exponential),
            "adversarial-ros" => return Ok(EnvSpec::AdversarialRos),
            _ => {}
        }
        let (head, tail) = s.split_once(':').ok_or_else(unknown)?;
        match head {
            "adversarial-budget" => {
                let mu0: f64 = tail.parse().map_err(|_| unknown())?;
                if mu0.is_nan() || mu0 <= 0.0 {
                    return Err(ConfigError::NonPositive { field: "mu0", value: mu0 });
                }
                Ok(EnvSpec::AdversarialBudget(mu0))
            }
            "campaign" if !tail.is_empty() => Ok(EnvSpec::Campaign(tail.into())),
            "synthetic" => tail.parse().map(EnvSpec::Synthetic).map_err(|_| unknown()),
            _ => Err(unknown()),
        }
    }
}

impl std::fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvSpec::Exponential => f.write_str("exponential"),
            EnvSpec::AdversarialRos => f.write_str("adversarial-ros"),
            EnvSpec::AdversarialBudget(mu0) => write!(f, "adversarial-budget:{mu0}"),
            EnvSpec::Campaign(p) => write!(f, "campaign:{}", p.display()),
            EnvSpec::Synthetic(i) => write!(f, "synthetic:{i}"),
        }
    }
}

impl From<EnvSpec> for String {
    fn from(e: EnvSpec) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for EnvSpec {
    type Error = ConfigError;

    fn try_from(s: String) -> Result<Self, ConfigError> {
        s.parse()
    }
}

/// A validated configuration for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub pacers: Vec<PacerKind>,
    pub env: Option<EnvSpec>,
    #[serde(rename = "T_list")]
    pub horizons: Vec<usize>,
    /// Per-round budget override; `None` keeps the environment's own.
    pub rho: Option<f64>,
    pub alpha: StepRule,
    pub eta: StepRule,
    pub lambda_init: f64,
    /// `None` means `mu_1 = rho`.
    pub mu_init: Option<f64>,
    pub seeds: u64,
    pub master_seed: u64,
    pub out: PathBuf,
    pub metric: Metric,
    pub mu0: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub threshold: f64,
    pub campaigns: usize,
    pub step_grid: Vec<f64>,
    pub mc_samples: usize,
    pub assert_invariants: bool,
}

pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
pub const FLEET_HORIZON: usize = 144;

fn core_message(e: dualpace::Error) -> String {
    match e {
        dualpace::Error::Domain(msg) => msg,
        other => other.to_string(),
    }
}

fn positive(field: &'static str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::NonPositive { field, value: x })
    }
}

fn horizon(t: i64) -> Result<usize, ConfigError> {
    if t <= 0 {
        return Err(ConfigError::InvalidHorizon(format!("T must be a positive integer, got {t}")));
    }
    Ok(t as usize)
}

fn pacers(raw: &RawConfig, default: Option<Vec<PacerKind>>) -> Result<Vec<PacerKind>, ConfigError> {
    match &raw.pacer {
        Some(p) => {
            let names = p.to_vec();
            if names.is_empty() {
                return Err(ConfigError::Missing("pacer"));
            }
            names
                .iter()
                .map(|n| n.parse().map_err(|e: dualpace::Error| ConfigError::UnknownPacer(core_message(e))))
                .collect()
        }
        None => default.ok_or(ConfigError::Missing("pacer")),
    }
}

/// Validate `raw` for `command`, filling documented defaults.
pub fn resolve(command: Command, raw: &RawConfig) -> Result<RunConfig, ConfigError> {
    let env = raw.env.as_deref().map(EnvSpec::from_str).transpose()?;
    let needs_env = matches!(command, Command::Run | Command::Scale | Command::Oracle);
    if needs_env && env.is_none() {
        return Err(ConfigError::Missing("env"));
    }
    let pacers = match command {
        Command::Run | Command::Scale => pacers(raw, None)?,
        Command::DemoSeq => pacers(raw, Some(vec![PacerKind::Sequential]))?,
        Command::Fleet | Command::Oracle => pacers(raw, Some(PacerKind::ALL.to_vec()))?,
    };
    let list = |v: &Vec<i64>| v.iter().map(|&t| horizon(t)).collect::<Result<Vec<_>, _>>();
    let horizons = match command {
        Command::Run => vec![horizon(raw.horizon.ok_or(ConfigError::Missing("T"))?)?],
        Command::Scale => {
            let hs = list(raw.horizons.as_ref().ok_or(ConfigError::Missing("T_list"))?)?;
            if hs.len() < 3 {
                return Err(ConfigError::InvalidHorizon("need >= 3 horizons".into()));
            }
            let (lo, hi) = (hs.iter().min().copied().unwrap_or(1), hs.iter().max().copied().unwrap_or(1));
            if (hi as f64) / (lo as f64) < 100.0 {
                return Err(ConfigError::InvalidHorizon("horizons must span at least two decades".into()));
            }
            hs
        }
        Command::DemoSeq => match (&raw.horizons, raw.horizon) {
            (Some(v), _) => list(v)?,
            (None, Some(t)) => vec![horizon(t)?],
            (None, None) => vec![1_000, 10_000, 100_000],
        },
        Command::Fleet => vec![horizon(raw.horizon.unwrap_or(FLEET_HORIZON as i64))?],
        Command::Oracle => vec![horizon(raw.horizon.unwrap_or(1_000))?],
    };
    if horizons.is_empty() {
        return Err(ConfigError::InvalidHorizon("T_list is empty".into()));
    }
    let rho = raw.rho.map(|r| positive("rho", r)).transpose()?;
    let lambda_init = positive("lambda_init", raw.lambda_init.unwrap_or(1.0))?;
    let mu_init = raw.mu_init.map(|m| positive("mu_init", m)).transpose()?;
    let alpha = raw.alpha.as_ref().map_or(Ok(StepRule::Auto), |s| s.resolve("alpha"))?;
    let eta = raw.eta.as_ref().map_or(Ok(StepRule::Auto), |s| s.resolve("eta"))?;
    let default_seeds = match command {
        Command::Scale => 30,
        Command::Fleet => 10,
        _ => 1,
    };
    let seeds = raw.seeds.unwrap_or(default_seeds);
    if seeds == 0 {
        return Err(ConfigError::NonPositive { field: "seeds", value: 0.0 });
    }
    let metric = match &raw.metric {
        Some(m) => m.parse().map_err(|e: dualpace::Error| ConfigError::Invalid {
            field: "metric",
            msg: core_message(e),
        })?,
        None => Metric::Regret,
    };
    let grid = |v: &Option<OneOrMany<f64>>, field| -> Result<Vec<f64>, ConfigError> {
        v.as_ref()
            .map_or(vec![0.5, 1.0, 2.0], |x| x.to_vec())
            .into_iter()
            .map(|x| positive(field, x))
            .collect()
    };
    let step_grid = raw
        .step_grid
        .clone()
        .unwrap_or_else(|| vec![0.3, 1.0, 3.0])
        .into_iter()
        .map(|x| positive("step_grid", x))
        .collect::<Result<Vec<_>, _>>()?;
    if step_grid.is_empty() {
        return Err(ConfigError::Missing("step_grid"));
    }
    let campaigns = raw.campaigns.unwrap_or(200);
    if campaigns == 0 {
        return Err(ConfigError::NonPositive { field: "campaigns", value: 0.0 });
    }
    let mc_samples = raw.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES);
    if mc_samples == 0 {
        return Err(ConfigError::NonPositive { field: "mc_samples", value: 0.0 });
    }
    Ok(RunConfig {
        command,
        pacers,
        env,
        horizons,
        rho,
        alpha,
        eta,
        lambda_init,
        mu_init,
        seeds,
        master_seed: raw.master_seed.unwrap_or(0),
        out: raw.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        metric,
        mu0: grid(&raw.mu0, "mu0")?,
        lambda0: grid(&raw.lambda0, "lambda0")?,
        threshold: positive("threshold", raw.threshold.unwrap_or(0.01))?,
        campaigns,
        step_grid,
        mc_samples,
        assert_invariants: raw.assert.unwrap_or(true),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_run_defaults() {
        let raw = RawConfig::from_json(r#"{"pacer":"min","env":"adversarial-ros","T":10000}"#).unwrap();
        let c = resolve(Command::Run, &raw).unwrap();
        assert_eq!(c.pacers, vec![PacerKind::Min]);
        assert_eq!(c.env, Some(EnvSpec::AdversarialRos));
        assert_eq!(c.horizons, vec![10_000]);
        assert_eq!(c.alpha.resolve(10_000), 0.01);
        assert_eq!(c.eta.resolve(10_000), 0.01);
        assert_eq!(c.lambda_init, 1.0);
        assert_eq!(c.mu_init, None);
    }

    #[test]
    fn rejects_unknown_pacer_and_keys() {
        let raw = RawConfig::from_json(r#"{"pacer":"joint","env":"exponential","T":10}"#).unwrap();
        let err = resolve(Command::Run, &raw).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown pacer kind"), "{msg}");
        for k in ["dual-optimal", "sequential", "min"] {
            assert!(msg.contains(k));
        }
        assert!(matches!(
            RawConfig::from_json(r#"{"pacer":"min","budgett":3}"#),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn horizon_errors() {
        let raw = RawConfig::from_json(r#"{"pacer":"min","env":"exponential","T":0}"#).unwrap();
        assert!(matches!(resolve(Command::Run, &raw), Err(ConfigError::InvalidHorizon(_))));
        let raw = RawConfig::from_json(r#"{"pacer":"min","env":"exponential","T_list":[1000]}"#).unwrap();
        let err = resolve(Command::Scale, &raw).unwrap_err();
        assert!(err.to_string().contains("need >= 3 horizons"));
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::from_json(r#"{"pacer":"min","env":"exponential","T":10,"seeds":3}"#).unwrap();
        let flags = RawConfig {
            seeds: Some(7),
            ..Default::default()
        };
        let c = resolve(Command::Run, &file.merged(flags)).unwrap();
        assert_eq!(c.seeds, 7);
        assert_eq!(c.horizons, vec![10]);
    }

    #[test]
    fn env_specs_round_trip() {
        for s in ["exponential", "adversarial-ros", "adversarial-budget:0.5", "campaign:a/b.json", "synthetic:3"] {
            assert_eq!(s.parse::<EnvSpec>().unwrap().to_string(), s);
        }
        assert!(matches!("bogus".parse::<EnvSpec>(), Err(ConfigError::UnknownEnv(_))));
        assert!(matches!(
            "adversarial-budget:-1".parse::<EnvSpec>(),
            Err(ConfigError::NonPositive { .. })
        ));
    }

    #[test]
    fn step_values() {
        let raw = RawConfig::from_json(r#"{"pacer":"min","env":"exponential","T":100,"alpha":0.5,"eta":"auto"}"#).unwrap();
        let c = resolve(Command::Run, &raw).unwrap();
        assert_eq!(c.alpha, StepRule::Fixed(0.5));
        assert_eq!(c.eta, StepRule::Auto);
        let raw = RawConfig::from_json(r#"{"pacer":"min","env":"exponential","T":100,"alpha":"fast"}"#).unwrap();
        assert!(matches!(resolve(Command::Run, &raw), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn nonpositive_parameters() {
        let raw = RawConfig::from_json(r#"{"pacer":"min","env":"exponential","T":100,"rho":-1}"#).unwrap();
        assert!(matches!(
            resolve(Command::Run, &raw),
            Err(ConfigError::NonPositive { field: "rho", .. })
        ));
        let raw = RawConfig::from_json(r#"{"env":"exponential","T":100}"#).unwrap();
        assert!(matches!(resolve(Command::Run, &raw), Err(ConfigError::Missing("pacer"))));
    }
}
