//! Parameter resolution: built-in defaults, then the config file, then
//! command-line flags, each layer overriding the last.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use qi_core::photonsim::{Denominator, ExperimentConfig};

use crate::cli::{CommonArgs, ConventionArg, NormalizationArg, SchemeArg};

/// The accepted config-file keys, mirroring the experiment parameters
/// field for field.
pub const CONFIG_KEYS: [&str; 16] = [
    "pair_rate",
    "noise_rate",
    "duration",
    "coincidence_window",
    "eta",
    "depolarization_p",
    "scheme",
    "convention",
    "normalization",
    "theta",
    "delta",
    "theta_p",
    "delta_p",
    "herald_efficiency",
    "signal_efficiency",
    "seed",
];

/// Everything a subcommand needs that is not part of its own flags.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub cfg: ExperimentConfig,
    pub denominator: Denominator,
}

/// Builds the effective configuration for one invocation and validates it.
pub fn resolve(common: &CommonArgs) -> Result<Resolved> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        apply_file(&mut cfg, path)?;
    }
    apply_flags(&mut cfg, common);
    cfg.validate()?;
    let denominator = common
        .denominator
        .map(Into::into)
        .unwrap_or(Denominator::Heralds);
    Ok(Resolved { cfg, denominator })
}

/// Applies a flat `key = value` file. Blank lines and `#` comments are
/// skipped; unknown or repeated keys are hard errors.
pub fn apply_file(cfg: &mut ExperimentConfig, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file `{}`", path.display()))?;
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let place = format!("{}:{}", path.display(), idx + 1);
        let Some((key, value)) = line.split_once('=') else {
            bail!("{place}: expected `key = value`, got `{line}`");
        };
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_owned()) {
            bail!("{place}: key `{key}` given twice");
        }
        set_key(cfg, key, value).with_context(|| place)?;
    }
    Ok(())
}

fn set_key(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "pair_rate" => cfg.pair_rate = parse_f64(key, value)?,
        "noise_rate" => cfg.noise_rate = parse_f64(key, value)?,
        "duration" => cfg.duration = parse_f64(key, value)?,
        "coincidence_window" => cfg.coincidence_window = parse_f64(key, value)?,
        "eta" => cfg.eta = parse_f64(key, value)?,
        "depolarization_p" => cfg.depolarization_p = parse_f64(key, value)?,
        "scheme" => cfg.scheme.scheme = parse_variant::<SchemeArg>(key, value)?.into(),
        "convention" => cfg.scheme.convention = parse_variant::<ConventionArg>(key, value)?.into(),
        "normalization" => {
            cfg.scheme.normalization = parse_variant::<NormalizationArg>(key, value)?.into()
        }
        "theta" => cfg.quad.theta = parse_f64(key, value)?,
        "delta" => cfg.quad.delta = parse_f64(key, value)?,
        "theta_p" => cfg.quad.theta_p = parse_f64(key, value)?,
        "delta_p" => cfg.quad.delta_p = parse_f64(key, value)?,
        "herald_efficiency" => cfg.herald_efficiency = parse_f64(key, value)?,
        "signal_efficiency" => cfg.signal_efficiency = parse_f64(key, value)?,
        "seed" => {
            cfg.seed = value
                .parse()
                .map_err(|_| anyhow!("`{key}` wants an unsigned integer, got `{value}`"))?
        }
        _ => bail!(
            "unknown key `{key}` (valid keys: {})",
            CONFIG_KEYS.join(", ")
        ),
    }
    Ok(())
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| anyhow!("`{key}` wants a number, got `{value}`"))
}

/// Parses the same literal a flag would accept (`ni`, `per-trial`, ...).
fn parse_variant<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, false).map_err(|_| {
        let options: Vec<_> = T::value_variants()
            .iter()
            .filter_map(|v| v.to_possible_value())
            .map(|p| p.get_name().to_owned())
            .collect();
        anyhow!(
            "`{key}` must be one of {}, got `{value}`",
            options.join(", ")
        )
    })
}

fn apply_flags(cfg: &mut ExperimentConfig, common: &CommonArgs) {
    if let Some(v) = common.scheme {
        cfg.scheme.scheme = v.into();
    }
    if let Some(v) = common.convention {
        cfg.scheme.convention = v.into();
    }
    if let Some(v) = common.normalization {
        cfg.scheme.normalization = v.into();
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.pair_rate {
        cfg.pair_rate = v;
    }
    if let Some(v) = common.noise_rate {
        cfg.noise_rate = v;
    }
    if let Some(v) = common.duration {
        cfg.duration = v;
    }
    if let Some(v) = common.coincidence_window {
        cfg.coincidence_window = v;
    }
    if let Some(v) = common.eta {
        cfg.eta = v;
    }
    if let Some(v) = common.depolarization_p {
        cfg.depolarization_p = v;
    }
    if let Some(v) = common.theta {
        cfg.quad.theta = v;
    }
    if let Some(v) = common.delta {
        cfg.quad.delta = v;
    }
    if let Some(v) = common.theta_p {
        cfg.quad.theta_p = v;
    }
    if let Some(v) = common.delta_p {
        cfg.quad.delta_p = v;
    }
    if let Some(v) = common.herald_efficiency {
        cfg.herald_efficiency = v;
    }
    if let Some(v) = common.signal_efficiency {
        cfg.signal_efficiency = v;
    }
}
