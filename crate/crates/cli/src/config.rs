use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

/// Every setting an experiment may read. Unset fields fall back to the
/// experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Registered experiment name (see `distdp list`).
    #[arg(long)]
    pub experiment: Option<String>,
    /// Number of parties.
    #[arg(long)]
    pub n: Option<usize>,
    /// Privacy parameter ε.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Privacy parameter δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Coalition size bound.
    #[arg(long)]
    pub t: Option<usize>,
    /// Number of protocol rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Gap width.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Gap offset.
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Density parameter of the sparse input distribution.
    #[arg(long)]
    pub d: Option<f64>,
    /// Likelihood-ratio threshold parameter.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `flags` replace the ones from the file.
    pub fn overridden_by(self, flags: ConfigFile) -> Self {
        Self {
            experiment: flags.experiment.or(self.experiment),
            n: flags.n.or(self.n),
            eps: flags.eps.or(self.eps),
            delta: flags.delta.or(self.delta),
            t: flags.t.or(self.t),
            rounds: flags.rounds.or(self.rounds),
            tau: flags.tau.or(self.tau),
            kappa: flags.kappa.or(self.kappa),
            d: flags.d.or(self.d),
            nu: flags.nu.or(self.nu),
            trials: flags.trials.or(self.trials),
            seed: flags.seed.or(self.seed),
            out: flags.out.or(self.out),
        }
    }
}

/// Fully resolved parameters. Serialized into the `param_json` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub t: usize,
    pub rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub kappa: usize,
    pub d: f64,
    pub nu: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Per-experiment fallbacks for unset fields.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub t: usize,
    pub rounds: usize,
    pub d: Option<f64>,
    pub trials: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            n: 10_000,
            eps: 1.0,
            delta: 0.01,
            t: 1,
            rounds: 1,
            d: None,
            trials: 1_000,
        }
    }
}

pub const DEFAULT_SEED: u64 = 7;

impl Params {
    pub fn resolve(cfg: &ConfigFile, defaults: Defaults) -> Result<Self> {
        let rounds = cfg.rounds.unwrap_or(defaults.rounds);
        if rounds == 0 {
            bail!("invalid value for `rounds`: must be at least 1");
        }
        let d = cfg.d.or(defaults.d).unwrap_or_else(|| distdp::audit::default_d(rounds));
        let p = Self {
            n: cfg.n.unwrap_or(defaults.n),
            eps: cfg.eps.unwrap_or(defaults.eps),
            delta: cfg.delta.unwrap_or(defaults.delta),
            t: cfg.t.unwrap_or(defaults.t),
            rounds,
            tau: cfg.tau,
            kappa: cfg.kappa.unwrap_or(0),
            d,
            nu: cfg.nu.unwrap_or_else(|| distdp::audit::default_nu(rounds, d)),
            trials: cfg.trials.unwrap_or(defaults.trials),
            seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("invalid value for `n`: must be at least 1");
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            bail!("invalid value for `eps`: {} is not a positive finite number", self.eps);
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("invalid value for `delta`: {} is outside (0, 1)", self.delta);
        }
        if self.trials == 0 {
            bail!("invalid value for `trials`: must be at least 1");
        }
        if !(self.d.is_finite() && self.d > 1.0) {
            bail!("invalid value for `d`: {} must exceed 1", self.d);
        }
        if !(self.nu.is_finite() && self.nu > 32.0) {
            bail!("invalid value for `nu`: {} must exceed 32", self.nu);
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                bail!("invalid value for `tau`: {tau} is not a positive finite number");
            }
        }
        Ok(())
    }
}

/// Names the offending field when a library call rejects a parameter.
pub fn field<T>(name: &str, r: distdp::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow::anyhow!("invalid value for `{name}`: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: ConfigFile = toml::from_str("experiment = \"rr-sum-error\"\nn = 50\neps = 0.5\n").unwrap();
        let flags = ConfigFile {
            eps: Some(2.0),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.n, Some(50));
        assert_eq!(merged.eps, Some(2.0));
        assert_eq!(merged.experiment.as_deref(), Some("rr-sum-error"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ConfigFile>("epsilon = 1.0\n").unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
    }

    #[test]
    fn validation_names_the_field() {
        let cfg = ConfigFile {
            delta: Some(1.5),
            ..Default::default()
        };
        let err = Params::resolve(&cfg, Defaults::default()).unwrap_err().to_string();
        assert!(err.contains("`delta`"), "{err}");
    }
}
