//! Command-line flags, the optional JSON config file and their merge.
//!
//! Precedence: a flag given on the command line wins over the same key in the
//! config file, which wins over the subcommand's default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use conjchan::{LogBase, SchemeId};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "conjchan",
    version,
    about = "Mutual information of Gaussian amplifier channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Engine and closed-form MI over a grid of budgets and gains.
    Sweep,
    /// Data behind one of the figures.
    Figure {
        #[arg(value_enum)]
        name: Figure,
    },
    /// Run the consistency checks.
    Verify,
    /// Optimise the free squeezing variance.
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    #[value(name = "figA1", alias = "figa1")]
    FigA1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Bits,
    Nats,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Bits => LogBase::Bits,
            Base::Nats => LogBase::Nats,
        }
    }
}

/// Every flag is optional so that the config file can fill the gaps.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Comma-separated scheme ids.
    #[arg(long, global = true, value_delimiter = ',')]
    pub schemes: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub n_min: Option<f64>,
    #[arg(long, global = true)]
    pub n_max: Option<f64>,
    #[arg(long, global = true)]
    pub n_points: Option<usize>,
    /// Comma-separated amplifier gains.
    #[arg(long, global = true, value_delimiter = ',')]
    pub gains: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    pub base: Option<Base>,
    /// Output file (sweep, optimize) or directory (figure).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo samples per spot check.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Worker threads; 0 or absent uses all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Bound for the exact-agreement checks, in bits.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// JSON file with any of the above keys.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Run physicality checks against a doubled commutator.
    #[arg(long, global = true, hide = true)]
    #[serde(default)]
    pub corrupt_convention: bool,
}

impl Flags {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fills unset fields from `file`.
    pub fn over(self, file: Flags) -> Self {
        Self {
            schemes: self.schemes.or(file.schemes),
            n_min: self.n_min.or(file.n_min),
            n_max: self.n_max.or(file.n_max),
            n_points: self.n_points.or(file.n_points),
            gains: self.gains.or(file.gains),
            base: self.base.or(file.base),
            out: self.out.or(file.out),
            seed: self.seed.or(file.seed),
            samples: self.samples.or(file.samples),
            threads: self.threads.or(file.threads),
            tolerance: self.tolerance.or(file.tolerance),
            config: self.config,
            corrupt_convention: self.corrupt_convention || file.corrupt_convention,
        }
    }

    /// Merges in the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Self> {
        match self.config.clone() {
            Some(path) => {
                let file = Self::load(&path)?;
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }

    pub fn log_base(&self) -> LogBase {
        self.base.map(LogBase::from).unwrap_or_default()
    }

    pub fn scheme_ids(&self, default: &[SchemeId]) -> Result<Vec<SchemeId>> {
        match &self.schemes {
            None => Ok(default.to_vec()),
            Some(names) => {
                let ids = names
                    .iter()
                    .map(|s| s.trim().parse::<SchemeId>())
                    .collect::<conjchan::Result<Vec<_>>>()?;
                if ids.is_empty() {
                    bail!("no schemes given");
                }
                Ok(ids)
            }
        }
    }

    /// Linear budget grid.
    pub fn budget_grid(&self, min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
        let (lo, hi) = (self.n_min.unwrap_or(min), self.n_max.unwrap_or(max));
        let points = self.n_points.unwrap_or(points);
        if !(lo >= 0.0) || !hi.is_finite() || hi < lo {
            bail!("budget grid needs 0 <= n-min <= n-max, got [{lo}, {hi}]");
        }
        if points == 0 {
            bail!("n-points must be positive");
        }
        if points == 1 {
            return Ok(vec![lo]);
        }
        Ok((0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect())
    }

    pub fn gain_grid(&self, default: &[f64]) -> Result<Vec<f64>> {
        let gains = self.gains.clone().unwrap_or_else(|| default.to_vec());
        if gains.is_empty() {
            bail!("no gains given");
        }
        if let Some(g) = gains.iter().find(|g| !(**g >= 1.0) || !g.is_finite()) {
            bail!("gains must be finite and at least 1, got {g}");
        }
        Ok(gains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Flags =
            serde_json::from_str(r#"{"n-min": 1.0, "n-max": 3.0, "seed": 9, "base": "nats"}"#)
                .unwrap();
        let cli = Flags {
            n_max: Some(5.0),
            ..Flags::default()
        };
        let merged = cli.over(file);
        assert_eq!(merged.n_min, Some(1.0));
        assert_eq!(merged.n_max, Some(5.0));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.log_base(), LogBase::Nats);
    }

    #[test]
    fn unknown_config_key_rejected() {
        assert!(serde_json::from_str::<Flags>(r#"{"n_minimum": 1}"#).is_err());
    }

    #[test]
    fn grids() {
        let f = Flags {
            n_min: Some(0.0),
            n_max: Some(1.0),
            n_points: Some(3),
            ..Flags::default()
        };
        assert_eq!(f.budget_grid(0.0, 10.0, 21).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(
            Flags::default().budget_grid(0.0, 10.0, 21).unwrap().len(),
            21
        );
        assert!(Flags {
            n_min: Some(-1.0),
            ..Flags::default()
        }
        .budget_grid(0.0, 1.0, 2)
        .is_err());
        assert!(Flags {
            gains: Some(vec![0.5]),
            ..Flags::default()
        }
        .gain_grid(&[1.0])
        .is_err());
    }
}
