//! JSON config files and their merge with command-line flags.
//!
//! Precedence is flag, then config file, then built-in default.

use crate::error::{CliError, CliResult, Stage};
use serde::{Deserialize, Serialize};
use spread_core::evolution::{default_grid, linear_grid, log_grid, DEFAULT_POINTS};
use spread_core::{AutocorrModel, SpinSpParams};
use std::path::Path;

/// Every key a config file may carry. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub variant: Option<String>,
    pub sigma0: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub dim: Option<usize>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub fbar: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub formal: Option<bool>,
    pub window: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub precision_bits: Option<usize>,
    pub tmax: Option<f64>,
    pub tpoints: Option<usize>,
    pub log_grid: Option<bool>,
    pub sites: Option<usize>,
    pub h: Option<f64>,
    pub g: Option<f64>,
    pub realizations: Option<usize>,
    pub compare: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}:{msg}", path.display())),
            e => e,
        })
    }

    /// Parse errors carry `line:column:` so they point into the file.
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde_json appends " at line L column C"; lead with it instead
            let bare = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
            CliError::Config(format!("{}:{}: {bare}", e.line(), e.column()))
        })
    }
}

/// `flag`, else `file`, else nothing.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// A required parameter, with an error naming both ways to supply it.
pub fn require<T>(value: Option<T>, flag: &str, key: &str) -> CliResult<T> {
    value.ok_or_else(|| {
        CliError::Config(format!("missing required parameter: pass --{flag} or set \"{key}\" in --config"))
    })
}

/// Accepted `--variant` names.
pub const VARIANTS: [&str; 6] = ["gaussian", "truncated-quadratic", "interpolation", "semicircle", "frm", "spin-sp"];

/// Model parameters after merging flags and config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelParams {
    pub variant: Option<String>,
    pub sigma0: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub dim: Option<usize>,
    pub a: Option<f64>,
    pub fbar: Option<f64>,
}

impl ModelParams {
    pub fn build(&self) -> CliResult<AutocorrModel> {
        let variant = require(self.variant.as_deref(), "variant", "variant")?;
        let sigma0 = || require(self.sigma0, "sigma0", "sigma0");
        let model = match variant {
            "gaussian" => AutocorrModel::Gaussian { sigma0: sigma0()? },
            "truncated-quadratic" => AutocorrModel::TruncatedQuadratic { sigma0: sigma0()? },
            "interpolation" => {
                AutocorrModel::Interpolation { sigma0: sigma0()?, gamma: require(self.gamma, "gamma", "gamma")? }
            }
            "semicircle" => AutocorrModel::Semicircle { alpha: require(self.alpha, "alpha", "alpha")? },
            "frm" => AutocorrModel::FrmSurvival { dim: require(self.dim, "dim", "dim")? },
            "spin-sp" => AutocorrModel::SpinPhenomenological(SpinSpParams {
                sigma0: sigma0()?,
                dim: require(self.dim, "dim", "dim")?,
                a: require(self.a, "A", "A")?,
                fbar: require(self.fbar, "fbar", "fbar")?,
            }),
            other => {
                return Err(CliError::Config(format!(
                    "unknown variant \"{other}\"; expected one of {}",
                    VARIANTS.join(", ")
                )))
            }
        };
        model.validate().stage("models/validate")?;
        Ok(model)
    }
}

/// Time grid choice: explicit `tmax`/`tpoints`/`log`, or the default log grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GridSpec {
    pub tmax: Option<f64>,
    pub tpoints: Option<usize>,
    pub log: bool,
}

impl GridSpec {
    /// Times for a chain of width `sigma0` and depth `k`, always starting at `t = 0`.
    pub fn times(&self, sigma0: f64, k: usize) -> CliResult<Vec<f64>> {
        let points = self.tpoints.unwrap_or(DEFAULT_POINTS);
        if points < 2 {
            return Err(CliError::Config(format!("--tpoints must be at least 2, got {points}")));
        }
        let grid = match self.tmax {
            None if self.tpoints.is_none() => default_grid(sigma0, k),
            None => {
                let t1 = (100.0 * k as f64).max(1e3) / sigma0;
                log_grid(1e-2 / sigma0, t1, points)
            }
            Some(t1) if !(t1 > 0.0 && t1.is_finite()) => {
                return Err(CliError::Config(format!("--tmax must be positive and finite, got {t1}")))
            }
            Some(t1) if self.log => log_grid((1e-2 / sigma0).min(t1 * 1e-3), t1, points),
            Some(t1) => linear_grid(0.0, t1, points),
        }
        .stage("krylov-evolution/time_grid")?;
        let mut times = Vec::with_capacity(grid.len() + 1);
        if grid.first() != Some(&0.0) {
            times.push(0.0);
        }
        times.extend(grid);
        Ok(times)
    }
}

/// Parses `lo,hi`.
pub fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got \"{s}\""))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad window start \"{lo}\": {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad window end \"{hi}\": {e}"))?;
    if !(lo < hi) {
        return Err(format!("window start {lo} must be below its end {hi}"));
    }
    Ok([lo, hi])
}
