//! Run configuration: a TOML document with a `[model]` table and one table
//! of options per command.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use jcir_core::inversion::{InversionConfig, InversionMode};
use jcir_core::{JcirParams, JumpDensity, LevyDensity, LevyMeasure, PointMass};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Cf,
    Simulate,
    Skeleton,
    Density,
    Lowerbound,
    Ergodicity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Cf => "cf",
            Command::Simulate => "simulate",
            Command::Skeleton => "skeleton",
            Command::Density => "density",
            Command::Lowerbound => "lowerbound",
            Command::Ergodicity => "ergodicity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf: Option<CfOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<SkeletonOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<GridOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowerbound: Option<GridOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ergodicity: Option<ErgodicityOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a: f64,
    pub theta: f64,
    pub sigma: f64,
    #[serde(default)]
    pub nu: NuConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NuConfig {
    #[default]
    Zero,
    PointMasses {
        masses: Vec<PointMassConfig>,
    },
    FiniteActivity {
        rate: f64,
        jumps: JumpConfig,
    },
    InfiniteActivity {
        density: DensityConfig,
        eps_trunc: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMassConfig {
    pub size: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpConfig {
    Exponential { mean: f64 },
    Gamma { shape: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    TemperedStable { intensity: f64, alpha: f64, lambda: f64 },
}

fn default_quad_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            quad_tol: default_quad_tol(),
        }
    }
}

/// Characteristic function on `u = iv`, `v` evenly spaced in
/// `[v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfOptions {
    pub t: f64,
    pub x: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub n_points: usize,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Also solve the Riccati ODE and report the relative difference.
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateMethod {
    Exact,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOptions {
    pub method: SimulateMethod,
    pub x0: f64,
    pub horizon: f64,
    pub n_paths: usize,
    /// Euler step; required for `method = "euler"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonOptions {
    pub x0: f64,
    pub delta: f64,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub n_chains: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Full,
    Residual,
}

/// Evaluation grid and inversion settings shared by `density` and
/// `lowerbound`. Without `y_min`/`y_max` the default grid is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOptions {
    pub t: f64,
    pub x: f64,
    #[serde(default = "default_n_y")]
    pub n_y: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    /// Violation tolerance; `lowerbound` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

fn default_n_y() -> usize {
    201
}

/// Default violation tolerance of `lowerbound`.
pub const DEFAULT_LOWER_BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicityOptions {
    pub x: Vec<f64>,
    pub delta: f64,
    pub n_max: usize,
    pub n_mc: usize,
}

impl ModelConfig {
    pub fn to_params(&self) -> Result<JcirParams, CliError> {
        let nu = match &self.nu {
            NuConfig::Zero => Ok(LevyMeasure::zero()),
            NuConfig::PointMasses { masses } => LevyMeasure::point_masses(
                masses
                    .iter()
                    .map(|m| PointMass {
                        size: m.size,
                        mass: m.mass,
                    })
                    .collect(),
            ),
            NuConfig::FiniteActivity { rate, jumps } => {
                let jumps = match *jumps {
                    JumpConfig::Exponential { mean } => JumpDensity::Exponential { mean },
                    JumpConfig::Gamma { shape, rate } => JumpDensity::Gamma { shape, rate },
                };
                LevyMeasure::finite_activity(*rate, jumps)
            }
            NuConfig::InfiniteActivity { density, eps_trunc } => {
                let DensityConfig::TemperedStable {
                    intensity,
                    alpha,
                    lambda,
                } = *density;
                LevyMeasure::infinite_activity(
                    LevyDensity::TemperedStable {
                        intensity,
                        alpha,
                        lambda,
                    },
                    *eps_trunc,
                )
            }
        }
        .map_err(|e| CliError::config("model.nu", e))?;
        JcirParams::new(self.a, self.theta, self.sigma, nu).map_err(|e| CliError::config("model", e))
    }
}

impl GridOptions {
    pub fn inversion_config(&self) -> InversionConfig {
        let defaults = InversionConfig::default();
        InversionConfig {
            terms: self.terms.unwrap_or(defaults.terms),
            span_sd: self.span_sd.unwrap_or(defaults.span_sd),
            tol_mass: self.tol_mass.unwrap_or(defaults.tol_mass),
            mode: match self.mode {
                Some(ModeConfig::Full) => InversionMode::Full,
                Some(ModeConfig::Residual) | None => defaults.mode,
            },
            quad_tol: self.quad_tol.unwrap_or(defaults.quad_tol),
        }
    }

    fn validate(&self, section: &str) -> Result<(), CliError> {
        positive(section, "t", self.t)?;
        non_negative(section, "x", self.x)?;
        if self.n_y < 2 {
            return Err(CliError::invalid(section, "n_y", "need at least two grid points"));
        }
        match (self.y_min, self.y_max) {
            (None, None) => {}
            (Some(lo), Some(hi)) => {
                non_negative(section, "y_min", lo)?;
                if !(hi > lo) || !hi.is_finite() {
                    return Err(CliError::invalid(section, "y_max", "must be finite and > y_min"));
                }
            }
            _ => {
                return Err(CliError::invalid(
                    section,
                    "y_min",
                    "y_min and y_max must be given together",
                ))
            }
        }
        self.inversion_config()
            .validate()
            .map_err(|e| CliError::config(section, e))
    }

    pub fn lower_bound_tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_LOWER_BOUND_TOL)
    }

    /// Explicit grid, or `None` for the default grid.
    pub fn explicit_grid(&self) -> Option<Vec<f64>> {
        let (lo, hi) = (self.y_min?, self.y_max?);
        Some(
            (0..self.n_y)
                .map(|i| lo + (hi - lo) * i as f64 / (self.n_y - 1) as f64)
                .collect(),
        )
    }
}

fn positive(section: &str, key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(section, key, "must be finite and > 0"))
    }
}

fn non_negative(section: &str, key: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(section, key, "must be finite and >= 0"))
    }
}

fn at_least(section: &str, key: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::invalid(section, key, &format!("must be >= {min}")))
    }
}

fn required<'a, T>(opt: &'a Option<T>, section: &str) -> Result<&'a T, CliError> {
    opt.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing table [{section}] for command \"{section}\"")))
}

impl RunConfig {
    pub fn check_options(&self) -> CheckOptions {
        self.check.unwrap_or_default()
    }

    /// Checks the model and the options of the selected command.
    pub fn validate(&self) -> Result<JcirParams, CliError> {
        let params = self.model.to_params()?;
        let section = self.command.name();
        match self.command {
            Command::Check => {
                let q = self.check_options().quad_tol;
                if !(q > 0.0 && q < 1e-2) {
                    return Err(CliError::invalid(section, "quad_tol", "must lie in (0, 0.01)"));
                }
            }
            Command::Cf => {
                let o = required(&self.cf, section)?;
                positive(section, "t", o.t)?;
                non_negative(section, "x", o.x)?;
                if !(o.v_min.is_finite() && o.v_max.is_finite() && o.v_max >= o.v_min) {
                    return Err(CliError::invalid(section, "v_max", "need finite v_min <= v_max"));
                }
                at_least(section, "n_points", o.n_points, 1)?;
                if !(o.quad_tol > 0.0 && o.quad_tol < 1e-2) {
                    return Err(CliError::invalid(section, "quad_tol", "must lie in (0, 0.01)"));
                }
            }
            Command::Simulate => {
                let o = required(&self.simulate, section)?;
                non_negative(section, "x0", o.x0)?;
                positive(section, "horizon", o.horizon)?;
                at_least(section, "n_paths", o.n_paths, 1)?;
                match (o.method, o.dt) {
                    (SimulateMethod::Euler, None) => {
                        return Err(CliError::invalid(section, "dt", "required for method = \"euler\""))
                    }
                    (_, Some(dt)) if !(dt > 0.0 && dt <= o.horizon) => {
                        return Err(CliError::invalid(section, "dt", "must satisfy 0 < dt <= horizon"))
                    }
                    _ => {}
                }
            }
            Command::Skeleton => {
                let o = required(&self.skeleton, section)?;
                non_negative(section, "x0", o.x0)?;
                positive(section, "delta", o.delta)?;
                at_least(section, "n_steps", o.n_steps, 1)?;
                at_least(section, "n_chains", o.n_chains, 1)?;
            }
            Command::Density => {
                let o = required(&self.density, section)?;
                o.validate(section)?;
                if o.tol.is_some() {
                    return Err(CliError::invalid(section, "tol", "only meaningful for lowerbound"));
                }
            }
            Command::Lowerbound => {
                let o = required(&self.lowerbound, section)?;
                o.validate(section)?;
                non_negative(section, "tol", o.lower_bound_tol())?;
            }
            Command::Ergodicity => {
                let o = required(&self.ergodicity, section)?;
                if o.x.is_empty() {
                    return Err(CliError::invalid(section, "x", "need at least one starting point"));
                }
                for &x in &o.x {
                    non_negative(section, "x", x)?;
                }
                positive(section, "delta", o.delta)?;
                at_least(section, "n_max", o.n_max, 3)?;
                at_least(section, "n_mc", o.n_mc, 100)?;
            }
        }
        Ok(params)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
