//! JSON run configuration: deserialization, defaults, and validation with
//! field-path error messages.

use std::fs;
use std::path::{Path, PathBuf};

use acflow::levelset::{LevelSetParams, PhiBc};
use acflow::mms::{builtin_cases, case_by_name, ManufacturedCase};
use acflow::scheme::{CaseOptions, GradDivCoef, Variant};
use serde::Deserialize;

use crate::CliError;

/// Time-step rule: a fixed ratio of the mesh size or one explicit value per
/// mesh level.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRule {
    HOver(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: String,
    #[serde(default = "default_variant")]
    variant: String,
    h: Vec<f64>,
    tau: TauRule,
    t_final: f64,
    #[serde(default = "default_lambda_user")]
    lambda_user: f64,
    #[serde(default = "default_c_visc")]
    c_visc: f64,
    #[serde(default)]
    c_comp: f64,
    #[serde(default = "default_phi_bc")]
    phi_bc: String,
    #[serde(default = "default_grad_div")]
    grad_div: String,
    output_dir: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_svg")]
    svg: bool,
}

fn default_variant() -> String {
    "semi_implicit".into()
}
fn default_lambda_user() -> f64 {
    1.0
}
fn default_c_visc() -> f64 {
    0.125
}
fn default_phi_bc() -> String {
    "dirichlet_exact".into()
}
fn default_grad_div() -> String {
    "lambda_bar".into()
}
fn default_svg() -> bool {
    true
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: ManufacturedCase,
    pub variant: Variant,
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
    pub t_final: f64,
    pub lambda_user: f64,
    pub c_visc: f64,
    pub c_comp: f64,
    pub phi_bc: PhiBc,
    pub grad_div: GradDivCoef,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

impl RunConfig {
    /// The solver options for mesh level `k`.
    pub fn case_options(&self, k: usize) -> CaseOptions {
        let mut opts = CaseOptions::new(self.h[k], self.tau[k]);
        opts.lambda_user = self.lambda_user;
        opts.variant = self.variant;
        opts.grad_div_implicit_coef = self.grad_div;
        opts.levelset = LevelSetParams {
            c_visc: self.c_visc,
            c_comp: self.c_comp,
            ..LevelSetParams::default()
        };
        opts.phi_bc = self.phi_bc;
        opts
    }

    pub fn steps(&self, k: usize) -> usize {
        (self.t_final / self.tau[k]).round().max(1.0) as usize
    }
}

fn err(path: &str, message: impl AsRef<str>) -> CliError {
    CliError::Config(format!("config.{path}: {}", message.as_ref()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config: invalid JSON: {e}")))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, CliError> {
    let case = case_by_name(&raw.case).ok_or_else(|| {
        let known: Vec<&str> = builtin_cases().iter().map(|c| c.name).collect();
        err("case", format!("unknown case {:?} (known: {})", raw.case, known.join(", ")))
    })?;

    let variant = match raw.variant.as_str() {
        "semi_implicit" => Variant::SemiImplicit,
        "explicit" => Variant::Explicit,
        other => {
            return Err(err(
                "variant",
                format!("expected \"semi_implicit\" or \"explicit\", got {other:?}"),
            ))
        }
    };

    if raw.h.is_empty() {
        return Err(err("h", "needs at least one mesh level"));
    }
    if let Some(bad) = raw.h.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(err("h", format!("mesh levels must be positive, got {bad}")));
    }
    if raw.h.windows(2).any(|w| w[1] >= w[0]) {
        return Err(err("h", "mesh levels must be strictly decreasing"));
    }

    if !(raw.t_final > 0.0) || !raw.t_final.is_finite() {
        return Err(err("t_final", format!("must be positive, got {}", raw.t_final)));
    }

    let tau = match &raw.tau {
        TauRule::HOver(factor) => {
            if !(*factor > 0.0) || !factor.is_finite() {
                return Err(err(
                    "tau.h_over",
                    format!("divisor must be positive, got {factor}"),
                ));
            }
            raw.h.iter().map(|h| h / factor).collect::<Vec<f64>>()
        }
        TauRule::List(values) => {
            if values.len() != raw.h.len() {
                return Err(err(
                    "tau.list",
                    format!("{} values for {} mesh levels", values.len(), raw.h.len()),
                ));
            }
            if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(err("tau.list", format!("time steps must be positive, got {bad}")));
            }
            values.clone()
        }
    };
    if let Some(bad) = tau.iter().find(|t| **t > raw.t_final) {
        return Err(err(
            "tau",
            format!("time step {bad} exceeds t_final {}", raw.t_final),
        ));
    }

    if !(raw.lambda_user > 0.0) || !raw.lambda_user.is_finite() {
        return Err(err(
            "lambda_user",
            format!("must be positive, got {}", raw.lambda_user),
        ));
    }
    if !(raw.c_visc >= 0.0) || !raw.c_visc.is_finite() {
        return Err(err("c_visc", format!("must be non-negative, got {}", raw.c_visc)));
    }
    if !(raw.c_comp >= 0.0) || !raw.c_comp.is_finite() {
        return Err(err("c_comp", format!("must be non-negative, got {}", raw.c_comp)));
    }

    let phi_bc = match raw.phi_bc.as_str() {
        "dirichlet_exact" => PhiBc::DirichletExact,
        "natural" => PhiBc::Natural,
        other => {
            return Err(err(
                "phi_bc",
                format!("expected \"dirichlet_exact\" or \"natural\", got {other:?}"),
            ))
        }
    };

    let grad_div = match raw.grad_div.as_str() {
        "lambda_bar" => GradDivCoef::LambdaBar,
        "lambda_eff" => GradDivCoef::LambdaEff,
        other => {
            return Err(err(
                "grad_div",
                format!("expected \"lambda_bar\" or \"lambda_eff\", got {other:?}"),
            ))
        }
    };

    if raw.output_dir.as_os_str().is_empty() {
        return Err(err("output_dir", "must not be empty"));
    }

    Ok(RunConfig {
        case,
        variant,
        h: raw.h,
        tau,
        t_final: raw.t_final,
        lambda_user: raw.lambda_user,
        c_visc: raw.c_visc,
        c_comp: raw.c_comp,
        phi_bc,
        grad_div,
        output_dir: raw.output_dir,
        seed: raw.seed,
        svg: raw.svg,
    })
}
