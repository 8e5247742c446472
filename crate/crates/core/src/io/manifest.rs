//! Run manifests: preset, config file and command-line overrides merged into
//! validated domain values.
//!
//! The config file is a flat list of `key = value` pairs (TOML syntax, so
//! strings are quoted: `frame = "both"`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::domain::{ControlSpec, Method, SimConfig, SystemParams};
use crate::dynamics::Frame;

use super::CliError;

/// Frames to propagate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameSelection {
    Exact,
    Rwa,
    Both,
}

impl FrameSelection {
    pub fn frames(&self) -> &'static [Frame] {
        match self {
            FrameSelection::Exact => &[Frame::Exact],
            FrameSelection::Rwa => &[Frame::Rwa],
            FrameSelection::Both => &[Frame::Exact, Frame::Rwa],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FrameSelection::Exact => "exact",
            FrameSelection::Rwa => "rwa",
            FrameSelection::Both => "both",
        }
    }
}

impl std::str::FromStr for FrameSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(FrameSelection::Exact),
            "rwa" => Ok(FrameSelection::Rwa),
            "both" => Ok(FrameSelection::Both),
            other => Err(format!(
                "unknown frame `{other}` (expected exact, rwa or both)"
            )),
        }
    }
}

/// Built-in parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// μ = 6, ω₀ = 0.02, a_i = 0.4, a_f = 1, α = 0.01, φ = 0.
    Fig1,
    /// As `Fig1` with α = 0.05.
    Fig2,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
        }
    }

    fn settings(&self) -> RawConfig {
        RawConfig {
            mu: Some(6.0),
            omega0: Some(0.02),
            a_i: Some(0.4),
            a_f: Some(1.0),
            alpha: Some(match self {
                Preset::Fig1 => 0.01,
                Preset::Fig2 => 0.05,
            }),
            phi: Some(0.0),
            frame: Some("both".into()),
            ..RawConfig::default()
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            other => Err(format!("unknown preset `{other}` (expected fig1 or fig2)")),
        }
    }
}

/// Every recognised config key; all optional until validation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mu: Option<f64>,
    pub omega0: Option<f64>,
    pub a_i: Option<f64>,
    pub a_f: Option<f64>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub method: Option<String>,
    pub step: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub output_step: Option<f64>,
    pub record_stride: Option<usize>,
    pub frame: Option<String>,
    pub out: Option<PathBuf>,
    pub alphas: Option<Vec<f64>>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident, $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// One `key=value` override. Bare words are accepted as strings.
    pub fn parse_override(assignment: &str) -> Result<Self, CliError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "override `{assignment}` is not of the form key=value"
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        Self::parse(&format!("{key} = {value}"))
            .or_else(|_| Self::parse(&format!("{key} = \"{value}\"")))
            .map_err(|e| CliError::Config(format!("override `{assignment}`: {}", e.message())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: RawConfig) -> Self {
        merge_fields!(
            self,
            other,
            mu,
            omega0,
            a_i,
            a_f,
            alpha,
            phi,
            t_start,
            t_end,
            method,
            step,
            rel_tol,
            abs_tol,
            output_step,
            record_stride,
            frame,
            out,
            alphas
        );
        self
    }
}

/// Validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub spec: ControlSpec,
    pub params: SystemParams,
    pub sim: SimConfig,
    pub frame: FrameSelection,
    pub out_dir: PathBuf,
    pub alphas: Vec<f64>,
}

fn require(value: Option<f64>, key: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
}

impl RunManifest {
    pub fn preset(preset: Preset) -> Self {
        Self::from_raw(preset.settings()).expect("preset parameters are valid")
    }

    /// Layers `preset`, then `config` file, then `overrides`.
    pub fn load(
        preset: Option<Preset>,
        config: Option<&Path>,
        overrides: &[String],
    ) -> Result<Self, CliError> {
        let mut raw = preset.map(|p| p.settings()).unwrap_or_default();
        if let Some(path) = config {
            raw = raw.merge(RawConfig::from_file(path)?);
        }
        for o in overrides {
            raw = raw.merge(RawConfig::parse_override(o)?);
        }
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        let params = SystemParams::new(require(raw.omega0, "omega0")?, require(raw.mu, "mu")?)
            .map_err(CliError::invalid)?;
        let spec = ControlSpec::new(
            require(raw.a_i, "a_i")?,
            require(raw.a_f, "a_f")?,
            require(raw.alpha, "alpha")?,
            raw.phi.unwrap_or(0.0),
        )
        .map_err(CliError::invalid)?;

        let (default_start, default_end) = spec.default_window();
        let t_start = raw.t_start.unwrap_or(default_start);
        let t_end = raw.t_end.unwrap_or(default_end);
        let method = match raw.method.as_deref().unwrap_or("adaptive") {
            "adaptive" => Method::Adaptive {
                rel_tol: raw.rel_tol.unwrap_or(Method::DEFAULT_REL_TOL),
                abs_tol: raw.abs_tol.unwrap_or(Method::DEFAULT_ABS_TOL),
            },
            "rk4" => Method::Rk4 {
                step: raw.step.unwrap_or(params.carrier_period() / 200.0),
            },
            other => {
                return Err(CliError::Config(format!(
                    "key `method`: unknown value `{other}` (expected adaptive or rk4)"
                )))
            }
        };
        let sim = SimConfig::new(
            t_start,
            t_end,
            method,
            raw.output_step.unwrap_or(1.0),
            raw.record_stride.unwrap_or(1),
        )
        .map_err(CliError::invalid)?;

        let frame = match raw.frame.as_deref() {
            None => FrameSelection::Exact,
            Some(s) => s
                .parse()
                .map_err(|e| CliError::Config(format!("key `frame`: {e}")))?,
        };
        let alphas = raw.alphas.unwrap_or_default();
        if let Some(bad) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(CliError::Config(format!(
                "key `alphas`: {bad} is not positive"
            )));
        }

        Ok(Self {
            spec,
            params,
            sim,
            frame,
            out_dir: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            alphas,
        })
    }
}
