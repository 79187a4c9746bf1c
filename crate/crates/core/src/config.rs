//! Run configuration: a TOML file with mandatory `units`, resolved into
//! angular-frequency parameters, a steering schedule and integrator settings.
//!
//! ```toml
//! units = "MHz"              # or "dimensionless"
//!
//! [physical]                 # linear MHz (×2π internally) or dimensionless
//! g = 34.0
//! delta = 3400.0
//! omega = 34.0               # total Rabi amplitude, split by schedule.theta
//! kappa = 4.1
//! gamma = 2.6
//!
//! [schedule]
//! theta_over_pi = 0.25       # or theta (radians)
//! phi_dot_over_g = 1e-4      # or phi_dot (config units), phi_dot_over_gamma
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::{Frame, IntegratorConfig, Method, SteeringSchedule};
use crate::error::{Error, Result};
use crate::model::{self, PhysicalParams, ReservoirParams};

/// The Cs parameter set, also reachable as the config name `cs_defaults`.
pub const CS_DEFAULTS: &str = include_str!("../configs/cs_defaults.toml");

/// With φ̇ = 0 the reservoir is held fixed for this many 1/Γ.
pub const FROZEN_DURATION_OVER_GAMMA: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
pub enum Units {
    #[serde(rename = "MHz")]
    MHz,
    #[serde(rename = "dimensionless")]
    Dimensionless,
}

impl Units {
    /// Factor from config frequencies to internal angular frequencies.
    pub fn to_angular(self) -> f64 {
        match self {
            Units::MHz => 2.0 * PI,
            Units::Dimensionless => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Units::MHz => "MHz",
            Units::Dimensionless => "dimensionless",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    units: Option<Units>,
    physical: Option<RawPhysical>,
    schedule: Option<RawSchedule>,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    output: RawOutput,
    sweep: Option<RawSweep>,
    #[serde(default)]
    ramsey: RawRamsey,
    #[serde(default)]
    validate: RawValidate,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysical {
    g: Option<f64>,
    delta: Option<f64>,
    omega: Option<f64>,
    kappa: Option<f64>,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    phi1: f64,
    #[serde(default)]
    phi2: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    theta: Option<f64>,
    theta_over_pi: Option<f64>,
    phi_dot: Option<f64>,
    phi_dot_over_gamma: Option<f64>,
    phi_dot_over_g: Option<f64>,
    cycles: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<String>,
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    /// RK4 step in units of 1/Γ.
    step_over_gamma_inv: Option<f64>,
    max_steps: Option<usize>,
    frame: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    start: f64,
    stop: f64,
    count: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRamsey {
    fringe_points: Option<usize>,
    fringe_phi_dot_over_gamma: Option<f64>,
    svg: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValidate {
    n_max: Option<usize>,
    samples: Option<usize>,
    full_hamiltonian: Option<bool>,
    horizon_over_lambda: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    Theta,
    ThetaOverPi,
    PhiDotOverGamma,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Theta => "theta",
            SweepParameter::ThetaOverPi => "theta_over_pi",
            SweepParameter::PhiDotOverGamma => "phi_dot_over_gamma",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    /// Evenly spaced grid, `start` alone when `count == 1`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamseyOptions {
    /// θ points in (0, π) for the fringe curve; 0 disables it.
    pub fringe_points: usize,
    pub fringe_phi_dot_over_gamma: Option<f64>,
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateOptions {
    pub n_max: usize,
    pub samples: usize,
    pub full_hamiltonian: bool,
    pub horizon_over_lambda: f64,
}

/// A fully resolved configuration; all rates are angular.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub name: String,
    pub units: Units,
    pub params: PhysicalParams,
    pub theta: f64,
    pub phi_dot: f64,
    pub cycles: u32,
    pub frame: Frame,
    pub integrator: IntegratorConfig,
    pub out_dir: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
    pub ramsey: RamseyOptions,
    pub validate: ValidateOptions,
    /// Non-fatal hierarchy warnings.
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn reservoir(&self) -> Result<ReservoirParams> {
        model::derive_reservoir(&self.params)
    }

    pub fn decay_rate(&self) -> f64 {
        let lambda = self.params.omega() * self.params.g / self.params.delta;
        lambda * lambda / self.params.kappa
    }

    /// Same configuration at another θ; the Rabi split follows θ.
    pub fn with_theta(&self, theta: f64) -> Result<RunConfig> {
        model::check_theta(theta)?;
        let p = &self.params;
        let mut out = self.clone();
        out.params = PhysicalParams::from_total_rabi(
            p.g,
            p.delta,
            p.omega(),
            theta,
            p.phi1,
            p.phi2,
            p.kappa,
            p.gamma,
        );
        out.theta = theta;
        Ok(out)
    }

    pub fn with_phi_dot(&self, phi_dot: f64) -> RunConfig {
        RunConfig {
            phi_dot,
            ..self.clone()
        }
    }

    /// Linear φ over `cycles` turns, or a frozen reservoir when φ̇ = 0.
    pub fn schedule(&self) -> Result<SteeringSchedule> {
        if self.phi_dot == 0.0 {
            return SteeringSchedule::frozen(
                self.theta,
                0.0,
                FROZEN_DURATION_OVER_GAMMA / self.decay_rate(),
            );
        }
        let mut s = SteeringSchedule::constant_theta_linear_phi(self.theta, self.phi_dot)?;
        if let SteeringSchedule::LinearPhi { cycles, .. } = &mut s {
            *cycles = self.cycles;
        }
        Ok(s)
    }

    /// Converts an angular frequency back to config units.
    pub fn to_config_units(&self, w: f64) -> f64 {
        w / self.units.to_angular()
    }
}

/// Loads a config by path, or the shipped set when `path` is `cs_defaults`
/// and no such file exists.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if !path.exists() && path.as_os_str() == "cs_defaults" {
        return parse_config(CS_DEFAULTS, "cs_defaults");
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &name)
}

pub fn parse_config(text: &str, name: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    resolve(raw, name)
}

fn exactly_one(section: &str, options: &[(&str, Option<f64>)]) -> Result<(usize, f64)> {
    let given: Vec<(usize, f64)> = options
        .iter()
        .enumerate()
        .filter_map(|(i, (_, v))| v.map(|v| (i, v)))
        .collect();
    match given.as_slice() {
        [one] => Ok(*one),
        _ => {
            let names: Vec<String> = options.iter().map(|(n, _)| format!("{section}.{n}")).collect();
            Err(Error::Config(format!(
                "exactly one of {} is required, {} given",
                names.join(", "),
                given.len()
            )))
        }
    }
}

fn resolve(raw: RawConfig, name: &str) -> Result<RunConfig> {
    let mut missing = Vec::new();
    if raw.units.is_none() {
        missing.push("units".to_string());
    }
    let phys = raw.physical.unwrap_or_else(|| {
        missing.push("physical".to_string());
        RawPhysical::default()
    });
    let sched = raw.schedule.unwrap_or_else(|| {
        missing.push("schedule".to_string());
        RawSchedule::default()
    });
    for (field, v) in [
        ("g", phys.g),
        ("delta", phys.delta),
        ("omega", phys.omega),
        ("kappa", phys.kappa),
    ] {
        if v.is_none() {
            missing.push(format!("physical.{field}"));
        }
    }
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "missing required fields: {}",
            missing.join(", ")
        )));
    }
    let units = raw.units.expect("checked above");
    let w = units.to_angular();

    let (which, theta) = exactly_one(
        "schedule",
        &[("theta", sched.theta), ("theta_over_pi", sched.theta_over_pi)],
    )?;
    let theta = if which == 1 { theta * PI } else { theta };
    model::check_theta(theta).map_err(|e| Error::Config(format!("schedule: {e}")))?;

    let params = PhysicalParams::from_total_rabi(
        phys.g.unwrap() * w,
        phys.delta.unwrap() * w,
        phys.omega.unwrap() * w,
        theta,
        phys.phi1,
        phys.phi2,
        phys.kappa.unwrap() * w,
        phys.gamma * w,
    );
    params
        .validate()
        .map_err(|e| Error::Config(format!("physical: {e}")))?;
    let lambda = params.omega() * params.g / params.delta;
    let decay = lambda * lambda / params.kappa;

    let (which, v) = exactly_one(
        "schedule",
        &[
            ("phi_dot", sched.phi_dot),
            ("phi_dot_over_gamma", sched.phi_dot_over_gamma),
            ("phi_dot_over_g", sched.phi_dot_over_g),
        ],
    )?;
    let phi_dot = match which {
        0 => v * w,
        1 => v * decay,
        _ => v * params.g,
    };
    if !phi_dot.is_finite() {
        return Err(Error::Config("schedule: phi_dot must be finite".into()));
    }
    let cycles = sched.cycles.unwrap_or(1);
    if cycles == 0 {
        return Err(Error::Config("schedule.cycles must be at least 1".into()));
    }

    let ri = raw.integrator;
    let method = match ri.method.as_deref().unwrap_or("dopri") {
        "dopri" => Method::DormandPrince {
            abs_tol: ri.abs_tol.unwrap_or(1e-10),
            rel_tol: ri.rel_tol.unwrap_or(1e-8),
        },
        "rk4" => Method::Rk4 {
            step: ri.step_over_gamma_inv.unwrap_or(1e-2) / decay,
        },
        other => {
            return Err(Error::Config(format!(
                "integrator.method must be \"dopri\" or \"rk4\", got \"{other}\""
            )))
        }
    };
    let integrator = IntegratorConfig {
        method,
        max_steps: ri.max_steps.unwrap_or(IntegratorConfig::default().max_steps),
        ..Default::default()
    };
    integrator
        .validate()
        .map_err(|e| Error::Config(format!("integrator: {e}")))?;
    let frame = match ri.frame.as_deref().unwrap_or("rotating") {
        "lab" => Frame::Lab,
        "rotating" => Frame::Rotating,
        other => {
            return Err(Error::Config(format!(
                "integrator.frame must be \"lab\" or \"rotating\", got \"{other}\""
            )))
        }
    };

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            let parameter = match s.parameter.as_str() {
                "theta" => SweepParameter::Theta,
                "theta_over_pi" => SweepParameter::ThetaOverPi,
                "phi_dot_over_gamma" => SweepParameter::PhiDotOverGamma,
                other => {
                    return Err(Error::Config(format!(
                        "sweep.parameter must be theta, theta_over_pi or phi_dot_over_gamma, got \"{other}\""
                    )))
                }
            };
            if s.count == 0 || !s.start.is_finite() || !s.stop.is_finite() {
                return Err(Error::Config("sweep needs count ≥ 1 and finite bounds".into()));
            }
            Some(SweepSpec {
                parameter,
                start: s.start,
                stop: s.stop,
                count: s.count,
            })
        }
    };

    let ramsey = RamseyOptions {
        fringe_points: raw.ramsey.fringe_points.unwrap_or(0),
        fringe_phi_dot_over_gamma: raw.ramsey.fringe_phi_dot_over_gamma,
        svg: raw.ramsey.svg.unwrap_or(true),
    };
    let validate = ValidateOptions {
        n_max: raw.validate.n_max.unwrap_or(crate::cavity::DEFAULT_N_MAX),
        samples: raw.validate.samples.unwrap_or(crate::cavity::DEFAULT_SAMPLES),
        full_hamiltonian: raw.validate.full_hamiltonian.unwrap_or(true),
        horizon_over_lambda: raw.validate.horizon_over_lambda.unwrap_or(10.0),
    };
    if validate.n_max < 1 || validate.samples < 2 || !(validate.horizon_over_lambda > 0.0) {
        return Err(Error::Config(
            "validate needs n_max ≥ 1, samples ≥ 2 and a positive horizon".into(),
        ));
    }

    Ok(RunConfig {
        name: name.to_string(),
        units,
        warnings: params.hierarchy().warnings(),
        params,
        theta,
        phi_dot,
        cycles,
        frame,
        integrator,
        out_dir: raw.output.dir,
        sweep,
        ramsey,
        validate,
    })
}
