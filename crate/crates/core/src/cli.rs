//! Subcommand runner behind the `geophase` binary. Each subcommand writes
//! one artifact (JSON, CSV or SVG) into the output directory and returns the
//! list of files it wrote.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic;
use crate::cavity::{self, FockConfig};
use crate::config::{RunConfig, SweepParameter};
use crate::dynamics::{self, CycleResult, Frame};
use crate::error::{Error, Result};
use crate::model::E;
use crate::numlin::wrap_angle;
use crate::ramsey;
use crate::report::{self, sci, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Derive,
    Cycle,
    Ramsey,
    Sweep,
    Validate,
    Analytic,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Derive,
        Subcommand::Cycle,
        Subcommand::Ramsey,
        Subcommand::Sweep,
        Subcommand::Validate,
        Subcommand::Analytic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Derive => "derive",
            Subcommand::Cycle => "cycle",
            Subcommand::Ramsey => "ramsey",
            Subcommand::Sweep => "sweep",
            Subcommand::Validate => "validate",
            Subcommand::Analytic => "analytic",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand \"{s}\"")))
    }
}

/// Columns of the `sweep` CSV.
pub const SWEEP_COLUMNS: [&str; 9] = [
    "grid_index",
    "theta",
    "phi_dot_over_Gamma",
    "beta_analytic",
    "beta_numeric",
    "damping_analytic",
    "damping_numeric",
    "abs_err_beta",
    "leak_to_g",
];

/// Runs `cmd`, writing into `out_dir` (falls back to the config's
/// `output.dir`, then `out`). `jobs` bounds the worker threads of parallel
/// subcommands.
pub fn run_subcommand(
    cmd: Subcommand,
    cfg: &RunConfig,
    out_dir: Option<&Path>,
    jobs: Option<usize>,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Io(e.to_string()))?;
    let files = pool.install(|| -> Result<Vec<(String, String)>> {
        Ok(match cmd {
            Subcommand::Derive => vec![("derive.json".into(), derive(cfg)?.to_json())],
            Subcommand::Analytic => vec![("analytic.json".into(), analytic_report(cfg)?.to_json())],
            Subcommand::Cycle => vec![("cycle.json".into(), cycle(cfg)?.to_json())],
            Subcommand::Ramsey => ramsey_files(cfg)?,
            Subcommand::Sweep => vec![("sweep_cycle.csv".into(), sweep_csv(cfg)?)],
            Subcommand::Validate => vec![("validate.json".into(), validate(cfg)?.to_json())],
        })
    })?;
    let mut written = Vec::new();
    for (name, body) in files {
        report::write_file(&dir, &name, &body)?;
        written.push(dir.join(name));
    }
    Ok(written)
}

fn header(cmd: &str, cfg: &RunConfig) -> Result<Record> {
    let mut r = Record::new();
    r.text("subcommand", cmd)
        .child("params", report::params_record(cfg)?)
        .texts("warnings", &cfg.warnings);
    Ok(r)
}

/// Adds an angular rate and, in MHz mode, its linear copy.
fn rate(r: &mut Record, cfg: &RunConfig, key: &str, w: f64) -> Result<()> {
    r.num(key, w)?;
    if cfg.units == crate::config::Units::MHz {
        r.num(&format!("{key}_mhz"), cfg.to_config_units(w))?;
    }
    Ok(())
}

pub fn derive(cfg: &RunConfig) -> Result<Record> {
    let res = cfg.reservoir()?;
    let raman = res.raman.expect("derived reservoirs carry Raman rates");
    let h = cfg.params.hierarchy();
    let mut r = header("derive", cfg)?;
    rate(&mut r, cfg, "Gamma", res.decay_rate)?;
    rate(&mut r, cfg, "lambda", raman.lambda)?;
    rate(&mut r, cfg, "lambda1", raman.lambda1)?;
    rate(&mut r, cfg, "lambda2", raman.lambda2)?;
    rate(&mut r, cfg, "stark_shift", cfg.params.g * cfg.params.g / cfg.params.delta)?;
    r.num("theta", res.theta)?
        .num("phi", res.phi)?
        .num("delta_over_omega", h.delta_over_omega)?
        .num("delta_over_g", h.delta_over_g)?
        .num("kappa_over_stark", h.kappa_over_stark)?
        .num("kappa_over_lambda", h.kappa_over_lambda)?;
    Ok(r)
}

pub fn analytic_report(cfg: &RunConfig) -> Result<Record> {
    let gam = cfg.decay_rate();
    let (theta, pd) = (cfg.theta, cfg.phi_dot);
    let (beta, solid) = analytic::berry_phase_and_solid_angle(theta);
    let mut r = header("analytic", cfg)?;
    rate(&mut r, cfg, "Gamma", gam)?;
    r.num("phi_dot_over_Gamma", pd / gam)?
        .num("beta", beta)?
        .num("solid_angle", solid)?
        .num("leak_parameter", analytic::leak_parameter(gam, theta, pd))?;
    if pd != 0.0 {
        let pair = analytic::lambdas(gam, theta, pd)?;
        let v = analytic::visibility(theta, pd, gam)?;
        let ram = ramsey::ramsey_analytic(gam, theta, pd)?;
        let pen = analytic::spontaneous_penalty(&cfg.params, theta, pd)?;
        let (eg, fg) = analytic::coherence_exact(2.0 * std::f64::consts::PI / pd.abs(), num_complex::Complex64::new(1.0, 0.0), gam, theta, pd)?;
        r.num("visibility", v)?
            .num("visibility_spontaneous", pen.visibility_factor)?
            .num("gamma_e_T", pen.exponent())?
            .num("bright_population", pen.bright_population)?
            .num("cycle_time", pen.duration)?
            .num("p_g", ram.outcome.p_g)?
            .num("p_e", ram.outcome.p_e)?
            .num("lambda_plus_re", pair.lambda_plus.re)?
            .num("lambda_plus_im", pair.lambda_plus.im)?
            .num("lambda_minus_re", pair.lambda_minus.re)?
            .num("lambda_minus_im", pair.lambda_minus.im)?
            .num("exact_rho_eg_ratio_abs", eg.norm())?
            .num("exact_rho_eg_ratio_arg", eg.arg())?
            .num("exact_rho_fg_ratio_abs", fg.norm())?;
        if let Some(w) = ram.warning {
            r.text("adiabatic_warning", &w);
        }
    } else {
        r.num("visibility", 1.0)?;
    }
    Ok(r)
}

struct CycleRow {
    theta: f64,
    phi_dot_over_gamma: f64,
    beta_analytic: f64,
    result: CycleResult,
    damping_analytic: f64,
}

impl CycleRow {
    fn abs_err_beta(&self) -> f64 {
        wrap_angle(self.result.beta_num - self.beta_analytic).abs()
    }
}

fn run_cycle_for(cfg: &RunConfig) -> Result<CycleRow> {
    let gam = cfg.decay_rate();
    let r = cfg.reservoir()?;
    let sched = cfg.schedule()?;
    let rho0 = ramsey::initial_superposition(cfg.theta)?;
    let result = dynamics::run_cycle(&r, &sched, &rho0, cfg.frame, &cfg.integrator)?;
    let turns = if cfg.phi_dot == 0.0 { 0.0 } else { f64::from(cfg.cycles) };
    let (beta, _) = analytic::berry_phase_and_solid_angle(cfg.theta);
    let x = analytic::leak_parameter(gam, cfg.theta, cfg.phi_dot.abs());
    Ok(CycleRow {
        theta: cfg.theta,
        phi_dot_over_gamma: cfg.phi_dot / gam,
        beta_analytic: turns * beta * cfg.phi_dot.signum(),
        result,
        damping_analytic: (-turns * x / 2.0).exp(),
    })
}

pub fn cycle(cfg: &RunConfig) -> Result<Record> {
    let row = run_cycle_for(cfg)?;
    let res = &row.result;
    let mut r = header("cycle", cfg)?;
    r.text(
        "frame",
        match cfg.frame {
            Frame::Lab => "lab",
            Frame::Rotating => "rotating",
        },
    )
    .num("phi_dot_over_Gamma", row.phi_dot_over_gamma)?
    .num("beta_analytic", row.beta_analytic)?
    .num("beta_numeric", res.beta_num)?
    .num("abs_err_beta", row.abs_err_beta())?
    .num("damping_analytic", row.damping_analytic)?
    .num("damping_numeric", res.damping)?
    .num("abs_err_damping", (res.damping - row.damping_analytic).abs())?
    .num("rel_err_damping", (res.damping / row.damping_analytic - 1.0).abs())?
    .num("leak_to_g", res.leak_to_g)?
    .int("steps_accepted", res.stats.accepted as u64)
    .int("steps_rejected", res.stats.rejected as u64)
    .int("rhs_evals", res.stats.rhs_evals as u64);
    Ok(r)
}

fn fringe_thetas(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| std::f64::consts::PI * i as f64 / (n + 1) as f64)
        .collect()
}

fn ramsey_files(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let gam = cfg.decay_rate();
    let r = cfg.reservoir()?;
    let sched = cfg.schedule()?;
    let num = ramsey::run_ramsey_numeric(&r, &sched, &cfg.integrator)?;
    let mut rec = header("ramsey", cfg)?;
    rec.num("phi_dot_over_Gamma", cfg.phi_dot / gam)?
        .num("p_g_numeric", num.p_g)?
        .num("p_e_numeric", num.p_e)?
        .num("p_f_numeric", num.p_f)?
        .num("beta_numeric", num.beta_used)?
        .num("probability_sum_defect", (num.p_g + num.p_e + num.p_f - 1.0).abs())?;
    if cfg.phi_dot != 0.0 {
        let ana = ramsey::ramsey_analytic(gam, cfg.theta, cfg.phi_dot)?;
        rec.num("p_g_analytic", ana.outcome.p_g)?
            .num("p_e_analytic", ana.outcome.p_e)?
            .num("visibility", ana.outcome.visibility)?
            .num("beta_analytic", ana.outcome.beta_used)?
            .num("abs_err_p_g", (num.p_g - ana.outcome.p_g).abs())?;
    }
    let mut files = Vec::new();
    let n = cfg.ramsey.fringe_points;
    if n > 0 {
        let ratio = cfg
            .ramsey
            .fringe_phi_dot_over_gamma
            .unwrap_or(cfg.phi_dot / gam);
        let pts = ramsey::fringe_sweep(gam, ratio, &fringe_thetas(n), &cfg.integrator)?;
        let mut rows = Vec::new();
        for p in &pts {
            let mut x = Record::new();
            x.num("theta", p.theta)?
                .num("p_g_numeric", p.p_g_numeric)?
                .num("p_g_analytic", p.p_g_analytic)?
                .num("abs_err", (p.p_g_numeric - p.p_g_analytic).abs())?
                .num("p_sum", p.p_sum)?;
            rows.push(x);
        }
        rec.num("fringe_phi_dot_over_Gamma", ratio)?
            .num(
                "fringe_max_abs_err",
                pts.iter()
                    .map(|p| (p.p_g_numeric - p.p_g_analytic).abs())
                    .fold(0.0, f64::max),
            )?
            .children("fringe", rows);
        if cfg.ramsey.svg {
            let title = format!("Ramsey fringe, φ̇/Γ = {ratio:.4}");
            files.push(("ramsey_fringe.svg".to_string(), report::fringe_svg(&pts, &title)));
        }
    }
    files.insert(0, ("ramsey.json".to_string(), rec.to_json()));
    Ok(files)
}

/// Grid configurations for the sweep, in grid order.
pub fn sweep_points(cfg: &RunConfig) -> Result<Vec<RunConfig>> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a [sweep] section".into()))?;
    spec.values()
        .into_iter()
        .map(|v| match spec.parameter {
            SweepParameter::Theta => cfg.with_theta(v),
            SweepParameter::ThetaOverPi => cfg.with_theta(v * std::f64::consts::PI),
            SweepParameter::PhiDotOverGamma => Ok(cfg.with_phi_dot(v * cfg.decay_rate())),
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::InvalidParams(m) => Error::Config(format!("sweep: {m}")),
            other => other,
        })
}

pub fn sweep_csv(cfg: &RunConfig) -> Result<String> {
    let points = sweep_points(cfg)?;
    let rows: Vec<CycleRow> = points
        .par_iter()
        .map(run_cycle_for)
        .collect::<Result<Vec<_>>>()?;
    let spec = cfg.sweep.as_ref().expect("checked in sweep_points");
    let mut head = report::params_header(cfg)?;
    head.push(format!(
        "sweep = {} from {} to {} ({} points)",
        spec.parameter.name(),
        sci(spec.start),
        sci(spec.stop),
        spec.count
    ));
    let table: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            vec![
                i.to_string(),
                sci(row.theta),
                sci(row.phi_dot_over_gamma),
                sci(row.beta_analytic),
                sci(row.result.beta_num),
                sci(row.damping_analytic),
                sci(row.result.damping),
                sci(row.abs_err_beta()),
                sci(row.result.leak_to_g),
            ]
        })
        .collect();
    if table.iter().flatten().any(|s| s.contains("NaN") || s.contains("inf")) {
        return Err(Error::InvalidState("sweep produced a non-finite value".into()));
    }
    report::csv_table(&head, &SWEEP_COLUMNS, &table)
}

pub fn validate(cfg: &RunConfig) -> Result<Record> {
    let opts = &cfg.validate;
    let sched = cfg.schedule()?;
    let fock = FockConfig::effective(opts.n_max);
    let elim = cavity::validate_elimination(&cfg.params, &sched, &fock, &cfg.integrator)?;
    let mut e = Record::new();
    e.num("max_trace_distance", elim.max_trace_distance)?
        .num("fitted_Gamma", elim.fitted_gamma)?
        .num("predicted_Gamma", elim.predicted_gamma)?
        .num("fitted_over_predicted", elim.fitted_gamma / elim.predicted_gamma)?
        .num("ratio_kappa_lambda", elim.kappa_over_lambda)?
        .num("max_photon_number", elim.max_photon_number)?
        .flag("photons_virtual", elim.photons_virtual())
        .int("n_max", elim.n_max as u64)
        .num("truncation_change", elim.truncation_change)?;
    let mut r = header("validate", cfg)?;
    r.child("elimination", e);

    if opts.full_hamiltonian {
        let lambda = cfg.params.omega() * cfg.params.g / cfg.params.delta;
        let full = cavity::validate_full_hamiltonian(
            &cfg.params,
            E,
            1,
            opts.horizon_over_lambda / lambda,
            &FockConfig::full(opts.n_max.max(2)),
            &cfg.integrator,
            opts.samples,
        )?;
        let mut f = Record::new();
        f.text("initial_state", "|e,1>")
            .num("horizon", opts.horizon_over_lambda / lambda)?
            .num("max_r_population", full.max_r_population)?
            .num("r_population_over_ratio_sq", full.r_population_coefficient)?
            .num("min_overlap", full.min_overlap)?
            .num("overlap_deficit", full.overlap_deficit)?;
        r.child("full_hamiltonian", f);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_round_trip() {
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
        }
        assert_eq!("nope".parse::<Subcommand>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn fringe_grid_avoids_poles() {
        let t = fringe_thetas(3);
        assert_eq!(t.len(), 3);
        assert!((t[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(t[0] > 0.0 && t[2] < std::f64::consts::PI);
    }
}
