//! Time integration of the reservoir master equation under a steering
//! schedule, and extraction of the geometric phase from a closed cycle.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{self, Dissipator, ReservoirParams, ATOM_DIM, G};
use crate::numlin::{self, CMatrix, DensityMatrix};
use crate::tol;

/// Instantaneous reservoir angles and their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angles {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
}

/// Value and first derivative of a steering coordinate.
pub type Curve = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// How (θ, φ) move during a run.
#[derive(Clone)]
pub enum SteeringSchedule {
    /// θ fixed, φ(t) = φ₀ + φ̇t over `cycles` full turns.
    LinearPhi {
        theta: f64,
        phi0: f64,
        phi_dot: f64,
        cycles: u32,
    },
    /// Reservoir held still for `duration`.
    Frozen { theta: f64, phi: f64, duration: f64 },
    /// Arbitrary smooth path; each curve returns (value, derivative).
    Custom {
        theta: Curve,
        phi: Curve,
        duration: f64,
    },
}

impl fmt::Debug for SteeringSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteeringSchedule::LinearPhi {
                theta,
                phi0,
                phi_dot,
                cycles,
            } => f
                .debug_struct("LinearPhi")
                .field("theta", theta)
                .field("phi0", phi0)
                .field("phi_dot", phi_dot)
                .field("cycles", cycles)
                .finish(),
            SteeringSchedule::Frozen {
                theta,
                phi,
                duration,
            } => f
                .debug_struct("Frozen")
                .field("theta", theta)
                .field("phi", phi)
                .field("duration", duration)
                .finish(),
            SteeringSchedule::Custom { duration, .. } => {
                f.debug_struct("Custom").field("duration", duration).finish()
            }
        }
    }
}

impl SteeringSchedule {
    /// One full turn of φ starting at 0, duration T = 2π/φ̇.
    pub fn constant_theta_linear_phi(theta: f64, phi_dot: f64) -> Result<Self> {
        model::check_theta(theta)?;
        if phi_dot == 0.0 || !phi_dot.is_finite() {
            return Err(Error::InvalidParams(
                "phi_dot must be non-zero for a linear-phi cycle; use Frozen instead".into(),
            ));
        }
        Ok(SteeringSchedule::LinearPhi {
            theta,
            phi0: 0.0,
            phi_dot,
            cycles: 1,
        })
    }

    pub fn frozen(theta: f64, phi: f64, duration: f64) -> Result<Self> {
        model::check_theta(theta)?;
        if !(duration > 0.0) {
            return Err(Error::InvalidParams("duration must be positive".into()));
        }
        Ok(SteeringSchedule::Frozen {
            theta,
            phi,
            duration,
        })
    }

    pub fn duration(&self) -> f64 {
        match self {
            SteeringSchedule::LinearPhi {
                phi_dot, cycles, ..
            } => 2.0 * PI * f64::from(*cycles) / phi_dot.abs(),
            SteeringSchedule::Frozen { duration, .. } => *duration,
            SteeringSchedule::Custom { duration, .. } => *duration,
        }
    }

    pub fn angles(&self, t: f64) -> Angles {
        match self {
            SteeringSchedule::LinearPhi {
                theta,
                phi0,
                phi_dot,
                ..
            } => Angles {
                theta: *theta,
                phi: phi0 + phi_dot * t,
                theta_dot: 0.0,
                phi_dot: *phi_dot,
            },
            SteeringSchedule::Frozen { theta, phi, .. } => Angles {
                theta: *theta,
                phi: *phi,
                theta_dot: 0.0,
                phi_dot: 0.0,
            },
            SteeringSchedule::Custom { theta, phi, .. } => {
                let (th, thd) = theta(t);
                let (ph, phd) = phi(t);
                Angles {
                    theta: th,
                    phi: ph,
                    theta_dot: thd,
                    phi_dot: phd,
                }
            }
        }
    }

    /// True iff θ and φ mod 2π return to their starting values.
    pub fn is_cyclic(&self) -> bool {
        match self {
            SteeringSchedule::LinearPhi { .. } | SteeringSchedule::Frozen { .. } => true,
            SteeringSchedule::Custom { .. } => {
                let a = self.angles(0.0);
                let b = self.angles(self.duration());
                let dphi = (b.phi - a.phi) / (2.0 * PI);
                (a.theta - b.theta).abs() < 1e-9 && (dphi - dphi.round()).abs() < 1e-9
            }
        }
    }

    /// Largest relative mismatch between the stated derivatives and central
    /// finite differences at a handful of interior points.
    pub fn derivative_mismatch(&self) -> f64 {
        let t_end = self.duration();
        let h = 1e-6 * t_end.max(1e-300);
        let mut worst = 0.0f64;
        for k in 1..8 {
            let t = t_end * k as f64 / 8.0;
            let a = self.angles(t);
            let p = self.angles(t + h);
            let m = self.angles(t - h);
            for (exact, fd, scale) in [
                (a.theta_dot, (p.theta - m.theta) / (2.0 * h), a.theta_dot.abs()),
                (a.phi_dot, (p.phi - m.phi) / (2.0 * h), a.phi_dot.abs()),
            ] {
                let denom = scale.max(1.0 / t_end);
                worst = worst.max((exact - fd).abs() / denom);
            }
        }
        worst
    }
}

/// Stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classic fourth-order Runge–Kutta with (at most) the given step.
    Rk4 { step: f64 },
    /// Dormand–Prince embedded 5(4) pair with mixed error control.
    DormandPrince { abs_tol: f64, rel_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub max_steps: usize,
    /// Upper bound on the adaptive step. Explicit schemes amplify round-off
    /// once h exceeds their stability limit, so drivers cap this at the
    /// inverse of the fastest decay rate.
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::DormandPrince {
                abs_tol: 1e-10,
                rel_tol: 1e-8,
            },
            max_steps: 50_000_000,
            max_step: f64::INFINITY,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Self {
        IntegratorConfig {
            method: Method::DormandPrince { abs_tol, rel_tol },
            ..Default::default()
        }
    }

    /// RK4 with h = 10⁻² / (fastest rate in the problem).
    pub fn fixed_for_rates(rates: &[f64]) -> Self {
        let fastest = rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        IntegratorConfig {
            method: Method::Rk4 {
                step: 1e-2 / fastest.max(f64::MIN_POSITIVE),
            },
            ..Default::default()
        }
    }

    /// Same config with the step capped at `h` (never loosened).
    pub fn with_max_step(&self, h: f64) -> Self {
        IntegratorConfig {
            max_step: self.max_step.min(h),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParams("max_step must be positive".into()));
        }
        let ok = match self.method {
            Method::Rk4 { step } => step > 0.0 && step.is_finite(),
            Method::DormandPrince { abs_tol, rel_tol } => abs_tol > 0.0 && rel_tol > 0.0,
        };
        if !ok || self.max_steps == 0 {
            return Err(Error::InvalidParams("integrator tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Counters from one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` on a flat complex vector.
///
/// `sample_times` (ascending, inside `[t0, t1]`) are hit exactly; the state
/// there is handed to `on_sample` together with its index.
pub fn solve<F, S>(
    mut rhs: F,
    y0: &[C64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    sample_times: &[f64],
    mut on_sample: S,
) -> Result<(Vec<C64>, StepStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidParams(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let mut stops: Vec<(f64, Option<usize>)> = sample_times
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, Some(i)))
        .collect();
    if stops.windows(2).any(|w| w[1].0 < w[0].0)
        || stops.iter().any(|&(t, _)| t < t0 || t > t1)
    {
        return Err(Error::InvalidParams(
            "sample times must be ascending and inside the integration span".into(),
        ));
    }
    if stops.last().is_none_or(|&(t, _)| t < t1) {
        stops.push((t1, None));
    }

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut stats = StepStats::default();
    let mut stepper = Stepper::new(y.len());
    let mut h_adapt: Option<f64> = None;

    for (stop, idx) in stops {
        if stop > t {
            match cfg.method {
                Method::Rk4 { step } => {
                    let n = ((stop - t) / step).ceil().max(1.0) as usize;
                    let h = (stop - t) / n as f64;
                    for k in 0..n {
                        if stats.accepted >= cfg.max_steps {
                            return Err(Error::MaxStepsExceeded {
                                max_steps: cfg.max_steps,
                                t,
                            });
                        }
                        let tk = if k == 0 { t } else { t + h * k as f64 };
                        stepper.rk4(&mut rhs, tk, h, &mut y);
                        stats.accepted += 1;
                        stats.rhs_evals += 4;
                    }
                    t = stop;
                }
                Method::DormandPrince { abs_tol, rel_tol } => {
                    let h0 = h_adapt.unwrap_or_else(|| {
                        stepper.initial_step(&mut rhs, t, &y, stop - t, abs_tol, rel_tol)
                    });
                    h_adapt = Some(stepper.dopri_to(
                        &mut rhs, &mut t, stop, h0, &mut y, abs_tol, rel_tol, cfg, &mut stats,
                    )?);
                    t = stop;
                }
            }
        }
        if let Some(i) = idx {
            on_sample(i, t, &y)?;
        }
    }
    Ok((y, stats))
}

struct Stepper {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
    fsal_valid: bool,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Stepper {
    fn new(n: usize) -> Self {
        let z = vec![numlin::ZERO; n];
        Stepper {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
            fsal_valid: false,
        }
    }

    fn stage(&mut self, y: &[C64], h: f64, coeffs: &[(usize, f64)]) {
        for (i, out) in self.tmp.iter_mut().enumerate() {
            let mut acc = y[i];
            for &(j, a) in coeffs {
                acc += self.k[j][i] * (a * h);
            }
            *out = acc;
        }
    }

    fn rk4<F: FnMut(f64, &[C64], &mut [C64])>(&mut self, f: &mut F, t: f64, h: f64, y: &mut [C64]) {
        f(t, y, &mut self.k[0]);
        self.stage(y, h, &[(0, 0.5)]);
        f(t + 0.5 * h, &self.tmp, &mut self.k[1]);
        self.stage(y, h, &[(1, 0.5)]);
        f(t + 0.5 * h, &self.tmp, &mut self.k[2]);
        self.stage(y, h, &[(2, 1.0)]);
        f(t + h, &self.tmp, &mut self.k[3]);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (self.k[0][i] + (self.k[1][i] + self.k[2][i]) * 2.0 + self.k[3][i]) * (h / 6.0);
        }
        self.fsal_valid = false;
    }

    fn initial_step<F: FnMut(f64, &[C64], &mut [C64])>(
        &mut self,
        f: &mut F,
        t: f64,
        y: &[C64],
        span: f64,
        atol: f64,
        rtol: f64,
    ) -> f64 {
        f(t, y, &mut self.k[0]);
        self.fsal_valid = true;
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for (yi, fi) in y.iter().zip(&self.k[0]) {
            let sc = atol + rtol * yi.norm();
            d0 = d0.max(yi.norm() / sc);
            d1 = d1.max(fi.norm() / sc);
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        };
        h.min(span)
    }

    #[allow(clippy::too_many_arguments)]
    fn dopri_to<F: FnMut(f64, &[C64], &mut [C64])>(
        &mut self,
        f: &mut F,
        t: &mut f64,
        stop: f64,
        mut h: f64,
        y: &mut Vec<C64>,
        atol: f64,
        rtol: f64,
        cfg: &IntegratorConfig,
        stats: &mut StepStats,
    ) -> Result<f64> {
        let mut last_free_h = h;
        while *t < stop {
            if stats.accepted + stats.rejected >= cfg.max_steps {
                return Err(Error::MaxStepsExceeded {
                    max_steps: cfg.max_steps,
                    t: *t,
                });
            }
            h = h.min(cfg.max_step);
            let remaining = stop - *t;
            let clipped = h >= remaining;
            let hs = if clipped { remaining } else { h };
            if hs <= f64::EPSILON * t.abs().max(1.0) * 4.0 && !clipped {
                return Err(Error::StepUnderflow { t: *t });
            }
            if !self.fsal_valid {
                f(*t, y, &mut self.k[0]);
                stats.rhs_evals += 1;
            }
            self.stage(y, hs, &[(0, A21)]);
            f(*t + C2 * hs, &self.tmp, &mut self.k[1]);
            self.stage(y, hs, &[(0, A31), (1, A32)]);
            f(*t + C3 * hs, &self.tmp, &mut self.k[2]);
            self.stage(y, hs, &[(0, A41), (1, A42), (2, A43)]);
            f(*t + C4 * hs, &self.tmp, &mut self.k[3]);
            self.stage(y, hs, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            f(*t + C5 * hs, &self.tmp, &mut self.k[4]);
            self.stage(y, hs, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            f(*t + hs, &self.tmp, &mut self.k[5]);
            for i in 0..y.len() {
                self.y_new[i] = y[i]
                    + (self.k[0][i] * B1
                        + self.k[2][i] * B3
                        + self.k[3][i] * B4
                        + self.k[4][i] * B5
                        + self.k[5][i] * B6)
                        * hs;
            }
            f(*t + hs, &self.y_new, &mut self.k[6]);
            stats.rhs_evals += 6;

            let mut err = 0.0f64;
            for i in 0..y.len() {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * hs;
                let sc = atol + rtol * y[i].norm().max(self.y_new[i].norm());
                err = err.max(e.norm() / sc);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                *t = if clipped { stop } else { *t + hs };
                std::mem::swap(y, &mut self.y_new);
                self.k.swap(0, 6);
                self.fsal_valid = true;
                stats.accepted += 1;
                if !clipped {
                    last_free_h = hs * factor;
                    h = last_free_h;
                } else {
                    // keep the unclipped proposal for the next segment
                    last_free_h = last_free_h.max(hs * factor);
                    h = last_free_h;
                }
            } else {
                stats.rejected += 1;
                h = hs * factor.min(1.0);
                last_free_h = h;
            }
        }
        Ok(h)
    }
}

/// Integrates a density matrix. The result is checked against the state
/// invariants with drift tolerance `tol::INTEGRATED_DRIFT` but never
/// renormalized.
pub fn integrate<F>(
    mut rhs: F,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix>
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    let (y, _) = solve(
        |t, y, dy| {
            let m = CMatrix::from_vec(y.to_vec()).expect("square state");
            dy.copy_from_slice(rhs(t, &m).as_slice());
        },
        rho0.matrix().as_slice(),
        t0,
        t1,
        cfg,
        &[],
        |_, _, _| Ok(()),
    )?;
    DensityMatrix::with_drift(CMatrix::from_vec(y)?, tol::INTEGRATED_DRIFT, t1)
}

/// Which picture the master equation is integrated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// Time-dependent L(θ(t), φ(t)) acting on ρ.
    Lab,
    /// ρ′ = UρU† with the frame generator terms; transformed back at the end.
    Rotating,
}

/// Outcome of one steering run.
#[derive(Clone, Debug)]
pub struct CycleResult {
    /// Phase of ⟨ψ_d|ρ(T)|g⟩ relative to t = 0, in (−π, π].
    pub beta_num: f64,
    /// |ρ_dg(T)| / |ρ_dg(0)|.
    pub damping: f64,
    /// Population gained by |g⟩.
    pub leak_to_g: f64,
    pub final_state: DensityMatrix,
    pub trajectory: Option<Vec<(f64, DensityMatrix)>>,
    pub stats: StepStats,
}

/// Final state plus optional evenly spaced samples, without phase extraction.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub final_state: DensityMatrix,
    pub trajectory: Option<Vec<(f64, DensityMatrix)>>,
    pub stats: StepStats,
}

/// `n` evenly spaced times covering `[0, t_end]`, endpoints included.
pub fn sample_grid(t_end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    t_end
                } else {
                    t_end * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Lab-frame generator for a schedule: ρ̇ = 2LρL† − {L†L, ρ} with L(θ(t), φ(t)).
pub fn lab_rhs(decay_rate: f64, schedule: &SteeringSchedule) -> impl Fn(f64, &[C64], &mut [C64]) + '_ {
    move |t, y, dy| {
        let a = schedule.angles(t);
        let l = model::lindblad_at(decay_rate, a.theta, a.phi);
        let rho = CMatrix::from_vec(y.to_vec()).expect("3x3 state");
        dy.copy_from_slice(Dissipator::new(l).apply(&rho).as_slice());
    }
}

/// Rotating-frame generator for a schedule.
pub fn rotating_frame_rhs<'a>(
    r_base: &ReservoirParams,
    schedule: &'a SteeringSchedule,
) -> impl Fn(f64, &[C64], &mut [C64]) + 'a {
    let r_base = *r_base;
    move |t, y, dy| {
        let a = schedule.angles(t);
        let r = r_base.with_angles(a.theta, a.phi);
        let rho = CMatrix::from_vec(y.to_vec()).expect("3x3 state");
        let out = model::rotating_rhs_matrix(&rho, &r, a.theta_dot, a.phi_dot);
        dy.copy_from_slice(out.as_slice());
    }
}

/// Integrates the schedule in the requested frame, returning lab-frame states.
pub fn evolve(
    r_base: &ReservoirParams,
    schedule: &SteeringSchedule,
    rho0: &DensityMatrix,
    frame: Frame,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<Evolution> {
    let cfg = &cfg.with_max_step(1.0 / r_base.decay_rate);
    if rho0.dim() != ATOM_DIM {
        return Err(Error::DimensionMismatch {
            expected: ATOM_DIM,
            found: rho0.dim(),
        });
    }
    let t_end = schedule.duration();
    let times = sample_grid(t_end, samples);
    let mut traj: Vec<(f64, DensityMatrix)> = Vec::with_capacity(times.len());
    let frame_at = |t: f64| {
        let a = schedule.angles(t);
        model::frame_unitary(a.theta, a.phi)
    };
    let to_lab = |t: f64, y: &[C64]| -> Result<CMatrix> {
        let m = CMatrix::from_vec(y.to_vec())?;
        Ok(match frame {
            Frame::Lab => m,
            Frame::Rotating => m.conjugate_by(&frame_at(t).adjoint()),
        })
    };
    let mut record = |_: usize, t: f64, y: &[C64]| -> Result<()> {
        let m = to_lab(t, y)?;
        traj.push((t, DensityMatrix::with_drift(m, tol::INTEGRATED_DRIFT, t)?));
        Ok(())
    };

    let (y, stats) = match frame {
        Frame::Lab => solve(
            lab_rhs(r_base.decay_rate, schedule),
            rho0.matrix().as_slice(),
            0.0,
            t_end,
            cfg,
            &times,
            &mut record,
        )?,
        Frame::Rotating => {
            let start = rho0.matrix().conjugate_by(&frame_at(0.0));
            solve(
                rotating_frame_rhs(r_base, schedule),
                start.as_slice(),
                0.0,
                t_end,
                cfg,
                &times,
                &mut record,
            )?
        }
    };
    let final_state = DensityMatrix::with_drift(to_lab(t_end, &y)?, tol::INTEGRATED_DRIFT, t_end)?;
    Ok(Evolution {
        final_state,
        trajectory: (samples > 0).then_some(traj),
        stats,
    })
}

/// Runs one closed steering loop and extracts β and the coherence damping.
pub fn run_cycle(
    r_base: &ReservoirParams,
    schedule: &SteeringSchedule,
    rho0: &DensityMatrix,
    frame: Frame,
    cfg: &IntegratorConfig,
) -> Result<CycleResult> {
    run_cycle_sampled(r_base, schedule, rho0, frame, cfg, 0)
}

/// [`run_cycle`] that also keeps `samples` evenly spaced lab-frame states.
pub fn run_cycle_sampled(
    r_base: &ReservoirParams,
    schedule: &SteeringSchedule,
    rho0: &DensityMatrix,
    frame: Frame,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<CycleResult> {
    if !schedule.is_cyclic() {
        return Err(Error::NonCyclicSchedule);
    }
    let start = schedule.angles(0.0);
    // fail before integrating if the phase is undefined
    dark_ground_coherence(rho0, start.theta, start.phi, true)?;
    let ev = evolve(r_base, schedule, rho0, frame, cfg, samples)?;
    let (beta_num, damping) =
        extract_phase_and_damping(rho0, &ev.final_state, start.theta, start.phi)?;
    Ok(CycleResult {
        beta_num,
        damping,
        leak_to_g: ev.final_state.population(G) - rho0.population(G),
        final_state: ev.final_state,
        trajectory: ev.trajectory,
        stats: ev.stats,
    })
}

fn dark_ground_coherence(rho: &DensityMatrix, theta: f64, phi: f64, check: bool) -> Result<C64> {
    let [dark, _] = model::dfs_amplitudes(theta, phi);
    let mut g = [numlin::ZERO; 3];
    g[G] = numlin::ONE;
    let z = rho.matrix().sandwich(&dark, &g);
    if check && z.norm() < tol::MIN_COHERENCE {
        return Err(Error::PhaseUndefined { magnitude: z.norm() });
    }
    Ok(z)
}

/// β_num = arg⟨ψ_d|ρ_T|g⟩ − arg⟨ψ_d|ρ_0|g⟩ wrapped to (−π, π]; damping is the
/// ratio of magnitudes.
pub fn extract_phase_and_damping(
    rho0: &DensityMatrix,
    rho_t: &DensityMatrix,
    theta: f64,
    phi0: f64,
) -> Result<(f64, f64)> {
    let z0 = dark_ground_coherence(rho0, theta, phi0, true)?;
    let zt = dark_ground_coherence(rho_t, theta, phi0, false)?;
    let ratio = zt / z0;
    Ok((numlin::wrap_angle(ratio.arg()), ratio.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dfs_basis, E};
    use crate::numlin::{PureState, ONE, ZERO};

    fn superposition(theta: f64) -> DensityMatrix {
        let (d, _) = dfs_basis(theta, 0.0);
        let mut v = d.amplitudes().to_vec();
        v[G] = ONE;
        PureState::normalized(v).unwrap().projector()
    }

    #[test]
    fn exponential_decay_scalar() {
        let gamma = 0.7;
        let rho0 = PureState::basis(3, E).projector();
        for cfg in [
            IntegratorConfig::adaptive(1e-13, 1e-12),
            IntegratorConfig::fixed_for_rates(&[gamma]),
        ] {
            let (y, _) = solve(
                |_, y, dy| {
                    for (d, v) in dy.iter_mut().zip(y) {
                        *d = v * -gamma;
                    }
                },
                rho0.matrix().as_slice(),
                0.0,
                3.0,
                &cfg,
                &[],
                |_, _, _| Ok(()),
            )
            .unwrap();
            assert!((y[0].re - (-gamma * 3.0f64).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        // y' = i y cos t, exact y = exp(i sin t)
        let run = |n: usize| {
            let cfg = IntegratorConfig {
                method: Method::Rk4 { step: 5.0 / n as f64 },
                max_steps: 1 << 30,
                ..Default::default()
            };
            let (y, _) = solve(
                |t, y, dy| dy[0] = y[0] * C64::new(0.0, t.cos()),
                &[ONE],
                0.0,
                5.0,
                &cfg,
                &[],
                |_, _, _| Ok(()),
            )
            .unwrap();
            (y[0] - C64::from_polar(1.0, 5f64.sin())).norm()
        };
        let (e1, e2) = (run(50), run(100));
        let order = (e1 / e2).log2();
        assert!((3.7..=4.3).contains(&order), "order {order}");
    }

    #[test]
    fn max_steps_is_enforced() {
        let cfg = IntegratorConfig {
            method: Method::Rk4 { step: 0.1 },
            max_steps: 5,
            ..Default::default()
        };
        let r = solve(|_, _, dy| dy[0] = ZERO, &[ONE], 0.0, 1.0, &cfg, &[], |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::MaxStepsExceeded { .. })));
    }

    #[test]
    fn frozen_dfs_state_is_static() {
        let theta = 1.0;
        let r = ReservoirParams::new(1.0, theta, 0.0).unwrap();
        let sched = SteeringSchedule::frozen(theta, 0.0, 20.0).unwrap();
        let rho0 = superposition(theta);
        let res = run_cycle(&r, &sched, &rho0, Frame::Lab, &IntegratorConfig::default()).unwrap();
        let diff = res.final_state.matrix().max_abs_diff(rho0.matrix());
        assert!(diff < 1e-10, "{diff}");
        assert!(res.beta_num.abs() < 1e-12);
        assert!((res.damping - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_extraction_examples() {
        let rho0 = superposition(0.6);
        let (b, d) = extract_phase_and_damping(&rho0, &rho0, 0.6, 0.0).unwrap();
        assert!(b.abs() < 1e-15 && (d - 1.0).abs() < 1e-15);

        let (dark, _) = dfs_basis(0.6, 0.0);
        let m = rho0.matrix();
        let fac = C64::from_polar(0.9, -0.92);
        // scale the dark/ground coherence only: ρ_T = ρ_0 + (fac − 1)(c|ψ_d⟩⟨g| + h.c.)
        let c = m.sandwich(dark.amplitudes(), &[ZERO, ZERO, ONE]);
        let mut g = vec![ZERO; 3];
        g[G] = ONE;
        let x = CMatrix::outer(dark.amplitudes(), &g).scale(c * (fac - ONE));
        let rho_t = CMatrix::from_vec(
            m.as_slice()
                .iter()
                .zip(x.as_slice().iter().zip(x.adjoint().as_slice()))
                .map(|(a, (p, q))| a + p + q)
                .collect(),
        )
        .unwrap();
        let rho_t = DensityMatrix::with_drift(rho_t, 1e-9, 0.0).unwrap();
        let (b, d) = extract_phase_and_damping(&rho0, &rho_t, 0.6, 0.0).unwrap();
        assert!((b + 0.92).abs() < 1e-14 && (d - 0.9).abs() < 1e-14);

        let pure_g = PureState::basis(3, G).projector();
        assert!(matches!(
            extract_phase_and_damping(&pure_g, &pure_g, 0.6, 0.0),
            Err(Error::PhaseUndefined { .. })
        ));
    }

    #[test]
    fn custom_schedule_cyclicity_and_derivatives() {
        let t_end = 10.0;
        let w = 2.0 * PI / t_end;
        let s = SteeringSchedule::Custom {
            theta: Arc::new(move |t| (1.0 + 0.2 * (w * t).sin(), 0.2 * w * (w * t).cos())),
            phi: Arc::new(move |t| (w * t, w)),
            duration: t_end,
        };
        assert!(s.is_cyclic());
        assert!(s.derivative_mismatch() < 1e-6);
        let open = SteeringSchedule::Custom {
            theta: Arc::new(|_| (1.0, 0.0)),
            phi: Arc::new(move |t| (0.5 * w * t, 0.5 * w)),
            duration: t_end,
        };
        assert!(!open.is_cyclic());
        let r = ReservoirParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            run_cycle(&r, &open, &superposition(1.0), Frame::Lab, &IntegratorConfig::default()),
            Err(Error::NonCyclicSchedule)
        ));
    }
}
