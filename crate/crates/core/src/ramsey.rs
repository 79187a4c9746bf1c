//! Ramsey readout of the geometric phase: prepare (ψ_d + g)/√2, steer one
//! cycle, apply two instantaneous pulses and read the level populations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use crate::analytic::{self, leak_parameter};
use crate::dynamics::{self, Frame, IntegratorConfig, SteeringSchedule};
use crate::error::{Error, Result};
use crate::model::{self, ReservoirParams, E, F, G};
use crate::numlin::{CMatrix, DensityMatrix, PureState, ONE, ZERO};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamseyOutcome {
    pub p_g: f64,
    pub p_e: f64,
    pub p_f: f64,
    pub visibility: f64,
    pub beta_used: f64,
    /// Phase of the residual bright-state amplitude, (cos θ + 3/2)π.
    pub alpha: f64,
    pub mode: Mode,
}

/// (ψ_d(θ, 0) + |g⟩)/√2 as a density matrix.
pub fn initial_superposition(theta: f64) -> Result<DensityMatrix> {
    model::check_theta(theta)?;
    let [d, _] = model::dfs_amplitudes(theta, 0.0);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let v = vec![d[E] * s, d[F] * s, s];
    Ok(PureState::new(v)?.projector())
}

/// The two readout pulses as real rotations:
/// U1: |e⟩ → cos(θ/2)|e⟩ + sin(θ/2)|f⟩, |f⟩ → cos(θ/2)|f⟩ − sin(θ/2)|e⟩;
/// U2: |g⟩ → (|g⟩ + |e⟩)/√2, |e⟩ → (|e⟩ − |g⟩)/√2.
pub fn build_pulses(theta: f64) -> (CMatrix, CMatrix) {
    let (s, c) = (theta / 2.0).sin_cos();
    let mut u1 = CMatrix::identity(3);
    u1[(E, E)] = C64::new(c, 0.0);
    u1[(F, E)] = C64::new(s, 0.0);
    u1[(E, F)] = C64::new(-s, 0.0);
    u1[(F, F)] = C64::new(c, 0.0);

    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut u2 = CMatrix::identity(3);
    u2[(G, G)] = h;
    u2[(E, G)] = h;
    u2[(E, E)] = h;
    u2[(G, E)] = -h;
    (u1, u2)
}

/// Closed-form predictions plus the intermediate states they come from,
/// all expressed in the (e, f, g) basis.
#[derive(Clone, Debug)]
pub struct RamseyAnalytic {
    pub outcome: RamseyOutcome,
    /// Mixture after the cycle, before the pulses.
    pub after_cycle: CMatrix,
    /// The coherent part of `after_cycle`.
    pub phi_ket: Vec<C64>,
    /// Mixture after both pulses.
    pub after_pulses: CMatrix,
    pub phi_prime_ket: Vec<C64>,
    pub warning: Option<String>,
}

pub fn ramsey_analytic(decay_rate: f64, theta: f64, phi_dot: f64) -> Result<RamseyAnalytic> {
    model::check_theta(theta)?;
    let warning = analytic::adiabatic_warning(decay_rate, phi_dot);
    let v = analytic::visibility(theta, phi_dot, decay_rate)?;
    let (beta, _) = analytic::berry_phase_and_solid_angle(theta);
    let alpha = (theta.cos() + 1.5) * PI;
    let x = leak_parameter(decay_rate, theta, phi_dot);
    let k = theta.sin() * phi_dot / (2.0 * decay_rate);
    let norm = 1.0 / (2.0 + k * k).sqrt();

    let [d0, b0] = model::dfs_amplitudes(theta, 0.0);
    let eb = C64::from_polar(1.0, beta);
    let ea = C64::from_polar(k, alpha);
    let mut phi_ket = vec![ZERO; 3];
    for i in 0..3 {
        phi_ket[i] = (eb * d0[i] + ea * b0[i]) * norm;
    }
    phi_ket[G] += ONE * norm;

    let weight = |w: f64| C64::new(w, 0.0);
    let g = [ZERO, ZERO, ONE];
    let after_cycle = {
        let a = CMatrix::outer(&phi_ket, &phi_ket).scale(weight(1.0 - x / 2.0));
        let b = CMatrix::outer(&g, &g).scale(weight(0.75 * x));
        let c = CMatrix::outer(&d0, &d0).scale(weight(-0.25 * x));
        &(&a + &b) + &c
    };

    let r2 = C64::new(FRAC_1_SQRT_2, 0.0);
    let e_minus_g = [r2, ZERO, -r2];
    let g_plus_e = [r2, ZERO, r2];
    let mut phi_prime_ket = vec![ZERO; 3];
    for i in 0..3 {
        phi_prime_ket[i] = (eb * e_minus_g[i] + g_plus_e[i]) * norm;
    }
    phi_prime_ket[F] += ea * norm;
    let after_pulses = {
        let a = CMatrix::outer(&phi_prime_ket, &phi_prime_ket).scale(weight(1.0 - x / 2.0));
        let b = CMatrix::outer(&g_plus_e, &g_plus_e).scale(weight(0.75 * x));
        let c = CMatrix::outer(&e_minus_g, &e_minus_g).scale(weight(-0.25 * x));
        &(&a + &b) + &c
    };

    let p_g = 0.5 * (1.0 - v * beta.cos());
    let p_e = 0.5 * (1.0 + v * beta.cos());
    Ok(RamseyAnalytic {
        outcome: RamseyOutcome {
            p_g,
            p_e,
            p_f: 1.0 - p_g - p_e,
            visibility: v,
            beta_used: beta,
            alpha,
            mode: Mode::Analytic,
        },
        after_cycle,
        phi_ket,
        after_pulses,
        phi_prime_ket,
        warning,
    })
}

/// Full numeric protocol: prepare, integrate the lab-frame cycle, pulse, read.
pub fn run_ramsey_numeric(
    r: &ReservoirParams,
    schedule: &SteeringSchedule,
    cfg: &IntegratorConfig,
) -> Result<RamseyOutcome> {
    if !schedule.is_cyclic() {
        return Err(Error::NonCyclicSchedule);
    }
    let start = schedule.angles(0.0);
    if start.phi.abs() > 1e-15 {
        return Err(Error::InvalidParams("Ramsey schedules must start at phi = 0".into()));
    }
    let theta = start.theta;
    let rho0 = initial_superposition(theta)?;
    let cycle = dynamics::run_cycle(r, schedule, &rho0, Frame::Lab, cfg)?;
    let (u1, u2) = build_pulses(theta);
    let u = &u2 * &u1;
    let out = cycle.final_state.transform(&u);
    let (p_e, p_f, p_g) = (out.population(E), out.population(F), out.population(G));
    let sum = p_e + p_f + p_g;
    if (sum - 1.0).abs() > tol::INTEGRATED_DRIFT {
        return Err(Error::InvariantViolation {
            t: schedule.duration(),
            trace_drift: (sum - 1.0).abs(),
            hermiticity: 0.0,
            min_eigenvalue: 0.0,
        });
    }
    let phi_dot = start.phi_dot;
    let x = leak_parameter(r.decay_rate, theta, phi_dot);
    Ok(RamseyOutcome {
        p_g,
        p_e,
        p_f,
        visibility: 1.0 - x / 2.0,
        beta_used: cycle.beta_num,
        alpha: (theta.cos() + 1.5) * PI,
        mode: Mode::Numeric,
    })
}

/// One point of a θ-sweep fringe: numeric P_g next to ½[1 − V cos β].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringePoint {
    pub theta: f64,
    pub p_g_numeric: f64,
    pub p_g_analytic: f64,
    pub p_sum: f64,
}

/// Fringe over `thetas` at fixed φ̇/Γ. Points are independent and computed
/// in parallel; output order follows `thetas`.
pub fn fringe_sweep(
    decay_rate: f64,
    phi_dot_over_gamma: f64,
    thetas: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<FringePoint>> {
    use rayon::prelude::*;
    let phi_dot = phi_dot_over_gamma * decay_rate;
    thetas
        .par_iter()
        .map(|&theta| {
            let r = ReservoirParams::new(decay_rate, theta, 0.0)?;
            let sched = SteeringSchedule::constant_theta_linear_phi(theta, phi_dot)?;
            let num = run_ramsey_numeric(&r, &sched, cfg)?;
            let ana = ramsey_analytic(decay_rate, theta, phi_dot)?;
            Ok(FringePoint {
                theta,
                p_g_numeric: num.p_g,
                p_g_analytic: ana.outcome.p_g,
                p_sum: num.p_g + num.p_e + num.p_f,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::inner;

    #[test]
    fn initial_state_examples() {
        let rho = initial_superposition(0.0).unwrap();
        assert!((rho.element(E, G).re - 0.5).abs() < 1e-15);
        assert!((rho.population(E) - 0.5).abs() < 1e-15);
        for theta in [0.3, 1.2, 2.8] {
            let rho = initial_superposition(theta).unwrap();
            let [d, _] = model::dfs_amplitudes(theta, 0.0);
            let z = rho.matrix().sandwich(&d, &[ZERO, ZERO, ONE]);
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let rho = initial_superposition(PI / 2.0).unwrap();
        for (i, p) in [0.25, 0.25, 0.5].into_iter().enumerate() {
            assert!((rho.population(i) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn pulses_are_unitary_and_map_dark_to_e() {
        let (u1, _) = build_pulses(0.0);
        assert!(u1.max_abs_diff(&CMatrix::identity(3)) < 1e-16);
        for theta in [PI / 8.0, PI / 4.0, PI / 2.0, 2.0] {
            let (u1, u2) = build_pulses(theta);
            for u in [&u1, &u2] {
                assert!((&u.adjoint() * u).max_abs_diff(&CMatrix::identity(3)) < 1e-14);
            }
            let [d, b] = model::dfs_amplitudes(theta, 0.0);
            let ud = u1.mat_vec(&d);
            assert!((ud[E] - ONE).norm() < 1e-15 && ud[F].norm() < 1e-15);
            let ub = u1.mat_vec(&b);
            assert!((ub[F] - ONE).norm() < 1e-15);
        }
        let (_, u2) = build_pulses(0.4);
        let r2 = FRAC_1_SQRT_2;
        let g = u2.mat_vec(&[ZERO, ZERO, ONE]);
        assert!((g[G].re - r2).abs() < 1e-16 && (g[E].re - r2).abs() < 1e-16);
        let e = u2.mat_vec(&[ONE, ZERO, ZERO]);
        assert!((e[E].re - r2).abs() < 1e-16 && (e[G].re + r2).abs() < 1e-16);
    }

    #[test]
    fn analytic_examples() {
        let flat = ramsey_analytic(1.0, 0.0, 0.05).unwrap().outcome;
        assert!(flat.p_g.abs() < 1e-15 && (flat.p_e - 1.0).abs() < 1e-15);

        let gam = 34.0e-4 / 4.1;
        let cs = ramsey_analytic(gam, PI / 4.0, 1e-4).unwrap();
        assert!((cs.outcome.p_g - 0.225833).abs() < 1e-6, "{}", cs.outcome.p_g);
        assert!((cs.outcome.p_g - 0.2259).abs() < 1e-4);
        assert!((cs.outcome.p_e - 0.774167).abs() < 1e-6);
        assert!(cs.warning.is_none());

        // the pre-pulse mixture has unit trace identically
        for pd in [0.01, 0.1, 0.25] {
            let a = ramsey_analytic(1.0, 1.0, pd).unwrap();
            let w = a.after_cycle.trace();
            let kk = (1.0f64.sin() * pd / 2.0).powi(2);
            let x = leak_parameter(1.0, 1.0, pd);
            // |φ⟩ is normalized, so tr = (1 − x/2) + 3x/4 − x/4
            assert!((w.re - 1.0).abs() < 1e-14, "{w} {kk} {x}");
        }
    }

    #[test]
    fn analytic_states_are_linked_by_pulses() {
        let a = ramsey_analytic(1.0, 0.9, 0.08).unwrap();
        let (u1, u2) = build_pulses(0.9);
        let u = &u2 * &u1;
        assert!(a.after_cycle.conjugate_by(&u).max_abs_diff(&a.after_pulses) < 1e-14);
        let moved = u.mat_vec(&a.phi_ket);
        assert!((inner(&moved, &a.phi_prime_ket).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn numeric_frozen_reservoir_returns_to_e() {
        let r = ReservoirParams::new(1.0, 0.7, 0.0).unwrap();
        let sched = SteeringSchedule::frozen(0.7, 0.0, 30.0).unwrap();
        let out = run_ramsey_numeric(&r, &sched, &IntegratorConfig::default()).unwrap();
        assert!(out.p_g.abs() < 1e-10 && (out.p_e - 1.0).abs() < 1e-10);
        assert!(out.beta_used.abs() < 1e-10);
    }
}
