//! Closed-form rotating-frame coherences against direct integration, and the
//! eigenvalues that set the slow and fast time scales.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use geophase::analytic::{coherence_exact, lambdas};
use geophase::dynamics::{rotating_frame_rhs, sample_grid, solve, IntegratorConfig, SteeringSchedule};
use geophase::model::{ReservoirParams, E, F, G};
use geophase::numlin::PureState;

fn main() -> geophase::Result<()> {
    let (gam, theta, phi_dot) = (1.0, PI / 4.0, 0.2);
    let pair = lambdas(gam, theta, phi_dot)?;
    println!("lambda+ = {:.6e}", pair.lambda_plus);
    println!("lambda- = {:.6e}", pair.lambda_minus);

    let r = ReservoirParams::new(gam, theta, 0.0)?;
    let sched = SteeringSchedule::constant_theta_linear_phi(theta, phi_dot)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rho0 = PureState::new(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)])?.projector();
    let times = sample_grid(sched.duration(), 9);
    let cfg = IntegratorConfig::adaptive(1e-13, 1e-12).with_max_step(1.0 / gam);
    println!("t          |rho_eg - exact|  |rho_fg - exact|");
    solve(rotating_frame_rhs(&r, &sched), rho0.matrix().as_slice(), 0.0, sched.duration(), &cfg, &times, |_, t, y| {
        let (eg, fg) = coherence_exact(t, C64::new(0.5, 0.0), gam, theta, phi_dot)?;
        println!(
            "{t:<9.4}  {:<16.3e}  {:.3e}",
            (y[E * 3 + G] - eg).norm(),
            (y[F * 3 + G] - fg).norm()
        );
        Ok(())
    })?;
    Ok(())
}
