//! Composite atom ⊗ cavity dynamics against the three-level reservoir model
//! at several κ/λ, with the fitted decay rate of the bright state.

use std::f64::consts::PI;
use std::time::Instant;

use geophase::cavity::{validate_elimination, FockConfig};
use geophase::dynamics::{IntegratorConfig, SteeringSchedule};
use geophase::model::PhysicalParams;

fn main() -> geophase::Result<()> {
    let theta = PI / 4.0;
    // g = 1, Δ = 20, Ω = 1 so that λ = 0.05
    let lambda = 0.05;
    let phi_dot_over_gamma: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    println!("kappa/lambda  trace_dist  fitted/predicted  max_photons  seconds");
    for ratio in [10.0, 20.0, 50.0, 100.0] {
        let p = PhysicalParams::from_total_rabi(1.0, 20.0, 1.0, theta, 0.0, 0.0, ratio * lambda, 0.0);
        let gamma = lambda / ratio;
        let sched = SteeringSchedule::constant_theta_linear_phi(theta, phi_dot_over_gamma * gamma)?;
        let start = Instant::now();
        let rep = validate_elimination(&p, &sched, &FockConfig::effective(1), &IntegratorConfig::default())?;
        println!(
            "{ratio:>12}  {:.4e}  {:.5}  {:.3e}  {:.1}",
            rep.max_trace_distance,
            rep.fitted_gamma / rep.predicted_gamma,
            rep.max_photon_number,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
