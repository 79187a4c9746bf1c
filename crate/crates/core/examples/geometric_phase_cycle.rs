//! One steering loop at fixed θ: numeric phase and damping of the
//! dark/ground coherence next to β = (cos θ − 1)π.
//!
//! Usage: `geometric_phase_cycle [phi_dot_over_gamma]` (default 0.05).

use std::f64::consts::PI;

use geophase::analytic;
use geophase::dynamics::{run_cycle, Frame, IntegratorConfig, SteeringSchedule};
use geophase::model::ReservoirParams;
use geophase::numlin::wrap_angle;
use geophase::ramsey::initial_superposition;

fn main() -> geophase::Result<()> {
    let ratio: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("phi_dot_over_gamma must be a number"))
        .unwrap_or(0.05);
    let cfg = IntegratorConfig::adaptive(1e-12, 1e-12);
    println!("theta/pi  beta        beta_num    err        damping   exp(-x/2)");
    for k in 1..=7 {
        let theta = PI * k as f64 / 8.0;
        let r = ReservoirParams::new(1.0, theta, 0.0)?;
        let sched = SteeringSchedule::constant_theta_linear_phi(theta, ratio)?;
        let res = run_cycle(&r, &sched, &initial_superposition(theta)?, Frame::Lab, &cfg)?;
        let (beta, _) = analytic::berry_phase_and_solid_angle(theta);
        let x = analytic::leak_parameter(1.0, theta, ratio);
        println!(
            "{:<8.3}  {:<+10.6}  {:<+10.6}  {:<9.2e}  {:.6}  {:.6}",
            k as f64 / 8.0,
            wrap_angle(beta),
            res.beta_num,
            wrap_angle(res.beta_num - beta).abs(),
            res.damping,
            (-x / 2.0).exp()
        );
    }
    Ok(())
}
