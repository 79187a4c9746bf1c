//! Phase error against steering speed: halving φ̇/Γ cuts the error by about
//! four, so the first-order result is approached quadratically.

use std::f64::consts::PI;

use geophase::analytic;
use geophase::dynamics::{run_cycle, Frame, IntegratorConfig, SteeringSchedule};
use geophase::model::ReservoirParams;
use geophase::numlin::wrap_angle;
use geophase::ramsey::initial_superposition;

fn main() -> geophase::Result<()> {
    let theta = PI / 4.0;
    let cfg = IntegratorConfig::adaptive(1e-13, 1e-12);
    let r = ReservoirParams::new(1.0, theta, 0.0)?;
    let (beta, _) = analytic::berry_phase_and_solid_angle(theta);
    let mut prev: Option<f64> = None;
    println!("phi_dot/Gamma  |beta_num - beta|  ratio");
    for ratio in [0.16, 0.08, 0.04, 0.02, 0.01] {
        let sched = SteeringSchedule::constant_theta_linear_phi(theta, ratio)?;
        let res = run_cycle(&r, &sched, &initial_superposition(theta)?, Frame::Lab, &cfg)?;
        let err = wrap_angle(res.beta_num - beta).abs();
        let shown = prev.map(|p| format!("{:.3}", p / err)).unwrap_or_default();
        println!("{ratio:<13}  {err:<17.4e}  {shown}");
        prev = Some(err);
    }
    Ok(())
}
