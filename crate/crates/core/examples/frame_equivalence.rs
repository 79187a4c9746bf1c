//! The same loop integrated in the lab frame and in the co-moving frame,
//! compared after mapping back.

use std::f64::consts::PI;

use geophase::dynamics::{run_cycle, Frame, IntegratorConfig, SteeringSchedule};
use geophase::model::ReservoirParams;
use geophase::numlin::trace_distance;
use geophase::ramsey::initial_superposition;

fn main() -> geophase::Result<()> {
    let cfg = IntegratorConfig::default();
    println!("theta/pi  phi_dot/Gamma  trace_distance  steps(lab)  steps(rot)");
    for (theta, ratio) in [(PI / 4.0, 0.1206), (PI / 3.0, 0.05), (0.6 * PI, 0.2)] {
        let r = ReservoirParams::new(1.0, theta, 0.0)?;
        let sched = SteeringSchedule::constant_theta_linear_phi(theta, ratio)?;
        let rho0 = initial_superposition(theta)?;
        let lab = run_cycle(&r, &sched, &rho0, Frame::Lab, &cfg)?;
        let rot = run_cycle(&r, &sched, &rho0, Frame::Rotating, &cfg)?;
        println!(
            "{:<8.3}  {ratio:<13}  {:<14.3e}  {:<10}  {}",
            theta / PI,
            trace_distance(&lab.final_state, &rot.final_state)?,
            lab.stats.accepted,
            rot.stats.accepted
        );
    }
    Ok(())
}
