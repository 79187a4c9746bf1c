//! Ramsey readout across θ: numeric P_g against ½[1 − V cos β], written as
//! an SVG next to the printed table.
//!
//! Usage: `ramsey_fringes [out.svg]` (default ramsey_fringes.svg).

use std::f64::consts::PI;

use geophase::dynamics::{IntegratorConfig, SteeringSchedule};
use geophase::model::{derive_reservoir, PhysicalParams};
use geophase::ramsey::{fringe_sweep, ramsey_analytic, run_ramsey_numeric};
use geophase::report::fringe_svg;

fn main() -> geophase::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "ramsey_fringes.svg".into());
    let p = PhysicalParams::cs_defaults();
    let r = derive_reservoir(&p)?;
    let phi_dot = 1e-4 * p.g;
    let cfg = IntegratorConfig::default();

    let sched = SteeringSchedule::constant_theta_linear_phi(PI / 4.0, phi_dot)?;
    let num = run_ramsey_numeric(&r, &sched, &cfg)?;
    let ana = ramsey_analytic(r.decay_rate, PI / 4.0, phi_dot)?;
    println!("Cs, theta = pi/4: P_g numeric {:.6}, analytic {:.6}", num.p_g, ana.outcome.p_g);

    let ratio = phi_dot / r.decay_rate;
    let thetas: Vec<f64> = (1..=15).map(|k| PI * k as f64 / 16.0).collect();
    let pts = fringe_sweep(r.decay_rate, ratio, &thetas, &cfg)?;
    println!("theta/pi  P_g numeric  P_g analytic");
    for pt in &pts {
        println!("{:<8.4}  {:<11.6}  {:.6}", pt.theta / PI, pt.p_g_numeric, pt.p_g_analytic);
    }
    let svg = fringe_svg(&pts, &format!("Ramsey fringe, phi_dot/Gamma = {ratio:.4}"));
    std::fs::write(&path, svg)?;
    println!("wrote {path}");
    Ok(())
}
