//! Effective reservoir from the Cs cavity-QED parameters, with the regime
//! ratios and the spontaneous-emission estimate.

use std::f64::consts::PI;

use geophase::analytic;
use geophase::model::{derive_reservoir, PhysicalParams};

fn main() -> geophase::Result<()> {
    let p = PhysicalParams::cs_defaults();
    let r = derive_reservoir(&p)?;
    let mhz = |x: f64| x / (2.0 * PI);
    println!("Gamma      = 2pi x {:.6} MHz", mhz(r.decay_rate));
    println!("theta      = {:.6} (pi/4 = {:.6})", r.theta, PI / 4.0);
    if let Some(raman) = r.raman {
        println!("lambda     = 2pi x {:.6} MHz", mhz(raman.lambda));
    }
    let h = p.hierarchy();
    println!(
        "Delta/Omega = {:.1}, Delta/g = {:.1}, kappa/lambda = {:.1}",
        h.delta_over_omega, h.delta_over_g, h.kappa_over_lambda
    );
    for w in h.warnings() {
        println!("warning: {w}");
    }
    let phi_dot = 1e-4 * p.g;
    let v = analytic::visibility(PI / 4.0, phi_dot, r.decay_rate)?;
    let pen = analytic::spontaneous_penalty(&p, PI / 4.0, phi_dot)?;
    println!("V          = {v:.5}");
    println!("gamma_e T  = {:.4e}  (V' = {:.6})", pen.exponent(), pen.visibility_factor);
    Ok(())
}
