//! Four-level atom ⊗ cavity Schrödinger dynamics against the effective
//! Raman model over a short horizon, for several detunings.

use std::f64::consts::PI;

use geophase::cavity::{validate_full_hamiltonian, FockConfig};
use geophase::dynamics::IntegratorConfig;
use geophase::model::{PhysicalParams, E};

fn main() -> geophase::Result<()> {
    let cfg = IntegratorConfig::adaptive(1e-12, 1e-10);
    println!("Delta/g  max_P_r  P_r/(Omega/Delta)^2  overlap_deficit");
    for delta in [20.0, 40.0, 80.0] {
        let p = PhysicalParams::from_total_rabi(1.0, delta, 1.0, PI / 4.0, 0.0, 0.0, 1.0, 0.0);
        let lambda = 1.0 / delta;
        let rep = validate_full_hamiltonian(&p, E, 1, 10.0 / lambda, &FockConfig::full(2), &cfg, 400)?;
        println!(
            "{delta:>7}  {:.4e}  {:.4}  {:.4e}",
            rep.max_r_population, rep.r_population_coefficient, rep.overlap_deficit
        );
    }
    Ok(())
}
