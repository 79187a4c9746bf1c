//! Closed-form results for a constant-θ, linear-φ cycle: the exact solution
//! of the dark/ground coherence pair, first-order one-cycle maps in both
//! frames, the geometric phase and its solid angle, fringe visibility and
//! the spontaneous-emission penalty.
//!
//! Notation used below: s = sin θ, c = cos θ, x = π s² φ̇ / Γ.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{PhysicalParams, E, F, G};
use crate::numlin::{CMatrix, I, ONE, ZERO};
use crate::tol;

/// Roots of the 2×2 system obeyed by (ρ′_eg, ρ′_fg).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    /// Slow root, → 0 as φ̇ → 0.
    pub lambda_plus: C64,
    /// Fast root, → −Γ as φ̇ → 0.
    pub lambda_minus: C64,
    /// |λ₊ − λ₋|² below `tol::CONFLUENT_REL · Γ²`.
    pub confluent: bool,
}

/// λ± = ½(−Γ ± √(Γ² + 2iΓ cos θ φ̇ − φ̇²)), principal square root.
///
/// The discriminant only meets the branch cut when cos θ · φ̇ = 0 and
/// φ̇ > Γ, so along any φ̇ path from 0 the principal branch keeps λ₊ attached
/// to the slow mode.
pub fn lambdas(decay_rate: f64, theta: f64, phi_dot: f64) -> Result<EigenPair> {
    if !(decay_rate > 0.0) {
        return Err(Error::InvalidParams("decay rate must be positive".into()));
    }
    let disc = C64::new(
        decay_rate * decay_rate - phi_dot * phi_dot,
        2.0 * decay_rate * theta.cos() * phi_dot,
    );
    let root = disc.sqrt();
    let lambda_plus = (root - decay_rate) * 0.5;
    let lambda_minus = (-root - decay_rate) * 0.5;
    Ok(EigenPair {
        lambda_plus,
        lambda_minus,
        confluent: disc.norm() < tol::CONFLUENT_REL * decay_rate * decay_rate,
    })
}

/// (e^{λ₋t} − e^{λ₊t}) / (λ₋ − λ₊), with the t·e^{λt} limit when the roots merge.
fn divided_exp(pair: &EigenPair, t: f64) -> C64 {
    let d = pair.lambda_minus - pair.lambda_plus;
    let z = d * t;
    let base = (pair.lambda_plus * t).exp();
    if z.norm() < 1e-5 {
        base * t * (ONE + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
    } else {
        base * ((z.exp() - ONE) / d)
    }
}

/// Exact (ρ′_eg(t), ρ′_fg(t)) for ρ′_fg(0) = 0 and constant φ̇.
///
/// With a = (i/2) cos θ φ̇ and D(t) the divided exponential difference,
/// ρ′_eg = ρ′_eg(0) [e^{λ₋t} − (λ₋ − a) D(t)] and
/// ρ′_fg = ρ′_eg(0) (i/2) sin θ φ̇ D(t).
pub fn coherence_exact(
    t: f64,
    rho_eg0: C64,
    decay_rate: f64,
    theta: f64,
    phi_dot: f64,
) -> Result<(C64, C64)> {
    let pair = lambdas(decay_rate, theta, phi_dot)?;
    let a = I * (0.5 * theta.cos() * phi_dot);
    let dexp = divided_exp(&pair, t);
    let eg = rho_eg0 * ((pair.lambda_minus * t).exp() - (pair.lambda_minus - a) * dexp);
    let fg = rho_eg0 * I * (0.5 * theta.sin() * phi_dot) * dexp;
    Ok((eg, fg))
}

/// Six independent density-matrix elements in a basis (first, second, g).
///
/// In the rotating frame "first/second" are |e′⟩, |f′⟩; in the original
/// frame they are ψ_d(θ, 0) and ψ_b(θ, 0). Kept as a table rather than a
/// density matrix because truncated expansions need not be positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementTable {
    pub p11: f64,
    pub p22: f64,
    pub pgg: f64,
    pub c12: C64,
    pub c1g: C64,
    pub c2g: C64,
}

impl ElementTable {
    /// Reads the table from a 3×3 matrix in the basis (e, f, g).
    pub fn from_matrix(m: &CMatrix) -> Self {
        ElementTable {
            p11: m[(E, E)].re,
            p22: m[(F, F)].re,
            pgg: m[(G, G)].re,
            c12: m[(E, F)],
            c1g: m[(E, G)],
            c2g: m[(F, G)],
        }
    }

    /// Reads the table of `rho` in the basis (ψ_d, ψ_b, g) of (θ, φ).
    pub fn in_dfs_basis(m: &CMatrix, theta: f64, phi: f64) -> Self {
        let [d, b] = crate::model::dfs_amplitudes(theta, phi);
        let g = [ZERO, ZERO, ONE];
        ElementTable {
            p11: m.sandwich(&d, &d).re,
            p22: m.sandwich(&b, &b).re,
            pgg: m.sandwich(&g, &g).re,
            c12: m.sandwich(&d, &b),
            c1g: m.sandwich(&d, &g),
            c2g: m.sandwich(&b, &g),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(3);
        m[(E, E)] = C64::new(self.p11, 0.0);
        m[(F, F)] = C64::new(self.p22, 0.0);
        m[(G, G)] = C64::new(self.pgg, 0.0);
        m[(E, F)] = self.c12;
        m[(F, E)] = self.c12.conj();
        m[(E, G)] = self.c1g;
        m[(G, E)] = self.c1g.conj();
        m[(F, G)] = self.c2g;
        m[(G, F)] = self.c2g.conj();
        m
    }

    pub fn trace(&self) -> f64 {
        self.p11 + self.p22 + self.pgg
    }

    /// Largest absolute difference over the six elements.
    pub fn max_abs_diff(&self, other: &ElementTable) -> f64 {
        [
            (self.p11 - other.p11).abs(),
            (self.p22 - other.p22).abs(),
            (self.pgg - other.pgg).abs(),
            (self.c12 - other.c12).norm(),
            (self.c1g - other.c1g).norm(),
            (self.c2g - other.c2g).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// First-order adiabaticity parameter x = π sin²θ φ̇ / Γ.
pub fn leak_parameter(decay_rate: f64, theta: f64, phi_dot: f64) -> f64 {
    PI * theta.sin().powi(2) * phi_dot / decay_rate
}

/// Whether the first-order expansions should be trusted at this φ̇/Γ.
pub fn adiabatic_warning(decay_rate: f64, phi_dot: f64) -> Option<String> {
    let ratio = (phi_dot / decay_rate).abs();
    (ratio > tol::ADIABATIC_WARN).then(|| {
        format!(
            "phi_dot/Gamma = {ratio:.3} exceeds {}; first-order expansions are unreliable",
            tol::ADIABATIC_WARN
        )
    })
}

/// Rotating-frame elements after one cycle T = 2π/φ̇, to first order in φ̇/Γ.
/// Only ρ′_ee(0), ρ′_gg(0) and ρ′_eg(0) of the input enter.
pub fn cycle_first_order(
    rho_rot_0: &ElementTable,
    decay_rate: f64,
    theta: f64,
    phi_dot: f64,
) -> ElementTable {
    let x = leak_parameter(decay_rate, theta, phi_dot);
    let k = theta.sin() * phi_dot / (2.0 * decay_rate);
    let coh = rho_rot_0.c1g * C64::from_polar((-x / 2.0).exp(), PI * theta.cos());
    ElementTable {
        p11: (1.0 - x) * rho_rot_0.p11,
        p22: 0.0,
        pgg: rho_rot_0.pgg + x * rho_rot_0.p11,
        c12: -I * k * rho_rot_0.p11,
        c1g: coh,
        c2g: I * k * coh,
    }
}

/// The same cycle map expressed in the original frame, basis (ψ_d, ψ_b, g).
/// The dark/ground coherence picks up e^{iβ} with β = (cos θ − 1)π.
pub fn original_frame_cycle(
    rho_0: &ElementTable,
    decay_rate: f64,
    theta: f64,
    phi_dot: f64,
) -> ElementTable {
    let x = leak_parameter(decay_rate, theta, phi_dot);
    let k = theta.sin() * phi_dot / (2.0 * decay_rate);
    let (beta, _) = berry_phase_and_solid_angle(theta);
    let coh = rho_0.c1g * C64::from_polar((-x / 2.0).exp(), beta);
    ElementTable {
        p11: (1.0 - x) * rho_0.p11,
        p22: 0.0,
        pgg: rho_0.pgg + x * rho_0.p11,
        c12: -I * k * rho_0.p11,
        c1g: coh,
        c2g: I * k * coh,
    }
}

/// Θ = 2π(1 − cos θ) and β = −Θ/2.
pub fn berry_phase_and_solid_angle(theta: f64) -> (f64, f64) {
    let solid = 2.0 * PI * (1.0 - theta.cos());
    (-solid / 2.0, solid)
}

/// V = 1 − π sin²θ φ̇ / (2Γ); errors when the first-order formula breaks down.
pub fn visibility(theta: f64, phi_dot: f64, decay_rate: f64) -> Result<f64> {
    let v = 1.0 - leak_parameter(decay_rate, theta, phi_dot) / 2.0;
    if v <= 0.0 {
        return Err(Error::OutOfRegime(format!(
            "first-order visibility {v:.4} is not positive"
        )));
    }
    Ok(v)
}

/// Spontaneous-emission estimate for the bright-state admixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyReport {
    /// P_b = sin²θ φ̇² / (8Γ²)
    pub bright_population: f64,
    /// γ_e = γ P_b Ω² / Δ²
    pub effective_rate: f64,
    /// V′ = exp(−γ_e T)
    pub visibility_factor: f64,
    /// T = 2π/φ̇
    pub duration: f64,
}

impl PenaltyReport {
    pub fn exponent(&self) -> f64 {
        self.effective_rate * self.duration
    }
}

/// Uses Ω = √(Ω₁² + Ω₂²) and Γ derived from `p`.
pub fn spontaneous_penalty(p: &PhysicalParams, theta: f64, phi_dot: f64) -> Result<PenaltyReport> {
    let r = crate::model::derive_reservoir(p)?;
    if phi_dot == 0.0 {
        return Err(Error::InvalidParams("phi_dot = 0 leaves the cycle time undefined".into()));
    }
    let gamma_big = r.decay_rate;
    let bright_population = theta.sin().powi(2) * phi_dot * phi_dot / (8.0 * gamma_big * gamma_big);
    let effective_rate = p.gamma * bright_population * (p.omega() / p.delta).powi(2);
    let duration = 2.0 * PI / phi_dot.abs();
    Ok(PenaltyReport {
        bright_population,
        effective_rate,
        visibility_factor: (-effective_rate * duration).exp(),
        duration,
    })
}
