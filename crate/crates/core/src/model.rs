//! Operators of the engineered-reservoir model: physical rates, the derived
//! dissipator parameters, the Lindblad operator with its dark and bright
//! states, the rotating-frame unitary and its generator, master-equation
//! right-hand sides, and the effective atom–cavity Hamiltonian.
//!
//! Basis ordering is fixed: `|e⟩, |f⟩, |g⟩` → indices 0, 1, 2.
//! All rates are angular frequencies. The dissipator keeps the
//! `2LρL† − {L†L, ρ}` normalization, so the bright state decays at 2Γ.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numlin::{CMatrix, DensityMatrix, PureState, ONE, ZERO};
use crate::tol;

pub const E: usize = 0;
pub const F: usize = 1;
pub const G: usize = 2;
/// Excited level, only present in the four-level model.
pub const R: usize = 3;

pub const ATOM_DIM: usize = 3;

/// Lab-level rates, all in angular-frequency units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub g: f64,
    pub delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub kappa: f64,
    pub gamma: f64,
}

/// Dimensionless ratios that decide whether both elimination steps hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hierarchy {
    pub delta_over_omega: f64,
    pub delta_over_g: f64,
    pub kappa_over_stark: f64,
    pub kappa_over_lambda: f64,
}

impl Hierarchy {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.delta_over_omega < tol::WARN_DELTA_OVER_OMEGA {
            w.push(format!(
                "delta/omega = {:.3} < {}: excited level may not be adiabatically eliminable",
                self.delta_over_omega,
                tol::WARN_DELTA_OVER_OMEGA
            ));
        }
        if self.kappa_over_lambda < tol::WARN_KAPPA_OVER_LAMBDA {
            w.push(format!(
                "kappa/lambda = {:.3} < {}: cavity mode may not be adiabatically eliminable",
                self.kappa_over_lambda,
                tol::WARN_KAPPA_OVER_LAMBDA
            ));
        }
        w
    }
}

impl PhysicalParams {
    /// Splits a total Rabi amplitude `omega` as Ω₁ = Ω sin(θ/2), Ω₂ = Ω cos(θ/2).
    #[allow(clippy::too_many_arguments)]
    pub fn from_total_rabi(
        g: f64,
        delta: f64,
        omega: f64,
        theta: f64,
        phi1: f64,
        phi2: f64,
        kappa: f64,
        gamma: f64,
    ) -> Self {
        PhysicalParams {
            g,
            delta,
            omega1: omega * (theta / 2.0).sin(),
            omega2: omega * (theta / 2.0).cos(),
            phi1,
            phi2,
            kappa,
            gamma,
        }
    }

    /// The Cs cavity-QED set: g = 2π·34 MHz, Δ = 100g, Ω = g, θ = π/4,
    /// κ = 2π·4.1 MHz, γ = 2π·2.6 MHz. Time unit is µs.
    pub fn cs_defaults() -> Self {
        let two_pi = 2.0 * PI;
        let g = two_pi * 34.0;
        Self::from_total_rabi(g, 100.0 * g, g, PI / 4.0, 0.0, 0.0, two_pi * 4.1, two_pi * 2.6)
    }

    /// Total Rabi amplitude √(Ω₁² + Ω₂²).
    pub fn omega(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.g,
            self.delta,
            self.omega1,
            self.omega2,
            self.phi1,
            self.phi2,
            self.kappa,
            self.gamma,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite physical parameter".into()));
        }
        if self.g <= 0.0 || self.delta <= 0.0 || self.kappa <= 0.0 {
            return Err(Error::InvalidParams("g, delta and kappa must be positive".into()));
        }
        if self.omega1 < 0.0 || self.omega2 < 0.0 || self.gamma < 0.0 {
            return Err(Error::InvalidParams(
                "Rabi frequencies and gamma must be non-negative".into(),
            ));
        }
        if self.omega1 == 0.0 && self.omega2 == 0.0 {
            return Err(Error::InvalidParams("both Rabi frequencies are zero".into()));
        }
        Ok(())
    }

    pub fn hierarchy(&self) -> Hierarchy {
        let lambda = self.omega() * self.g / self.delta;
        Hierarchy {
            delta_over_omega: self.delta / self.omega(),
            delta_over_g: self.delta / self.g,
            kappa_over_stark: self.kappa / (self.g * self.g / self.delta),
            kappa_over_lambda: self.kappa / lambda,
        }
    }
}

/// Raman rates λ_j = Ω_j g / Δ and their quadrature sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamanRates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda: f64,
}

/// Parameters of the engineered dissipator: decay rate Γ, mixing angle θ and
/// relative phase φ. φ is never wrapped here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReservoirParams {
    pub decay_rate: f64,
    pub theta: f64,
    pub phi: f64,
    pub raman: Option<RamanRates>,
}

impl ReservoirParams {
    pub fn new(decay_rate: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(decay_rate > 0.0) || !decay_rate.is_finite() {
            return Err(Error::InvalidParams(format!("decay rate {decay_rate} must be positive")));
        }
        check_theta(theta)?;
        if !phi.is_finite() {
            return Err(Error::InvalidParams("phi must be finite".into()));
        }
        Ok(ReservoirParams {
            decay_rate,
            theta,
            phi,
            raman: None,
        })
    }

    pub fn with_angles(&self, theta: f64, phi: f64) -> Self {
        ReservoirParams { theta, phi, ..*self }
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidParams(format!("theta {theta} outside [0, pi]")));
    }
    Ok(())
}

pub fn derive_reservoir(p: &PhysicalParams) -> Result<ReservoirParams> {
    p.validate()?;
    let lambda1 = p.omega1 * p.g / p.delta;
    let lambda2 = p.omega2 * p.g / p.delta;
    let lambda = lambda1.hypot(lambda2);
    if lambda == 0.0 {
        return Err(Error::InvalidParams("lambda vanishes".into()));
    }
    let theta = 2.0 * (lambda1 / lambda).clamp(0.0, 1.0).asin();
    Ok(ReservoirParams {
        decay_rate: lambda * lambda / p.kappa,
        theta,
        phi: p.phi1 - p.phi2,
        raman: Some(RamanRates {
            lambda1,
            lambda2,
            lambda,
        }),
    })
}

/// L = √Γ (sin θ/2 |g⟩⟨e| + e^{−iφ} cos θ/2 |g⟩⟨f|)
pub fn lindblad_op(r: &ReservoirParams) -> CMatrix {
    lindblad_at(r.decay_rate, r.theta, r.phi)
}

pub(crate) fn lindblad_at(decay_rate: f64, theta: f64, phi: f64) -> CMatrix {
    let amp = decay_rate.sqrt();
    let mut l = CMatrix::zeros(ATOM_DIM);
    l[(G, E)] = C64::new(amp * (theta / 2.0).sin(), 0.0);
    l[(G, F)] = C64::from_polar(amp * (theta / 2.0).cos(), -phi);
    l
}

/// Dark and bright states of L:
/// ψ_d = (cos θ/2, −e^{iφ} sin θ/2, 0), ψ_b = (e^{−iφ} sin θ/2, cos θ/2, 0).
pub fn dfs_basis(theta: f64, phi: f64) -> (PureState, PureState) {
    let [d, b] = dfs_amplitudes(theta, phi);
    (
        PureState::new(d.to_vec()).expect("unit norm by construction"),
        PureState::new(b.to_vec()).expect("unit norm by construction"),
    )
}

pub(crate) fn dfs_amplitudes(theta: f64, phi: f64) -> [[C64; 3]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, phi), ZERO],
        [C64::from_polar(s, -phi), C64::new(c, 0.0), ZERO],
    ]
}

/// The rotating-frame unitary. Depends on φ/2 and is therefore 4π-periodic.
pub fn frame_unitary(theta: f64, phi: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let p = C64::from_polar(1.0, phi / 2.0);
    let m = p.conj();
    let mut u = CMatrix::zeros(ATOM_DIM);
    u[(0, 0)] = p * c;
    u[(0, 1)] = -m * s;
    u[(1, 0)] = p * s;
    u[(1, 1)] = m * c;
    u[(2, 2)] = ONE;
    u
}

/// A = U̇U† for the trajectory (θ, φ) with rates (θ̇, φ̇):
/// A = θ̇ [[0, −½], [½, 0]] + (i φ̇ / 2) [[cos θ, sin θ], [sin θ, −cos θ]]
/// on the {e′, f′} block, zero elsewhere. Anti-Hermitian and independent of φ.
pub fn frame_generator(theta: f64, _phi: f64, theta_dot: f64, phi_dot: f64) -> CMatrix {
    let (st, ct) = theta.sin_cos();
    let h = 0.5 * phi_dot;
    let mut a = CMatrix::zeros(ATOM_DIM);
    a[(0, 0)] = C64::new(0.0, h * ct);
    a[(0, 1)] = C64::new(-0.5 * theta_dot, h * st);
    a[(1, 0)] = C64::new(0.5 * theta_dot, h * st);
    a[(1, 1)] = C64::new(0.0, -h * ct);
    a
}

/// Precomputed `2LρL† − {L†L, ρ}` for a fixed jump operator.
#[derive(Clone, Debug)]
pub struct Dissipator {
    l: CMatrix,
    l_dag: CMatrix,
    l_dag_l: CMatrix,
}

impl Dissipator {
    pub fn new(l: CMatrix) -> Self {
        let l_dag = l.adjoint();
        let l_dag_l = &l_dag * &l;
        Dissipator { l, l_dag, l_dag_l }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let jump = &(&self.l * rho) * &self.l_dag;
        let anti = &(&self.l_dag_l * rho) + &(rho * &self.l_dag_l);
        &jump.scale(C64::new(2.0, 0.0)) - &anti
    }
}

/// ρ̇ = 2LρL† − ρL†L − L†Lρ
pub fn lindblad_rhs(rho: &DensityMatrix, l: &CMatrix) -> Result<CMatrix> {
    if rho.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho.dim(),
        });
    }
    Ok(Dissipator::new(l.clone()).apply(rho.matrix()))
}

/// Right-hand side in the frame ρ′ = UρU†:
/// 2L′ρ′L′† − {L′†L′, ρ′} + Aρ′ + ρ′A†, with L′ = ULU†, A = U̇U†.
pub fn rotating_rhs(
    rho_p: &DensityMatrix,
    r: &ReservoirParams,
    theta_dot: f64,
    phi_dot: f64,
) -> Result<CMatrix> {
    if rho_p.dim() != ATOM_DIM {
        return Err(Error::DimensionMismatch {
            expected: ATOM_DIM,
            found: rho_p.dim(),
        });
    }
    Ok(rotating_rhs_matrix(rho_p.matrix(), r, theta_dot, phi_dot))
}

pub(crate) fn rotating_rhs_matrix(
    rho_p: &CMatrix,
    r: &ReservoirParams,
    theta_dot: f64,
    phi_dot: f64,
) -> CMatrix {
    let u = frame_unitary(r.theta, r.phi);
    let l_rot = lindblad_op(r).conjugate_by(&u);
    let a = frame_generator(r.theta, r.phi, theta_dot, phi_dot);
    let diss = Dissipator::new(l_rot).apply(rho_p);
    let frame = &(&a * rho_p) + &(rho_p * &a.adjoint());
    &diss + &frame
}

/// Index of |atom, n⟩ in the atom ⊗ Fock space with `n_max + 1` levels.
#[inline]
pub fn composite_index(atom: usize, n: usize, n_max: usize) -> usize {
    atom * (n_max + 1) + n
}

/// H_e = (g²/Δ) a†a |g⟩⟨g| + [λ₁e^{−iφ₁} a |e⟩⟨g| + λ₂e^{−iφ₂} a |f⟩⟨g|] + H.c.
/// on the 3·(n_max + 1) dimensional atom ⊗ Fock space.
pub fn hamiltonian_effective(p: &PhysicalParams, n_max: usize) -> Result<CMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    let lambda1 = p.omega1 * p.g / p.delta;
    let lambda2 = p.omega2 * p.g / p.delta;
    Ok(effective_hamiltonian_at(
        p.g * p.g / p.delta,
        C64::from_polar(lambda1, -p.phi1),
        C64::from_polar(lambda2, -p.phi2),
        n_max,
    ))
}

/// Same operator from the Stark coefficient and complex Raman couplings
/// `c1 = λ₁e^{−iφ₁}`, `c2 = λ₂e^{−iφ₂}`.
pub(crate) fn effective_hamiltonian_at(stark: f64, c1: C64, c2: C64, n_max: usize) -> CMatrix {
    let dim = ATOM_DIM * (n_max + 1);
    let mut h = CMatrix::zeros(dim);
    for n in 0..=n_max {
        h[(composite_index(G, n, n_max), composite_index(G, n, n_max))] =
            C64::new(stark * n as f64, 0.0);
    }
    // a|e⟩⟨g| : |g, n⟩ → √n |e, n−1⟩
    for n in 1..=n_max {
        let sq = (n as f64).sqrt();
        let gn = composite_index(G, n, n_max);
        for (level, coupling) in [(E, c1), (F, c2)] {
            let row = composite_index(level, n - 1, n_max);
            h[(row, gn)] += coupling * sq;
            h[(gn, row)] += coupling.conj() * sq;
        }
    }
    h
}
