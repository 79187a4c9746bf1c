//! Higher-fidelity models used to check both adiabatic eliminations:
//! the atom ⊗ Fock master equation with cavity loss (checks the cavity
//! elimination) and the explicit four-level time-dependent Hamiltonian
//! (checks the elimination of |r⟩).
//!
//! Composite index convention: `atom * (n_max + 1) + n`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::dynamics::{self, Frame, IntegratorConfig, SteeringSchedule};
use crate::error::{Error, Result};
use crate::model::{self, composite_index, PhysicalParams, ATOM_DIM, E, F, G, R};
use crate::numlin::{self, CMatrix, DensityMatrix, PureState, I, ONE, ZERO};
use crate::tol;

/// Default photon-number truncation.
pub const DEFAULT_N_MAX: usize = 3;

/// Default number of evenly spaced comparison samples per run.
pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockConfig {
    pub n_max: usize,
    /// 3 for the effective model, 4 for the full model with |r⟩.
    pub atom_dim: usize,
    /// Repeat at `n_max + 1` and fail if reported metrics move by more than
    /// `tol::TRUNCATION_CHANGE`.
    pub verify_truncation: bool,
}

impl FockConfig {
    pub fn effective(n_max: usize) -> Self {
        FockConfig {
            n_max,
            atom_dim: ATOM_DIM,
            verify_truncation: true,
        }
    }

    pub fn full(n_max: usize) -> Self {
        FockConfig {
            n_max,
            atom_dim: 4,
            verify_truncation: false,
        }
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.atom_dim * self.fock_dim()
    }

    fn check(&self, atom_dim: usize) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidParams("n_max must be at least 1".into()));
        }
        if self.atom_dim != atom_dim {
            return Err(Error::InvalidParams(format!(
                "this model needs atom_dim = {atom_dim}, got {}",
                self.atom_dim
            )));
        }
        Ok(())
    }
}

impl Default for FockConfig {
    fn default() -> Self {
        Self::effective(DEFAULT_N_MAX)
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    row: usize,
    col: usize,
    val: C64,
}

/// Hermitian operator stored as its non-zero entries.
#[derive(Clone, Debug, Default)]
struct SparseOp {
    entries: Vec<Entry>,
}

impl SparseOp {
    fn push(&mut self, row: usize, col: usize, val: C64) {
        if val != ZERO {
            self.entries.push(Entry { row, col, val });
        }
    }

    /// Adds `val |row⟩⟨col| + h.c.`
    fn push_hc(&mut self, row: usize, col: usize, val: C64) {
        self.push(row, col, val);
        self.push(col, row, val.conj());
    }

    /// out += −i (Hψ)
    fn apply_schrodinger(&self, psi: &[C64], out: &mut [C64]) {
        for e in &self.entries {
            out[e.row] += -I * e.val * psi[e.col];
        }
    }

    /// out += −i [H, ρ] for a row-major ρ of dimension `n`.
    fn apply_commutator(&self, rho: &[C64], out: &mut [C64], n: usize) {
        for e in &self.entries {
            let v = -I * e.val;
            // (Hρ)_{row, j} += h ρ_{col, j}
            let src = &rho[e.col * n..(e.col + 1) * n];
            let dst = &mut out[e.row * n..(e.row + 1) * n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += v * s;
            }
            // (ρH)_{i, col} += ρ_{i, row} h
            for i in 0..n {
                out[i * n + e.col] -= v * rho[i * n + e.row];
            }
        }
    }

    fn to_dense(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for e in &self.entries {
            m[(e.row, e.col)] += e.val;
        }
        m
    }
}

/// Drive-phase steering: φ₁ fixed, φ₂(t) = φ₁ − φ(t); Raman rates split the
/// total λ by the schedule's θ(t).
fn effective_couplings(p: &PhysicalParams, theta: f64, phi: f64) -> (C64, C64) {
    let lambda = p.omega() * p.g / p.delta;
    let (s, c) = (theta / 2.0).sin_cos();
    let phi2 = p.phi1 - phi;
    (
        C64::from_polar(lambda * s, -p.phi1),
        C64::from_polar(lambda * c, -phi2),
    )
}

fn effective_sparse(stark: f64, c1: C64, c2: C64, n_max: usize) -> SparseOp {
    let mut h = SparseOp::default();
    for n in 1..=n_max {
        let gn = composite_index(G, n, n_max);
        h.push(gn, gn, C64::new(stark * n as f64, 0.0));
        let sq = (n as f64).sqrt();
        h.push_hc(composite_index(E, n - 1, n_max), gn, c1 * sq);
        h.push_hc(composite_index(F, n - 1, n_max), gn, c2 * sq);
    }
    h
}

/// Time-dependent generator of the atom ⊗ cavity master equation
/// ρ̇ = −i[H_e(t), ρ] + 2L_cρL_c† − {L_c†L_c, ρ}, L_c = √κ a.
pub struct CompositeGenerator {
    params: PhysicalParams,
    schedule: SteeringSchedule,
    n_max: usize,
    dim: usize,
    stark: f64,
}

impl CompositeGenerator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        self.sparse_hamiltonian(t).to_dense(self.dim)
    }

    fn sparse_hamiltonian(&self, t: f64) -> SparseOp {
        let a = self.schedule.angles(t);
        let (c1, c2) = effective_couplings(&self.params, a.theta, a.phi);
        effective_sparse(self.stark, c1, c2, self.n_max)
    }

    /// Writes ρ̇ into `out` for a row-major ρ.
    pub fn eval(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        let fd = self.n_max + 1;
        let kappa = self.params.kappa;
        out.iter_mut().for_each(|z| *z = ZERO);
        self.sparse_hamiltonian(t).apply_commutator(rho, out, n);
        for i in 0..n {
            let ni = (i % fd) as f64;
            let up_i = i % fd < self.n_max;
            for j in 0..n {
                let nj = (j % fd) as f64;
                let mut acc = rho[i * n + j] * (-kappa * (ni + nj));
                if up_i && j % fd < self.n_max {
                    let w = 2.0 * kappa * ((ni + 1.0) * (nj + 1.0)).sqrt();
                    acc += rho[(i + 1) * n + (j + 1)] * w;
                }
                out[i * n + j] += acc;
            }
        }
    }
}

pub fn build_composite_generator(
    p: &PhysicalParams,
    schedule: &SteeringSchedule,
    fock: &FockConfig,
) -> Result<CompositeGenerator> {
    fock.check(ATOM_DIM)?;
    p.validate()?;
    Ok(CompositeGenerator {
        params: *p,
        schedule: schedule.clone(),
        n_max: fock.n_max,
        dim: fock.dim(),
        stark: p.g * p.g / p.delta,
    })
}

/// Mean photon number ⟨a†a⟩ of a composite state.
pub fn mean_photon_number(rho: &CMatrix, fock_dim: usize) -> f64 {
    (0..rho.dim()).map(|i| (i % fock_dim) as f64 * rho[(i, i)].re).sum()
}

/// Embeds an atomic state with the cavity in vacuum.
pub fn with_vacuum(atom: &DensityMatrix, n_max: usize) -> DensityMatrix {
    let mut vac = vec![ZERO; n_max + 1];
    vac[0] = ONE;
    let vac = CMatrix::outer(&vac, &vac);
    DensityMatrix::with_drift(atom.matrix().kron(&vac), 1e-12, 0.0).expect("product of states")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EliminationReport {
    /// Max over samples of the trace distance between the reduced composite
    /// state and the three-level state.
    pub max_trace_distance: f64,
    pub fitted_gamma: f64,
    /// λ²/κ
    pub predicted_gamma: f64,
    pub kappa_over_lambda: f64,
    pub max_photon_number: f64,
    pub n_max: usize,
    /// Largest metric change at n_max + 1 (0 when not verified).
    pub truncation_change: f64,
}

impl EliminationReport {
    pub fn photons_virtual(&self) -> bool {
        self.max_photon_number <= tol::MAX_VIRTUAL_PHOTONS
    }
}

struct CompositeRun {
    max_trace_distance: f64,
    max_photon_number: f64,
}

fn compare_models(
    p: &PhysicalParams,
    schedule: &SteeringSchedule,
    n_max: usize,
    atom0: &DensityMatrix,
    reference: &[(f64, DensityMatrix)],
    cfg: &IntegratorConfig,
) -> Result<CompositeRun> {
    let fock = FockConfig::effective(n_max);
    let gen = build_composite_generator(p, schedule, &fock)?;
    let cfg = &cfg.with_max_step(1.0 / (p.kappa * n_max as f64));
    let rho0 = with_vacuum(atom0, n_max);
    let times: Vec<f64> = reference.iter().map(|(t, _)| *t).collect();
    let mut max_td = 0.0f64;
    let mut max_n = 0.0f64;
    dynamics::solve(
        |t, y, dy| gen.eval(t, y, dy),
        rho0.matrix().as_slice(),
        0.0,
        schedule.duration(),
        cfg,
        &times,
        |i, t, y| {
            let m = CMatrix::from_vec(y.to_vec())?;
            let state = DensityMatrix::with_drift(m, tol::INTEGRATED_DRIFT, t)?;
            let red = numlin::partial_trace_cavity(&state, ATOM_DIM, fock.fock_dim())?;
            max_td = max_td.max(numlin::trace_distance(&red, &reference[i].1)?);
            max_n = max_n.max(mean_photon_number(state.matrix(), fock.fock_dim()));
            Ok(())
        },
    )?;
    Ok(CompositeRun {
        max_trace_distance: max_td,
        max_photon_number: max_n,
    })
}

/// Fits Γ from the bright-state decay 1 − P_g(t) ≈ e^{−2Γt} of the reduced
/// composite model over t ∈ [0, 1/Γ_pred] with the reservoir frozen.
fn fit_bright_decay(
    p: &PhysicalParams,
    theta: f64,
    phi: f64,
    n_max: usize,
    predicted: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let horizon = 1.0 / predicted;
    let sched = SteeringSchedule::frozen(theta, phi, horizon)?;
    let fock = FockConfig::effective(n_max);
    let gen = build_composite_generator(p, &sched, &fock)?;
    let cfg = &cfg.with_max_step(1.0 / (p.kappa * n_max as f64));
    let (_, bright) = model::dfs_basis(theta, phi);
    let rho0 = with_vacuum(&bright.projector(), n_max);
    let times = dynamics::sample_grid(horizon, 65);
    let mut pts = Vec::with_capacity(times.len());
    dynamics::solve(
        |t, y, dy| gen.eval(t, y, dy),
        rho0.matrix().as_slice(),
        0.0,
        horizon,
        cfg,
        &times,
        |_, t, y| {
            let m = CMatrix::from_vec(y.to_vec())?;
            let red = numlin::partial_trace_matrix(&m, ATOM_DIM, fock.fock_dim())?;
            pts.push((t, (1.0 - red[(G, G)].re).ln()));
            Ok(())
        },
    )?;
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(-sxy / sxx / 2.0)
}

/// Runs the composite and three-level models on the same schedule from the
/// Ramsey superposition and reports how far apart they drift.
pub fn validate_elimination(
    p: &PhysicalParams,
    schedule: &SteeringSchedule,
    fock: &FockConfig,
    cfg: &IntegratorConfig,
) -> Result<EliminationReport> {
    fock.check(ATOM_DIM)?;
    let r = model::derive_reservoir(p)?;
    let raman = r.raman.expect("derived reservoirs carry Raman rates");
    let start = schedule.angles(0.0);
    let [d, _] = model::dfs_amplitudes(start.theta, start.phi);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let atom0 = PureState::new(vec![d[E] * s, d[F] * s, s])?.projector();

    let reference = dynamics::evolve(&r, schedule, &atom0, Frame::Lab, cfg, DEFAULT_SAMPLES)?
        .trajectory
        .expect("samples requested");
    let run = compare_models(p, schedule, fock.n_max, &atom0, &reference, cfg)?;
    let fitted = fit_bright_decay(p, start.theta, start.phi, fock.n_max, r.decay_rate, cfg)?;

    let mut change = 0.0;
    if fock.verify_truncation {
        let more = compare_models(p, schedule, fock.n_max + 1, &atom0, &reference, cfg)?;
        change = (more.max_trace_distance - run.max_trace_distance)
            .abs()
            .max((more.max_photon_number - run.max_photon_number).abs());
        if change > tol::TRUNCATION_CHANGE {
            return Err(Error::TruncationNotConverged { change });
        }
    }

    Ok(EliminationReport {
        max_trace_distance: run.max_trace_distance,
        fitted_gamma: fitted,
        predicted_gamma: r.decay_rate,
        kappa_over_lambda: p.kappa / raman.lambda,
        max_photon_number: run.max_photon_number,
        n_max: fock.n_max,
        truncation_change: change,
    })
}

fn full_sparse(t: f64, p: &PhysicalParams, n_max: usize) -> SparseOp {
    let mut h = SparseOp::default();
    let rot = C64::from_polar(1.0, p.delta * t);
    let drive = 2.0 * (p.delta * t).cos();
    for n in 0..=n_max {
        if n >= 1 {
            // g a e^{iΔt} |r⟩⟨g| : |g, n⟩ → √n |r, n−1⟩
            h.push_hc(
                composite_index(R, n - 1, n_max),
                composite_index(G, n, n_max),
                rot * (p.g * (n as f64).sqrt()),
            );
        }
        let rn = composite_index(R, n, n_max);
        h.push_hc(rn, composite_index(E, n, n_max), C64::from_polar(p.omega1 * drive, p.phi1));
        h.push_hc(rn, composite_index(F, n, n_max), C64::from_polar(p.omega2 * drive, p.phi2));
    }
    h
}

/// The interaction-picture Hamiltonian on {e, f, g, r} ⊗ Fock:
/// g a e^{iΔt}|r⟩⟨g| + Σ_j Ω_j [e^{i(Δt+φ_j)} + e^{i(−Δt+φ_j)}] |r⟩⟨j| + H.c.
pub fn hamiltonian_full(t: f64, p: &PhysicalParams, fock: &FockConfig) -> Result<CMatrix> {
    fock.check(4)?;
    Ok(full_sparse(t, p, fock.n_max).to_dense(fock.dim()))
}

/// One sample of the four-level check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullSample {
    pub t: f64,
    /// Atomic populations (e, f, g, r) in the full model.
    pub full: [f64; 4],
    /// Atomic populations (e, f, g) in the effective model.
    pub effective: [f64; 3],
    /// |⟨ψ_full|ψ_eff⟩|²
    pub overlap: f64,
}

#[derive(Clone, Debug)]
pub struct FullHamiltonianReport {
    pub max_r_population: f64,
    /// `max_r_population / (Ω/Δ)²`
    pub r_population_coefficient: f64,
    pub min_overlap: f64,
    /// `1 − min_overlap`
    pub overlap_deficit: f64,
    pub samples: Vec<FullSample>,
}

/// Integrates the Schrödinger equation under the four-level Hamiltonian and
/// under the effective one from the same initial product state, comparing
/// them at `samples` evenly spaced times over `horizon`.
///
/// Eliminating |r⟩ from the Hamiltonian as written (to second order in
/// 1/Δ) gives −H_e, so the effective comparison run uses that sign.
pub fn validate_full_hamiltonian(
    p: &PhysicalParams,
    atom_level: usize,
    photons: usize,
    horizon: f64,
    fock: &FockConfig,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<FullHamiltonianReport> {
    fock.check(4)?;
    p.validate()?;
    if atom_level > G || photons > fock.n_max {
        return Err(Error::InvalidParams("initial level outside the model".into()));
    }
    let n_max = fock.n_max;
    let fd = n_max + 1;
    let dim4 = fock.dim();
    let dim3 = ATOM_DIM * fd;
    let idx3 = composite_index(atom_level, photons, n_max);

    let times = dynamics::sample_grid(horizon, samples);
    let (c1, c2) = effective_couplings(p, 2.0 * (p.omega1 / p.omega()).asin(), p.phi1 - p.phi2);
    let eff = effective_sparse(p.g * p.g / p.delta, c1, c2, n_max);
    let mut psi_eff = vec![ZERO; dim3];
    psi_eff[idx3] = ONE;
    let mut eff_states = Vec::with_capacity(times.len());
    dynamics::solve(
        |_, y, dy| {
            dy.iter_mut().for_each(|z| *z = ZERO);
            eff.apply_schrodinger(y, dy);
            // sign flip: the full model reduces to −H_e
            dy.iter_mut().for_each(|z| *z = -*z);
        },
        &psi_eff,
        0.0,
        horizon,
        cfg,
        &times,
        |_, _, y| {
            eff_states.push(y.to_vec());
            Ok(())
        },
    )?;
    psi_eff.clear();

    let mut psi = vec![ZERO; dim4];
    psi[idx3] = ONE; // atom levels e, f, g share indices with the 3-level layout
    let mut out = Vec::with_capacity(times.len());
    dynamics::solve(
        |t, y, dy| {
            dy.iter_mut().for_each(|z| *z = ZERO);
            full_sparse(t, p, n_max).apply_schrodinger(y, dy);
        },
        &psi,
        0.0,
        horizon,
        cfg,
        &times,
        |i, t, y| {
            let pops = |level: usize, v: &[C64]| -> f64 {
                (0..fd).map(|n| v[composite_index(level, n, n_max)].norm_sqr()).sum()
            };
            let e = &eff_states[i];
            let ov: C64 = (0..dim3).map(|k| y[k].conj() * e[k]).sum();
            out.push(FullSample {
                t,
                full: [pops(E, y), pops(F, y), pops(G, y), pops(R, y)],
                effective: [pops(E, e), pops(F, e), pops(G, e)],
                overlap: ov.norm_sqr(),
            });
            Ok(())
        },
    )?;

    let max_r = out.iter().map(|s| s.full[3]).fold(0.0, f64::max);
    let min_overlap = out.iter().map(|s| s.overlap).fold(1.0, f64::min);
    let ratio = (p.omega() / p.delta).powi(2);
    Ok(FullHamiltonianReport {
        max_r_population: max_r,
        r_population_coefficient: max_r / ratio,
        min_overlap,
        overlap_deficit: 1.0 - min_overlap,
        samples: out,
    })
}
