//! Numerical tolerances shared by production checks and the test suites.

/// Relative Hermiticity defect allowed for a validated density matrix.
pub const HERMITIAN_REL: f64 = 1e-12;

/// Absolute Hermiticity defect accepted by the eigen solver.
pub const EIGEN_HERMITIAN: f64 = 1e-10;

/// Trace deviation allowed for a freshly constructed density matrix.
pub const TRACE: f64 = 1e-10;

/// Most negative eigenvalue accepted for a freshly constructed density matrix.
pub const MIN_EIGENVALUE: f64 = -1e-9;

/// Unit-norm tolerance for pure states.
pub const NORM: f64 = 1e-12;

/// Trace drift, Hermiticity defect and negativity allowed after integration.
/// No renormalization is applied, so these double as quality signals.
pub const INTEGRATED_DRIFT: f64 = 1e-8;

/// Minimum |<psi_d|rho|g>| for which a geometric phase is defined.
pub const MIN_COHERENCE: f64 = 1e-12;

/// Eigenvalue splitting (relative to the decay rate) below which the
/// coherence pair is treated as confluent.
pub const CONFLUENT_REL: f64 = 1e-12;

/// Above this ratio of steering rate to decay rate the first-order
/// expansions are flagged as unreliable.
pub const ADIABATIC_WARN: f64 = 0.3;


/// Hierarchy thresholds that trigger (non-fatal) warnings.
pub const WARN_DELTA_OVER_OMEGA: f64 = 20.0;
pub const WARN_KAPPA_OVER_LAMBDA: f64 = 10.0;

/// Mean photon number above which the cavity is no longer "virtually populated".
pub const MAX_VIRTUAL_PHOTONS: f64 = 0.05;

/// Change in reported metrics allowed when the Fock truncation is raised by one.
pub const TRUNCATION_CHANGE: f64 = 1e-6;
