//! Small dense complex linear algebra: square matrices, pure states, density
//! matrices, Hermitian eigenvalues, trace distance and the partial
//! trace over a cavity mode.
//!
//! Dimensions here are tiny (3 for the atom, a few dozen at most for the
//! atom ⊗ Fock space), so everything is stored dense and row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        CMatrix { dim, data }
    }

    /// Builds from row-major entries; fails unless `data.len()` is a square.
    pub fn from_vec(data: Vec<C64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() || dim == 0 {
            return Err(Error::InvalidParams(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("matrix has non-finite entries".into()));
        }
        Ok(CMatrix { dim, data })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// |a⟩⟨b|
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |M - M^H| over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// max |A - B| over entries.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| self[(r / m, c / m)] * other[(r % m, c % m)])
    }

    /// `U · self · U^H`
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        &(u * self) * &u.adjoint()
    }

    /// `⟨a|M|b⟩`
    pub fn sandwich(&self, a: &[C64], b: &[C64]) -> C64 {
        let mb = self.mat_vec(b);
        a.iter().zip(&mb).map(|(x, y)| x.conj() * y).sum()
    }

    fn check_same_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose norm is already 1 (within `tol::NORM`).
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = norm(&amps);
        if (n - 1.0).abs() > tol::NORM {
            return Err(Error::InvalidState(format!("state norm {n} differs from 1")));
        }
        Ok(PureState { amps })
    }

    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = norm(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(PureState {
            amps: amps.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        PureState { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amps, &other.amps)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            mat: CMatrix::outer(&self.amps, &self.amps),
        }
    }

    /// `self ⊗ other`
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        PureState { amps }
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

/// Measured deviations of a matrix from the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDefects {
    pub trace_drift: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl StateDefects {
    pub fn measure(m: &CMatrix) -> Result<Self> {
        let hermiticity = m.hermiticity_defect();
        let trace_drift = (m.trace() - ONE).norm();
        let sym = symmetrize(m);
        let min_eigenvalue = eigen(&sym, false)?.0[0];
        Ok(StateDefects {
            trace_drift,
            hermiticity,
            min_eigenvalue,
        })
    }

    pub fn within(&self, drift: f64) -> bool {
        self.trace_drift <= drift && self.hermiticity <= drift && self.min_eigenvalue >= -drift
    }
}

impl DensityMatrix {
    /// Validates with the strict construction tolerances.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let scale = mat.max_abs().max(f64::MIN_POSITIVE);
        let herm = mat.hermiticity_defect();
        if herm > tol::HERMITIAN_REL * scale {
            return Err(Error::NotHermitian { defect: herm });
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > tol::TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eigen(&mat, false)?.0[0];
        if min < tol::MIN_EIGENVALUE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { mat })
    }

    /// Validates with a single drift tolerance on trace, Hermiticity and
    /// positivity. Used for integrator output, which is never renormalized.
    pub fn with_drift(mat: CMatrix, drift: f64, t: f64) -> Result<Self> {
        let d = StateDefects::measure(&mat)?;
        if !d.within(drift) {
            return Err(Error::InvariantViolation {
                t,
                trace_drift: d.trace_drift,
                hermiticity: d.hermiticity,
                min_eigenvalue: d.min_eigenvalue,
            });
        }
        Ok(DensityMatrix { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Convex combination `p·a + (1-p)·b`.
    pub fn mix(p: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        a.mat.check_same_dim(&b.mat)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!("mixing weight {p} outside [0, 1]")));
        }
        let m = &a.mat.scale(C64::new(p, 0.0)) + &b.mat.scale(C64::new(1.0 - p, 0.0));
        Ok(DensityMatrix { mat: m })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// `U ρ U^H`; unitarity of `u` is the caller's responsibility.
    pub fn transform(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix {
            mat: self.mat.conjugate_by(u),
        }
    }

    pub fn defects(&self) -> Result<StateDefects> {
        StateDefects::measure(&self.mat)
    }
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.dim, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(eigen(m, false)?.0)
}

/// Eigenvalues (ascending) and eigenvectors (as matrix columns).
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(m)?;
    let (vals, vecs) = eigen(m, true)?;
    Ok((vals, vecs.expect("eigenvectors requested")))
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let defect = m.hermiticity_defect();
    if defect > tol::EIGEN_HERMITIAN {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Hermitian eigensolve via nalgebra, eigenvalues ascending.
fn eigen(m: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let n = m.dim;
    if m.data.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidState("non-finite matrix entry".into()));
    }
    let eig = DMatrix::from_row_slice(n, n, &m.data).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = want_vectors.then(|| CMatrix::from_fn(n, |r, c| eig.eigenvectors[(r, order[c])]));
    Ok((vals, vecs))
}

/// ½ Σ |eigenvalues(a - b)|.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.mat.check_same_dim(&b.mat)?;
    let diff = &a.mat - &b.mat;
    let eig = eigen(&symmetrize(&diff), false)?.0;
    Ok((0.5 * eig.iter().map(|x| x.abs()).sum::<f64>()).min(1.0))
}

/// Traces out the cavity from a state on atom ⊗ Fock, where the composite
/// index is `atom * fock_dim + n`.
pub fn partial_trace_cavity(
    s: &DensityMatrix,
    atom_dim: usize,
    fock_dim: usize,
) -> Result<DensityMatrix> {
    Ok(DensityMatrix {
        mat: partial_trace_matrix(&s.mat, atom_dim, fock_dim)?,
    })
}

pub(crate) fn partial_trace_matrix(m: &CMatrix, atom_dim: usize, fock_dim: usize) -> Result<CMatrix> {
    if atom_dim == 0 || fock_dim == 0 || atom_dim * fock_dim != m.dim {
        return Err(Error::DimensionMismatch {
            expected: atom_dim * fock_dim,
            found: m.dim,
        });
    }
    Ok(CMatrix::from_fn(atom_dim, |i, j| {
        (0..fock_dim)
            .map(|n| m[(i * fock_dim + n, j * fock_dim + n)])
            .sum()
    }))
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigenvalues_of_identity_and_diagonal() {
        assert_eq!(hermitian_eigenvalues(&CMatrix::identity(3)).unwrap(), vec![1.0; 3]);
        let d = CMatrix::from_diagonal(&[c(0.5, 0.0), c(0.2, 0.0), c(0.3, 0.0)]);
        let e = hermitian_eigenvalues(&d).unwrap();
        for (x, y) in e.iter().zip([0.2, 0.3, 0.5]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    /// Roots of det(λ - M) = λ³ - tr λ² + c1 λ - det via the trigonometric
    /// formula for three real roots.
    fn cubic_roots(m: &CMatrix) -> [f64; 3] {
        let a = |i, j| m[(i, j)];
        let tr = (a(0, 0) + a(1, 1) + a(2, 2)).re;
        let c1 = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2)
            - a(0, 2) * a(2, 0)
            + a(1, 1) * a(2, 2)
            - a(1, 2) * a(2, 1))
        .re;
        let det = (a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)))
        .re;
        // depressed cubic x = λ - tr/3
        let p = c1 - tr * tr / 3.0;
        let q = -2.0 * tr.powi(3) / 27.0 + tr * c1 / 3.0 - det;
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut roots = [0.0; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            *root = 2.0 * r * (phi - 2.0 * PI * k as f64 / 3.0).cos() + tr / 3.0;
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    #[test]
    fn eigenvalues_match_cubic_oracle() {
        let m = CMatrix::from_vec(vec![
            c(0.7, 0.0),
            c(0.1, -0.3),
            c(-0.2, 0.05),
            c(0.1, 0.3),
            c(-0.4, 0.0),
            c(0.25, 0.4),
            c(-0.2, -0.05),
            c(0.25, -0.4),
            c(0.1, 0.0),
        ])
        .unwrap();
        let oracle = cubic_roots(&m);
        let got = hermitian_eigenvalues(&m).unwrap();
        for (g, o) in got.iter().zip(oracle) {
            assert!((g - o).abs() < 1e-12, "{g} vs {o}");
        }
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        for k in 0..3 {
            let col: Vec<C64> = (0..3).map(|r| vecs[(r, k)]).collect();
            let mv = m.mat_vec(&col);
            let res: f64 = mv
                .iter()
                .zip(&col)
                .map(|(a, b)| (a - b * vals[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-9);
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        match hermitian_eigenvalues(&m) {
            Err(Error::NotHermitian { defect }) => assert!((defect - 1.0).abs() < 1e-15),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn trace_distance_examples() {
        let e = PureState::basis(3, 0).projector();
        let g = PureState::basis(3, 2).projector();
        assert!(trace_distance(&e, &e).unwrap() < 1e-15);
        assert!((trace_distance(&e, &g).unwrap() - 1.0).abs() < 1e-15);
        // e - I/3 has eigenvalues (2/3, -1/3, -1/3)
        let mixed = DensityMatrix::maximally_mixed(3);
        assert!((trace_distance(&e, &mixed).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        let two = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            trace_distance(&e, &two),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let atom = PureState::normalized(vec![c(1.0, 0.0), c(0.0, 0.5), c(0.3, 0.0)]).unwrap();
        let vac = PureState::basis(3, 0);
        let prod = atom.tensor(&vac).projector();
        let red = partial_trace_cavity(&prod, 3, 3).unwrap();
        assert!(red.matrix().max_abs_diff(atom.projector().matrix()) < 1e-15);

        // (|e,1> + |g,0>)/√2 with atom_dim 3, fock_dim 2
        let mut amps = vec![ZERO; 6];
        amps[1] = c(FRAC_1_SQRT_2, 0.0);
        amps[2 * 2] = c(FRAC_1_SQRT_2, 0.0);
        let ent = PureState::new(amps).unwrap().projector();
        let red = partial_trace_cavity(&ent, 3, 2).unwrap();
        assert!((red.population(0) - 0.5).abs() < 1e-15);
        assert!((red.population(2) - 0.5).abs() < 1e-15);
        assert!(red.element(0, 2).norm() < 1e-15);
        assert!((red.matrix().trace() - ONE).norm() < 1e-12);

        assert!(matches!(
            partial_trace_cavity(&ent, 4, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn density_matrix_validation() {
        let mut m = CMatrix::identity(3).scale(c(0.5, 0.0));
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(2, 2)] = c(0.0, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
