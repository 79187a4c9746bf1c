use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use geophase::analytic;
use geophase::dynamics::{self, Frame, IntegratorConfig, SteeringSchedule};
use geophase::model::{self, ReservoirParams, E, F, G};
use geophase::numlin::{self, CMatrix, DensityMatrix, PureState};

fn state_from(v: &[f64], dim: usize) -> DensityMatrix {
    let a = CMatrix::from_fn(dim, |i, j| C64::new(v[2 * (dim * i + j)], v[2 * (dim * i + j) + 1]));
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(C64::new(1.0 / tr, 0.0))).unwrap()
}

fn entries(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 2 * dim * dim)
        .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dark_state_is_annihilated(theta in 0.0f64..PI, phi in -PI..PI, gam in 0.01f64..4.0) {
        let r = ReservoirParams::new(gam, theta, phi).unwrap();
        let (d, b) = model::dfs_basis(theta, phi);
        let l = model::lindblad_op(&r);
        prop_assert!(numlin::norm(&l.mat_vec(d.amplitudes())) <= 1e-15);
        prop_assert!(d.inner(&b).norm() <= 1e-15);
        // the bright state decays into |g⟩ at the full rate
        let lb = l.mat_vec(b.amplitudes());
        prop_assert!((numlin::norm(&lb) - gam.sqrt()).abs() <= 1e-14 * gam.sqrt().max(1.0));
    }

    #[test]
    fn frame_unitary_is_unitary(theta in 0.0f64..PI, phi in -10.0f64..10.0) {
        let u = model::frame_unitary(theta, phi);
        prop_assert!((&u * &u.adjoint()).max_abs_diff(&CMatrix::identity(3)) <= 1e-14);
    }

    #[test]
    fn rotating_generator_is_hermitian_and_traceless(
        v in entries(3), theta in 0.05f64..3.1, gam in 0.1f64..3.0, pd in -1.0f64..1.0, td in -1.0f64..1.0
    ) {
        let rho = state_from(&v, 3);
        let r = ReservoirParams::new(gam, theta, 0.3).unwrap();
        let d = model::rotating_rhs(&rho, &r, td, pd).unwrap();
        prop_assert!(d.trace().norm() <= 1e-13);
        prop_assert!(d.hermiticity_defect() <= 1e-13);
    }

    #[test]
    fn ground_population_never_decreases(theta in 0.1f64..3.0, ratio in 0.02f64..0.3) {
        let r = ReservoirParams::new(1.0, theta, 0.0).unwrap();
        let sched = SteeringSchedule::constant_theta_linear_phi(theta, ratio).unwrap();
        let rho0 = geophase::ramsey::initial_superposition(theta).unwrap();
        let ev = dynamics::evolve(&r, &sched, &rho0, Frame::Rotating, &IntegratorConfig::default(), 40).unwrap();
        let traj = ev.trajectory.unwrap();
        for w in traj.windows(2) {
            prop_assert!(w[1].1.population(G) >= w[0].1.population(G) - 1e-12);
        }
    }

    #[test]
    fn trace_distance_is_a_metric(a in entries(3), b in entries(3), c in entries(3)) {
        let (x, y, z) = (state_from(&a, 3), state_from(&b, 3), state_from(&c, 3));
        let dxy = numlin::trace_distance(&x, &y).unwrap();
        let dyz = numlin::trace_distance(&y, &z).unwrap();
        let dxz = numlin::trace_distance(&x, &z).unwrap();
        prop_assert!(dxz <= dxy + dyz + 1e-12);
        prop_assert!((dxy - numlin::trace_distance(&y, &x).unwrap()).abs() <= 1e-12);
        prop_assert!(numlin::trace_distance(&x, &x).unwrap() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&dxy));
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving(a in entries(6), b in entries(6), p in 0.0f64..1.0) {
        let (x, y) = (state_from(&a, 6), state_from(&b, 6));
        let mixed = DensityMatrix::mix(p, &x, &y).unwrap();
        let lhs = numlin::partial_trace_cavity(&mixed, 3, 2).unwrap();
        let tx = numlin::partial_trace_cavity(&x, 3, 2).unwrap();
        let ty = numlin::partial_trace_cavity(&y, 3, 2).unwrap();
        let rhs = DensityMatrix::mix(p, &tx, &ty).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-14);
        prop_assert!((lhs.matrix().trace().re - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn eigenvalues_sum_to_trace(a in entries(4)) {
        let m = state_from(&a, 4);
        let vals = numlin::hermitian_eigenvalues(m.matrix()).unwrap();
        prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() <= 1e-13);
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(vals[0] >= -1e-13);
    }

    #[test]
    fn exact_coherence_solves_the_rotating_equations(
        theta in 0.05f64..3.1, ratio in 0.01f64..0.5, t in 0.0f64..20.0
    ) {
        // finite-difference residual of the closed form against the equations of motion
        let (gam, pd) = (1.0, ratio);
        let h = 1e-5;
        let at = |s: f64| analytic::coherence_exact(s, C64::new(0.5, 0.0), gam, theta, pd).unwrap();
        let (eg, fg) = at(t + h);
        let (eg0, fg0) = at(t - h);
        let (eg_c, fg_c) = at(t + 0.0);
        let d_eg = (eg - eg0) / (2.0 * h);
        let d_fg = (fg - fg0) / (2.0 * h);
        let i = C64::new(0.0, 1.0);
        let (s, c) = theta.sin_cos();
        let want_eg = i * 0.5 * pd * (c * eg_c + s * fg_c);
        let want_fg = -gam * fg_c + i * 0.5 * pd * (s * eg_c - c * fg_c);
        prop_assert!((d_eg - want_eg).norm() <= 1e-8);
        prop_assert!((d_fg - want_fg).norm() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lab_and_rotating_frames_agree_on_curved_paths(
        theta0 in 0.4f64..2.7, amp in 0.0f64..0.3, ratio in 0.05f64..0.3
    ) {
        let pd = ratio;
        let duration = 2.0 * PI / pd;
        let w = 2.0 * PI / duration;
        let sched = SteeringSchedule::Custom {
            theta: Arc::new(move |t: f64| (theta0 + amp * (w * t).sin(), amp * w * (w * t).cos())),
            phi: Arc::new(move |t: f64| (pd * t, pd)),
            duration,
        };
        let r = ReservoirParams::new(1.0, theta0, 0.0).unwrap();
        let rho0 = PureState::basis(3, E).projector();
        let rho0 = DensityMatrix::mix(0.5, &rho0, &PureState::basis(3, F).projector()).unwrap();
        let cfg = IntegratorConfig::adaptive(1e-12, 1e-11);
        let lab = dynamics::evolve(&r, &sched, &rho0, Frame::Lab, &cfg, 0).unwrap();
        let rot = dynamics::evolve(&r, &sched, &rho0, Frame::Rotating, &cfg, 0).unwrap();
        prop_assert!(numlin::trace_distance(&lab.final_state, &rot.final_state).unwrap() <= 1e-8);
    }
}
