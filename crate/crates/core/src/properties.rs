//! Property tests for the structural invariants of each module.

use proptest::prelude::*;

use crate::background::{horizon_distance_from_tortoise, tortoise_from_horizon_distance, Background, Warp};
use crate::evolve::{
    evolve_run, initial_data_bump, random_state, Boundary, BumpData, FieldState, Launch, RadialGrid, RandomStateSpec,
    SolverConfig, Stepper, WaveSystem,
};
use crate::functionals::{DiagnosticsRecorder, FunctionalContext, DEFAULT_EPSILON};
use crate::harmonics::{l_power, synthesize_axisymmetric, AngularQuadrature, Mode, ModeSet};
use crate::observables::{build_hamiltonian, g_weight, lightcone_cutoff};

fn background(warped: bool) -> Background {
    if warped {
        Background::warped(Warp::unit_quadratic()).unwrap()
    } else {
        Background::schwarzschild(1.0).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tortoise_round_trip(log_delta in -12.0f64..9.0, mass in 0.1f64..10.0) {
        let delta = 10f64.powf(log_delta);
        let x = tortoise_from_horizon_distance(delta, mass).unwrap();
        let back = horizon_distance_from_tortoise(x, mass).unwrap();
        prop_assert!((back - delta).abs() <= 1e-10 * delta);
    }

    #[test]
    fn tortoise_is_increasing(log_delta in -10.0f64..6.0, ratio in 1.0001f64..10.0, mass in 0.1f64..10.0) {
        let d = 10f64.powf(log_delta);
        let a = tortoise_from_horizon_distance(d, mass).unwrap();
        let b = tortoise_from_horizon_distance(d * ratio, mass).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn mode_eigenvalues(l in 0usize..200) {
        let m = Mode::sphere(l);
        prop_assert!((m.lambda * m.lambda - m.lt2 - 1.0).abs() <= 1e-12 * m.lambda * m.lambda);
    }

    #[test]
    fn l_powers_compose(l_max in 0usize..40, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let modes = ModeSet::new(l_max, None).unwrap();
        let (a, b, ab) = (l_power(&modes, s), l_power(&modes, t), l_power(&modes, s + t));
        for ((x, y), z) in a.iter().zip(&b).zip(&ab) {
            prop_assert!((x * y - z).abs() <= 1e-12 * z.abs().max(1.0));
        }
        prop_assert_eq!(l_power(&modes, 0.0), vec![1.0; l_max + 1]);
    }

    #[test]
    fn spectrum_must_increase(values in prop::collection::vec(0.0f64..100.0, 1..12)) {
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        prop_assert_eq!(ModeSet::new(0, Some(&values)).is_ok(), increasing);
    }

    #[test]
    fn synthesis_is_linear_and_isometric(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..9),
        other in prop::collection::vec(-1.0f64..1.0, 9),
        c in -3.0f64..3.0,
    ) {
        let l_max = coeffs.len() - 1;
        let modes = ModeSet::new(l_max, None).unwrap();
        let quad = AngularQuadrature::for_modes(&modes).unwrap();
        let other = &other[..coeffs.len()];
        let columns = |v: &[f64]| v.iter().map(|x| vec![*x]).collect::<Vec<_>>();
        let synth = |cols: &[Vec<f64>]| {
            let refs: Vec<&[f64]> = cols.iter().map(|v| v.as_slice()).collect();
            synthesize_axisymmetric(&refs, &quad).unwrap()
        };
        let combo: Vec<f64> = coeffs.iter().zip(other).map(|(a, b)| c * a + b).collect();
        let (sa, sb, sc) = (synth(&columns(&coeffs)), synth(&columns(other)), synth(&columns(&combo)));
        for k in 0..quad.node_count() {
            prop_assert!((sc[k][0] - (c * sa[k][0] + sb[k][0])).abs() <= 1e-12 * (1.0 + c.abs()) * 10.0);
        }
        // orthonormal zonal harmonics: the sphere integral of phi^2 is the coefficient sum of squares
        let mass = quad.sphere_integral(&coeffs, |v| v * v);
        let parseval: f64 = coeffs.iter().map(|a| a * a).sum();
        prop_assert!((mass - parseval).abs() <= 1e-12 * parseval.max(1e-300) + 1e-15);
    }

    #[test]
    fn g_weight_is_odd_increasing_and_bounded(x in -1e3f64..1e3, dx in 1e-3f64..10.0, sigma in 1.1f64..4.0, b in 1e-3f64..2.0) {
        let bound = 1.0 / (sigma - 1.0);
        prop_assert!(g_weight(x, sigma, b).abs() <= bound);
        prop_assert!((g_weight(-x, sigma, b) + g_weight(x, sigma, b)).abs() <= 1e-15 * bound);
        prop_assert!(g_weight(x + dx, sigma, b) > g_weight(x, sigma, b) || g_weight(x, sigma, b) == bound);
    }

    #[test]
    fn lightcone_cutoff_support(frac in 0.0f64..1.0, t in 0.0f64..500.0) {
        let one = (1.0 + t) / 10.0;
        prop_assert_eq!(lightcone_cutoff(frac * one, t), 1.0);
        prop_assert_eq!(lightcone_cutoff(-(2.0 + frac) * one, t), 0.0);
        let mid = lightcone_cutoff((1.0 + frac) * one, t);
        prop_assert!((0.0..=1.0).contains(&mid));
    }

    #[test]
    fn grid_nodes_are_exact(r_min in -500.0f64..0.0, len in 1.0f64..500.0, n in 16usize..5000) {
        let g = RadialGrid::new(r_min, r_min + len, n).unwrap();
        let h = (g.r_max - g.r_min) / (n - 1) as f64;
        for i in [0, 1, n / 2, n - 1] {
            prop_assert_eq!(g.node(i), r_min + i as f64 * h);
        }
    }

    #[test]
    fn trapping_fields_match_their_definition(x in -60.0f64..60.0, warped in any::<bool>()) {
        let bg = background(warped).with_nonlinearity(2.9).unwrap();
        let s = bg.potentials(x).unwrap();
        let tol = 1e-13 * (s.v.abs() + s.v_l.abs() + s.f.abs() + x.abs() * (s.dv.abs() + s.dv_l.abs() + s.df.abs()) + 1e-300);
        prop_assert!((s.trap_v - (2.0 * s.v + x * s.dv)).abs() <= tol);
        prop_assert!((s.trap_vl - (2.0 * s.v_l + x * s.dv_l)).abs() <= tol);
        prop_assert!((s.trap_f - (2.0 * s.f + x * s.df)).abs() <= tol);
        prop_assert!(s.v >= 0.0 && s.v_l > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hamiltonian_is_symmetric(l in 0usize..25, warped in any::<bool>()) {
        let grid = RadialGrid::new(-30.0, 30.0, 121).unwrap();
        let h = build_hamiltonian(&Mode::sphere(l), &background(warped), &grid).unwrap();
        prop_assert!(h.symmetry_defect() <= 1e-12 * h.norm());
    }

    #[test]
    fn modes_evolve_independently(seed in 0u64..1000, warped in any::<bool>()) {
        let grid = RadialGrid::new(-30.0, 30.0, 301).unwrap();
        let bg = background(warped);
        let spec = RandomStateSpec { region: (-10.0, 10.0), ..Default::default() };
        let joint_state = random_state(&grid, 3, &spec, seed).unwrap();
        let joint = WaveSystem::new(&bg, &ModeSet::new(2, None).unwrap(), grid, false).unwrap();
        let dt = 0.05;
        let mut stepper = Stepper::new(&joint);
        let mut s = joint_state.clone();
        for _ in 0..40 {
            stepper.advance(&mut s, dt).unwrap();
        }
        for l in 0..3 {
            let single = WaveSystem::new(&bg, &ModeSet::single(l), grid, false).unwrap();
            let mut one = FieldState::zeros(&grid, 1);
            one.phi[0] = joint_state.phi[l].clone();
            one.phidot[0] = joint_state.phidot[l].clone();
            let mut stepper = Stepper::new(&single);
            for _ in 0..40 {
                stepper.advance(&mut one, dt).unwrap();
            }
            prop_assert_eq!(&one.phi[0], &s.phi[l]);
            prop_assert_eq!(&one.phidot[0], &s.phidot[l]);
        }
    }

    #[test]
    fn finite_propagation_speed(center in -5.0f64..5.0, width in 0.3f64..1.5, steps in 1usize..60) {
        let grid = RadialGrid::with_spacing(-40.0, 40.0, 0.1).unwrap();
        let bg = background(false);
        let sys = WaveSystem::new(&bg, &ModeSet::new(1, None).unwrap(), grid, false).unwrap();
        let data = BumpData { center, width, amplitude: 1.0, mode_weights: vec![1.0, 1.0], launch: Launch::TimeSymmetric };
        let s0 = initial_data_bump(&grid, &data).unwrap();
        let support = |arrays: &[Vec<f64>]| {
            let nz: Vec<usize> = (0..grid.n).filter(|&i| arrays.iter().any(|a| a[i] != 0.0)).collect();
            (nz[0], nz[nz.len() - 1])
        };
        let (lo, hi) = support(&s0.phi);
        let mut s = s0;
        let mut stepper = Stepper::new(&sys);
        for _ in 0..steps {
            stepper.advance(&mut s, 0.05).unwrap();
        }
        // time-symmetric data: phidot starts at zero; each step moves phi one
        // cell and the closing half kick moves phidot one more
        let (plo, phi_hi) = support(&s.phi);
        let (dlo, dhi) = support(&s.phidot);
        prop_assert!(plo + steps >= lo && phi_hi <= hi + steps);
        prop_assert!(dlo + steps + 1 >= lo && dhi <= hi + steps + 1);
    }

    #[test]
    fn diagnostics_invariants(seed in 0u64..1000, warped in any::<bool>()) {
        let grid = RadialGrid::with_spacing(-40.0, 40.0, 0.2).unwrap();
        let bg = background(warped);
        let modes = ModeSet::new(2, None).unwrap();
        let sys = WaveSystem::new(&bg, &modes, grid, false).unwrap();
        let spec = RandomStateSpec { region: (-10.0, 10.0), ..Default::default() };
        let s0 = random_state(&grid, 3, &spec, seed).unwrap();
        let cfg = SolverConfig { dt: 0.1, t_end: 10.0, boundary: Boundary::DirichletTruncation, semilinear: false };
        let mut rec = DiagnosticsRecorder::new(FunctionalContext::new(&sys, DEFAULT_EPSILON).unwrap(), 5);
        evolve_run(&cfg, &sys, s0, &mut [&mut rec]).unwrap();
        for r in &rec.records {
            prop_assert!(r.e >= 0.0 && r.e_c_positive >= 0.0);
        }
        for w in rec.records.windows(2) {
            prop_assert!(w[1].t > w[0].t);
            prop_assert!(w[1].morawetz_cum >= w[0].morawetz_cum);
            prop_assert!(w[1].angular_cum >= w[0].angular_cum);
            prop_assert!(w[1].l4_cum >= w[0].l4_cum);
        }
    }
}
