use std::f64::consts::TAU;

use proptest::prelude::*;

use imexrelax::harness::{convergence_rate_log3, error_norm, Norm, Restriction};
use imexrelax::integrator::{imex_step, integrate, StepControl};
use imexrelax::models::{
    broadwell_system, diffusive2x2_system, klf_system, r13_system, Closure, PenalizationConfig, R13Boundary,
    R13Params,
};
use imexrelax::spatial::{solve_tridiagonal, Grid1D, TridiagonalSystem};
use imexrelax::tableau::{load_tableau, serialize, ButcherTableau, ImexTableau};
use imexrelax::{Mode, SplitSystem, State};

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn split_defect(sys: &dyn SplitSystem, y: &State) -> f64 {
    let sum = sys.explicit_rhs(y, 0.0).unwrap().sum(&sys.implicit_rhs(y, 0.0).unwrap());
    let full = sys.unsplit_rhs(y, 0.0).unwrap();
    sum.max_abs_diff(&full) / full.max_abs().max(1.0)
}

/// DIRK pair with consistent abscissae.
fn dirk_pair() -> impl Strategy<Value = ImexTableau> {
    (2usize..5)
        .prop_flat_map(|s| {
            (
                Just(s),
                prop::collection::vec(-2.0f64..2.0, s * s),
                prop::collection::vec(-2.0f64..2.0, s * s),
                prop::collection::vec(0.1f64..1.0, s),
                prop::collection::vec(-1.0f64..1.0, s),
                prop::collection::vec(-1.0f64..1.0, s),
            )
        })
        .prop_map(|(s, ea, ia, diag, eb, ib)| {
            let rows = |a: &[f64], implicit: bool| -> Vec<Vec<f64>> {
                (0..s)
                    .map(|i| {
                        (0..s)
                            .map(|j| match (j < i, j == i && implicit) {
                                (true, _) => a[i * s + j],
                                (false, true) => diag[i],
                                _ => 0.0,
                            })
                            .collect()
                    })
                    .collect()
            };
            let build = |rows: Vec<Vec<f64>>, b: &[f64]| {
                let c = rows.iter().map(|r| r.iter().sum()).collect();
                ButcherTableau::from_rows(&rows, b.to_vec(), c)
            };
            ImexTableau::new("random", build(rows(&ea, false), &eb), build(rows(&ia, true), &ib))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log3_is_antisymmetric(e1 in 1e-12f64..1.0, e2 in 1e-12f64..1.0) {
        let a = convergence_rate_log3(e1, e2).unwrap();
        let b = convergence_rate_log3(e2, e1).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn error_norm_is_a_metric(a in field(20), b in field(20), c in field(20)) {
        for norm in [Norm::L1, Norm::Linf] {
            let ab = error_norm(&a, &b, 0.1, norm).unwrap();
            prop_assert_eq!(ab, error_norm(&b, &a, 0.1, norm).unwrap());
            prop_assert_eq!(error_norm(&a, &a, 0.1, norm).unwrap(), 0.0);
            let ac = error_norm(&a, &c, 0.1, norm).unwrap();
            let cb = error_norm(&c, &b, 0.1, norm).unwrap();
            prop_assert!(ab <= ac + cb + 1e-14);
        }
    }

    #[test]
    fn restriction_recovers_coarse_samples(n in 4usize..40, k in 0.5f64..3.0) {
        let f = |x: f64| (k * x).sin();
        let (cc, fc): (Vec<f64>, Vec<f64>) = (
            (0..n).map(|j| f(-1.0 + (j as f64 + 0.5) * 2.0 / n as f64)).collect(),
            (0..3 * n).map(|j| f(-1.0 + (j as f64 + 0.5) * 2.0 / (3 * n) as f64)).collect(),
        );
        let r = Restriction::CellCentersRatio3.apply(&fc, n).unwrap();
        prop_assert!(error_norm(&cc, &r, 1.0, Norm::Linf).unwrap() < 1e-14);
        let nodes: Vec<f64> = (0..2 * n).map(|j| f(j as f64 / (2 * n) as f64)).collect();
        let r = Restriction::NodesRatio2.apply(&nodes, n).unwrap();
        let coarse: Vec<f64> = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        prop_assert!(error_norm(&coarse, &r, 1.0, Norm::Linf).unwrap() < 1e-14);
    }

    #[test]
    fn tableau_round_trip_is_bit_exact(t in dirk_pair()) {
        let back = load_tableau(&serialize(&t)).unwrap();
        prop_assert_eq!(back.explicit, t.explicit);
        prop_assert_eq!(back.implicit, t.implicit);
    }

    #[test]
    fn cyclic_tridiagonal_residual(lower in field(12), upper in field(12), rhs in field(12)) {
        let diag: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 2.5 + l.abs() + u.abs()).collect();
        let sys = TridiagonalSystem { lower, diag, upper, rhs, cyclic: true };
        let x = solve_tridiagonal(&sys).unwrap().x;
        let back = sys.apply(&x);
        prop_assert!(error_norm(&back, &sys.rhs, 1.0, Norm::Linf).unwrap() < 1e-12);
    }

    #[test]
    fn split_terms_cancel(u in field(16), v in field(16), w in field(16), eps in 1e-4f64..1.0) {
        let grid = Grid1D::periodic(0.0, TAU, 16).unwrap();
        let y2 = State::from_components(&[u.clone(), v.clone()]).unwrap();
        for mode in [Mode::ImexI, Mode::ImexE] {
            let d = diffusive2x2_system(grid, eps, Closure::identity(), Closure::linear(0.2), mode, PenalizationConfig::default()).unwrap();
            prop_assert!(split_defect(&d, &y2) <= 1e-13);
        }
        let r = r13_system(16, R13Params { g: 0.0, alpha_bc: 0.7, beta_bc: 0.3, eps }, R13Boundary::Periodic, PenalizationConfig::default()).unwrap();
        let y3 = State::from_components(&[u.clone(), v, w.clone()]).unwrap();
        prop_assert!(split_defect(&r, &y3) <= 1e-13);
        let rho: Vec<f64> = u.iter().map(|x| 1.5 + x).collect();
        let z: Vec<f64> = w.iter().map(|x| 1.5 + x).collect();
        let b = broadwell_system(grid, eps).unwrap();
        let yb = State::from_components(&[rho, u, z]).unwrap();
        prop_assert!(split_defect(&b, &yb) <= 1e-13);
    }

    #[test]
    fn broadwell_step_conserves_mass_and_momentum(m in field(32), pert in field(32), eps in 1e-8f64..1.0) {
        let grid = Grid1D::periodic(0.0, TAU, 32).unwrap();
        let rho: Vec<f64> = pert.iter().map(|p| 1.2 + 0.5 * p).collect();
        let z: Vec<f64> = rho.iter().zip(&m).map(|(r, m)| r + m.abs()).collect();
        let y0 = State::from_components(&[rho, m, z]).unwrap();
        let sys = broadwell_system(grid, eps).unwrap();
        let tab = ImexTableau::builtin("ssp2-332").unwrap();
        let y1 = imex_step(&sys, &tab, &y0, 0.0, 0.5 * grid.dx).unwrap();
        for k in [0, 1] {
            let before: f64 = y0.comp(k).iter().sum();
            let after: f64 = y1.comp(k).iter().sum();
            prop_assert!((after - before).abs() * grid.dx <= 1e-12);
        }
    }
}

/// With `m = 1` the KLF limit is the linear heat equation, so both modes
/// must approach `exp(-t) cos x` at second order in space.
#[test]
fn klf_with_unit_exponent_matches_heat_oracle() {
    let cases = [
        (Mode::ImexE, PenalizationConfig::disabled(), "imex-midpoint-trapezoid", 0.2),
        (Mode::ImexI, PenalizationConfig::default(), "ssp2-332", 0.0),
    ];
    for (mode, pen, scheme, parabolic_c) in cases {
        let tab = ImexTableau::builtin(scheme).unwrap();
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let grid = Grid1D::periodic(0.0, TAU, n).unwrap();
            let sys = klf_system(grid, 1e-6, 1.0, 0.0, mode, pen).unwrap();
            let dt = if parabolic_c > 0.0 { parabolic_c * grid.dx * grid.dx } else { 0.25 * grid.dx };
            let tr = imexrelax::integrator::integrate_partitioned(&sys, &tab, &sys.demo_initial(), &StepControl::fixed(dt, 0.5)).unwrap();
            let exact = grid.sample(|x| (-0.5f64).exp() * x.cos());
            errs.push(error_norm(tr.final_state().comp(0), &exact, grid.dx, Norm::Linf).unwrap());
        }
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        assert!(orders.iter().all(|o| *o > 1.8), "{mode:?}: errors {errs:?} orders {orders:?}");
    }
}

#[test]
fn vdp_z_order_is_reported_separately() {
    let sys = imexrelax::models::vdp_system(1e-6).unwrap();
    let tab = ImexTableau::builtin("imex-euler").unwrap();
    let y0 = imexrelax::models::VanDerPol::default_initial();
    let finals: Vec<State> = [100, 200, 400]
        .iter()
        .map(|n| integrate(&sys, &tab, &y0, &StepControl::fixed(0.5 / *n as f64, 0.5)).unwrap().final_state().clone())
        .collect();
    for k in 0..2 {
        let e1 = (finals[0].comp(k)[0] - finals[1].comp(k)[0]).abs();
        let e2 = (finals[1].comp(k)[0] - finals[2].comp(k)[0]).abs();
        let p = (e1 / e2).log2();
        assert!((0.8..1.3).contains(&p), "component {k}: order {p}");
    }
}
