use approx::assert_abs_diff_eq;
use wkam_core::critical::critical_value_lp;
use wkam_core::mather::{
    build_polytope, check_l4, optimal_face_optimize, peierls_barrier, select_u0, verify_largest_subsolution,
    BarrierParams, L4Verdict, ScreenedFace, SelectionParams, Sense, L4_MARGIN,
};
use wkam_core::model::{Frozen, QuadraticModel};
use wkam_core::solver::{solve_discounted, SchemeParams};
use wkam_core::torus::{Grid, GridFunction, VelocityGrid};

fn coarse<T: wkam_core::Real>() -> SchemeParams<T> {
    SchemeParams::new(T::lit(0.05), VelocityGrid::new(T::lit(2.0), 41).unwrap(), T::lit(1e-6), 100_000)
}

#[test]
fn f32_and_f64_solves_agree() {
    let m64 = QuadraticModel::<f64>::pendulum(1.0).unwrap();
    let m32 = QuadraticModel::<f32>::pendulum(1.0).unwrap();
    let g64 = Grid::with_density(1.0, 32).unwrap();
    let g32 = Grid::with_density(1.0f32, 32).unwrap();
    let a = solve_discounted(&m64, 0.5, 1.0, &coarse(), &GridFunction::constant(g64, 0.0), &[]).unwrap();
    let b = solve_discounted(&m32, 0.5, 1.0, &coarse(), &GridFunction::constant(g32, 0.0), &[]).unwrap();
    for (x, y) in a.u.values().iter().zip(b.u.values()) {
        assert_abs_diff_eq!(*x, *y as f64, epsilon = 1e-4);
    }
}

#[test]
fn face_extremes_on_the_alpha_model() {
    let m = QuadraticModel::<f64>::alpha_coupled(4.0, 0.0).unwrap();
    let grid = Grid::with_density(4.0, 16).unwrap();
    let sp = coarse::<f64>();
    let p = build_polytope(&Frozen::new(&m, 0.0), &grid, &sp.vgrid, sp.tau).unwrap();
    let (c, mather) = critical_value_lp(&p).unwrap();
    assert_abs_diff_eq!(c.value, 1.0, epsilon = 1e-9);
    let g = p.dl_du0(&m).unwrap();
    let lo = optimal_face_optimize(&p, &mather, &g, Sense::Min, None).unwrap();
    let hi = optimal_face_optimize(&p, &mather, &g, Sense::Max, None).unwrap();
    assert_abs_diff_eq!(lo.value, -1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(hi.value, 0.0, epsilon = 1e-9);
    for f in [&lo, &hi] {
        assert!(f.measure.max_constraint_violation(p.tau()) <= 1e-9);
        assert_abs_diff_eq!(f.measure.mass(), 1.0, epsilon = 1e-9);
    }
    assert_eq!(check_l4(&m, &p, &mather, L4_MARGIN).unwrap().verdict, L4Verdict::Fails);
}

#[test]
fn selected_limit_is_the_largest_constrained_subsolution() {
    let m = QuadraticModel::<f64>::discounted_linear(1.0).unwrap();
    let grid = Grid::with_density(1.0, 32).unwrap();
    let sp = coarse::<f64>();
    let p = build_polytope(&Frozen::new(&m, 0.0), &grid, &sp.vgrid, sp.tau).unwrap();
    let (c, mather) = critical_value_lp(&p).unwrap();
    assert_eq!(check_l4(&m, &p, &mather, L4_MARGIN).unwrap().verdict, L4Verdict::Holds);
    let params = SelectionParams::default();
    let sources = ScreenedFace::new(&p, &mather, params.screen, params.face_tol).support_nodes();
    assert_eq!(sources, vec![0]);
    let bt =
        peierls_barrier(&Frozen::new(&m, 0.0), c.value, &grid, &sources, &BarrierParams::default(), &sp).unwrap();
    let sel = select_u0(&m, &bt, &p, &mather, &params).unwrap();
    let r = verify_largest_subsolution(&sel.u0, &m, c.value, &p, &mather, &bt, &sp, 1e-6, 0.05).unwrap();
    assert!(r.subsolution_slack >= -1e-6, "{r:?}");
    assert!(r.face_min >= -1e-6, "{r:?}");
    assert!(r.shifted_face_min < -1e-6, "{r:?}");
    assert!(r.maximality_gap <= 1e-6, "{r:?}");
}
