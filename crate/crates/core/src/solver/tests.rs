use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::*;
use crate::model::{pendulum_barrier_from_zero, QuadraticModel};

fn reference_grid(period: f64) -> Grid<f64> {
    Grid::with_density(period, 256).unwrap()
}

fn coarse() -> (Grid<f64>, SchemeParams<f64>) {
    let grid = Grid::new(1.0, 64).unwrap();
    let sp = SchemeParams::new(0.02, VelocityGrid::new(2.0, 41).unwrap(), 1e-10, 100_000);
    (grid, sp)
}

#[test]
fn lax_oleinik_examples() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let pend = QuadraticModel::pendulum(1.0).unwrap();
    let zero = GridFunction::constant(grid, 0.0);
    let t = lax_oleinik_step(&pend, &zero, &zero, 1.0, &sp).unwrap();
    assert_eq!(t.value(0), 0.0);
    assert_abs_diff_eq!(t.value(128), 2.0 * sp.tau, epsilon = 1e-15);
    let f = GridFunction::from_fn(grid, |x| (2.0 * PI * x).sin()).unwrap();
    let tf = lax_oleinik_step(&pend, &zero, &f, 1.0, &sp).unwrap();
    let tf5 = lax_oleinik_step(&pend, &zero, &f.shifted(5.0), 1.0, &sp).unwrap();
    for i in 0..grid.points() {
        assert_abs_diff_eq!(tf5.value(i), tf.value(i) + 5.0, epsilon = 1e-13);
    }
}

#[test]
fn constant_commutation_is_bitwise_on_dyadic_data() {
    // tau * v / h and every sample are dyadic, so no rounding happens at all
    let grid = Grid::new(1.0, 64).unwrap();
    let sp = SchemeParams::new(1.0 / 128.0, VelocityGrid::new(2.0, 17).unwrap(), 1e-9, 10);
    let free = QuadraticModel::free(1.0, 0.0).unwrap();
    let zero = GridFunction::constant(grid, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let f = GridFunction::new(grid, (0..64).map(|_| rng.gen_range(-4096i32..4096) as f64 / 1024.0).collect())
            .unwrap();
        let a = rng.gen_range(-1024i32..1024) as f64 / 256.0;
        let lhs = lax_oleinik_step(&free, &zero, &f.shifted(a), 0.0, &sp).unwrap();
        let rhs = lax_oleinik_step(&free, &zero, &f, 0.0, &sp).unwrap().shifted(a);
        assert_eq!(lhs, rhs);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn operator_is_monotone(f in prop::collection::vec(-3.0f64..3.0, 64), bump in prop::collection::vec(0.0f64..1.0, 64)) {
        let (grid, sp) = coarse();
        let pend = QuadraticModel::pendulum(1.0).unwrap();
        let field = GridFunction::from_fn(grid, |x| x).unwrap();
        let f = GridFunction::new(grid, f).unwrap();
        let g = f.zip_with(&GridFunction::new(grid, bump).unwrap(), |a, b| a + b).unwrap();
        let tf = lax_oleinik_step(&pend, &field, &f, 1.0, &sp).unwrap();
        let tg = lax_oleinik_step(&pend, &field, &g, 1.0, &sp).unwrap();
        for i in 0..64 {
            prop_assert!(tf.value(i) <= tg.value(i));
        }
    }

    #[test]
    fn commutation_to_rounding(f in prop::collection::vec(-3.0f64..3.0, 64), a in -10.0f64..10.0) {
        let (grid, sp) = coarse();
        let pend = QuadraticModel::pendulum(1.0).unwrap();
        let zero = GridFunction::constant(grid, 0.0);
        let f = GridFunction::new(grid, f).unwrap();
        let lhs = lax_oleinik_step(&pend, &zero, &f.shifted(a), 1.0, &sp).unwrap();
        let rhs = lax_oleinik_step(&pend, &zero, &f, 1.0, &sp).unwrap();
        for i in 0..64 {
            prop_assert!((lhs.value(i) - rhs.value(i) - a).abs() <= 64.0 * f64::EPSILON * (1.0 + a.abs() + 3.0));
        }
    }
}

#[test]
fn discounted_linear_lies_in_band() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let m = QuadraticModel::discounted_linear(1.0).unwrap();
    let sol = solve_discounted(&m, 0.5, 1.0, &sp, &GridFunction::constant(grid, 0.0), &[]).unwrap();
    assert!(sol.residual <= sp.tol);
    // band around the analytic critical solution h(0, .)
    let max_hat = 2.0 / PI;
    for i in 0..grid.points() {
        let hat = pendulum_barrier_from_zero(grid.node(i));
        let u = sol.u.value(i);
        assert!(u >= hat - max_hat - 0.05 && u <= hat + 0.05, "node {i}: {u} vs {hat}");
    }
    let summary = sol.summary();
    assert_eq!(summary.lambda, 0.5);
    assert!(sol.to_csv().starts_with("x,u\n"));
}

#[test]
fn gauss_seidel_and_jacobi_share_the_fixed_point() {
    let (grid, mut sp) = coarse();
    let m = QuadraticModel::discounted_linear(1.0).unwrap();
    let init = GridFunction::constant(grid, 0.0);
    let gs = solve_discounted(&m, 2.0, 1.0, &sp, &init, &[]).unwrap();
    sp.iteration = Iteration::Jacobi;
    let jac = solve_discounted(&m, 2.0, 1.0, &sp, &init, &[]).unwrap();
    assert!(gs.iterations < jac.iterations);
    // both residuals are below tol; the fixed point is 1/(tau lambda)-contractive
    assert!(gs.u.sup_dist(&jac.u).unwrap() <= 2.0 * sp.tol / (sp.tau * 2.0));
}

#[test]
fn degenerate_coupling_converges_from_both_sides() {
    let grid = Grid::with_density(4.0, 64).unwrap();
    let sp = SchemeParams::new(0.02, VelocityGrid::new(2.0, 41).unwrap(), 1e-9, 200_000);
    let m = QuadraticModel::alpha_coupled(4.0, 0.0).unwrap();
    let low = solve_discounted(&m, 1.0, 1.0, &sp, &GridFunction::constant(grid, -10.0), &[]).unwrap();
    let high = solve_discounted(&m, 1.0, 1.0, &sp, &GridFunction::constant(grid, 10.0), &[]).unwrap();
    assert!(low.residual <= sp.tol && high.residual <= sp.tol);
    assert!(low.u.values().iter().zip(high.u.values()).all(|(a, b)| a <= &(b + 1e-6)));
}

#[test]
fn anchored_critical_solve() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let pend = QuadraticModel::pendulum(1.0).unwrap();
    let init = GridFunction::constant(grid, 0.0);
    assert_eq!(solve_discounted(&pend, 0.0, 1.0, &sp, &init, &[]), Err(Error::UnanchoredCriticalSolve));
    let sol = solve_discounted(&pend, 0.0, 1.0, &sp, &init, &[Anchor { node: 0, value: 0.0 }]).unwrap();
    assert!(sol.residual <= sp.tol);
    assert_eq!(sol.u.value(0), 0.0);
    let exact = GridFunction::from_fn(grid, pendulum_barrier_from_zero).unwrap();
    assert!(sol.u.sup_dist(&exact).unwrap() < 2e-2);
}

#[test]
fn max_iter_is_reported() {
    let (grid, mut sp) = coarse();
    sp.max_iter = 2;
    sp.iteration = Iteration::Jacobi;
    let m = QuadraticModel::discounted_linear(1.0).unwrap();
    let err = solve_discounted(&m, 1e-3, 1.0, &sp, &GridFunction::constant(grid, 50.0), &[]).unwrap_err();
    assert!(matches!(err, Error::MaxIterExceeded { iterations: 2, .. }));
}

#[test]
fn scheme_validation() {
    let grid = Grid::new(1.0, 64).unwrap();
    let sp = SchemeParams::new(0.5, VelocityGrid::new(3.0, 5).unwrap(), 1e-9, 10);
    assert!(matches!(sp.validate(&grid), Err(Error::InvalidScheme(_))));
}

#[test]
fn finite_horizon_bounds() {
    let (grid, sp) = coarse();
    let pend = QuadraticModel::pendulum(1.0).unwrap();
    let hs = finite_horizon_action(&pend, 1.0, &grid, 16, 2.0, &sp).unwrap();
    assert_eq!(hs.len(), 101);
    let rest = pend.lagrangian(grid.node(16), 0.0, 0.0) + 1.0;
    for (k, h) in hs.iter().enumerate() {
        assert!(h.value(16) <= k as f64 * sp.tau * rest + 1e-12);
    }
    // lower bound: one step never drops below the previous minimum plus tau min(L + c)
    for w in hs.windows(2) {
        assert!(w[1].min() >= w[0].min() + sp.tau * (0.0 - 1.0 + 1.0) - 1e-12 - sp.tau * 2.0);
    }
    assert!(matches!(finite_horizon_action(&pend, 1.0, &grid, 0, 0.013, &sp), Err(Error::InvalidHorizon(_))));
    let mut flow = ActionFlow::new(&pend, 1.0, &grid, &[0], &sp, 10.0).unwrap();
    assert!(matches!(flow.steps_for(100.0), Err(Error::BigTooSmall { .. })));
    flow.step();
    assert_eq!(flow.steps(), 1);
}

#[test]
fn finite_horizon_approaches_barrier() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let pend = QuadraticModel::pendulum(1.0).unwrap();
    let mut flow = ActionFlow::new(&pend, 1.0, &grid, &[0], &sp, DEFAULT_BIG).unwrap();
    for _ in 0..flow.steps_for(20.0).unwrap() {
        flow.step();
    }
    assert_abs_diff_eq!(flow.value(0, 128), 2.0 / PI, epsilon = 2e-2);
    assert_abs_diff_eq!(flow.value(0, 0), 0.0, epsilon = 1e-2);
}

#[test]
fn domination_holds_for_a_converged_solution() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let m = QuadraticModel::discounted_linear(1.0).unwrap();
    let sol = solve_discounted(&m, 0.5, 1.0, &sp, &GridFunction::constant(grid, 0.0), &[]).unwrap();
    let r = verify_domination(&m, &sol, &sp, 200, 50, 11).unwrap();
    assert!(r.worst_rest_slack >= -sol.residual);
    assert!(r.worst_step_slack >= -sol.residual);
    assert!(r.worst_curve_slack >= -1e-6 - 10.0 * sp.tol);
    assert!(r.worst_curve_margin >= -1e-12);
    let path = backtrack_calibrated(&m, &sol, 77, 1, &sp).unwrap();
    assert!(path.first_step_defect <= 10.0 * sp.tol);
}

#[test]
fn backtracking_examples() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let m = QuadraticModel::discounted_linear(1.0).unwrap();
    let sol = solve_discounted(&m, 0.5, 1.0, &sp, &GridFunction::constant(grid, 0.0), &[]).unwrap();

    let empty = backtrack_calibrated(&m, &sol, 0, 0, &sp).unwrap();
    assert!(empty.nodes.is_empty() && empty.total_action == 0.0);

    let still = backtrack_calibrated(&m, &sol, 0, 200, &sp).unwrap();
    assert!(still.nodes.iter().all(|n| grid.distance(n.position, 0.0) <= grid.spacing()));
    assert!(still.nodes.iter().all(|n| n.velocity.abs() < 1e-12));

    let path = backtrack_calibrated(&m, &sol, 128, 300, &sp).unwrap();
    assert_eq!(path.nodes.len(), 301);
    assert!(path.first_step_defect <= 10.0 * sp.tol);
    let d: Vec<f64> = path.nodes.iter().map(|n| grid.distance(n.position, 0.0)).collect();
    assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-12), "distance to 0 must grow forward in time");
    assert!(d[0] < 0.25);
    for w in path.nodes.windows(2) {
        let back = grid.wrap(w[1].position - sp.tau * w[1].velocity);
        assert!(grid.distance(back, w[0].position) < 1e-12);
    }
    let sum: f64 = path.nodes.iter().map(|n| n.action).sum();
    assert_abs_diff_eq!(sum, path.total_action, epsilon = 1e-12);
}

#[test]
fn occupation_examples() {
    let grid = reference_grid(1.0);
    let sp = SchemeParams::reference();
    let m = QuadraticModel::discounted_linear(1.0).unwrap();
    let sol = solve_discounted(&m, 0.5, 1.0, &sp, &GridFunction::constant(grid, 0.0), &[]).unwrap();

    let one = backtrack_calibrated(&m, &sol, 0, 1, &sp).unwrap();
    let mu = build_discounted_occupation(&m, &one, 0.5, &grid, &sp).unwrap();
    assert_eq!(mu.support().len(), 1);
    assert_abs_diff_eq!(mu.mass(), 1.0, epsilon = 1e-12);

    let pend = QuadraticModel::pendulum(1.0).unwrap();
    let path = backtrack_calibrated(&m, &sol, 100, 10, &sp).unwrap();
    let uniform = build_discounted_occupation(&pend, &path, 0.5, &grid, &sp).unwrap();
    let per_step: Vec<f64> =
        path.nodes[1..].iter().map(|n| uniform.integrate(|i, j| if grid.distance(grid.node(i), n.position) < grid.spacing() && sp.vgrid.velocity(j) == n.velocity { 1.0 } else { 0.0 })).collect();
    assert!(per_step.iter().all(|&w| w > 0.0));
    assert_abs_diff_eq!(uniform.mass(), 1.0, epsilon = 1e-12);

    let long = backtrack_calibrated(&m, &sol, 128, 2000, &sp).unwrap();
    let mu = build_discounted_occupation(&m, &long, 0.05, &grid, &sp).unwrap();
    let near: f64 = mu.integrate(|i, j| {
        if grid.distance(grid.node(i), 0.0) < 0.05 && sp.vgrid.velocity(j).abs() < 0.2 { 1.0 } else { 0.0 }
    });
    assert!(near > 0.8, "mass near (0, 0) = {near}");

    let empty = backtrack_calibrated(&m, &sol, 0, 0, &sp).unwrap();
    assert_eq!(build_discounted_occupation(&m, &empty, 0.5, &grid, &sp), Err(Error::EmptyPath));
}
