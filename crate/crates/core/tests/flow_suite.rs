use hgeom_core::{
    ambient_flow, cycle_drop_formula, reduced_flow, traversal_drop, AmbientFlowOptions,
    AsymptoteClass, DefiningFunctionSpec, FlowTermination, Point, ReducedFlowOptions,
};
use std::f64::consts::FRAC_PI_2;

#[test]
fn traversal_drop_has_the_closed_form() {
    for (n, c) in [(1usize, 3.0), (2, 1.0), (3, 0.7)] {
        let expected = -2.0 * (2 * n + 1) as f64 / ((2 * n - 1) as f64 * c);
        let drop = traversal_drop(n, c).unwrap();
        assert!(
            (drop - expected).abs() < 1e-10 * expected.abs(),
            "n = {n}, c = {c}: {drop} vs {expected}"
        );
    }
}

#[test]
fn integrated_traversal_matches_the_quadrature() {
    for (n, c) in [(1usize, 3.0), (2, 1.0)] {
        let run =
            reduced_flow(n, c, 0.0, FRAC_PI_2 - 1e-5, 0.0, &ReducedFlowOptions::default()).unwrap();
        assert_eq!(run.report.classification, AsymptoteClass::ClosesAtPole);
        assert!(run.report.cycles.is_empty());
        let measured = run.states.last().unwrap().t;
        let formula = run.report.traversal_drop.unwrap();
        assert!(
            (measured - formula).abs() < 1e-8,
            "n = {n}: measured {measured} vs quadrature {formula}"
        );
    }
}

#[test]
fn cycle_drops_match_the_formula_across_dimensions() {
    for (n, c, phi0) in [(1usize, 3.0, 0.25), (2, 1.0, 0.3)] {
        let opts = ReducedFlowOptions { max_cycles: 3, ..Default::default() };
        let run = reduced_flow(n, c, phi0, 0.0, 0.0, &opts).unwrap();
        assert_eq!(run.report.classification, AsymptoteClass::TUnbounded);
        assert_eq!(run.report.cycles.len(), 3);
        let formula = cycle_drop_formula(n, c, phi0, 0.0).unwrap();
        let first = run.report.cycles[0].delta_t;
        for cy in &run.report.cycles {
            assert!(
                (cy.delta_t - formula).abs() < 1e-6,
                "cycle {} drop {} vs formula {}",
                cy.index,
                cy.delta_t,
                formula
            );
            assert!(
                (cy.delta_t - first).abs() <= 1e-8 * first.abs(),
                "successive drops drifted: {} vs {}",
                cy.delta_t,
                first
            );
        }
    }
}

#[test]
fn negative_phi0_forces_strict_descent() {
    let (n, c, phi0) = (2usize, 1.0, -0.05);
    let opts = ReducedFlowOptions { initial_radius: Some(1.2), ..Default::default() };
    let run = reduced_flow(n, c, phi0, 0.0, 0.0, &opts).unwrap();
    assert_eq!(run.report.classification, AsymptoteClass::TUnbounded);
    assert!(run.states.len() > 3);
    // t' <= 2 phi0 r^{2-2n} < 0; with r bounded on the large branch the
    // per-step drop is strictly negative
    for pair in run.states.windows(2) {
        assert!(pair[1].t < pair[0].t, "t must decrease strictly");
    }
}

#[test]
fn ambient_flow_reaches_the_pole_on_spheres() {
    for n in [1usize, 2] {
        let spec = DefiningFunctionSpec::gauge_ball(n, 1.0, 0.0).unwrap();
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        let start = Point::new(x, vec![0.0; n], 0.0);
        let traj = ambient_flow(&spec, &start, &AmbientFlowOptions::default()).unwrap();
        assert_eq!(traj.termination, FlowTermination::PoleReached, "n = {n}");
        let last = traj.samples.last().unwrap();
        let coords = last.point.to_coords();
        let mut dist_sq = coords[..2 * n].iter().map(|v| v * v).sum::<f64>();
        dist_sq += (coords[2 * n] + 1.0) * (coords[2 * n] + 1.0);
        assert!(dist_sq.sqrt() < 1e-3, "final point missed the pole: {coords:?}");
        assert!(last.cos_theta.abs() < 1e-3);
        assert!((last.sin_theta + 1.0).abs() < 1e-3);

        let gamma = 1.0; // (2n-1)/(2n+1) * prescribed c is 1 on unit spheres
        let exps = (2 * n + 1) as i32;
        for sm in &traj.samples {
            assert!(sm.residual < 1e-8, "surface drift {:e}", sm.residual);
            assert!(sm.phi_v.is_none_or(|v| v.abs() < 1e-7));
            let cons = gamma * sm.r.powi(exps) - sm.r.powi(exps - 2) * sm.cos_theta;
            assert!(cons.abs() < 1e-7, "conservation residual {cons:e}");
        }
    }
}

#[test]
fn ambient_flow_descends_in_t_on_spheres() {
    let spec = DefiningFunctionSpec::gauge_ball(1, 1.0, 0.0).unwrap();
    let start = Point::new(vec![1.0], vec![0.0], 0.0);
    let traj = ambient_flow(&spec, &start, &AmbientFlowOptions::default()).unwrap();
    for pair in traj.samples.windows(2) {
        assert!(pair[1].point.t <= pair[0].point.t + 1e-12, "t must be monotone along the descent");
    }
}
