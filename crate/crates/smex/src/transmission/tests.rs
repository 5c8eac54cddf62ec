use super::*;
use crate::fem::QuadratureRule;
use crate::geometry::Point;
use crate::linalg::{dot, norm};
use crate::mesh::{generate_corner_halfdisk, generate_disk_annulus, generate_square_split};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn smooth_source() -> AnalyticField {
    AnalyticField::new(|p: Point, _| (PI * p.x).sin() * (2.0 * PI * p.y).cos() + 0.3)
}

fn square_problem() -> TransmissionProblem {
    TransmissionProblem::new(1.0, -2.0, smooth_source(), ExtensionSource::Subdomain1).unwrap()
}

fn square_ops(n: usize) -> DiscreteOperators {
    let mesh = Arc::new(generate_square_split(n).unwrap());
    prepare(&square_problem(), mesh, QuadratureRule::Degree5).unwrap()
}

fn random_control(ops: &DiscreteOperators, seed: u64, scale: f64) -> Control {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Control(
        (0..ops.control_dimension())
            .map(|_| rng.gen_range(-scale..scale))
            .collect(),
    )
}

#[test]
fn prepare_factorizes_all_three_operators() {
    let ops = square_ops(4);
    assert!(ops.control_dimension() > 0);
    assert!(ops.meshsize() > 0.0);
}

#[test]
fn positive_eps2_is_rejected_before_assembly() {
    let err = TransmissionProblem::new(1.0, 1.0, smooth_source(), ExtensionSource::Subdomain1);
    assert!(matches!(
        err,
        Err(TransmissionError::InvalidCoefficients { .. })
    ));
}

#[test]
fn extension_target_must_touch_the_boundary() {
    // extending from the annulus into the disk: the disk boundary is all
    // interface, so the control space has no Dirichlet part
    let problem =
        TransmissionProblem::new(1.0, -2.0, smooth_source(), ExtensionSource::Subdomain2).unwrap();
    let mesh = Arc::new(generate_disk_annulus(3).unwrap());
    match prepare(&problem, mesh, QuadratureRule::Degree5) {
        Err(TransmissionError::NoBoundaryContact) => {}
        other => panic!("expected NoBoundaryContact, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn nonconforming_mesh_is_rejected() {
    let raw = generate_square_split(2).unwrap();
    let idx = (0..raw.triangles().len())
        .find(|&t| raw.triangle_centroid(t).x > 0.5)
        .unwrap();
    let mut triangles = raw.triangles().to_vec();
    triangles[idx].region = crate::geometry::Region::One;
    let bad = crate::mesh::Mesh::new(
        raw.vertices().to_vec(),
        triangles,
        raw.boundary_edges().to_vec(),
        raw.geometry(),
    );
    let err = prepare(&square_problem(), Arc::new(bad), QuadratureRule::Degree5);
    assert!(matches!(
        err,
        Err(TransmissionError::NonConformingMesh { .. })
    ));
}

#[test]
fn zero_source_and_control_give_zero_state() {
    let problem = TransmissionProblem::new(
        1.0,
        -2.0,
        AnalyticField::constant(0.0),
        ExtensionSource::Subdomain1,
    )
    .unwrap();
    let mesh = Arc::new(generate_square_split(3).unwrap());
    let ops = prepare(&problem, mesh, QuadratureRule::Degree5).unwrap();
    let state = ops
        .solve_state(&Control::zeros(ops.control_dimension()))
        .unwrap();
    assert!(state.global.coeffs().iter().all(|&c| c == 0.0));
    assert!(state.sub.coeffs().iter().all(|&c| c == 0.0));
    assert_eq!(ops.misfit(&state), 0.0);

    // and the adjoint of a zero-mismatch state vanishes
    let adjoint = ops.solve_adjoint(&state).unwrap();
    assert!(adjoint.global.coeffs().iter().all(|&c| c == 0.0));
    assert!(adjoint.sub.coeffs().iter().all(|&c| c == 0.0));
}

#[test]
fn state_residuals_are_tiny() {
    let ops = square_ops(4);
    let w = random_control(&ops, 42, 1.0);
    let state = ops.solve_state(&w).unwrap();
    let (rg, rs) = ops.state_residuals(&w, &state);
    assert!(rg < 1e-10 && rs < 1e-10, "state residuals {rg}, {rs}");
}

#[test]
fn projected_control_reproduces_the_analytic_state() {
    // u_h depends on the control only through its energy projection
    let ops = square_ops(3);
    let w_field = AnalyticField::with_gradient(
        |p, _| (p.x - 1.0) * (PI * p.y).sin(),
        |p, _| ((PI * p.y).sin(), PI * (p.x - 1.0) * (PI * p.y).cos()),
    );
    let analytic = ops.solve_state_analytic(&w_field).unwrap();
    let projected = ops.project_control(&w_field).unwrap();
    let discrete = ops.solve_state(&projected).unwrap();
    let du = norm(
        &analytic
            .global
            .coeffs()
            .iter()
            .zip(discrete.global.coeffs())
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    let du2 = norm(
        &analytic
            .sub
            .coeffs()
            .iter()
            .zip(discrete.sub.coeffs())
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    let scale = norm(analytic.global.coeffs()).max(1.0);
    assert!(du / scale < 1e-12, "global state differs: {du}");
    assert!(du2 / scale < 1e-12, "subdomain state differs: {du2}");

    // a discrete control is its own projection, so solving twice agrees too
    let again = ops.solve_state(&projected).unwrap();
    assert_eq!(discrete.global.coeffs(), again.global.coeffs());
}

#[test]
fn misfit_is_nonnegative_for_random_controls() {
    let ops = square_ops(3);
    for seed in 0..100 {
        let w = random_control(&ops, seed, 2.0);
        let state = ops.solve_state(&w).unwrap();
        assert!(ops.misfit(&state) >= 0.0);
    }
}

#[test]
fn cost_is_linear_in_lambda_and_strictly_convex() {
    let ops = square_ops(3);

    // at w = 0 the regularizer vanishes and the cost is the bare misfit
    let zero = Control::zeros(ops.control_dimension());
    let state0 = ops.solve_state(&zero).unwrap();
    assert_eq!(ops.cost(&state0, &zero, 1e-3), ops.misfit(&state0));

    let w = random_control(&ops, 5, 1.0);
    let state = ops.solve_state(&w).unwrap();
    let c1 = ops.cost(&state, &w, 1e-3);
    let c2 = ops.cost(&state, &w, 2e-3);
    let wnorm2 = ops.control_norm(&w).powi(2);
    assert!((c2 - c1 - 1e-3 * wnorm2).abs() < 1e-12 * c1.max(1.0));

    // strict convexity: midpoint cost strictly below the chord
    let wa = random_control(&ops, 6, 1.0);
    let wb = random_control(&ops, 7, 1.0);
    let mid = Control(wa.0.iter().zip(&wb.0).map(|(a, b)| 0.5 * (a + b)).collect());
    let lambda = 1e-3;
    let ja = ops.cost(&ops.solve_state(&wa).unwrap(), &wa, lambda);
    let jb = ops.cost(&ops.solve_state(&wb).unwrap(), &wb, lambda);
    let jm = ops.cost(&ops.solve_state(&mid).unwrap(), &mid, lambda);
    assert!(
        jm < 0.5 * (ja + jb),
        "midpoint {jm} vs chord {}",
        0.5 * (ja + jb)
    );
}

#[test]
fn adjoint_residuals_are_tiny_and_adjoint_is_linear() {
    let ops = square_ops(4);
    let wa = random_control(&ops, 8, 1.0);
    let wb = random_control(&ops, 9, 1.0);
    let sa = ops.solve_state(&wa).unwrap();
    let sb = ops.solve_state(&wb).unwrap();
    let (rg, rs) = ops.adjoint_residuals(&sa, &ops.solve_adjoint(&sa).unwrap());
    assert!(rg < 1e-10 && rs < 1e-10, "adjoint residuals {rg}, {rs}");

    // linearity in the trace data: adjoint(A + B) = adjoint(A) + adjoint(B)
    let sum_state = StatePair {
        global: FeFunction::new(
            ops.global_space().clone(),
            sa.global
                .coeffs()
                .iter()
                .zip(sb.global.coeffs())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap(),
        sub: FeFunction::new(
            ops.sub_space().clone(),
            sa.sub
                .coeffs()
                .iter()
                .zip(sb.sub.coeffs())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap(),
    };
    let ga = ops.solve_adjoint(&sa).unwrap();
    let gb = ops.solve_adjoint(&sb).unwrap();
    let gsum = ops.solve_adjoint(&sum_state).unwrap();
    let scale = norm(gsum.sub.coeffs()).max(1e-12);
    for (s, (a, b)) in gsum
        .sub
        .coeffs()
        .iter()
        .zip(ga.sub.coeffs().iter().zip(gb.sub.coeffs()))
    {
        assert!((s - a - b).abs() < 1e-12 * scale.max(1.0));
    }
}

fn fd_gradient_check(
    ops: &DiscreteOperators,
    w: &Control,
    lambda: f64,
    directions: usize,
    seed: u64,
) {
    let state = ops.solve_state(w).unwrap();
    let adjoint = ops.solve_adjoint(&state).unwrap();
    let grad = ops.gradient(w, &adjoint, lambda);
    let gnorm = norm(&grad);
    let cost_at = |w: &Control| -> f64 {
        let s = ops.solve_state(w).unwrap();
        ops.cost(&s, w, lambda)
    };
    let step = 1e-5 * (1.0 + norm(&w.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..directions {
        let i = rng.gen_range(0..w.len());
        let mut wp = w.clone();
        wp.0[i] += step;
        let mut wm = w.clone();
        wm.0[i] -= step;
        let fd = (cost_at(&wp) - cost_at(&wm)) / (2.0 * step);
        let denom = grad[i].abs().max(fd.abs()).max(1e-6 * gnorm);
        assert!(
            (fd - grad[i]).abs() <= 1e-6 * denom,
            "direction {i}: adjoint {} vs finite differences {fd}",
            grad[i]
        );
    }
}

#[test]
fn gradient_matches_central_finite_differences() {
    let ops = square_ops(2);
    let w = random_control(&ops, 10, 1.0);
    fd_gradient_check(&ops, &w, 1e-3, 10, 11);
}

#[test]
fn gradient_lambda_term_is_additive() {
    let ops = square_ops(3);
    let w = random_control(&ops, 12, 1.0);
    let state = ops.solve_state(&w).unwrap();
    let adjoint = ops.solve_adjoint(&state).unwrap();
    let lambda = 3e-4;
    let g_l = ops.gradient(&w, &adjoint, lambda);
    let g_0 = ops.gradient(&w, &adjoint, 0.0);
    let kw = ops.control_metric().matvec(&w.0).unwrap();
    let scale = norm(&g_l).max(1.0);
    for ((gl, g0), k) in g_l.iter().zip(&g_0).zip(&kw) {
        assert!((gl - g0 - 2.0 * lambda * k).abs() < 1e-12 * scale);
    }
}

#[test]
fn hessvec_matches_gradient_differences_and_is_symmetric() {
    let ops = square_ops(2);
    let lambda = 1e-3;
    let w = random_control(&ops, 13, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let v: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let u: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let hv = ops.hessvec(&v, lambda).unwrap();
    let hu = ops.hessvec(&u, lambda).unwrap();

    // finite difference of the gradient along v
    let t = 1e-5;
    let grad_at = |w: &Control| -> Vec<f64> {
        let s = ops.solve_state(w).unwrap();
        let a = ops.solve_adjoint(&s).unwrap();
        ops.gradient(w, &a, lambda)
    };
    let wp = Control(w.0.iter().zip(&v).map(|(wi, vi)| wi + t * vi).collect());
    let wm = Control(w.0.iter().zip(&v).map(|(wi, vi)| wi - t * vi).collect());
    let (gp, gm) = (grad_at(&wp), grad_at(&wm));
    let fd: Vec<f64> = gp
        .iter()
        .zip(&gm)
        .map(|(a, b)| (a - b) / (2.0 * t))
        .collect();
    let diff = norm(&fd.iter().zip(&hv).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!(diff <= 1e-5 * norm(&hv).max(1.0), "fd mismatch {diff}");

    // curvature floor from the regularizer
    let kv = ops.control_metric().quadratic_form(&v);
    assert!(dot(&hv, &v) >= 2.0 * lambda * kv - 1e-12);

    // symmetry of the quadratic form
    let hvu = dot(&hv, &u);
    let huv = dot(&hu, &v);
    assert!((hvu - huv).abs() <= 1e-10 * hvu.abs().max(huv.abs()).max(1.0));
}

#[test]
fn flux_balance_holds_for_every_control() {
    let meshes: Vec<(Arc<crate::mesh::Mesh>, ExtensionSource, f64)> = vec![
        (
            Arc::new(generate_square_split(4).unwrap()),
            ExtensionSource::Subdomain1,
            -2.0,
        ),
        (
            Arc::new(generate_disk_annulus(4).unwrap()),
            ExtensionSource::Subdomain1,
            -2.0,
        ),
        (
            Arc::new(generate_corner_halfdisk(4).unwrap()),
            ExtensionSource::Subdomain2,
            -5.0,
        ),
    ];
    for (mesh, source, eps2) in meshes {
        let problem = TransmissionProblem::new(1.0, eps2, smooth_source(), source).unwrap();
        let ops = prepare(&problem, mesh, QuadratureRule::Degree5).unwrap();
        for seed in [0u64, 1] {
            let w = random_control(&ops, seed, 1.0);
            let state = ops.solve_state(&w).unwrap();
            let residual = ops.flux_balance_residual(&state);
            assert!(
                residual <= 1e-10 * ops.load_scale(),
                "flux residual {residual} vs load {}",
                ops.load_scale()
            );
        }
    }
}

#[test]
fn flux_balance_is_exactly_zero_for_zero_data() {
    let problem = TransmissionProblem::new(
        1.0,
        -2.0,
        AnalyticField::constant(0.0),
        ExtensionSource::Subdomain1,
    )
    .unwrap();
    let mesh = Arc::new(generate_square_split(2).unwrap());
    let ops = prepare(&problem, mesh, QuadratureRule::Degree5).unwrap();
    let state = ops
        .solve_state(&Control::zeros(ops.control_dimension()))
        .unwrap();
    assert_eq!(ops.flux_balance_residual(&state), 0.0);
}

#[test]
fn control_norm_contracts() {
    let ops = square_ops(2);
    assert_eq!(
        ops.control_norm(&Control::zeros(ops.control_dimension())),
        0.0
    );

    let w = random_control(&ops, 15, 1.0);
    let w2 = Control(w.0.iter().map(|x| 2.0 * x).collect());
    let (n1, n2) = (ops.control_norm(&w), ops.control_norm(&w2));
    assert!((n2 - 2.0 * n1).abs() <= 1e-14 * n2);

    // a single hat: norm equals the square root of the diagonal metric entry
    for i in 0..ops.control_dimension() {
        let mut e = Control::zeros(ops.control_dimension());
        e.0[i] = 1.0;
        let expected = ops.control_metric().get(i, i).sqrt();
        assert!((ops.control_norm(&e) - expected).abs() < 1e-14);
    }
}

#[test]
fn mirrored_orientation_matches_explicitly_negated_problem() {
    // extending from subdomain 2 must equal solving the explicitly negated
    // problem with the roles of the regions interchanged by hand
    let mesh = Arc::new(generate_corner_halfdisk(3).unwrap());
    let f = smooth_source();
    let mirrored =
        TransmissionProblem::new(1.0, -5.0, f.clone(), ExtensionSource::Subdomain2).unwrap();
    let ops = prepare(&mirrored, mesh.clone(), QuadratureRule::Degree5).unwrap();
    assert_eq!(ops.orientation_sign(), -1.0);
    assert_eq!(ops.control_region(), crate::geometry::Region::One);

    let w = random_control(&ops, 16, 0.5);
    let state = ops.solve_state(&w).unwrap();
    let (rg, rs) = ops.state_residuals(&w, &state);
    assert!(rg < 1e-10 && rs < 1e-10);
    fd_gradient_check(&ops, &w, 1e-2, 6, 17);
}

#[test]
fn misfit_matches_the_analytic_trace_integral() {
    // gap = 1 at the interior interface vertices and 0 at the two junction
    // vertices: the piecewise-linear gap integrates to 1 - 4L/3 over the
    // unit-length interface with edge length L, and the misfit is half that
    let ops = square_ops(2);
    let zero = crate::fem::FeFunction::zero(ops.global_space().clone());
    let mut coeffs = vec![0.0; ops.sub_space().num_unknowns()];
    for (dof, c) in coeffs.iter_mut().enumerate() {
        let v = ops.sub_space().unknown_vertex(dof);
        if ops.trace().index_of(v).is_some() {
            *c = 1.0;
        }
    }
    let state = StatePair {
        global: zero,
        sub: crate::fem::FeFunction::new(ops.sub_space().clone(), coeffs).unwrap(),
    };
    let edge = 0.25;
    let expected = 0.5 * (1.0 - 4.0 * edge / 3.0);
    assert!(
        (ops.misfit(&state) - expected).abs() < 1e-12,
        "misfit {}",
        ops.misfit(&state)
    );
}
