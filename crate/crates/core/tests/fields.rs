mod common;

use aggsim::fields::{FieldValue, Selector};
use aggsim::{
    init_particles, FieldEvaluator, InitialDensity, InitialDensityId, Potential, PotentialKind, QuadratureRule,
    ShapeFunction, WeightMode,
};
use nalgebra::{Vector1, Vector2};

fn indicator_state(h: f64, shape: &ShapeFunction) -> aggsim::ParticleState<1> {
    let rho = InitialDensity::from_id(InitialDensityId::Rho2Indicator).unwrap();
    init_particles::<1>(&rho, h, WeightMode::CellAverage, shape).unwrap()
}

#[test]
fn quadratic_velocity_on_uniform_density() {
    let shape = ShapeFunction::b3();
    let state = indicator_state(0.01, &shape);
    let pot = Potential::quadratic(1);
    let ev = FieldEvaluator::<1>::new(&pot, &shape, QuadratureRule::default()).unwrap().force_quadrature();
    let u = ev.velocity_at(&state.shaped_particles(), &Vector1::new(0.5)).unwrap();
    assert!((u[0] + 1.0).abs() < 1e-12, "u(0.5) = {}", u[0]);
}

#[test]
fn doubling_quadrature_points_on_singular_kernel() {
    let shape = ShapeFunction::b3();
    let state = indicator_state(0.02, &shape);
    let particles = state.shaped_particles();
    let pot = Potential::new(PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 }, 1).unwrap();
    let base = QuadratureRule::default();
    let fine = QuadratureRule { points_per_piece: 2 * base.points_per_piece, ..base };
    let coarse = FieldEvaluator::<1>::new(&pot, &shape, base).unwrap();
    let doubled = FieldEvaluator::<1>::new(&pot, &shape, fine).unwrap();
    let targets: Vec<_> = (-60..=60).map(|i| Vector1::new(i as f64 * 0.0173)).collect();
    let a = coarse.grad_hess_many(&particles, &targets).unwrap();
    let b = doubled.grad_hess_many(&particles, &targets).unwrap();
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    for ((ga, ha), (gb, hb)) in a.iter().zip(&b) {
        worst_grad = worst_grad.max((ga - gb).norm());
        worst_hess = worst_hess.max((ha - hb).norm() / hb.norm().max(1.0));
    }
    assert!(worst_grad < base.tolerance_target, "velocity change {worst_grad:e}");
    assert!(worst_hess < 1e-4, "hessian change {worst_hess:e}");
}

#[test]
fn repeated_evaluation_is_bit_identical() {
    let shape = ShapeFunction::b3();
    let state = indicator_state(0.02, &shape);
    let particles = state.shaped_particles();
    let pot = Potential::new(PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 }, 1).unwrap();
    let ev = FieldEvaluator::<1>::new(&pot, &shape, QuadratureRule::default()).unwrap();
    let targets: Vec<_> = particles.iter().map(|p| p.center).collect();
    let first = ev.grad_hess_many(&particles, &targets).unwrap();
    let second = ev.grad_hess_many(&particles, &targets).unwrap();
    for (p, q) in first.iter().zip(&second) {
        assert_eq!(p.0[0].to_bits(), q.0[0].to_bits());
        assert_eq!(p.1[(0, 0)].to_bits(), q.1[(0, 0)].to_bits());
    }
}

#[test]
fn single_particle_against_direct_quadrature() {
    // Field of one hat particle under W = |x|³/3, compared with a fine Simpson sum.
    let shape = ShapeFunction::b1();
    let pot = Potential::new(PotentialKind::PowerAttractive { a: 3.0 }, 1).unwrap();
    let ev = FieldEvaluator::<1>::new(&pot, &shape, QuadratureRule::default()).unwrap();
    let h = 0.1;
    let p = aggsim::ShapedParticle {
        center: Vector1::new(0.2),
        weight: 1.0,
        map: nalgebra::Matrix1::new(h),
        inv_map: nalgebra::Matrix1::new(1.0 / h),
    };
    for x in [-0.5, 0.0, 0.15, 0.2, 0.27, 0.9] {
        let (g, hs) = ev.grad_hess_at(&[p], &Vector1::new(x)).unwrap();
        let hat = |y: f64| (1.0 - ((y - 0.2) / h).abs()).max(0.0) / h;
        let grad = |r: f64| r * r.abs();
        let expect_g = common::simpson(|y| grad(x - y) * hat(y), 0.1, 0.3, 20_000);
        let expect_h = common::simpson(|y| 2.0 * (x - y).abs() * hat(y), 0.1, 0.3, 20_000);
        assert!((g[0] - expect_g).abs() < 1e-10, "grad at {x}: {} vs {expect_g}", g[0]);
        assert!((hs[(0, 0)] - expect_h).abs() < 1e-8, "hess at {x}: {} vs {expect_h}", hs[(0, 0)]);
    }
}

#[test]
fn two_dimensional_laplacian_of_quadratic_potential() {
    // ΔW = 2d for W = |x|², so the convolved Laplacian is 4 times the mass in 2D.
    let shape = ShapeFunction::b3();
    let pot = Potential::quadratic(2);
    let ev = FieldEvaluator::<2>::new(&pot, &shape, QuadratureRule::default()).unwrap().force_quadrature();
    let rho = InitialDensity::from_id(InitialDensityId::Rho2Indicator).unwrap();
    let state = init_particles::<2>(&rho, 0.25, WeightMode::CellAverage, &shape).unwrap();
    let mass = state.total_mass();
    match ev.convolve_at(Selector::Lap, &state.shaped_particles(), &Vector2::new(0.3, -0.7)).unwrap() {
        FieldValue::Scalar(l) => assert!((l - 4.0 * mass).abs() < 1e-12),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn grid_aligned_targets_never_hit_the_singularity() {
    let shape = ShapeFunction::b3();
    for h in [0.02, 0.01, 0.03] {
        let state = indicator_state(h, &shape);
        let particles = state.shaped_particles();
        let pot = Potential::new(PotentialKind::PowerAttractive { a: 1.5 }, 1).unwrap();
        let ev = FieldEvaluator::<1>::new(&pot, &shape, QuadratureRule::default()).unwrap();
        let targets: Vec<_> = particles.iter().map(|p| p.center).collect();
        ev.grad_hess_many(&particles, &targets).unwrap();
        assert_eq!(ev.skipped_nodes(), 0, "h={h}");
    }
}
