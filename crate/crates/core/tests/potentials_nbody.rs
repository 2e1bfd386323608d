use aggsim::{nbody_integrate, Classification, NBodyScheme, NBodyState, Potential, PotentialKind};
use nalgebra::{Vector1, Vector2};

fn kinds() -> Vec<PotentialKind> {
    vec![
        PotentialKind::Quadratic,
        PotentialKind::PowerAttractive { a: 1.5 },
        PotentialKind::PowerAttractive { a: 2.5 },
        PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 },
        PotentialKind::PowerRepAttr { a: 4.0, b: 2.5 },
    ]
}

#[test]
fn derivatives_match_finite_differences() {
    for kind in kinds() {
        let pot = Potential::new(kind, 2).unwrap();
        for x in [Vector2::new(0.3, -0.4), Vector2::new(-1.2, 0.7), Vector2::new(0.05, 0.02)] {
            let e = 1e-6;
            let g = pot.grad(&x).unwrap();
            let hs = pot.hess(&x).unwrap();
            for i in 0..2 {
                let mut dx = Vector2::zeros();
                dx[i] = e;
                let fd = (pot.eval(&(x + dx)) - pot.eval(&(x - dx))) / (2.0 * e);
                assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "{kind:?} grad");
                let fd = (pot.grad(&(x + dx)).unwrap() - pot.grad(&(x - dx)).unwrap()) / (2.0 * e);
                for j in 0..2 {
                    assert!((fd[j] - hs[(j, i)]).abs() < 1e-5 * (1.0 + hs[(j, i)].abs()), "{kind:?} hess");
                }
            }
            assert!((pot.lap(&x).unwrap() - hs.trace()).abs() < 1e-12 * (1.0 + hs.trace().abs()));
        }
    }
}

#[test]
fn singular_bound_holds_on_the_reference_ball() {
    for kind in kinds() {
        let pot = Potential::new(kind, 1).unwrap();
        if let Classification::Singular { alpha } = pot.classification() {
            let l = pot.singular_constant();
            for i in 1..=4000 {
                let r = 4.0 * i as f64 / 4000.0;
                let h = pot.hess(&Vector1::new(r)).unwrap()[(0, 0)].abs();
                assert!(h <= l * r.powf(-(1.0 + alpha)) * (1.0 + 1e-12), "{kind:?} at r={r}");
            }
            assert!(pot.hess(&Vector1::zeros()).is_err());
        } else {
            assert!(pot.hess(&Vector1::zeros()).is_ok());
        }
    }
}

#[test]
fn nbody_centroid_is_conserved() {
    for kind in kinds() {
        let pot = Potential::new(kind, 2).unwrap();
        let n = 12;
        let masses: Vec<f64> = (0..n).map(|i| (1.0 + i as f64) / (n * (n + 1) / 2) as f64).collect();
        let positions: Vec<Vector2<f64>> =
            (0..n).map(|i| Vector2::new((i as f64 * 1.7).sin(), (i as f64 * 0.9).cos() * 0.8)).collect();
        let mut state = NBodyState::new(positions, masses).unwrap();
        let c0 = state.centroid();
        for _ in 0..20 {
            state = nbody_integrate(&state, &pot, 1e-3, 1, NBodyScheme::Rk4).unwrap();
            assert!((state.centroid() - c0).norm() < 1e-12, "{kind:?}");
        }
    }
}

#[test]
fn rk4_two_body_decay_over_unit_time() {
    let pot = Potential::quadratic(1);
    let s0 = 0.6;
    let mut state = NBodyState::new(vec![Vector1::new(-0.1), Vector1::new(-0.1 + s0)], vec![0.5, 0.5]).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        state = nbody_integrate(&state, &pot, 1e-3, 10, NBodyScheme::Rk4).unwrap();
        let s = state.positions[1][0] - state.positions[0][0];
        worst = worst.max((s - s0 * (-2.0 * k as f64 * 0.01).exp()).abs());
    }
    assert!(worst <= 1e-8, "{worst:e}");
    let euler = nbody_integrate(&state, &pot, 1e-3, 10, NBodyScheme::Euler).unwrap();
    assert!(euler.time > state.time);
}
