//! Point-particle reference dynamics: two-body decay under `W = x²` and a collapsing
//! cluster under a singular potential.

use aggsim::{nbody_integrate, Error, NBodyScheme, NBodyState, Potential, PotentialKind};
use nalgebra::{Vector1, Vector2};

fn main() -> aggsim::Result<()> {
    let pot = Potential::quadratic(1);
    let s0 = 0.8;
    let mut state = NBodyState::new(vec![Vector1::new(-0.4), Vector1::new(0.4)], vec![0.5, 0.5])?;
    for _ in 0..5 {
        state = nbody_integrate(&state, &pot, 1e-3, 200, NBodyScheme::Rk4)?;
        let s = state.positions[1][0] - state.positions[0][0];
        println!("t {:.1}: separation {s:.12} vs {:.12}", state.time, s0 * (-2.0 * state.time).exp());
    }

    let pot = Potential::new(PotentialKind::PowerAttractive { a: 1.5 }, 2)?;
    let ring: Vec<Vector2<f64>> = (0..6)
        .map(|i| {
            let th = i as f64 * std::f64::consts::PI / 3.0;
            Vector2::new(th.cos(), th.sin()) * 0.3
        })
        .collect();
    let state = NBodyState::new(ring, vec![1.0 / 6.0; 6])?;
    match nbody_integrate(&state, &pot, 1e-3, 2000, NBodyScheme::Euler) {
        Ok(end) => println!("ring radius at t = {:.1}: {:.3e}", end.time, end.positions[0].norm()),
        Err(Error::Collision { step }) => println!("ring collapsed at step {step}"),
        Err(e) => return Err(e),
    }
    Ok(())
}
