//! Tensor-product particles in two dimensions under an attractive-repulsive potential.

use aggsim::{init_particles, InitialDensity, InitialDensityId, Potential, PotentialKind, ShapeFunction, StepParams, WeightMode};

fn main() -> aggsim::Result<()> {
    let rho = InitialDensity::from_id(InitialDensityId::Rho3Bump)?;
    let shape = ShapeFunction::b3();
    let mut state = init_particles::<2>(&rho, 0.1, WeightMode::CellAverage, &shape)?;
    let pot = Potential::new(PotentialKind::PowerRepAttr { a: 3.0, b: 2.5 }, 2)?;
    let params = StepParams::new(0.01);
    println!("{} particles, mass {:.12}", state.len(), state.total_mass());
    for _ in 0..5 {
        for _ in 0..10 {
            state = state.step(&pot, &params)?.0;
        }
        let d = state.diagnostics();
        let dk = state.particles[state.len() / 2].deformation;
        println!(
            "t {:.2}: min volume {:.4e}, j in [{:.6}, {:.6}], centre density {:.4}, central D = [{:.6}, {:.2e}; {:.2e}, {:.6}]",
            state.time,
            d.min_volume,
            d.min_j,
            d.max_j,
            state.reconstruct_density(&nalgebra::Vector2::zeros()),
            dk[(0, 0)],
            dk[(0, 1)],
            dk[(1, 0)],
            dk[(1, 1)]
        );
    }
    Ok(())
}
