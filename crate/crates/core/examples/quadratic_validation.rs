//! `W = x²` against its closed-form solution at t = 0.5.

use aggsim::metrics::{lp_error, EvaluationGrid, Norm};
use aggsim::{run_scenario, InitialDensityId, QuadraticOracle, SimulationConfig};

fn main() -> aggsim::Result<()> {
    let mut cfg = SimulationConfig::default();
    cfg.init = InitialDensityId::Rho1Gaussians;
    cfg.h = 0.01;
    cfg.dt = 1e-3;
    cfg.t_final = 0.5;
    let art = run_scenario(&cfg)?;
    let state = art.final_state();
    let oracle = QuadraticOracle::new(&cfg.initial_density()?);

    let (lo, hi) = oracle.support_at(state.time);
    let grid = EvaluationGrid::new(lo - 0.05, hi + 0.05, 4096)?;
    let xs = grid.xs();
    let approx = state.density_on(&xs);
    let exact = oracle.density_on(state.time, &xs)?;
    println!("t = {}, {} particles, centroid {:.3e} (lambda {:.3e})", state.time, state.len(), state.centroid()[0], oracle.lambda());
    println!("L1 error   {:.4e}", lp_error(&approx, &exact, &grid, Norm::L(1.0))?);
    println!("Linf error {:.4e}", lp_error(&approx, &exact, &grid, Norm::Inf)?);
    println!("particle size {:.6e} vs h e^(-2t) = {:.6e}", state.particles[0].volume, cfg.h * (-1f64).exp());
    Ok(())
}
