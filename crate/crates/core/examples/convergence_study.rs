//! Error rates in h against the exact quadratic solution, with Δt = h²/4.

use aggsim::{convergence_study, DtScaling, InitialDensityId, SimulationConfig, StudyMode};

fn main() -> aggsim::Result<()> {
    let mut cfg = SimulationConfig::default();
    cfg.init = InitialDensityId::Rho1Gaussians;
    cfg.t_final = 0.5;
    cfg.h = 0.08;
    cfg.dt = 1e-3;
    cfg.dt_scaling = DtScaling::Quadratic;
    let report = convergence_study(&cfg, &[0.08, 0.04, 0.02, 0.01], StudyMode::VsExact)?;
    println!("{:>8} {:>10} {:>6} {:>11} {:>11} {:>11}", "h", "dt", "steps", "L1", "Linf", "dBL");
    for r in &report.records {
        println!("{:>8} {:>10.3e} {:>6} {:>11.4e} {:>11.4e} {:>11.4e}", r.h, r.dt, r.steps, r.l1, r.linf, r.dbl);
    }
    for (metric, fit) in &report.rates {
        println!("{metric:>5}: rate {:.3}", fit.slope);
    }
    Ok(())
}
