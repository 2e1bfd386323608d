//! Attractive-repulsive potentials `|x|^a/a - |x|^b/b`: two bumps for (3, 2.5),
//! a near-steady state for (4, 2.5).

use aggsim::{run_scenario, InitialDensityId, PotentialFamily, SimulationConfig};

fn local_maxima(d: &[f64]) -> usize {
    let top = d.iter().copied().fold(0.0, f64::max);
    (1..d.len() - 1).filter(|&i| d[i] > 0.1 * top && d[i] > d[i - 1] && d[i] >= d[i + 1]).count()
}

fn main() -> aggsim::Result<()> {
    for (a, b, dt, t) in [(3.0, 1.5, 5e-3, 1.0), (3.0, 2.5, 5e-3, 1.0), (4.0, 2.5, 0.02, 2.0)] {
        let mut cfg = SimulationConfig::default();
        cfg.potential = PotentialFamily::RepAttr;
        cfg.a = a;
        cfg.b = b;
        cfg.init = InitialDensityId::Rho2Indicator;
        cfg.h = 0.01;
        cfg.dt = dt;
        cfg.t_final = t;
        let art = run_scenario(&cfg)?;
        let first = art.timeseries.first().unwrap();
        let last = art.timeseries.last().unwrap();
        let profile = art.profiles.last().unwrap();
        println!(
            "(a, b) = ({a}, {b}): max speed {:.3e} -> {:.3e}, max rho {:.3} -> {:.3}, {} local maxima at t = {}",
            first.max_speed,
            last.max_speed,
            first.rho_max,
            last.rho_max,
            local_maxima(&profile.density),
            last.t
        );
    }
    Ok(())
}
