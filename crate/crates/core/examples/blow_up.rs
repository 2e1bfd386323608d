//! Pure attraction `|x|^a / a`: concentration for a = 1.5, none for a = 2.5.

use aggsim::{run_scenario, InitialDensityId, PotentialFamily, SimulationConfig};

fn main() -> aggsim::Result<()> {
    for a in [1.5, 2.5] {
        let mut cfg = SimulationConfig::default();
        cfg.potential = PotentialFamily::Power;
        cfg.a = a;
        cfg.init = InitialDensityId::Rho2Indicator;
        cfg.h = 0.01;
        cfg.dt = 5e-3;
        cfg.t_final = 1.0;
        cfg.record_every = Some(20);
        let art = run_scenario(&cfg)?;
        println!("a = {a}");
        for r in &art.timeseries {
            println!("  t {:.2}  max rho {:>10.4}  min h_k {:.3e}", r.t, r.rho_max, r.min_h);
        }
        if let Some(stop) = &art.stop {
            println!("  stopped at step {}: {}", stop.step, stop.reason);
        }
    }
    Ok(())
}
