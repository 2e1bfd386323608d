//! LTP against fixed-radius smooth particles over a range of radii.

use aggsim::{sp_sweep, InitialDensityId, SimulationConfig};

fn main() -> aggsim::Result<()> {
    let mut cfg = SimulationConfig::default();
    cfg.init = InitialDensityId::Rho1Gaussians;
    cfg.h = 0.01;
    cfg.dt = 1e-3;
    cfg.t_final = 0.5;
    let report = sp_sweep(&cfg, &[0.0025, 0.005, 0.0075, 0.01, 0.02, 0.05, 0.5])?;
    println!("LTP          L1 {:.4e}  Linf {:.4e}", report.ltp.l1, report.ltp.linf);
    for row in &report.sp {
        println!("SP eps={:<7} L1 {:.4e}  Linf {:.4e}", row.epsilon.unwrap(), row.l1, row.linf);
    }
    Ok(())
}
