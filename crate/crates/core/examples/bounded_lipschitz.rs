//! Bounded-Lipschitz distance between point masses and between smooth densities.

use aggsim::metrics::{dbl_distance, lp_error, EvaluationGrid, Norm};

fn main() -> aggsim::Result<()> {
    let n = 401;
    let dx = 0.01;
    for k in [10, 50, 150, 300] {
        let mut mu = vec![0.0; n];
        let mut nu = vec![0.0; n];
        mu[0] = 1.0;
        nu[k] = 1.0;
        let a = k as f64 * dx;
        println!("delta_0 vs delta_{a:.2}: {:.6} (min(a, 2) = {:.6})", dbl_distance(&mu, &nu, dx)?, a.min(2.0));
    }

    let grid = EvaluationGrid::new(-2.0, 2.0, 4097)?;
    let xs = grid.xs();
    for shift in [0.01, 0.1, 0.5] {
        let f: Vec<f64> = xs.iter().map(|x| (-x * x / 0.1).exp()).collect();
        let g: Vec<f64> = xs.iter().map(|x| (-(x - shift) * (x - shift) / 0.1).exp()).collect();
        let d = dbl_distance(&grid.cell_masses(&f), &grid.cell_masses(&g), grid.spacing())?;
        let l1 = lp_error(&f, &g, &grid, Norm::L(1.0))?;
        println!("gaussian shifted by {shift}: dBL {d:.5e}, L1 {l1:.5e}");
    }
    Ok(())
}
