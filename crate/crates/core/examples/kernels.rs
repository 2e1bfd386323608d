//! Shape functions, the biorthogonal hat kernel and potential classification.

use aggsim::{Potential, PotentialKind, ShapeFunction};

fn main() {
    for shape in [ShapeFunction::b1(), ShapeFunction::b3()] {
        let values: Vec<String> = [0.0, 0.5, 1.0, 1.5].iter().map(|&z| format!("{:.5}", shape.eval_1d(z))).collect();
        println!("{:?}: support radius {}, phi(0, 0.5, 1, 1.5) = {}", shape.family(), shape.support_radius(), values.join(", "));
    }

    // ∫ φ̃(z) φ(z - j) dz = δ_{j0}, by the midpoint rule on a fine grid
    let hat = ShapeFunction::b1();
    let dual = hat.dual().unwrap();
    let n = 200_000;
    for j in -2i32..=2 {
        let dz = 4.0 / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let z = -2.0 + (i as f64 + 0.5) * dz;
                dual.eval_1d(z) * hat.eval_1d(z - j as f64) * dz
            })
            .sum();
        println!("dual moment against shift {j:+}: {s:.8}");
    }
    println!("cubic spline dual: {}", ShapeFunction::b3().dual().unwrap_err());

    for kind in [
        PotentialKind::Quadratic,
        PotentialKind::PowerAttractive { a: 1.5 },
        PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 },
        PotentialKind::PowerRepAttr { a: 4.0, b: 2.5 },
    ] {
        let pot = Potential::new(kind, 1).unwrap();
        println!("{kind:?}: {:?}, L~ = {:.4}", pot.classification(), pot.singular_constant());
    }
}
