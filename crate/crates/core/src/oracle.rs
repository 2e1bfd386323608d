//! Reference solutions: the closed-form solution for `W = |x|²`, a point-particle
//! integrator, and refined self-convergence runs.

use crate::config::SimulationConfig;
use crate::density::InitialDensity;
use crate::error::{Error, Result};
use crate::fields::Point;
use crate::potential::Potential;
use crate::runner::{run_scenario, RunArtifacts};

/// Exact solution for `W(x) = x²` in one dimension, where `u = -2(x - λ)` with `λ` the
/// conserved centre of mass.
#[derive(Debug, Clone)]
pub struct QuadraticOracle {
    lambda: f64,
    rho0: InitialDensity,
}

impl QuadraticOracle {
    /// `λ` is integrated from `ρ⁰` directly, never from particle weights.
    pub fn new(rho0: &InitialDensity) -> Self {
        QuadraticOracle { lambda: rho0.first_moment(), rho0: rho0.clone() }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn initial(&self) -> &InitialDensity {
        &self.rho0
    }

    /// `ρ(t, x) = ρ⁰((x - λ) e^{2t} + λ) e^{2t}`.
    pub fn density(&self, t: f64, x: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
        }
        let g = (2.0 * t).exp();
        Ok(self.rho0.eval((x - self.lambda) * g + self.lambda) * g)
    }

    /// `(F^{s,t}(x), J^{s,t}, j^{s,t})`; in one dimension `J = j = e^{-2(t-s)}`.
    pub fn flow(&self, s: f64, t: f64, x: f64) -> (f64, f64, f64) {
        let m = (-2.0 * (t - s)).exp_m1();
        (x + (x - self.lambda) * m, 1.0 + m, 1.0 + m)
    }

    /// Support of `ρ(t)`.
    pub fn support_at(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.rho0.support();
        (self.flow(0.0, t, lo).0, self.flow(0.0, t, hi).0)
    }

    pub fn density_on(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.density(t, x)).collect()
    }
}

/// Point particles `Ẋ_i = -Σ_{j≠i} m_j ∇W(X_i - X_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NBodyState<const D: usize> {
    pub positions: Vec<Point<D>>,
    pub masses: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NBodyScheme {
    Euler,
    Rk4,
}

/// Particles closer than this collide under a singular potential.
pub const COLLISION_DISTANCE: f64 = 1e-12;

impl<const D: usize> NBodyState<D> {
    pub fn new(positions: Vec<Point<D>>, masses: Vec<f64>) -> Result<Self> {
        if positions.len() != masses.len() || positions.is_empty() {
            return Err(Error::InvalidArgument("need matching non-empty positions and masses".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("masses must sum to 1, got {total}")));
        }
        Ok(NBodyState { positions, masses, time: 0.0 })
    }

    pub fn centroid(&self) -> Point<D> {
        self.positions.iter().zip(&self.masses).fold(Point::<D>::zeros(), |acc, (x, m)| acc + x * *m)
    }

    pub fn velocities(&self, potential: &Potential) -> Result<Vec<Point<D>>> {
        velocities(&self.positions, &self.masses, potential)
    }
}

fn velocities<const D: usize>(xs: &[Point<D>], masses: &[f64], potential: &Potential) -> Result<Vec<Point<D>>> {
    let mut v = vec![Point::<D>::zeros(); xs.len()];
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            // pair forces are applied antisymmetrically so the centroid is conserved
            let f = potential.grad(&(xs[i] - xs[j]))?;
            v[i] -= f * masses[j];
            v[j] += f * masses[i];
        }
    }
    Ok(v)
}

fn check_collisions<const D: usize>(xs: &[Point<D>], step: usize) -> Result<()> {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if (xs[i] - xs[j]).norm() < COLLISION_DISTANCE {
                return Err(Error::Collision { step });
            }
        }
    }
    Ok(())
}

/// Advances `steps` steps of size `dt`.
pub fn nbody_integrate<const D: usize>(
    state: &NBodyState<D>,
    potential: &Potential,
    dt: f64,
    steps: usize,
    scheme: NBodyScheme,
) -> Result<NBodyState<D>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if potential.dim() != D {
        return Err(Error::InvalidArgument(format!("potential is {}-dimensional, state is {D}-dimensional", potential.dim())));
    }
    let singular = potential.classification().is_singular();
    let m = &state.masses;
    let mut x = state.positions.clone();
    let axpy = |x: &[Point<D>], k: &[Point<D>], c: f64| -> Vec<Point<D>> { x.iter().zip(k).map(|(a, b)| a + b * c).collect() };
    for n in 0..steps {
        if singular {
            check_collisions(&x, n)?;
        }
        x = match scheme {
            NBodyScheme::Euler => axpy(&x, &velocities(&x, m, potential)?, dt),
            NBodyScheme::Rk4 => {
                let k1 = velocities(&x, m, potential)?;
                let k2 = velocities(&axpy(&x, &k1, 0.5 * dt), m, potential)?;
                let k3 = velocities(&axpy(&x, &k2, 0.5 * dt), m, potential)?;
                let k4 = velocities(&axpy(&x, &k3, dt), m, potential)?;
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| xi + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
                    .collect()
            }
        };
    }
    if singular {
        check_collisions(&x, steps)?;
    }
    Ok(NBodyState { positions: x, masses: state.masses.clone(), time: state.time + steps as f64 * dt })
}

/// The same scenario at `(h/r, Δt/r²)`, recorded at the same physical times.
pub fn reference_run(config: &SimulationConfig, refinement: usize) -> Result<RunArtifacts> {
    if refinement == 0 {
        return Err(Error::InvalidArgument("refinement must be at least 1".into()));
    }
    run_scenario(&config.refined(refinement)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::InitialDensityId;
    use crate::potential::PotentialKind;
    use nalgebra::{Vector1, Vector2};

    #[test]
    fn indicator_at_half_time() {
        let rho = InitialDensity::from_id(InitialDensityId::Rho2Indicator).unwrap();
        let o = QuadraticOracle::new(&rho);
        assert!(o.lambda().abs() < 1e-14);
        let v = o.density(0.5, 0.0).unwrap();
        assert!((v - std::f64::consts::E / 2.0).abs() < 1e-14);
        let (lo, hi) = o.support_at(0.5);
        assert!((hi - (-1f64).exp()).abs() < 1e-15 && (lo + (-1f64).exp()).abs() < 1e-15);
        assert!(o.density(-0.1, 0.0).is_err());
    }

    #[test]
    fn flow_is_a_semigroup_and_pushes_forward() {
        let rho = InitialDensity::from_id(InitialDensityId::Rho1Gaussians).unwrap();
        let o = QuadraticOracle::new(&rho);
        for x in [-0.9, -0.2, 0.35, 0.8] {
            let (a, _, _) = o.flow(0.1, 0.3, x);
            let (b, _, _) = o.flow(0.3, 0.7, a);
            assert!((b - o.flow(0.1, 0.7, x).0).abs() < 1e-14);
            let (y, _, j) = o.flow(0.0, 0.4, x);
            assert!((o.density(0.4, y).unwrap() * j - rho.eval(x)).abs() < 1e-12);
        }
        assert_eq!(o.flow(0.2, 0.2, 0.5), (0.5, 1.0, 1.0));
    }

    #[test]
    fn two_body_decay() {
        let pot = Potential::quadratic(1);
        let s0 = 0.8;
        let st = NBodyState::new(vec![Vector1::new(-s0 / 2.0), Vector1::new(s0 / 2.0)], vec![0.5, 0.5]).unwrap();
        let mut cur = st.clone();
        for k in 1..=10 {
            cur = nbody_integrate(&cur, &pot, 1e-3, 100, NBodyScheme::Rk4).unwrap();
            let t = k as f64 * 0.1;
            let s = cur.positions[1][0] - cur.positions[0][0];
            assert!((s - s0 * (-2.0 * t).exp()).abs() < 1e-10, "t={t}");
            assert!(cur.centroid().norm() < 1e-15);
        }
    }

    #[test]
    fn single_and_symmetric_configurations() {
        let pot = Potential::new(PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 }, 2).unwrap();
        let one = NBodyState::new(vec![Vector2::new(0.3, -0.1)], vec![1.0]).unwrap();
        let after = nbody_integrate(&one, &pot, 1e-2, 10, NBodyScheme::Euler).unwrap();
        assert_eq!(after.positions, one.positions);

        let third = 1.0 / 3.0;
        let tri = NBodyState::new(
            vec![Vector2::new(-0.4, 0.0), Vector2::zeros(), Vector2::new(0.4, 0.0)],
            vec![third, third, 1.0 - 2.0 * third],
        )
        .unwrap();
        let after = nbody_integrate(&tri, &pot, 1e-3, 50, NBodyScheme::Rk4).unwrap();
        assert!(after.positions[1].norm() < 1e-15);
    }

    #[test]
    fn collisions_are_reported() {
        let pot = Potential::new(PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 }, 1).unwrap();
        let st = NBodyState::new(vec![Vector1::new(0.1), Vector1::new(0.1)], vec![0.5, 0.5]).unwrap();
        assert!(matches!(nbody_integrate(&st, &pot, 1e-3, 1, NBodyScheme::Euler), Err(Error::Collision { step: 0 })));
        assert!(NBodyState::new(vec![Vector1::new(0.0)], vec![0.7]).is_err());
    }
}
