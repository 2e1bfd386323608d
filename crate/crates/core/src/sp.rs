//! Classical smooth-particle baseline: every particle keeps the fixed radius `ε`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{FieldEvaluator, Mat, Point, ShapedParticle};
use crate::ltp::{ParticleState, StepParams};
use crate::potential::Potential;
use crate::shape::ShapeFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct SpState<const D: usize> {
    pub positions: Vec<Point<D>>,
    pub weights: Vec<f64>,
    pub epsilon: f64,
    pub shape: ShapeFunction,
    pub step: usize,
    pub time: f64,
}

impl<const D: usize> SpState<D> {
    pub fn new(positions: Vec<Point<D>>, weights: Vec<f64>, epsilon: f64, shape: ShapeFunction) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("particle radius must be positive, got {epsilon}")));
        }
        if positions.len() != weights.len() {
            return Err(Error::InvalidArgument("positions and weights differ in length".into()));
        }
        Ok(SpState { positions, weights, epsilon, shape, step: 0, time: 0.0 })
    }

    /// Same particles and weights as an LTP state, with radius `ε`.
    pub fn from_ltp(state: &ParticleState<D>, epsilon: f64) -> Result<Self> {
        let mut sp = Self::new(
            state.particles.iter().map(|p| p.position).collect(),
            state.particles.iter().map(|p| p.weight).collect(),
            epsilon,
            state.shape.clone(),
        )?;
        sp.step = state.step;
        sp.time = state.time;
        Ok(sp)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn shaped_particles(&self) -> Vec<ShapedParticle<D>> {
        self.positions
            .iter()
            .zip(&self.weights)
            .map(|(&center, &weight)| ShapedParticle {
                center,
                weight,
                map: Mat::<D>::identity() * self.epsilon,
                inv_map: Mat::<D>::identity() / self.epsilon,
            })
            .collect()
    }

    /// `ρ_ε(x) = Σ_k ω_k φ((x - x_k)/ε) / ε^d`.
    pub fn reconstruct(&self, x: &Point<D>) -> f64 {
        let norm = self.epsilon.powi(D as i32);
        let r = self.shape.support_radius();
        self.positions
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let z = (x - p) / self.epsilon;
                if z.iter().any(|v| v.abs() >= r) {
                    0.0
                } else {
                    w * self.shape.eval(z.as_slice()) / norm
                }
            })
            .sum()
    }

    /// Explicit Euler on the positions with the velocity of `ρ_ε`; no shape tracking.
    pub fn step(&self, potential: &Potential, params: &StepParams) -> Result<Self> {
        let ev = FieldEvaluator::<D>::new(potential, &self.shape, params.rule)?;
        self.step_with(&ev, params)
    }

    pub fn step_with(&self, ev: &FieldEvaluator<'_, D>, params: &StepParams) -> Result<Self> {
        let dt = params.dt;
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let shaped = self.shaped_particles();
        let next_step = self.step + 1;
        let positions: Vec<Point<D>> = self
            .positions
            .par_iter()
            .map(|x| ev.grad_hess_at(&shaped, x).map(|(g, _)| x - g * dt))
            .collect::<Result<_>>()?;
        if let Some(p) = positions.iter().find(|p| p.norm() > params.domain_radius) {
            return Err(Error::BlowUp {
                step: next_step,
                reason: format!("particle at {p:?} left the domain radius {}", params.domain_radius),
            });
        }
        Ok(SpState {
            positions,
            weights: self.weights.clone(),
            epsilon: self.epsilon,
            shape: self.shape.clone(),
            step: next_step,
            time: next_step as f64 * dt,
        })
    }
}

impl SpState<1> {
    pub fn density_on(&self, xs: &[f64]) -> Vec<f64> {
        xs.par_iter().map(|&x| self.reconstruct(&Point::<1>::new(x))).collect()
    }

    pub fn support_bounds(&self) -> (f64, f64) {
        let half = self.shape.support_radius() * self.epsilon;
        self.positions.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[0] - half), hi.max(p[0] + half))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector1;

    #[test]
    fn vanishes_between_distant_particles() {
        let sp = SpState::new(vec![Vector1::new(-0.5), Vector1::new(0.5)], vec![0.5, 0.5], 0.01, ShapeFunction::b3()).unwrap();
        assert_eq!(sp.reconstruct(&Vector1::new(0.0)), 0.0);
        assert!(sp.reconstruct(&Vector1::new(0.5)) > 0.0);
    }

    #[test]
    fn symmetric_pair_midpoint_is_stationary() {
        let sp = SpState::new(vec![Vector1::new(-0.2), Vector1::new(0.2)], vec![0.5, 0.5], 0.05, ShapeFunction::b3()).unwrap();
        let pot = Potential::quadratic(1);
        let next = sp.step(&pot, &StepParams::new(0.01)).unwrap();
        assert!((next.positions[0][0] + next.positions[1][0]).abs() < 1e-15);
        // contraction by (1 - 2Δt) toward the centroid
        assert!((next.positions[1][0] - 0.2 * 0.98).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_radius() {
        assert!(SpState::<1>::new(vec![], vec![], 0.0, ShapeFunction::b1()).is_err());
    }
}
