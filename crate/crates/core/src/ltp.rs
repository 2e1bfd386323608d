//! Linearly transformed particles: state, initialization, time step and reconstruction.
//!
//! Particle `k` carries a position `x_k`, a constant weight `ω_k`, a deformation matrix
//! `D_k` and a volume `h_k = h^d / det(D_k)`, and represents the shape
//! `φ_k(x) = φ(D_k (x - x_k) / h) / h_k`. Each explicit Euler step moves the centre with
//! the convolved velocity and composes the deformation with the inverse of a discrete
//! Jacobian built from the convolved Hessian.

use rayon::prelude::*;

use crate::density::InitialDensity;
use crate::error::{Error, Result};
use crate::fields::{FieldEvaluator, Mat, Point, QuadratureRule, ShapedParticle};
use crate::linalg::{determinant, expm, inverse};
use crate::potential::Potential;
use crate::shape::ShapeFunction;

/// Blow-up is declared once a particle volume falls below this fraction of `h^d`.
pub const MIN_VOLUME_FRACTION: f64 = 1e-12;

const WEIGHT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Cell averages of `ρ⁰`; always non-negative.
    CellAverage,
    /// Moments against the biorthogonal kernel (hat function only); may be negative.
    DualKernel,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell_average" => Ok(WeightMode::CellAverage),
            "dual_kernel" => Ok(WeightMode::DualKernel),
            other => Err(Error::Config(format!("unknown weight mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// `J = exp(-Δt M)` with `det J = exp(-Δt tr M)`.
    Exponential,
    /// `J = I - Δt M`.
    Linearized,
}

impl std::str::FromStr for JacobianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(JacobianMode::Exponential),
            "linearized" => Ok(JacobianMode::Linearized),
            other => Err(Error::Config(format!("unknown jacobian mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub jacobian: JacobianMode,
    pub rule: QuadratureRule,
    /// Positions must stay within this distance of the origin.
    pub domain_radius: f64,
}

impl StepParams {
    pub fn new(dt: f64) -> Self {
        StepParams {
            dt,
            jacobian: JacobianMode::Exponential,
            rule: QuadratureRule::default(),
            domain_radius: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtpParticle<const D: usize> {
    /// Grid multi-index `k`, with `x_k^0 = k h`.
    pub index: [i64; D],
    pub position: Point<D>,
    pub weight: f64,
    pub deformation: Mat<D>,
    pub volume: f64,
    /// `det J_k` of the step that produced this state (1 at initialization).
    pub last_jacobian_det: f64,
}

impl<const D: usize> LtpParticle<D> {
    pub fn initial_position(&self, h: f64) -> Point<D> {
        Point::<D>::from_fn(|i, _| self.index[i] as f64 * h)
    }

    /// `J̄_k = D_k^{-1}`, the accumulated discrete Jacobian.
    pub fn accumulated_jacobian(&self) -> Mat<D> {
        invert(&self.deformation)
    }
}

/// Per-step summary returned alongside the new state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub min_j: f64,
    pub max_j: f64,
    /// `sup_k |exp(-Δt M_k) - (I - Δt M_k)|` (Frobenius norm).
    pub jacobian_gap: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<const D: usize> {
    pub h: f64,
    pub step: usize,
    pub time: f64,
    pub particles: Vec<LtpParticle<D>>,
    pub shape: ShapeFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<const D: usize> {
    pub total_mass: f64,
    pub centroid: Point<D>,
    pub min_j: f64,
    pub max_j: f64,
    pub min_volume: f64,
    /// `κ`: the largest number of particle supports covering one point.
    pub max_overlap: usize,
}

/// Places particles on the grid `kh` and computes their weights from `ρ⁰`.
///
/// A particle is created for every cell `kh + [-h/2, h/2]^d` whose closure meets the support
/// of `ρ⁰`; in dual-kernel mode the range is widened to every `k` whose kernel support meets it.
/// In dimension `d` the density is the tensor product of the one-dimensional profile.
pub fn init_particles<const D: usize>(
    rho0: &InitialDensity,
    h: f64,
    mode: WeightMode,
    shape: &ShapeFunction,
) -> Result<ParticleState<D>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("grid size must be positive, got {h}")));
    }
    let (lo, hi) = rho0.support();
    let weights_1d: Vec<(i64, f64)> = match mode {
        WeightMode::CellAverage => {
            let kmin = ((lo - 0.5 * h) / h).ceil() as i64;
            let kmax = ((hi + 0.5 * h) / h).floor() as i64;
            (kmin..=kmax)
                .map(|k| {
                    let c = k as f64 * h;
                    (k, rho0.integrate_against(|_| 1.0, c - 0.5 * h, c + 0.5 * h, &[], WEIGHT_TOL))
                })
                .collect()
        }
        WeightMode::DualKernel => {
            let dual = shape.dual()?;
            let kmin = ((lo - h) / h).floor() as i64 + 1;
            let kmax = ((hi + h) / h).ceil() as i64 - 1;
            (kmin..=kmax)
                .map(|k| {
                    let c = k as f64 * h;
                    let w = dual
                        .pieces()
                        .iter()
                        .map(|p| {
                            p.coeffs()[0]
                                * rho0.integrate_against(|_| 1.0, c + h * p.lo, c + h * p.hi, &[], WEIGHT_TOL)
                        })
                        .sum();
                    (k, w)
                })
                .collect()
        }
    };
    if weights_1d.is_empty() {
        return Err(Error::InvalidArgument("initial density has empty support".into()));
    }

    let mut particles = Vec::with_capacity(weights_1d.len().pow(D as u32));
    let mut idx = vec![0usize; D];
    'outer: loop {
        let mut index = [0i64; D];
        let mut weight = 1.0;
        for d in 0..D {
            index[d] = weights_1d[idx[d]].0;
            weight *= weights_1d[idx[d]].1;
        }
        particles.push(LtpParticle {
            index,
            position: Point::<D>::from_fn(|i, _| index[i] as f64 * h),
            weight,
            deformation: Mat::<D>::identity(),
            volume: h.powi(D as i32),
            last_jacobian_det: 1.0,
        });
        for d in (0..D).rev() {
            idx[d] += 1;
            if idx[d] < weights_1d.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    Ok(ParticleState { h, step: 0, time: 0.0, particles, shape: shape.clone() })
}

fn invert<const D: usize>(m: &Mat<D>) -> Mat<D> {
    inverse(m).unwrap_or_else(|| Mat::<D>::from_element(f64::NAN))
}

impl<const D: usize> ParticleState<D> {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn reference_volume(&self) -> f64 {
        self.h.powi(D as i32)
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// The particles as seen by the field evaluator: `y = x_k + h D_k^{-1} z`.
    pub fn shaped_particles(&self) -> Vec<ShapedParticle<D>> {
        self.particles
            .iter()
            .map(|p| ShapedParticle {
                center: p.position,
                weight: p.weight,
                map: invert(&p.deformation) * self.h,
                inv_map: p.deformation / self.h,
            })
            .collect()
    }

    /// One explicit Euler step.
    pub fn step(&self, potential: &Potential, params: &StepParams) -> Result<(ParticleState<D>, StepReport)> {
        let ev = FieldEvaluator::<D>::new(potential, &self.shape, params.rule)?;
        self.step_with(&ev, params)
    }

    /// One explicit Euler step with a prepared evaluator.
    pub fn step_with(&self, ev: &FieldEvaluator<'_, D>, params: &StepParams) -> Result<(ParticleState<D>, StepReport)> {
        let dt = params.dt;
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let next_step = self.step + 1;
        let shaped = self.shaped_particles();
        let updates: Vec<Result<(LtpParticle<D>, f64, f64)>> = self
            .particles
            .par_iter()
            .map(|p| {
                let (grad, m) = ev.grad_hess_at(&shaped, &p.position)?;
                let lin = Mat::<D>::identity() - m * dt;
                let exp = expm(&(m * -dt));
                let gap = (exp - lin).norm();
                let (j, jinv) = match params.jacobian {
                    JacobianMode::Exponential => ((-dt * m.trace()).exp(), expm(&(m * dt))),
                    JacobianMode::Linearized => {
                        let j = determinant(&lin);
                        if !(j > 0.0) {
                            return Err(Error::StepRejected {
                                step: next_step,
                                reason: format!("linearized Jacobian determinant {j} <= 0 at particle {:?}", p.index),
                            });
                        }
                        (j, invert(&lin))
                    }
                };
                let moved = LtpParticle {
                    index: p.index,
                    position: p.position - grad * dt,
                    weight: p.weight,
                    deformation: p.deformation * jinv,
                    volume: j * p.volume,
                    last_jacobian_det: j,
                };
                Ok((moved, gap, grad.norm()))
            })
            .collect();

        let mut particles = Vec::with_capacity(updates.len());
        let mut report = StepReport { min_j: f64::INFINITY, max_j: f64::NEG_INFINITY, jacobian_gap: 0.0, max_speed: 0.0 };
        for u in updates {
            let (p, gap, speed) = u?;
            report.min_j = report.min_j.min(p.last_jacobian_det);
            report.max_j = report.max_j.max(p.last_jacobian_det);
            report.jacobian_gap = report.jacobian_gap.max(gap);
            report.max_speed = report.max_speed.max(speed);
            particles.push(p);
        }

        let min_volume = self.reference_volume() * MIN_VOLUME_FRACTION;
        for p in &particles {
            if !p.position.iter().all(|v| v.is_finite()) || !p.volume.is_finite() {
                return Err(Error::NumericFailure(format!("non-finite particle state at step {next_step}")));
            }
            if p.position.norm() > params.domain_radius {
                return Err(Error::BlowUp {
                    step: next_step,
                    reason: format!("particle {:?} left the domain radius {}", p.index, params.domain_radius),
                });
            }
            if p.volume < min_volume {
                return Err(Error::BlowUp {
                    step: next_step,
                    reason: format!("particle {:?} volume {:e} collapsed", p.index, p.volume),
                });
            }
        }

        let next = ParticleState {
            h: self.h,
            step: next_step,
            time: next_step as f64 * dt,
            particles,
            shape: self.shape.clone(),
        };
        Ok((next, report))
    }

    /// `ρ_h^n(x) = Σ_k ω_k φ(D_k (x - x_k)/h) / h_k`.
    pub fn reconstruct_density(&self, x: &Point<D>) -> f64 {
        let r = self.shape.support_radius();
        self.particles
            .iter()
            .map(|p| {
                let z = p.deformation * (x - p.position) / self.h;
                if z.iter().any(|v| v.abs() >= r) {
                    0.0
                } else {
                    p.weight * self.shape.eval(z.as_slice()) / p.volume
                }
            })
            .sum()
    }

    pub fn centroid(&self) -> Point<D> {
        let m = self.total_mass();
        self.particles.iter().fold(Point::<D>::zeros(), |acc, p| acc + p.position * p.weight) / m
    }

    pub fn diagnostics(&self) -> Diagnostics<D> {
        let (min_j, max_j) = self
            .particles
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.last_jacobian_det), hi.max(p.last_jacobian_det))
            });
        Diagnostics {
            total_mass: self.total_mass(),
            centroid: self.centroid(),
            min_j,
            max_j,
            min_volume: self.particles.iter().map(|p| p.volume).fold(f64::INFINITY, f64::min),
            max_overlap: self.max_overlap(),
        }
    }

    /// Largest number of supports containing one point. Exact in one dimension (interval
    /// stabbing); in higher dimensions the count is taken at the particle centres.
    pub fn max_overlap(&self) -> usize {
        let r = self.shape.support_radius();
        if D == 1 {
            let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * self.len());
            for p in &self.particles {
                // touching supports do not overlap; absorb round-off in the endpoints
                let half = r * self.h / p.deformation[(0, 0)].abs() * (1.0 - 1e-9);
                events.push((p.position[0] - half, 1));
                events.push((p.position[0] + half, -1));
            }
            // open supports: at equal coordinates, close before opening
            events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut cur = 0i32;
            let mut best = 0i32;
            for (_, e) in events {
                cur += e;
                best = best.max(cur);
            }
            best as usize
        } else {
            self.particles
                .iter()
                .map(|q| {
                    self.particles
                        .iter()
                        .filter(|p| {
                            let z = p.deformation * (q.position - p.position) / self.h;
                            z.iter().all(|v| v.abs() < r)
                        })
                        .count()
                })
                .max()
                .unwrap_or(0)
        }
    }
}

/// Piecewise-linear field through values at sorted abscissae, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, values) = pairs.into_iter().unzip();
        SampledField { xs, values }
    }

    pub fn at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 0 {
            return 0.0;
        }
        if x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        if x1 == x0 {
            return self.values[i];
        }
        let t = (x - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }
}

impl ParticleState<1> {
    /// Smallest interval containing every particle support.
    pub fn support_bounds(&self) -> (f64, f64) {
        let r = self.shape.support_radius();
        self.particles.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let half = r * self.h / p.deformation[(0, 0)].abs();
            (lo.min(p.position[0] - half), hi.max(p.position[0] + half))
        })
    }

    pub fn density_on(&self, xs: &[f64]) -> Vec<f64> {
        xs.par_iter().map(|&x| self.reconstruct_density(&Point::<1>::new(x))).collect()
    }

    /// `u_h^n`: velocities `-(W' * ρ_h^n)(x_k)` interpolated linearly between particles.
    pub fn reconstruct_velocity_field(&self, potential: &Potential, rule: QuadratureRule) -> Result<SampledField> {
        if self.len() < 2 {
            return Err(Error::InvalidArgument("velocity reconstruction needs at least 2 particles".into()));
        }
        let ev = FieldEvaluator::<1>::new(potential, &self.shape, rule)?;
        let shaped = self.shaped_particles();
        let targets: Vec<Point<1>> = self.particles.iter().map(|p| p.position).collect();
        let fields = ev.grad_hess_many(&shaped, &targets)?;
        Ok(SampledField::new(
            targets.iter().zip(fields).map(|(x, (g, _))| (x[0], -g[0])).collect(),
        ))
    }

    /// `h^n(x_k) = h Π_m j_k^m`, interpolated linearly between particles.
    pub fn reconstruct_size_field(&self) -> Result<SampledField> {
        if self.len() < 2 {
            return Err(Error::InvalidArgument("size reconstruction needs at least 2 particles".into()));
        }
        Ok(SampledField::new(self.particles.iter().map(|p| (p.position[0], p.volume)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::InitialDensityId;
    use crate::potential::PotentialKind;
    use nalgebra::Vector1;

    fn indicator() -> InitialDensity {
        InitialDensity::from_id(InitialDensityId::Rho2Indicator).unwrap()
    }

    #[test]
    fn interior_weights_for_constant_density() {
        let h = 0.05;
        for (mode, shape) in [(WeightMode::CellAverage, ShapeFunction::b3()), (WeightMode::DualKernel, ShapeFunction::b1())] {
            let s = init_particles::<1>(&indicator(), h, mode, &shape).unwrap();
            let mid = s.particles.iter().find(|p| p.index[0] == 3).unwrap();
            assert!((mid.weight - h / 2.0).abs() < 1e-14, "{mode:?}");
            assert!((s.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn init_errors() {
        assert!(init_particles::<1>(&indicator(), 0.0, WeightMode::CellAverage, &ShapeFunction::b3()).is_err());
        assert!(matches!(
            init_particles::<1>(&indicator(), 0.1, WeightMode::DualKernel, &ShapeFunction::b3()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn initial_reconstruction_matches_fixed_shapes() {
        let s = init_particles::<1>(&indicator(), 0.1, WeightMode::CellAverage, &ShapeFunction::b3()).unwrap();
        for x in [-1.05, -0.33, 0.0, 0.71] {
            let direct: f64 = s
                .particles
                .iter()
                .map(|p| p.weight * s.shape.eval_1d((x - p.position[0]) / s.h) / s.h)
                .sum();
            assert!((s.reconstruct_density(&Vector1::new(x)) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_step_uses_constant_jacobian() {
        let s = init_particles::<1>(&indicator(), 0.1, WeightMode::CellAverage, &ShapeFunction::b3()).unwrap();
        let pot = Potential::quadratic(1);
        let dt = 0.01;
        let (s1, rep) = s.step(&pot, &StepParams::new(dt)).unwrap();
        let expected = (-2.0 * dt).exp();
        assert!((rep.min_j - expected).abs() < 1e-13 && (rep.max_j - expected).abs() < 1e-13);
        for p in &s1.particles {
            assert!((p.volume - s.h * expected).abs() < 1e-14);
        }
    }

    #[test]
    fn linearized_step_rejects_non_positive_determinant() {
        let s = init_particles::<1>(&indicator(), 0.1, WeightMode::CellAverage, &ShapeFunction::b3()).unwrap();
        let pot = Potential::quadratic(1);
        let params = StepParams { jacobian: JacobianMode::Linearized, ..StepParams::new(0.6) };
        assert!(matches!(s.step(&pot, &params), Err(Error::StepRejected { step: 1, .. })));
    }

    #[test]
    fn leaving_the_domain_is_a_blow_up() {
        let s = init_particles::<1>(&indicator(), 0.1, WeightMode::CellAverage, &ShapeFunction::b3()).unwrap();
        let pot = Potential::new(PotentialKind::PowerRepAttr { a: 3.0, b: 1.5 }, 1).unwrap();
        let params = StepParams { domain_radius: 0.5, ..StepParams::new(0.01) };
        assert!(matches!(s.step(&pot, &params), Err(Error::BlowUp { step: 1, .. })));
    }

    #[test]
    fn overlap_at_initialization() {
        let s = init_particles::<1>(&indicator(), 0.1, WeightMode::CellAverage, &ShapeFunction::b3()).unwrap();
        assert_eq!(s.max_overlap(), 4);
        let s = init_particles::<1>(&indicator(), 0.1, WeightMode::CellAverage, &ShapeFunction::b1()).unwrap();
        assert_eq!(s.max_overlap(), 2);
    }

    #[test]
    fn sampled_field_interpolates() {
        let f = SampledField::new(vec![(1.0, 2.0), (0.0, 0.0)]);
        assert_eq!(f.at(0.5), 1.0);
        assert_eq!(f.at(-1.0), 0.0);
        assert_eq!(f.at(3.0), 2.0);
    }

    #[test]
    fn two_dimensional_tensor_initialization() {
        let s = init_particles::<2>(&indicator(), 0.25, WeightMode::CellAverage, &ShapeFunction::b1()).unwrap();
        assert_eq!(s.len(), 81);
        assert!((s.total_mass() - 1.0).abs() < 1e-12);
        let pot = Potential::quadratic(2);
        let (s1, rep) = s.step(&pot, &StepParams::new(0.01)).unwrap();
        assert!((rep.min_j - (-0.04f64).exp()).abs() < 1e-12);
        for p in &s1.particles {
            assert!((p.volume * p.deformation.determinant() - 0.0625).abs() < 1e-14);
        }
    }
}
