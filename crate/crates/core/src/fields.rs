//! Convolution fields `(K * ρ)(x)` for `K ∈ {∇W, D²W, Δ_x W}` against a sum of deformed
//! particles.
//!
//! Each particle contributes `ω_l ∫ K(x - x_l - A_l z) φ(z) dz`, the change of variables of
//! `∫ K(x - y) φ_l(y) dy` into reference coordinates, with `A_l` the particle's linear map.
//! The reference integral is approximated by composite Gauss–Legendre over the polynomial
//! pieces of `φ`. For singular potentials, pieces close to the reference root
//! `z* = A_l^{-1} (x - x_l)` are split there and graded geometrically toward it; the
//! innermost cell uses the substitution `s = ε t²`.

use std::borrow::Cow;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{radial_hessian, Potential};
use crate::quadrature::gauss_legendre;
use crate::shape::ShapeFunction;

pub type Point<const D: usize> = SVector<f64, D>;
pub type Mat<const D: usize> = SMatrix<f64, D, D>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    /// Gauss–Legendre nodes per polynomial piece of the shape.
    pub points_per_piece: usize,
    /// Geometric refinement levels toward a kernel singularity.
    pub singular_grading_levels: usize,
    /// Length ratio between consecutive graded cells.
    pub grading_ratio: f64,
    pub tolerance_target: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            points_per_piece: 5,
            singular_grading_levels: 4,
            grading_ratio: 0.25,
            tolerance_target: 1e-8,
        }
    }
}

impl QuadratureRule {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_piece < 2 {
            return Err(Error::InvalidArgument("quadrature needs at least 2 points per piece".into()));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(Error::InvalidArgument("grading ratio must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A particle seen by the field evaluator: `φ_l(y) = |det A|^{-1} φ(A^{-1}(y - center))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapedParticle<const D: usize> {
    pub center: Point<D>,
    pub weight: f64,
    /// Reference-to-physical offset map `A`.
    pub map: Mat<D>,
    pub inv_map: Mat<D>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Grad,
    Hess,
    Lap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue<const D: usize> {
    Vector(Point<D>),
    Matrix(Mat<D>),
    Scalar(f64),
}

type Node<const D: usize> = (Point<D>, f64);

/// Evaluates convolution fields of one potential against particles of one shape.
pub struct FieldEvaluator<'a, const D: usize> {
    potential: &'a Potential,
    shape: &'a ShapeFunction,
    rule: QuadratureRule,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
    base: Vec<Node<D>>,
    singular: bool,
    /// `W = |x|²`: fields follow from the particle moments, which the quadrature reproduces
    /// exactly anyway.
    moments: bool,
    skipped: AtomicUsize,
}

impl<'a, const D: usize> FieldEvaluator<'a, D> {
    pub fn new(potential: &'a Potential, shape: &'a ShapeFunction, rule: QuadratureRule) -> Result<Self> {
        rule.validate()?;
        if potential.dim() != D {
            return Err(Error::InvalidArgument(format!(
                "potential built for dimension {} used in dimension {D}",
                potential.dim()
            )));
        }
        let (gl_nodes, gl_weights) = gauss_legendre(rule.points_per_piece);
        let mut ev = FieldEvaluator {
            potential,
            shape,
            rule,
            gl_nodes,
            gl_weights,
            base: Vec::new(),
            singular: potential.classification().is_singular(),
            moments: potential.is_quadratic(),
            skipped: AtomicUsize::new(0),
        };
        let plain: Vec<(f64, f64)> = (0..shape.pieces().len()).flat_map(|i| ev.plain_piece(i)).collect();
        ev.base = tensor(&vec![plain; D]);
        Ok(ev)
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn potential(&self) -> &Potential {
        self.potential
    }

    /// Evaluates every kernel by quadrature, even where a closed form exists.
    pub fn force_quadrature(mut self) -> Self {
        self.moments = false;
        self
    }

    /// Quadrature nodes dropped because the kernel was not finite there.
    pub fn skipped_nodes(&self) -> usize {
        self.skipped.load(Ordering::Relaxed)
    }

    fn plain_piece(&self, i: usize) -> Vec<(f64, f64)> {
        let p = &self.shape.pieces()[i];
        let mid = 0.5 * (p.lo + p.hi);
        let half = 0.5 * (p.hi - p.lo);
        self.gl_nodes
            .iter()
            .zip(&self.gl_weights)
            .map(|(&x, &w)| {
                let z = mid + half * x;
                (z, half * w * p.poly(z))
            })
            .collect()
    }

    fn graded_1d(&self, zstar: f64, levels: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (i, p) in self.shape.pieces().iter().enumerate() {
            let len = p.hi - p.lo;
            let c = zstar.clamp(p.lo, p.hi);
            if (zstar - c).abs() >= len {
                out.extend(self.plain_piece(i));
                continue;
            }
            // a split within round-off of an endpoint would put nodes on the singularity itself
            let tol = 1e-12 * len;
            let c = if c - p.lo < tol {
                p.lo
            } else if p.hi - c < tol {
                p.hi
            } else {
                c
            };
            if c > p.lo {
                self.graded_side(c, -1.0, c - p.lo, levels, |z| p.poly(z), &mut out);
            }
            if c < p.hi {
                self.graded_side(c, 1.0, p.hi - c, levels, |z| p.poly(z), &mut out);
            }
        }
        out
    }

    /// Cells `c + dir·[L σ^{m+1}, L σ^m]`, then `c + dir·[0, L σ^levels]` with `s = ε t²`.
    fn graded_side(&self, c: f64, dir: f64, len: f64, levels: usize, phi: impl Fn(f64) -> f64, out: &mut Vec<(f64, f64)>) {
        let sigma = self.rule.grading_ratio;
        let mut outer = len;
        for _ in 0..levels {
            let inner = outer * sigma;
            let mid = 0.5 * (inner + outer);
            let half = 0.5 * (outer - inner);
            for (&x, &w) in self.gl_nodes.iter().zip(&self.gl_weights) {
                let z = c + dir * (mid + half * x);
                out.push((z, half * w * phi(z)));
            }
            outer = inner;
        }
        let eps = outer;
        for (&x, &w) in self.gl_nodes.iter().zip(&self.gl_weights) {
            let t = 0.5 * (x + 1.0);
            let z = c + dir * eps * t * t;
            out.push((z, 0.5 * w * 2.0 * eps * t * phi(z)));
        }
    }

    /// Every power kernel other than `|x|²` loses smoothness at the origin, so pieces are split
    /// at the target; the split is graded only when the kernel itself is singular there.
    fn nodes_for(&self, zstar: &Point<D>) -> Cow<'_, [Node<D>]> {
        if self.potential.is_quadratic() {
            return Cow::Borrowed(&self.base);
        }
        let levels = if self.singular { self.rule.singular_grading_levels } else { 0 };
        let reach = self.shape.support_radius() + 1.0;
        if zstar.iter().any(|z| z.abs() > reach) {
            return Cow::Borrowed(&self.base);
        }
        let per_dim: Vec<Vec<(f64, f64)>> = zstar.iter().map(|&z| self.graded_1d(z, levels)).collect();
        Cow::Owned(tensor(&per_dim))
    }

    /// `(∇W * ρ)(x)` and `(D²W * ρ)(x)` in one pass.
    pub fn grad_hess_at(&self, particles: &[ShapedParticle<D>], x: &Point<D>) -> Result<(Point<D>, Mat<D>)> {
        if self.moments {
            return Ok(quadratic_fields(particles, x));
        }
        let mut grad = Point::<D>::zeros();
        let mut hess = Mat::<D>::zeros();
        let mut skipped = 0usize;
        for p in particles {
            let offset = x - p.center;
            let zstar = p.inv_map * offset;
            let nodes = self.nodes_for(&zstar);
            let mut g = Point::<D>::zeros();
            let mut hm = Mat::<D>::zeros();
            for (z, wq) in nodes.iter() {
                let w = offset - p.map * z;
                let r = w.norm();
                match self.potential.radial_derivs(r) {
                    Some((f1, f2)) => {
                        g += w * (wq * f1 / r);
                        hm += radial_hessian(&w, r, f1, f2) * *wq;
                    }
                    None => match self.potential.hess(&w) {
                        Ok(h0) => hm += h0 * *wq,
                        Err(_) => skipped += 1,
                    },
                }
            }
            grad += g * p.weight;
            hess += hm * p.weight;
        }
        if skipped > 0 {
            self.skipped.fetch_add(skipped, Ordering::Relaxed);
            log::warn!("skipped {skipped} quadrature nodes on a kernel singularity at x = {x:?}");
        }
        if grad.iter().chain(hess.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure(format!("non-finite field value at x = {x:?}")));
        }
        Ok((grad, hess))
    }

    /// Field values at many targets; each target is reduced in particle order.
    pub fn grad_hess_many(&self, particles: &[ShapedParticle<D>], targets: &[Point<D>]) -> Result<Vec<(Point<D>, Mat<D>)>> {
        targets.par_iter().map(|x| self.grad_hess_at(particles, x)).collect()
    }

    pub fn convolve_at(&self, selector: Selector, particles: &[ShapedParticle<D>], x: &Point<D>) -> Result<FieldValue<D>> {
        let (g, h) = self.grad_hess_at(particles, x)?;
        Ok(match selector {
            Selector::Grad => FieldValue::Vector(g),
            Selector::Hess => FieldValue::Matrix(h),
            Selector::Lap => FieldValue::Scalar(h.trace()),
        })
    }

    /// `u(x) = -(∇W * ρ)(x)`.
    pub fn velocity_at(&self, particles: &[ShapedParticle<D>], x: &Point<D>) -> Result<Point<D>> {
        self.grad_hess_at(particles, x).map(|(g, _)| -g)
    }
}

/// `∇W * ρ = 2 Σ ω_l (x - x_l)` and `D²W * ρ = 2 Σ ω_l I` for `W = |x|²`: the shapes are
/// even, so their first moments vanish.
fn quadratic_fields<const D: usize>(particles: &[ShapedParticle<D>], x: &Point<D>) -> (Point<D>, Mat<D>) {
    let mut grad = Point::<D>::zeros();
    let mut mass = 0.0;
    for p in particles {
        grad += (x - p.center) * p.weight;
        mass += p.weight;
    }
    (grad * 2.0, Mat::<D>::identity() * (2.0 * mass))
}

fn tensor<const D: usize>(per_dim: &[Vec<(f64, f64)>]) -> Vec<Node<D>> {
    let mut out: Vec<Node<D>> = vec![(Point::<D>::zeros(), 1.0)];
    for (d, list) in per_dim.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for (z, w) in &out {
            for &(zi, wi) in list {
                let mut z2 = *z;
                z2[d] = zi;
                next.push((z2, w * wi));
            }
        }
        out = next;
    }
    out
}
