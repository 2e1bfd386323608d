//! Radial interaction potentials and their derivatives.
//!
//! Every family is of the form `W(x) = f(|x|)`, so the gradient is `f'(r) x/r` and the
//! Hessian is `f''(r) x̂x̂ᵀ + f'(r)/r (I - x̂x̂ᵀ)`. In one dimension the Hessian and the
//! Laplacian coincide with `f''(|x|)`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

/// Radius on which the singular constant is computed unless told otherwise.
pub const DEFAULT_REFERENCE_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// `W(x) = |x|^2`.
    Quadratic,
    /// `W(x) = |x|^a / a`.
    PowerAttractive { a: f64 },
    /// `W(x) = |x|^a / a - |x|^b / b` with `1 < b < a`.
    PowerRepAttr { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// `∇W ∈ W^{1,∞}` locally.
    Smooth,
    /// `|D²W(x)| ≲ |x|^{-(1+α)}` near the origin.
    Singular { alpha: f64 },
}

impl Classification {
    pub fn is_singular(&self) -> bool {
        matches!(self, Classification::Singular { .. })
    }
}

/// Power-law term `sign * r^e / e` of a radial profile; `coef` absorbs sign and scale.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    exponent: f64,
    coef: f64,
}

impl Term {
    fn value(&self, r: f64) -> f64 {
        self.coef * r.powf(self.exponent) / self.exponent
    }

    /// `(f'(r), f''(r))` for this term, with `r > 0`.
    #[inline]
    fn derivs(&self, r: f64) -> (f64, f64) {
        let e = self.exponent;
        let rm2 = pow_fast(r, e - 2.0);
        (self.coef * rm2 * r, self.coef * (e - 1.0) * rm2)
    }
}

#[inline]
fn pow_fast(r: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        r
    } else if p == 2.0 {
        r * r
    } else if p == 0.5 {
        r.sqrt()
    } else if p == -0.5 {
        1.0 / r.sqrt()
    } else {
        r.powf(p)
    }
}

/// An even interaction potential with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    dim: usize,
    terms: Vec<Term>,
    classification: Classification,
    singular_constant: f64,
}

impl Potential {
    /// Builds and validates a potential for dimension `dim`.
    pub fn new(kind: PotentialKind, dim: usize) -> Result<Self> {
        Self::with_reference_radius(kind, dim, DEFAULT_REFERENCE_RADIUS)
    }

    /// As [`Potential::new`], computing the singular constant on `|x| <= radius`.
    pub fn with_reference_radius(kind: PotentialKind, dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let terms = match kind {
            PotentialKind::Quadratic => vec![Term { exponent: 2.0, coef: 2.0 }],
            PotentialKind::PowerAttractive { a } => {
                check_exponent(a, "a")?;
                vec![Term { exponent: a, coef: 1.0 }]
            }
            PotentialKind::PowerRepAttr { a, b } => {
                check_exponent(a, "a")?;
                check_exponent(b, "b")?;
                if !(1.0 < b && b < a) {
                    return Err(Error::UnsupportedPotential(format!(
                        "attractive-repulsive potential needs 1 < b < a, got a={a}, b={b}"
                    )));
                }
                vec![Term { exponent: a, coef: 1.0 }, Term { exponent: b, coef: -1.0 }]
            }
        };
        let classification = classify_terms(&terms, dim)?;
        let singular_constant = match classification {
            Classification::Smooth => 0.0,
            Classification::Singular { alpha } => {
                let r = radius.max(1.0);
                let hess: f64 = terms
                    .iter()
                    .map(|t| (t.coef * (t.exponent - 1.0)).abs() * r.powf(t.exponent - 1.0 + alpha))
                    .sum();
                let grad: f64 = terms.iter().map(|t| t.coef.abs()).sum();
                hess.max(grad)
            }
        };
        Ok(Potential { kind, dim, terms, classification, singular_constant })
    }

    pub fn quadratic(dim: usize) -> Self {
        Self::new(PotentialKind::Quadratic, dim).expect("quadratic potential is always valid")
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    /// `L̃` in `|D²W(x)| <= L̃ |x|^{-(1+α)}`, valid on the reference radius.
    pub fn singular_constant(&self) -> f64 {
        self.singular_constant
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, PotentialKind::Quadratic)
    }

    fn min_exponent(&self) -> f64 {
        self.terms.iter().map(|t| t.exponent).fold(f64::INFINITY, f64::min)
    }

    /// Radial profile `f(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.value(r)).sum()
    }

    pub fn eval<const D: usize>(&self, x: &SVector<f64, D>) -> f64 {
        self.profile(x.norm())
    }

    /// `(f'(r), f''(r))`; returns `None` at `r = 0` when a derivative is unbounded.
    #[inline]
    pub fn radial_derivs(&self, r: f64) -> Option<(f64, f64)> {
        if r > 0.0 {
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            for t in &self.terms {
                let (a, b) = t.derivs(r);
                f1 += a;
                f2 += b;
            }
            Some((f1, f2))
        } else {
            None
        }
    }

    /// `∇W(x)`. Zero at the origin by oddness unless the gradient itself is unbounded there.
    pub fn grad<const D: usize>(&self, x: &SVector<f64, D>) -> Result<SVector<f64, D>> {
        let r = x.norm();
        match self.radial_derivs(r) {
            Some((f1, _)) => Ok(x * (f1 / r)),
            None if self.min_exponent() >= 1.0 => Ok(SVector::zeros()),
            None => Err(Error::Singularity("gradient is unbounded at the origin".into())),
        }
    }

    /// `D²W(x)`.
    pub fn hess<const D: usize>(&self, x: &SVector<f64, D>) -> Result<SMatrix<f64, D, D>> {
        let r = x.norm();
        match self.radial_derivs(r) {
            Some((f1, f2)) => Ok(radial_hessian(x, r, f1, f2)),
            None => self.hess_at_origin().map(|v| SMatrix::identity() * v),
        }
    }

    /// `Δ_x W(x)`.
    pub fn lap<const D: usize>(&self, x: &SVector<f64, D>) -> Result<f64> {
        let r = x.norm();
        match self.radial_derivs(r) {
            Some((f1, f2)) => Ok(f2 + (D as f64 - 1.0) * f1 / r),
            None => self.hess_at_origin().map(|v| v * D as f64),
        }
    }

    fn hess_at_origin(&self) -> Result<f64> {
        if self.min_exponent() < 2.0 {
            return Err(Error::Singularity("second derivative is unbounded at the origin".into()));
        }
        // only exponent-2 terms survive at r = 0
        Ok(self
            .terms
            .iter()
            .filter(|t| t.exponent == 2.0)
            .map(|t| t.coef)
            .sum())
    }
}

#[inline]
pub(crate) fn radial_hessian<const D: usize>(
    x: &SVector<f64, D>,
    r: f64,
    f1: f64,
    f2: f64,
) -> SMatrix<f64, D, D> {
    if D == 1 {
        return SMatrix::from_element(f2);
    }
    let u = x / r;
    let uu = u * u.transpose();
    uu * f2 + (SMatrix::identity() - uu) * (f1 / r)
}

fn check_exponent(e: f64, name: &str) -> Result<()> {
    if !e.is_finite() || e <= 0.0 {
        return Err(Error::UnsupportedPotential(format!("exponent {name}={e} must be positive")));
    }
    Ok(())
}

fn classify_terms(terms: &[Term], dim: usize) -> Result<Classification> {
    if terms.iter().all(|t| t.exponent >= 2.0) {
        return Ok(Classification::Smooth);
    }
    let alpha = terms.iter().map(|t| 1.0 - t.exponent).fold(f64::NEG_INFINITY, f64::max);
    if alpha < -1.0 || alpha >= dim as f64 - 1.0 {
        return Err(Error::UnsupportedPotential(format!(
            "singularity exponent alpha={alpha} outside [-1, {})",
            dim as f64 - 1.0
        )));
    }
    Ok(Classification::Singular { alpha })
}
