//! Initial densities, normalized to unit mass.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;

const NORMALIZATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialDensityId {
    /// Two Gaussians restricted to `[-1, 1]` (asymmetric).
    Rho1Gaussians,
    /// Indicator of `[-1, 1]` (discontinuous, symmetric).
    Rho2Indicator,
    /// `exp(1/(x²-1))` on `(-1, 1)` (smooth, compactly supported).
    Rho3Bump,
    Custom,
}

impl std::str::FromStr for InitialDensityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho1_gaussians" | "rho1" => Ok(InitialDensityId::Rho1Gaussians),
            "rho2_indicator" | "rho2" => Ok(InitialDensityId::Rho2Indicator),
            "rho3_bump" | "rho3" => Ok(InitialDensityId::Rho3Bump),
            other => Err(Error::Config(format!("unknown initial density `{other}`"))),
        }
    }
}

impl fmt::Display for InitialDensityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InitialDensityId::Rho1Gaussians => "rho1_gaussians",
            InitialDensityId::Rho2Indicator => "rho2_indicator",
            InitialDensityId::Rho3Bump => "rho3_bump",
            InitialDensityId::Custom => "custom",
        };
        f.write_str(s)
    }
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-dimensional unit-mass density with compact support `[lo, hi]`.
///
/// In dimension `d` the same profile is used as a tensor product over the coordinates.
#[derive(Clone)]
pub struct InitialDensity {
    id: InitialDensityId,
    raw: Profile,
    support: (f64, f64),
    /// Points where the profile may be non-smooth.
    breaks: Vec<f64>,
    normalization: f64,
}

impl fmt::Debug for InitialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDensity")
            .field("id", &self.id)
            .field("support", &self.support)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl InitialDensity {
    pub fn from_id(id: InitialDensityId) -> Result<Self> {
        let raw: Profile = match id {
            InitialDensityId::Rho1Gaussians => {
                Arc::new(|x: f64| (-30.0 * (x - 0.5).powi(2)).exp() + 2.0 * (-50.0 * (x + 0.3).powi(2)).exp())
            }
            InitialDensityId::Rho2Indicator => Arc::new(|_| 1.0),
            InitialDensityId::Rho3Bump => Arc::new(|x: f64| {
                let s = x * x - 1.0;
                if s < 0.0 {
                    (1.0 / s).exp()
                } else {
                    0.0
                }
            }),
            InitialDensityId::Custom => {
                return Err(Error::InvalidArgument("use InitialDensity::custom for sampled data".into()))
            }
        };
        Self::build(id, raw, (-1.0, 1.0), Vec::new())
    }

    /// A user profile on `[lo, hi]`, normalized to unit mass. Must be non-negative.
    pub fn custom(profile: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64, breaks: Vec<f64>) -> Result<Self> {
        Self::build(InitialDensityId::Custom, Arc::new(profile), (lo, hi), breaks)
    }

    /// Piecewise-linear interpolant of samples `(x_i, v_i)` with increasing `x_i`.
    pub fn sampled(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::InvalidArgument("sampled density needs matching samples, at least 2".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("sample abscissae must increase".into()));
        }
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        let breaks = xs[1..xs.len() - 1].to_vec();
        let f = move |x: f64| {
            let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            values[i - 1] * (1.0 - t) + values[i] * t
        };
        Self::custom(f, lo, hi, breaks)
    }

    fn build(id: InitialDensityId, raw: Profile, support: (f64, f64), breaks: Vec<f64>) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo < hi) {
            return Err(Error::InvalidArgument("empty support".into()));
        }
        let mass = integrate_with_breaks(|x| raw(x), lo, hi, &breaks, NORMALIZATION_TOL);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidArgument("initial density must have positive finite mass".into()));
        }
        Ok(InitialDensity { id, raw, support, breaks, normalization: mass })
    }

    pub fn id(&self) -> InitialDensityId {
        self.id
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Mass of the raw profile; the density is the raw profile divided by this.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `ρ⁰(x)`, zero outside the closed support.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.raw)(x) / self.normalization
        }
    }

    /// Tensor-product value in any dimension.
    pub fn eval_nd(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.eval(xi)).product()
    }

    /// `∫_a^b g(x) ρ⁰(x) dx`, splitting at the support ends and the given extra breakpoints.
    pub fn integrate_against(&self, g: impl Fn(f64) -> f64, a: f64, b: f64, extra_breaks: &[f64], tol: f64) -> f64 {
        let lo = a.max(self.support.0);
        let hi = b.min(self.support.1);
        if !(lo < hi) {
            return 0.0;
        }
        let mut breaks: Vec<f64> = self.breaks.clone();
        breaks.extend_from_slice(extra_breaks);
        integrate_with_breaks(|x| g(x) * (self.raw)(x), lo, hi, &breaks, tol * self.normalization)
            / self.normalization
    }

    /// `∫ x ρ⁰(x) dx`.
    pub fn first_moment(&self) -> f64 {
        let (lo, hi) = self.support;
        self.integrate_against(|x| x, lo, hi, &[], 1e-14)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass() {
        for id in [InitialDensityId::Rho1Gaussians, InitialDensityId::Rho2Indicator, InitialDensityId::Rho3Bump] {
            let rho = InitialDensity::from_id(id).unwrap();
            let m = rho.integrate_against(|_| 1.0, -2.0, 2.0, &[], 1e-14);
            assert!((m - 1.0).abs() < 1e-12, "{id}: {m}");
        }
    }

    #[test]
    fn indicator_is_one_half() {
        let rho = InitialDensity::from_id(InitialDensityId::Rho2Indicator).unwrap();
        assert!((rho.eval(0.3) - 0.5).abs() < 1e-14);
        assert_eq!(rho.eval(1.2), 0.0);
        assert!(rho.first_moment().abs() < 1e-14);
    }

    #[test]
    fn sampled_density() {
        let rho = InitialDensity::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((rho.eval(1.0) - 1.0).abs() < 1e-12);
        assert!((rho.eval(0.5) - 0.5).abs() < 1e-12);
        assert!((rho.first_moment() - 1.0).abs() < 1e-12);
        assert!(InitialDensity::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn parse_ids() {
        assert_eq!("rho3_bump".parse::<InitialDensityId>().unwrap(), InitialDensityId::Rho3Bump);
        assert!("rho9".parse::<InitialDensityId>().is_err());
    }
}
