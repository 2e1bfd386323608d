//! Reference particle shapes and the biorthogonal integration kernel.
//!
//! Shapes are stored as explicit polynomial pieces with rational coefficients so that
//! quadrature set-up and mass checks can integrate them exactly piece by piece. In
//! dimension `d` the shape is the tensor product of the one-dimensional profile.

use crate::error::{Error, Result};

/// Spline family of the reference shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeFamily {
    /// Piecewise affine hat function, support `[-1, 1]`.
    B1,
    /// Cubic B-spline, support `[-2, 2]`.
    B3,
}

impl std::str::FromStr for ShapeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b1" => Ok(ShapeFamily::B1),
            "b3" => Ok(ShapeFamily::B3),
            other => Err(Error::Config(format!("unknown shape family `{other}`"))),
        }
    }
}

/// One polynomial segment `sum_m (num[m] / den) z^m` on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    num: Vec<i64>,
    den: i64,
    coeffs: Vec<f64>,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, num: Vec<i64>, den: i64) -> Self {
        assert!(den != 0 && lo < hi);
        let coeffs = num.iter().map(|&c| c as f64 / den as f64).collect();
        Piece { lo, hi, num, den, coeffs }
    }

    /// Monomial coefficients in increasing degree.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Rational coefficients as `(numerators, denominator)`.
    pub fn rational(&self) -> (&[i64], i64) {
        (&self.num, self.den)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Evaluates the polynomial (ignores the interval bounds).
    #[inline]
    pub fn poly(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Exact integral of the polynomial over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        poly_integral(&self.coeffs, a, b)
    }
}

/// Exact integral of `sum_m c[m] z^m` over `[a, b]` through the antiderivative.
pub fn poly_integral(coeffs: &[f64], a: f64, b: f64) -> f64 {
    let anti = |z: f64| {
        coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (m, &c)| acc * z + c / (m as f64 + 1.0))
            * z
    };
    anti(b) - anti(a)
}

/// Product of two coefficient vectors.
pub fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficients of `p(z - s)`.
pub fn poly_shift(p: &[f64], s: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    // expand each (z - s)^m binomially
    for (m, &c) in p.iter().enumerate() {
        let mut binom = 1.0;
        for i in 0..=m {
            out[i] += c * binom * (-s).powi((m - i) as i32);
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
    }
    out
}

/// Reference shape `phi`: compactly supported, non-negative, unit mass, and a partition
/// of unity on the integer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunction {
    family: ShapeFamily,
    pieces: Vec<Piece>,
}

impl ShapeFunction {
    pub fn new(family: ShapeFamily) -> Self {
        let pieces = match family {
            ShapeFamily::B1 => vec![
                Piece::new(-1.0, 0.0, vec![1, 1], 1),
                Piece::new(0.0, 1.0, vec![1, -1], 1),
            ],
            ShapeFamily::B3 => vec![
                // (2 + z)^3 / 6
                Piece::new(-2.0, -1.0, vec![8, 12, 6, 1], 6),
                // (4 - 6 z^2 - 3 z^3) / 6
                Piece::new(-1.0, 0.0, vec![4, 0, -6, -3], 6),
                // (4 - 6 z^2 + 3 z^3) / 6
                Piece::new(0.0, 1.0, vec![4, 0, -6, 3], 6),
                // (2 - z)^3 / 6
                Piece::new(1.0, 2.0, vec![8, -12, 6, -1], 6),
            ],
        };
        ShapeFunction { family, pieces }
    }

    pub fn b1() -> Self {
        Self::new(ShapeFamily::B1)
    }

    pub fn b3() -> Self {
        Self::new(ShapeFamily::B3)
    }

    pub fn family(&self) -> ShapeFamily {
        self.family
    }

    /// `R_o`: the profile vanishes for `|z| >= R_o`.
    pub fn support_radius(&self) -> f64 {
        match self.family {
            ShapeFamily::B1 => 1.0,
            ShapeFamily::B3 => 2.0,
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dual_available(&self) -> bool {
        self.family == ShapeFamily::B1
    }

    /// One-dimensional profile value.
    #[inline]
    pub fn eval_1d(&self, z: f64) -> f64 {
        let a = z.abs();
        match self.family {
            ShapeFamily::B1 => (1.0 - a).max(0.0),
            ShapeFamily::B3 => {
                if a >= 2.0 {
                    0.0
                } else if a >= 1.0 {
                    let t = 2.0 - a;
                    t * t * t / 6.0
                } else {
                    (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
                }
            }
        }
    }

    /// Tensor-product value at a point of any dimension.
    pub fn eval(&self, z: &[f64]) -> f64 {
        z.iter().map(|&zi| self.eval_1d(zi)).product()
    }

    /// The biorthogonal integration kernel. Only the hat function has one.
    pub fn dual(&self) -> Result<DualKernel> {
        match self.family {
            ShapeFamily::B1 => Ok(DualKernel::for_b1()),
            ShapeFamily::B3 => Err(Error::Unsupported(
                "no compactly supported dual kernel for the B3 spline; use cell-average weights"
                    .into(),
            )),
        }
    }
}

/// Piecewise-constant kernel biorthogonal to the integer translates of the hat function.
#[derive(Debug, Clone, PartialEq)]
pub struct DualKernel {
    pieces: Vec<Piece>,
}

impl DualKernel {
    fn for_b1() -> Self {
        DualKernel {
            pieces: vec![
                Piece::new(-1.0, -0.5, vec![-1], 2),
                Piece::new(-0.5, 0.5, vec![3], 2),
                Piece::new(0.5, 1.0, vec![-1], 2),
            ],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn support_radius(&self) -> f64 {
        1.0
    }

    /// `3/2` on `[-1/2, 1/2]`, `-1/2` on the outer halves of `[-1, 1]`, zero outside.
    #[inline]
    pub fn eval_1d(&self, z: f64) -> f64 {
        let a = z.abs();
        if a <= 0.5 {
            1.5
        } else if a <= 1.0 {
            -0.5
        } else {
            0.0
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        z.iter().map(|&zi| self.eval_1d(zi)).product()
    }
}
