//! Error norms, the bounded-Lipschitz distance, rate fitting and flow diagnostics.

use crate::error::{Error, Result};
use crate::ltp::ParticleState;
use crate::oracle::QuadraticOracle;
use crate::potential::Potential;

/// Uniform grid `lo = x_0 < ... < x_{M-1} = hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 4096;

impl EvaluationGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo < hi) || points < 2 {
            return Err(Error::InvalidArgument(format!("bad grid [{lo}, {hi}] with {points} points")));
        }
        Ok(EvaluationGrid { lo, hi, points })
    }

    /// Smallest grid covering all `intervals` with `margin` on both sides.
    pub fn covering(intervals: &[(f64, f64)], margin: f64, points: usize) -> Result<Self> {
        let (lo, hi) = intervals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(l, h)| (a.min(l), b.max(h)));
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument("no finite interval to cover".into()));
        }
        Self::new(lo - margin, hi + margin, points)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points).map(|i| self.lo + i as f64 * dx).collect()
    }

    /// Composite Simpson weights; with an odd number of intervals the last three use the
    /// 3/8 rule.
    pub fn simpson_weights(&self) -> Vec<f64> {
        let n = self.points - 1;
        let dx = self.spacing();
        let mut w = vec![0.0; self.points];
        if n == 1 {
            w[0] = 0.5 * dx;
            w[1] = 0.5 * dx;
            return w;
        }
        let simpson_end = if n % 2 == 0 { n } else { n - 3 };
        for i in (0..simpson_end).step_by(2) {
            w[i] += dx / 3.0;
            w[i + 1] += 4.0 * dx / 3.0;
            w[i + 2] += dx / 3.0;
        }
        if simpson_end < n {
            let s = simpson_end;
            for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                w[s + j] += 3.0 * dx / 8.0 * c;
            }
        }
        w
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.simpson_weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Point masses `δ·f(x_i)` (trapezoidal at the ends).
    pub fn cell_masses(&self, values: &[f64]) -> Vec<f64> {
        let dx = self.spacing();
        let last = values.len().saturating_sub(1);
        values
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 || i == last { 0.5 * dx * v } else { dx * v })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L(f64),
    Inf,
}

/// `‖f - g‖_p` for two functions sampled on `grid`.
pub fn lp_error(f: &[f64], g: &[f64], grid: &EvaluationGrid, p: Norm) -> Result<f64> {
    if f.len() != g.len() || f.len() != grid.points {
        return Err(Error::InvalidArgument(format!(
            "mismatched samples: {} vs {} on a {}-point grid",
            f.len(),
            g.len(),
            grid.points
        )));
    }
    let diff = f.iter().zip(g).map(|(a, b)| (a - b).abs());
    match p {
        Norm::Inf => Ok(diff.fold(0.0, f64::max)),
        Norm::L(p) if p >= 1.0 => {
            let powered: Vec<f64> = diff.map(|d| d.powf(p)).collect();
            Ok(grid.integrate(&powered).max(0.0).powf(1.0 / p))
        }
        Norm::L(p) => Err(Error::InvalidArgument(format!("L^p norm needs p >= 1, got {p}"))),
    }
}

/// Bounded-Lipschitz distance between two point-mass vectors on a uniform grid:
/// `max Σ ψ_i (μ_i - ν_i)` over `|ψ_i| <= 1`, `|ψ_{i+1} - ψ_i| <= spacing`.
///
/// Solved exactly by dynamic programming along the chain: the best partial value as a
/// function of the last `ψ` is concave and piecewise linear, and each step applies a
/// window maximum of half-width `spacing` followed by adding a linear term.
pub fn dbl_distance(mu: &[f64], nu: &[f64], spacing: f64) -> Result<f64> {
    if mu.is_empty() || mu.len() != nu.len() {
        return Err(Error::InvalidArgument("d_BL needs two non-empty aligned mass vectors".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument("grid spacing must be positive".into()));
    }
    let m0 = mu[0] - nu[0];
    let mut knots: Vec<(f64, f64)> = vec![(-1.0, -m0), (1.0, m0)];
    for (a, b) in mu.iter().zip(nu).skip(1) {
        knots = window_max(&knots, spacing);
        let m = a - b;
        for k in knots.iter_mut() {
            k.1 += m * k.0;
        }
    }
    Ok(knots.iter().map(|k| k.1).fold(f64::NEG_INFINITY, f64::max).max(0.0))
}

/// `W(ψ) = max_{|s| <= δ, ψ+s ∈ [-1,1]} V(ψ + s)` for concave piecewise-linear `V` on `[-1, 1]`.
fn window_max(knots: &[(f64, f64)], delta: f64) -> Vec<(f64, f64)> {
    let (imax, _) = knots
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, k)| if k.1 > bv { (i, k.1) } else { (bi, bv) });
    let mut last = imax;
    while last + 1 < knots.len() && knots[last + 1].1 == knots[imax].1 {
        last += 1;
    }
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(knots.len() + 2);
    raw.extend(knots[..=imax].iter().map(|&(x, y)| (x - delta, y)));
    raw.extend(knots[last..].iter().map(|&(x, y)| (x + delta, y)));
    clip(&raw, -1.0, 1.0)
}

fn clip(knots: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let interp = |x: f64| -> f64 {
        let i = knots.partition_point(|k| k.0 <= x).clamp(1, knots.len() - 1);
        let (a, b) = (knots[i - 1], knots[i]);
        if b.0 == a.0 {
            return b.1.max(a.1);
        }
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    };
    let mut out = Vec::with_capacity(knots.len() + 2);
    out.push((lo, interp(lo)));
    out.extend(knots.iter().copied().filter(|k| k.0 > lo && k.0 < hi));
    out.push((hi, interp(hi)));
    out
}

/// Least-squares line through `(ln h, ln error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least 3 pairs, got {}", pairs.len())));
    }
    if pairs.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0) || !h.is_finite() || !e.is_finite()) {
        return Err(Error::InvalidArgument("rate fit needs positive finite values".into()));
    }
    let n = pairs.len() as f64;
    let pts: Vec<(f64, f64)> = pairs.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs distinct abscissae".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit { slope, intercept, residual })
}

/// Local, accumulated and Jacobian flow errors along a quadratic-potential run.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDiagnostics {
    /// `e_F^n = sup_k sup_{S_k^n} |F^{t_n,t_{n+1}} - F_{h,k}^n|`, one per consecutive pair.
    pub local_flow: Vec<f64>,
    /// `e_j^n = sup_k sup_{S_k^n} |1/j^{t_n,t_{n+1}} - 1/j_k^n|`.
    pub jacobian: Vec<f64>,
    /// `ē_F^n = sup_k sup_{S_k^0} |F^{0,t_n} - F̄_{h,k}^n|`, one per state.
    pub accumulated_flow: Vec<f64>,
}

/// Sampling points per particle support for the suprema.
pub const FLOW_SAMPLES: usize = 9;

/// Flow diagnostics for a sequence of consecutive LTP states under `W = x²`.
pub fn flow_diagnostics(history: &[ParticleState<1>], potential: &Potential, oracle: &QuadraticOracle) -> Result<FlowDiagnostics> {
    if !potential.is_quadratic() {
        return Err(Error::Unsupported("flow diagnostics need the closed-form quadratic flow".into()));
    }
    if history.is_empty() {
        return Err(Error::InvalidArgument("empty history".into()));
    }
    let r = history[0].shape.support_radius();
    let h = history[0].h;
    let zs: Vec<f64> = (0..FLOW_SAMPLES).map(|i| -r + 2.0 * r * i as f64 / (FLOW_SAMPLES - 1) as f64).collect();

    let mut local_flow = Vec::new();
    let mut jacobian = Vec::new();
    for pair in history.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        if s0.len() != s1.len() || s1.step != s0.step + 1 {
            return Err(Error::InvalidArgument("history must hold consecutive steps of one run".into()));
        }
        let (ta, tb) = (s0.time, s1.time);
        let (_, _, j_exact) = oracle.flow(ta, tb, 0.0);
        let mut ef = 0.0f64;
        let mut ej = 0.0f64;
        for (p0, p1) in s0.particles.iter().zip(&s1.particles) {
            let d0 = p0.deformation[(0, 0)];
            let jac = d0 / p1.deformation[(0, 0)];
            for &z in &zs {
                let x = p0.position[0] + h / d0 * z;
                let (exact, _, _) = oracle.flow(ta, tb, x);
                let approx = p1.position[0] + jac * (x - p0.position[0]);
                ef = ef.max((exact - approx).abs());
            }
            ej = ej.max((1.0 / j_exact - 1.0 / p1.last_jacobian_det).abs());
        }
        local_flow.push(ef);
        jacobian.push(ej);
    }

    let first = &history[0];
    let accumulated_flow = history
        .iter()
        .map(|s| {
            s.particles
                .iter()
                .map(|p| {
                    let jbar = 1.0 / p.deformation[(0, 0)];
                    let x0 = p.initial_position(h)[0];
                    zs.iter()
                        .map(|&z| {
                            // S_k^0 is centred on the grid point kh
                            let x = x0 + h * z;
                            let (exact, _, _) = oracle.flow(first.time, s.time, x);
                            let approx = p.position[0] + jbar * h * z;
                            (exact - approx).abs()
                        })
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(FlowDiagnostics { local_flow, jacobian, accumulated_flow })
}
