//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

/// Composite Simpson on `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let dx = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * dx);
    }
    s * dx / 3.0
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Unnormalized profiles on `[-1, 1]`.
pub fn raw_profile(name: &str, x: f64) -> f64 {
    if !(-1.0..=1.0).contains(&x) {
        return 0.0;
    }
    match name {
        "rho1" => (-30.0 * (x - 0.5) * (x - 0.5)).exp() + 2.0 * (-50.0 * (x + 0.3) * (x + 0.3)).exp(),
        "rho2" => 1.0,
        "rho3" => {
            if x.abs() < 1.0 {
                (1.0 / (x * x - 1.0)).exp()
            } else {
                0.0
            }
        }
        _ => panic!("unknown profile {name}"),
    }
}

/// Normalized initial density, computed without the library.
pub struct Reference {
    pub name: &'static str,
    pub mass: f64,
    pub lambda: f64,
}

impl Reference {
    pub fn new(name: &'static str) -> Self {
        let n = 400_000;
        let mass = simpson(|x| raw_profile(name, x), -1.0, 1.0, n);
        let lambda = simpson(|x| x * raw_profile(name, x), -1.0, 1.0, n) / mass;
        Reference { name, mass, lambda }
    }

    pub fn rho0(&self, x: f64) -> f64 {
        raw_profile(self.name, x) / self.mass
    }

    /// Exact solution for `W = x²`: contraction toward `λ` at rate `e^{-2t}`.
    pub fn exact_quadratic(&self, t: f64, x: f64) -> f64 {
        let g = (2.0 * t).exp();
        self.rho0((x - self.lambda) * g + self.lambda) * g
    }

    pub fn support_at(&self, t: f64) -> (f64, f64) {
        let c = (-2.0 * t).exp();
        (self.lambda + (-1.0 - self.lambda) * c, self.lambda + (1.0 - self.lambda) * c)
    }
}

/// `(L¹, L∞)` distance between two functions on `[a, b]`, sampled at `n + 1` points.
pub fn l1_linf(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let l1 = simpson(|x| (f(x) - g(x)).abs(), a, b, n);
    let dx = (b - a) / n as f64;
    let linf = (0..=n).map(|i| a + i as f64 * dx).map(|x| (f(x) - g(x)).abs()).fold(0.0, f64::max);
    (l1, linf)
}

/// All vertices of `{|ψ_i| <= 1, |ψ_{i+1} - ψ_i| <= δ}` in dimension `n`.
///
/// A vertex has `n` independent active constraints. On a chain these split the nodes into
/// runs joined by active differences `±δ`, each run pinned at exactly one node to `±1`.
/// Enumerating every such pattern and keeping the feasible points gives all vertices.
pub fn chain_polytope_vertices(n: usize, delta: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    // bit i of `cuts` set: no active difference between nodes i and i+1
    for cuts in 0u32..(1 << (n - 1)) {
        let mut runs = Vec::new();
        let mut start = 0;
        for i in 0..n {
            if i == n - 1 || cuts & (1 << i) != 0 {
                runs.push((start, i + 1));
                start = i + 1;
            }
        }
        let mut partial: Vec<Vec<f64>> = vec![Vec::new()];
        for &(lo, hi) in &runs {
            let len = hi - lo;
            let mut run_values = Vec::new();
            for pin in 0..len {
                for sign in [-1.0, 1.0] {
                    for steps in 0u32..(1 << (len - 1)) {
                        let mut v = vec![0.0; len];
                        v[pin] = sign;
                        for j in pin + 1..len {
                            let s = if steps & (1 << (j - 1)) != 0 { delta } else { -delta };
                            v[j] = v[j - 1] + s;
                        }
                        for j in (0..pin).rev() {
                            let s = if steps & (1 << j) != 0 { delta } else { -delta };
                            v[j] = v[j + 1] - s;
                        }
                        if v.iter().all(|x| x.abs() <= 1.0 + 1e-12) {
                            run_values.push(v);
                        }
                    }
                }
            }
            partial = partial
                .iter()
                .flat_map(|p| {
                    run_values.iter().map(move |r| {
                        let mut q = p.clone();
                        q.extend_from_slice(r);
                        q
                    })
                })
                .collect();
        }
        for v in partial {
            let feasible = v.windows(2).all(|w| (w[1] - w[0]).abs() <= delta + 1e-12);
            let key: Vec<i64> = v.iter().map(|x| (x * 1e9).round() as i64).collect();
            if feasible && seen.insert(key) {
                out.push(v);
            }
        }
    }
    out
}

/// `max c·ψ` over the chain polytope, by exhaustive search of its vertices.
pub fn lp_by_vertices(c: &[f64], vertices: &[Vec<f64>]) -> f64 {
    vertices
        .iter()
        .map(|v| v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Strict local maxima above `frac` of the global maximum.
pub fn dominant_maxima(d: &[f64], frac: f64) -> usize {
    let m = d.iter().copied().fold(0.0, f64::max);
    (1..d.len() - 1).filter(|&i| d[i] > frac * m && d[i] > d[i - 1] && d[i] >= d[i + 1]).count()
}
