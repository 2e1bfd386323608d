//! Flat `key = value` scenario configuration.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are rejected so typos surface
//! early. Every key can be overridden from the command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::density::{InitialDensity, InitialDensityId};
use crate::error::{Error, Result};
use crate::fields::QuadratureRule;
use crate::ltp::{JacobianMode, StepParams, WeightMode};
use crate::metrics::DEFAULT_GRID_POINTS;
use crate::potential::{Potential, PotentialKind};
use crate::shape::{ShapeFamily, ShapeFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialFamily {
    Quadratic,
    Power,
    RepAttr,
}

impl FromStr for PotentialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(PotentialFamily::Quadratic),
            "power" => Ok(PotentialFamily::Power),
            "repattr" | "rep_attr" => Ok(PotentialFamily::RepAttr),
            other => Err(Error::Config(format!("unknown potential kind `{other}`"))),
        }
    }
}

/// How the time step follows `h` in convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtScaling {
    Fixed,
    /// Largest `Δt <= dt.h2_factor·h²` that divides `T`.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub potential: PotentialFamily,
    pub a: f64,
    pub b: f64,
    pub init: InitialDensityId,
    pub h: f64,
    pub dt: f64,
    pub t_final: f64,
    pub weights: WeightMode,
    pub jacobian: JacobianMode,
    pub shape: ShapeFamily,
    pub quadrature: QuadratureRule,
    pub sp_epsilon: Vec<f64>,
    /// Record every this many steps; `None` gives ten evenly spaced snapshots.
    pub record_every: Option<usize>,
    pub grid_points: usize,
    pub domain_radius: f64,
    pub output_dir: PathBuf,
    pub dt_scaling: DtScaling,
    pub dt_h2_factor: f64,
    pub reference_refinement: usize,
    /// Exponent of the extra `L^p` error column.
    pub lp: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            potential: PotentialFamily::Quadratic,
            a: 2.0,
            b: 1.5,
            init: InitialDensityId::Rho1Gaussians,
            h: 0.01,
            dt: 1e-4,
            t_final: 0.5,
            weights: WeightMode::CellAverage,
            jacobian: JacobianMode::Exponential,
            shape: ShapeFamily::B3,
            quadrature: QuadratureRule::default(),
            sp_epsilon: vec![0.005, 0.01, 0.02, 0.05],
            record_every: None,
            grid_points: DEFAULT_GRID_POINTS,
            domain_radius: 4.0,
            output_dir: PathBuf::from("out"),
            dt_scaling: DtScaling::Fixed,
            dt_h2_factor: 0.25,
            reference_refinement: 2,
            lp: 2.0,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn enumerated<T: FromStr<Err = Error>>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|e: Error| Error::Config(format!("`{key}`: {e}")))
}

/// Parses `0.04,0.02,0.01`.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
}

impl SimulationConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimulationConfig::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if seen.insert(key.to_string(), lineno + 1).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "potential.kind" => self.potential = enumerated(key, value)?,
            "potential.a" => self.a = num(key, value)?,
            "potential.b" => self.b = num(key, value)?,
            "init" => self.init = enumerated(key, value)?,
            "h" => self.h = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "T" => self.t_final = num(key, value)?,
            "weights" => self.weights = enumerated(key, value)?,
            "jacobian" => self.jacobian = enumerated(key, value)?,
            "shape" => self.shape = enumerated(key, value)?,
            "quadrature.points_per_piece" => self.quadrature.points_per_piece = num(key, value)?,
            "quadrature.grading_levels" => self.quadrature.singular_grading_levels = num(key, value)?,
            "quadrature.grading_ratio" => self.quadrature.grading_ratio = num(key, value)?,
            "sp.epsilon" => self.sp_epsilon = parse_list(key, value)?,
            "output.every" => {
                self.record_every = if value == "auto" { None } else { Some(num(key, value)?) };
            }
            "output.dir" => self.output_dir = PathBuf::from(value),
            "grid.points" => self.grid_points = num(key, value)?,
            "domain.radius" => self.domain_radius = num(key, value)?,
            "dt.scaling" => {
                self.dt_scaling = match value {
                    "fixed" => DtScaling::Fixed,
                    "h2" => DtScaling::Quadratic,
                    other => return Err(Error::Config(format!("`{key}`: unknown scaling `{other}`"))),
                }
            }
            "dt.h2_factor" => self.dt_h2_factor = num(key, value)?,
            "reference.refinement" => self.reference_refinement = num(key, value)?,
            "lp" => self.lp = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// `N = T/Δt`, which must be a positive integer.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_final, self.dt)
    }

    pub fn validate(&self) -> Result<usize> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Config(format!("h must be positive, got {}", self.h)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let n = self.steps()?;
        self.quadrature.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.grid_points < 3 {
            return Err(Error::Config("grid.points must be at least 3".into()));
        }
        if !(self.domain_radius > 0.0) {
            return Err(Error::Config("domain.radius must be positive".into()));
        }
        if self.record_every == Some(0) {
            return Err(Error::Config("output.every must be positive".into()));
        }
        if self.reference_refinement == 0 {
            return Err(Error::Config("reference.refinement must be at least 1".into()));
        }
        if !(self.lp >= 1.0) {
            return Err(Error::Config("lp must be at least 1".into()));
        }
        if self.sp_epsilon.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("sp.epsilon entries must be positive".into()));
        }
        if !(self.dt_h2_factor > 0.0) {
            return Err(Error::Config("dt.h2_factor must be positive".into()));
        }
        if self.weights == WeightMode::DualKernel && !self.shape_function().dual_available() {
            return Err(Error::Config("dual_kernel weights are only available for the b1 shape".into()));
        }
        self.potential_for(1).map_err(|e| Error::Config(e.to_string()))?;
        Ok(n)
    }

    pub fn potential_kind(&self) -> PotentialKind {
        match self.potential {
            PotentialFamily::Quadratic => PotentialKind::Quadratic,
            PotentialFamily::Power => PotentialKind::PowerAttractive { a: self.a },
            PotentialFamily::RepAttr => PotentialKind::PowerRepAttr { a: self.a, b: self.b },
        }
    }

    pub fn potential_for(&self, dim: usize) -> Result<Potential> {
        Potential::new(self.potential_kind(), dim)
    }

    pub fn initial_density(&self) -> Result<InitialDensity> {
        InitialDensity::from_id(self.init)
    }

    pub fn shape_function(&self) -> ShapeFunction {
        ShapeFunction::new(self.shape)
    }

    pub fn step_params(&self) -> StepParams {
        StepParams { dt: self.dt, jacobian: self.jacobian, rule: self.quadrature, domain_radius: self.domain_radius }
    }

    /// Recording interval in steps.
    pub fn record_interval(&self) -> Result<usize> {
        let n = self.steps()?;
        Ok(self.record_every.unwrap_or((n / 10).max(1)))
    }

    /// The same scenario at grid size `h`, with `Δt` following the configured scaling.
    pub fn with_h(&self, h: f64) -> Result<Self> {
        let mut c = self.clone();
        c.h = h;
        if self.dt_scaling == DtScaling::Quadratic {
            let target = self.dt_h2_factor * h * h;
            let n = (self.t_final / target).ceil().max(1.0);
            c.dt = self.t_final / n;
            c.record_every = None;
        }
        Ok(c)
    }

    /// `(h/r, Δt/r²)`, keeping the recorded times.
    pub fn refined(&self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("refinement must be at least 1".into()));
        }
        if r == 1 {
            return Ok(self.clone());
        }
        let mut c = self.clone();
        let r2 = (r * r) as f64;
        c.h = self.h / r as f64;
        c.dt = self.dt / r2;
        let every = self.record_interval()?;
        c.record_every = Some(every * r * r);
        Ok(c)
    }

    /// Serializes back to the file format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = match self.potential {
            PotentialFamily::Quadratic => "quadratic",
            PotentialFamily::Power => "power",
            PotentialFamily::RepAttr => "repattr",
        };
        let _ = writeln!(s, "potential.kind = {kind}");
        let _ = writeln!(s, "potential.a = {}", self.a);
        let _ = writeln!(s, "potential.b = {}", self.b);
        let _ = writeln!(s, "init = {}", self.init);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "T = {}", self.t_final);
        let _ = writeln!(
            s,
            "weights = {}",
            match self.weights {
                WeightMode::CellAverage => "cell_average",
                WeightMode::DualKernel => "dual_kernel",
            }
        );
        let _ = writeln!(
            s,
            "jacobian = {}",
            match self.jacobian {
                JacobianMode::Exponential => "exponential",
                JacobianMode::Linearized => "linearized",
            }
        );
        let _ = writeln!(
            s,
            "shape = {}",
            match self.shape {
                ShapeFamily::B1 => "b1",
                ShapeFamily::B3 => "b3",
            }
        );
        let _ = writeln!(s, "quadrature.points_per_piece = {}", self.quadrature.points_per_piece);
        let _ = writeln!(s, "quadrature.grading_levels = {}", self.quadrature.singular_grading_levels);
        let _ = writeln!(s, "quadrature.grading_ratio = {}", self.quadrature.grading_ratio);
        let eps: Vec<String> = self.sp_epsilon.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "sp.epsilon = {}", eps.join(","));
        match self.record_every {
            Some(m) => {
                let _ = writeln!(s, "output.every = {m}");
            }
            None => {
                let _ = writeln!(s, "output.every = auto");
            }
        }
        let _ = writeln!(s, "output.dir = {}", self.output_dir.display());
        let _ = writeln!(s, "grid.points = {}", self.grid_points);
        let _ = writeln!(s, "domain.radius = {}", self.domain_radius);
        let scaling = match self.dt_scaling {
            DtScaling::Fixed => "fixed",
            DtScaling::Quadratic => "h2",
        };
        let _ = writeln!(s, "dt.scaling = {scaling}");
        let _ = writeln!(s, "dt.h2_factor = {}", self.dt_h2_factor);
        let _ = writeln!(s, "reference.refinement = {}", self.reference_refinement);
        let _ = writeln!(s, "lp = {}", self.lp);
        s
    }
}

/// `T/Δt` as an integer, tolerating round-off in the ratio.
pub fn steps_for(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0) || !(dt > 0.0) {
        return Err(Error::Config(format!("T and dt must be positive, got T={t_final}, dt={dt}")));
    }
    let ratio = t_final / dt;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!("T/dt = {ratio} is not a positive integer")));
    }
    Ok(n as usize)
}
