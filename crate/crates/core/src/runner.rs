//! Scenario orchestration and CSV artifacts.
//!
//! Files written by [`RunArtifacts::write`]:
//!
//! * `timeseries.csv`: `step,t,mass,centroid,min_j,max_j,min_h,max_speed,rho_max`
//! * `profile_<step>.csv`: `x,rho_h,u_h,size_h,rho_exact` (`rho_exact` empty unless `W = x²`)
//! * `run_info.csv`: `key,value` with the requested and completed steps and the stop reason
//! * `config.txt`: the effective configuration
//!
//! Studies write `errors.csv` (`h,dt,steps,l1,lp,linf,dbl`) and `rates.csv`
//! (`metric,slope,intercept,residual`); sweeps write `sweep.csv`
//! (`method,epsilon,h,dt,l1,linf`).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::fields::{FieldEvaluator, Point};
use crate::ltp::{init_particles, ParticleState, StepReport};
use crate::metrics::{dbl_distance, fit_rate, lp_error, EvaluationGrid, Norm, RateFit};
use crate::oracle::{reference_run, QuadraticOracle};
use crate::sp::SpState;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRow {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub centroid: f64,
    pub min_j: f64,
    pub max_j: f64,
    pub min_h: f64,
    pub max_speed: f64,
    pub rho_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub step: usize,
    pub t: f64,
    pub grid: EvaluationGrid,
    pub density: Vec<f64>,
    pub velocity: Vec<f64>,
    pub size: Vec<f64>,
    pub exact: Option<Vec<f64>>,
}

/// Why a run ended before its horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct StopInfo {
    pub step: usize,
    /// True for a rejected linearized step, false for a blow-up.
    pub rejected: bool,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: SimulationConfig,
    pub requested_steps: usize,
    pub timeseries: Vec<TimeSeriesRow>,
    pub profiles: Vec<Profile>,
    /// Recorded states, aligned with `timeseries`.
    pub snapshots: Vec<ParticleState<1>>,
    pub stop: Option<StopInfo>,
}

impl RunArtifacts {
    pub fn final_state(&self) -> &ParticleState<1> {
        self.snapshots.last().expect("a run always records its initial state")
    }

    pub fn completed(&self) -> bool {
        self.stop.is_none()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut ts = String::from("step,t,mass,centroid,min_j,max_j,min_h,max_speed,rho_max\n");
        for r in &self.timeseries {
            ts.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.step,
                fmt_f64(r.t),
                fmt_f64(r.mass),
                fmt_f64(r.centroid),
                fmt_f64(r.min_j),
                fmt_f64(r.max_j),
                fmt_f64(r.min_h),
                fmt_f64(r.max_speed),
                fmt_f64(r.rho_max)
            ));
        }
        fs::write(dir.join("timeseries.csv"), ts)?;
        for p in &self.profiles {
            let mut out = fs::File::create(dir.join(format!("profile_{:06}.csv", p.step)))?;
            let mut s = String::from("x,rho_h,u_h,size_h,rho_exact\n");
            for (i, x) in p.grid.xs().iter().enumerate() {
                let exact = p.exact.as_ref().map(|e| fmt_f64(e[i])).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(*x),
                    fmt_f64(p.density[i]),
                    fmt_f64(p.velocity[i]),
                    fmt_f64(p.size[i]),
                    exact
                ));
            }
            out.write_all(s.as_bytes())?;
        }
        let (stop_step, reason) = match &self.stop {
            Some(s) => (s.step.to_string(), s.reason.replace([',', '\n'], ";")),
            None => (String::new(), String::new()),
        };
        let completed = self.snapshots.last().map(|s| s.step).unwrap_or(0);
        fs::write(
            dir.join("run_info.csv"),
            format!(
                "key,value\nrequested_steps,{}\ncompleted_steps,{completed}\nstop_step,{stop_step}\nstop_reason,{reason}\n",
                self.requested_steps
            ),
        )?;
        fs::write(dir.join("config.txt"), self.config.to_text())?;
        Ok(())
    }
}

fn max_speed(state: &ParticleState<1>, ev: &FieldEvaluator<'_, 1>) -> Result<f64> {
    let shaped = state.shaped_particles();
    let targets: Vec<Point<1>> = state.particles.iter().map(|p| p.position).collect();
    Ok(ev.grad_hess_many(&shaped, &targets)?.iter().map(|(g, _)| g.norm()).fold(0.0, f64::max))
}

/// Runs `config` and calls `observe` on every state, with the report of the step that
/// produced it (none for the initial state). Blow-up and rejected steps end the run and are
/// returned as the stop reason; other errors propagate.
pub fn simulate(
    config: &SimulationConfig,
    mut observe: impl FnMut(&ParticleState<1>, Option<&StepReport>) -> Result<()>,
) -> Result<Option<StopInfo>> {
    let n = config.validate()?;
    let potential = config.potential_for(1)?;
    let shape = config.shape_function();
    let rho0 = config.initial_density()?;
    let ev = FieldEvaluator::<1>::new(&potential, &shape, config.quadrature)?;
    let params = config.step_params();
    let mut state = init_particles::<1>(&rho0, config.h, config.weights, &shape)?;
    observe(&state, None)?;
    for _ in 0..n {
        match state.step_with(&ev, &params) {
            Ok((next, report)) => {
                state = next;
                observe(&state, Some(&report))?;
            }
            Err(e @ (Error::BlowUp { .. } | Error::StepRejected { .. })) => {
                let (step, rejected) = match e {
                    Error::BlowUp { step, .. } => (step, false),
                    Error::StepRejected { step, .. } => (step, true),
                    _ => unreachable!(),
                };
                log::warn!("run stopped: {e}");
                return Ok(Some(StopInfo { step, rejected, reason: e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Executes the scenario and samples the recorded states.
pub fn run_scenario(config: &SimulationConfig) -> Result<RunArtifacts> {
    let n = config.validate()?;
    let every = config.record_interval()?;
    let potential = config.potential_for(1)?;
    let shape = config.shape_function();
    let ev = FieldEvaluator::<1>::new(&potential, &shape, config.quadrature)?;
    let oracle = if potential.is_quadratic() { Some(QuadraticOracle::new(&config.initial_density()?)) } else { None };

    let mut snapshots = Vec::new();
    let mut last: Option<ParticleState<1>> = None;
    let stop = simulate(config, |state, _| {
        if state.step % every == 0 || state.step == n {
            snapshots.push(state.clone());
        }
        last = Some(state.clone());
        Ok(())
    })?;
    // a truncated run also records where it stopped
    if let Some(l) = last {
        if snapshots.last().map(|s| s.step) != Some(l.step) {
            snapshots.push(l);
        }
    }

    let mut timeseries = Vec::with_capacity(snapshots.len());
    let mut profiles = Vec::with_capacity(snapshots.len());
    for s in &snapshots {
        let diag = s.diagnostics();
        let bounds = s.support_bounds();
        let grid = EvaluationGrid::covering(&[bounds], 2.0 * s.h, config.grid_points)?;
        let xs = grid.xs();
        let density = s.density_on(&xs);
        let velocity_field = s.reconstruct_velocity_field(&potential, config.quadrature)?;
        let size_field = s.reconstruct_size_field()?;
        let exact = match &oracle {
            Some(o) => Some(o.density_on(s.time, &xs)?),
            None => None,
        };
        timeseries.push(TimeSeriesRow {
            step: s.step,
            t: s.time,
            mass: diag.total_mass,
            centroid: diag.centroid[0],
            min_j: diag.min_j,
            max_j: diag.max_j,
            min_h: diag.min_volume,
            max_speed: max_speed(s, &ev)?,
            rho_max: density.iter().copied().fold(0.0, f64::max),
        });
        profiles.push(Profile {
            step: s.step,
            t: s.time,
            grid,
            velocity: xs.iter().map(|&x| velocity_field.at(x)).collect(),
            size: xs.iter().map(|&x| size_field.at(x)).collect(),
            density,
            exact,
        });
    }
    Ok(RunArtifacts { config: config.clone(), requested_steps: n, timeseries, profiles, snapshots, stop })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    /// Against the closed-form solution (quadratic potential only).
    VsExact,
    /// Against a refined run of the finest resolution.
    SelfConvergence,
}

impl std::str::FromStr for StudyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vs_exact" => Ok(StudyMode::VsExact),
            "self_convergence" | "self" => Ok(StudyMode::SelfConvergence),
            other => Err(Error::Config(format!("unknown study mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub l1: f64,
    pub lp: f64,
    pub linf: f64,
    pub dbl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub p: f64,
    pub records: Vec<ErrorRecord>,
    /// Fitted rates keyed by metric name (`l1`, `lp`, `linf`, `dbl`).
    pub rates: Vec<(String, RateFit)>,
}

impl ErrorReport {
    pub fn rate(&self, metric: &str) -> Option<RateFit> {
        self.rates.iter().find(|(m, _)| m == metric).map(|(_, r)| *r)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut s = String::from("h,dt,steps,l1,lp,linf,dbl\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(r.h),
                fmt_f64(r.dt),
                r.steps,
                fmt_f64(r.l1),
                fmt_f64(r.lp),
                fmt_f64(r.linf),
                fmt_f64(r.dbl)
            ));
        }
        fs::write(dir.join("errors.csv"), s)?;
        let mut s = String::from("metric,slope,intercept,residual\n");
        for (m, r) in &self.rates {
            s.push_str(&format!("{m},{},{},{}\n", fmt_f64(r.slope), fmt_f64(r.intercept), fmt_f64(r.residual)));
        }
        fs::write(dir.join("rates.csv"), s)?;
        Ok(())
    }
}

/// A density to compare against: sampled on demand, with known support.
trait Reference {
    fn support(&self) -> (f64, f64);
    fn sample(&self, xs: &[f64]) -> Result<Vec<f64>>;
}

struct ExactReference<'a> {
    oracle: &'a QuadraticOracle,
    t: f64,
}

impl Reference for ExactReference<'_> {
    fn support(&self) -> (f64, f64) {
        self.oracle.support_at(self.t)
    }

    fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        self.oracle.density_on(self.t, xs)
    }
}

impl Reference for ParticleState<1> {
    fn support(&self) -> (f64, f64) {
        self.support_bounds()
    }

    fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.density_on(xs))
    }
}

fn compare(
    approx_support: (f64, f64),
    approx: impl Fn(&[f64]) -> Vec<f64>,
    reference: &dyn Reference,
    margin: f64,
    points: usize,
    p: f64,
) -> Result<(f64, f64, f64, f64)> {
    let grid = EvaluationGrid::covering(&[approx_support, reference.support()], margin, points)?;
    let xs = grid.xs();
    let f = approx(&xs);
    let g = reference.sample(&xs)?;
    let l1 = lp_error(&f, &g, &grid, Norm::L(1.0))?;
    let lp = lp_error(&f, &g, &grid, Norm::L(p))?;
    let linf = lp_error(&f, &g, &grid, Norm::Inf)?;
    let dbl = dbl_distance(&grid.cell_masses(&f), &grid.cell_masses(&g), grid.spacing())?;
    Ok((l1, lp, linf, dbl))
}

fn final_state(config: &SimulationConfig) -> Result<ParticleState<1>> {
    let mut last = None;
    if let Some(stop) = simulate(config, |s, _| {
        last = Some(s.clone());
        Ok(())
    })? {
        return Err(Error::BlowUp { step: stop.step, reason: stop.reason });
    }
    Ok(last.expect("simulate observes the initial state"))
}

/// Runs every `h` to the horizon and measures the final-time error.
pub fn convergence_study(base: &SimulationConfig, hs: &[f64], mode: StudyMode) -> Result<ErrorReport> {
    base.validate()?;
    if hs.len() < 3 {
        return Err(Error::Config(format!("a convergence study needs at least 3 resolutions, got {}", hs.len())));
    }
    let mut hs = hs.to_vec();
    if hs.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Config("resolutions must be positive".into()));
    }
    hs.sort_by(|a, b| b.total_cmp(a));
    if hs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("resolutions must be distinct".into()));
    }
    let oracle = match mode {
        StudyMode::VsExact => {
            if !base.potential_for(1)?.is_quadratic() {
                return Err(Error::Config("vs_exact needs the quadratic potential".into()));
            }
            Some(QuadraticOracle::new(&base.initial_density()?))
        }
        StudyMode::SelfConvergence => None,
    };
    let reference: Box<dyn Reference> = match &oracle {
        Some(o) => Box::new(ExactReference { oracle: o, t: base.t_final }),
        None => {
            let finest = base.with_h(hs[hs.len() - 1])?;
            let run = reference_run(&finest, base.reference_refinement)?;
            if let Some(stop) = run.stop {
                return Err(Error::BlowUp { step: stop.step, reason: stop.reason });
            }
            Box::new(run.final_state().clone())
        }
    };

    let mut records = Vec::with_capacity(hs.len());
    for &h in &hs {
        let cfg = base.with_h(h)?;
        let steps = cfg.validate()?;
        let state = final_state(&cfg)?;
        let (l1, lp, linf, dbl) =
            compare(state.support_bounds(), |xs| state.density_on(xs), reference.as_ref(), 2.0 * h, cfg.grid_points, cfg.lp)?;
        log::info!("h={h}: L1={l1:e} Linf={linf:e} dBL={dbl:e}");
        records.push(ErrorRecord { h, dt: cfg.dt, steps, l1, lp, linf, dbl });
    }
    let mut rates = Vec::new();
    for (name, get) in [
        ("l1", (|r: &ErrorRecord| r.l1) as fn(&ErrorRecord) -> f64),
        ("lp", |r| r.lp),
        ("linf", |r| r.linf),
        ("dbl", |r| r.dbl),
    ] {
        let pairs: Vec<(f64, f64)> = records.iter().map(|r| (r.h, get(r))).collect();
        match fit_rate(&pairs) {
            Ok(fit) => rates.push((name.to_string(), fit)),
            Err(e) => log::warn!("no {name} rate: {e}"),
        }
    }
    Ok(ErrorReport { p: base.lp, records, rates })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `None` for the LTP row.
    pub epsilon: Option<f64>,
    pub l1: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub h: f64,
    pub dt: f64,
    pub ltp: SweepRow,
    pub sp: Vec<SweepRow>,
}

impl SweepReport {
    pub fn best_sp_linf(&self) -> f64 {
        self.sp.iter().map(|r| r.linf).fold(f64::INFINITY, f64::min)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut s = String::from("method,epsilon,h,dt,l1,linf\n");
        for r in std::iter::once(&self.ltp).chain(&self.sp) {
            let (method, eps) = match r.epsilon {
                Some(e) => ("sp", fmt_f64(e)),
                None => ("ltp", String::new()),
            };
            s.push_str(&format!(
                "{method},{eps},{},{},{},{}\n",
                fmt_f64(self.h),
                fmt_f64(self.dt),
                fmt_f64(r.l1),
                fmt_f64(r.linf)
            ));
        }
        fs::write(dir.join("sweep.csv"), s)?;
        Ok(())
    }
}

/// LTP and SP(ε) from the same particles, compared at the horizon with the exact solution
/// (quadratic potential) or a refined LTP reference.
pub fn sp_sweep(config: &SimulationConfig, epsilons: &[f64]) -> Result<SweepReport> {
    let n = config.validate()?;
    if epsilons.len() < 3 {
        return Err(Error::Config(format!("an SP sweep needs at least 3 radii, got {}", epsilons.len())));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Config("SP radii must be positive".into()));
    }
    let potential = config.potential_for(1)?;
    let shape = config.shape_function();
    let rho0 = config.initial_density()?;
    let oracle = QuadraticOracle::new(&rho0);
    let reference: Box<dyn Reference> = if potential.is_quadratic() {
        Box::new(ExactReference { oracle: &oracle, t: config.t_final })
    } else {
        let run = reference_run(config, config.reference_refinement.max(2))?;
        if let Some(stop) = run.stop {
            return Err(Error::BlowUp { step: stop.step, reason: stop.reason });
        }
        Box::new(run.final_state().clone())
    };
    let margin = 2.0 * config.h;

    let ltp = final_state(config)?;
    let (l1, _, linf, _) = compare(ltp.support_bounds(), |xs| ltp.density_on(xs), reference.as_ref(), margin, config.grid_points, 1.0)?;
    let ltp_row = SweepRow { epsilon: None, l1, linf };

    let ev = FieldEvaluator::<1>::new(&potential, &shape, config.quadrature)?;
    let params = config.step_params();
    let initial = init_particles::<1>(&rho0, config.h, config.weights, &shape)?;
    let mut sp_rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut sp = SpState::from_ltp(&initial, eps)?;
        for _ in 0..n {
            sp = sp.step_with(&ev, &params)?;
        }
        let (l1, _, linf, _) = compare(sp.support_bounds(), |xs| sp.density_on(xs), reference.as_ref(), margin.max(2.0 * eps), config.grid_points, 1.0)?;
        log::info!("SP eps={eps}: L1={l1:e} Linf={linf:e}");
        sp_rows.push(SweepRow { epsilon: Some(eps), l1, linf });
    }
    Ok(SweepReport { h: config.h, dt: config.dt, ltp: ltp_row, sp: sp_rows })
}
