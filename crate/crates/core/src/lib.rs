//! Linearly transformed particle (LTP) simulations of the aggregation equation
//! `∂ₜρ + ∇·(ρu) = 0`, `u = -∇W * ρ`, with a fixed-radius smooth-particle baseline,
//! reference solutions and error metrics.
//!
//! ```no_run
//! use aggsim::{run_scenario, SimulationConfig};
//!
//! let mut cfg = SimulationConfig::default();
//! cfg.apply_override("h=0.02").unwrap();
//! let art = run_scenario(&cfg).unwrap();
//! println!("final mass {}", art.timeseries.last().unwrap().mass);
//! ```

pub mod config;
pub mod density;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod ltp;
pub mod metrics;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod runner;
pub mod shape;
pub mod sp;

pub use config::{DtScaling, PotentialFamily, SimulationConfig};
pub use density::{InitialDensity, InitialDensityId};
pub use error::{Error, Result};
pub use fields::{FieldEvaluator, QuadratureRule, ShapedParticle};
pub use ltp::{init_particles, JacobianMode, ParticleState, StepParams, WeightMode};
pub use metrics::{dbl_distance, fit_rate, lp_error, EvaluationGrid, Norm, RateFit};
pub use oracle::{nbody_integrate, reference_run, NBodyScheme, NBodyState, QuadraticOracle};
pub use potential::{Classification, Potential, PotentialKind};
pub use runner::{convergence_study, run_scenario, sp_sweep, ErrorReport, RunArtifacts, StudyMode, SweepReport};
pub use shape::{ShapeFamily, ShapeFunction};
pub use sp::SpState;
