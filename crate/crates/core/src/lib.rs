//! Simulation of a linear stochastic transport equation in wavenumber space
//! that carries variance from an injection band toward large `|k|`, together
//! with the analytic predictions it is checked against.
//!
//! The pieces, bottom up: [`grid`] and [`field`] define the periodic lattice
//! and spectral arrays, [`operators`] the transport and damping terms,
//! [`forcing`] the white-in-time band-limited noise, [`integrator`] the
//! predictor-corrector stepper, [`oracle`] the closed-form and quadrature
//! predictions, and [`stats`] the estimators. [`validation`] wires them into
//! the acceptance checks.

pub mod config;
pub mod error;
pub mod fft;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod integrator;
pub mod operators;
pub mod oracle;
pub mod stats;
pub mod validation;

pub use config::{RunManifest, SimulationConfig};
pub use error::{CascadeError, Result};
pub use field::{Precision, SpectralField};
pub use forcing::{Forcing, ForcingSpec};
pub use grid::WavenumberGrid;
pub use integrator::{run, run_ensemble, IntegratorState, RunFailure, RunHooks, RunOutput, Stepper};
pub use operators::{OperatorParams, Operators};
pub use oracle::{AnalyticParams, RadialDensity};
pub use stats::{fit_power_law, FitWindows, PowerLawFit, StatsAccumulator};
