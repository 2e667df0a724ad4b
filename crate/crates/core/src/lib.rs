//! Deterministic solver for a one-dimensional kinetic equation with
//! repulsion-modulated jumps and pairwise coalescence.

pub mod adaptive;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod integrate;
pub mod kernel;
pub mod presets;
pub mod rhs;
pub mod runner;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result, ScenarioIssue};
pub use grid::{BoundaryMode, DensityField, Grid, QuadratureRule, WeightTable};
pub use kernel::{InitialConditionSpec, KernelShape, KernelSpec};
pub use rhs::{KernelSet, RateField, SampledKernels};
pub use runner::{simulate, Simulation};
pub use scenario::{RhsPath, Scenario};
