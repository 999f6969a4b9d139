//! Time integration of the incompressible Navier-Stokes equations with
//! optional turbulence closures.

pub mod bc;
pub mod cfl;
pub mod channel;
pub mod config;
pub mod output;
pub mod run;
pub mod scheme;
pub mod state;
pub mod step;

pub use cfl::{cfl_estimate, cfl_rate};
pub use channel::{compare_channel, solve_channel, ChannelClosure, ChannelComparison, ChannelProfile, ChannelSetup};
pub use bc::{BoundaryConditions, FaceKind, InflowData};
pub use config::{CaseConfig, Model};
pub use scheme::{bdfext_coefficients, TimeScheme};
pub use state::{ClosureFields, EventCounters, History, SimulationState};
pub use step::{advance_timestep, FlowSolver, SolverParams, StepReport};
pub use run::{load_discretization, read_checkpoint, run_case, run_with_solver, write_checkpoint, RunArtifacts, RunSummary};
