//! Two-dimensional spectral-element incompressible flow solver with k-τ SST
//! RANS, DDES and high-pass-filter LES closures.

pub mod error;
pub mod flow_solver;
pub mod linsolve;
pub mod mesh;
pub mod postproc;
pub mod sem_ops;
pub mod turbulence;
pub mod verify;

pub use error::{Error, Result};
