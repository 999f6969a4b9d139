//! Matrix-free Krylov solvers and preconditioners.

pub mod gmres;
pub mod pcg;
pub mod precond;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use gmres::gmres;
pub use pcg::pcg;
pub use precond::{Jacobi, TwoLevel};

/// Outcome of one linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn relative_residual(&self) -> f64 {
        if self.initial_residual > 0.0 {
            self.final_residual / self.initial_residual
        } else {
            0.0
        }
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} iterations (residual {:.3e} -> {:.3e})",
            if self.converged { "converged" } else { "not converged" },
            self.iterations,
            self.initial_residual,
            self.final_residual
        )
    }
}

/// `y = A x` on assembled vectors.
pub trait LinearOperator {
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for F {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self(x, y)
    }
}

/// Identity preconditioner.
pub struct Identity;

impl LinearOperator for Identity {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Optional projection removing a null space (e.g. constants) from a vector.
pub type Projection<'a> = Option<&'a dyn Fn(&mut [f64])>;

/// Subtract the arithmetic mean.
pub fn remove_mean(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= m;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Common solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverControl {
    pub tol: f64,
    pub maxit: usize,
    pub restart: usize,
}

impl Default for SolverControl {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxit: 1000,
            restart: 40,
        }
    }
}
