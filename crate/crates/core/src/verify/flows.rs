//! Analytic incompressible flows used to verify the time stepper.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::flow_solver::{FlowSolver, InflowData, SimulationState, SolverParams};
use crate::mesh::generate::{self, BoxTags};
use crate::mesh::{BoundaryTag, ReferenceBasis};
use crate::sem_ops::Discretization;

/// Kovasznay flow at Reynolds number `re`.
#[derive(Debug, Clone, Copy)]
pub struct Kovasznay {
    pub re: f64,
    pub lambda: f64,
}

impl Kovasznay {
    pub fn new(re: f64) -> Self {
        let lambda = 0.5 * re - (0.25 * re * re + 4.0 * PI * PI).sqrt();
        Self { re, lambda }
    }

    pub fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let e = (self.lambda * x).exp();
        [
            1.0 - e * (2.0 * PI * y).cos(),
            self.lambda / (2.0 * PI) * e * (2.0 * PI * y).sin(),
        ]
    }

    pub fn pressure(&self, x: f64) -> f64 {
        0.5 * (1.0 - (2.0 * self.lambda * x).exp())
    }
}

/// Outcome of a time-marched analytic test.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheck {
    /// Max nodal velocity error against the analytic solution.
    pub linf_error: f64,
    pub steps: u64,
    pub t: f64,
    /// Largest per-step projection residual.
    pub max_divergence_residual: f64,
    pub pressure_tol: f64,
    /// Relative kinetic-energy error at the final time (Taylor-Green only).
    pub energy_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct KovasznaySetup {
    pub re: f64,
    pub order: usize,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub scheme_order: usize,
    /// Stop once `max |u^{n+1} − u^n| / Δt` falls below this.
    pub steady_tol: f64,
    pub max_steps: u64,
    /// Start from the analytic field instead of rest.
    pub start_from_exact: bool,
}

impl Default for KovasznaySetup {
    fn default() -> Self {
        Self {
            re: 40.0,
            order: 8,
            nx: 2,
            ny: 4,
            dt: 0.01,
            scheme_order: 2,
            steady_tol: 1e-9,
            max_steps: 20_000,
            start_from_exact: false,
        }
    }
}

fn max_velocity_error(disc: &Discretization, s: &SimulationState, f: impl Fn(f64, f64) -> [f64; 2]) -> f64 {
    let mut err: f64 = 0.0;
    for l in 0..disc.num_local() {
        let [x, y] = disc.mesh.point(l);
        let w = f(x, y);
        err = err.max((s.u[l] - w[0]).abs()).max((s.v[l] - w[1]).abs());
    }
    err
}

/// March Kovasznay flow on `[-0.5, 1] × [-0.5, 1.5]` to steady state with
/// analytic Dirichlet data on every side.
pub fn kovasznay(setup: &KovasznaySetup) -> Result<FlowCheck> {
    let kf = Kovasznay::new(setup.re);
    let basis = ReferenceBasis::new(setup.order)?;
    let mesh = generate::rectangle(
        &basis,
        setup.nx,
        setup.ny,
        [-0.5, 1.0],
        [-0.5, 1.5],
        BoxTags::all(BoundaryTag::Inflow),
    )?;
    let disc = Discretization::new(mesh, basis)?;
    let params = SolverParams::laminar(1.0 / setup.re, setup.scheme_order);
    let pressure_tol = params.pressure_tol;
    let inflow = InflowData::Function(Arc::new(move |x, y, _| kf.velocity(x, y)));
    let solver = FlowSolver::new(disc, params, inflow)?;
    let mut s = solver.initial_state()?;
    if setup.start_from_exact {
        let disc = &solver.disc;
        s.u = disc.sample(|x, y| kf.velocity(x, y)[0]);
        s.v = disc.sample(|x, y| kf.velocity(x, y)[1]);
        s.p = disc.sample(|x, _| kf.pressure(x));
    }
    let mut max_res: f64 = 0.0;
    while s.step < setup.max_steps {
        let (u0, v0) = (s.u.clone(), s.v.clone());
        let rep = solver.advance(&mut s, setup.dt)?;
        max_res = max_res.max(rep.divergence_residual);
        let change = u0
            .iter()
            .zip(&s.u)
            .chain(v0.iter().zip(&s.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / setup.dt;
        if change < setup.steady_tol {
            break;
        }
    }
    Ok(FlowCheck {
        linf_error: max_velocity_error(&solver.disc, &s, |x, y| kf.velocity(x, y)),
        steps: s.step,
        t: s.t,
        max_divergence_residual: max_res,
        pressure_tol,
        energy_error: 0.0,
    })
}

/// Decaying Taylor-Green vortex on the periodic box `[0, 2π]²`.
#[derive(Debug, Clone, Copy)]
pub struct TaylorGreenSetup {
    pub nu: f64,
    pub order: usize,
    pub elements: usize,
    pub scheme_order: usize,
    pub t_final: f64,
    pub pressure_tol: f64,
    pub velocity_tol: f64,
}

impl Default for TaylorGreenSetup {
    fn default() -> Self {
        Self {
            nu: 0.05,
            order: 12,
            elements: 4,
            scheme_order: 2,
            t_final: 1.0,
            pressure_tol: 1e-12,
            velocity_tol: 1e-13,
        }
    }
}

pub fn taylor_green_velocity(nu: f64, x: f64, y: f64, t: f64) -> [f64; 2] {
    let d = (-2.0 * nu * t).exp();
    [-x.cos() * y.sin() * d, x.sin() * y.cos() * d]
}

/// Integrate to `t_final` with `steps` equal steps, starting from the exact
/// solution with exact past levels.
pub fn taylor_green(setup: &TaylorGreenSetup, steps: u64) -> Result<FlowCheck> {
    let nu = setup.nu;
    let basis = ReferenceBasis::new(setup.order)?;
    let mesh = generate::periodic_box(&basis, setup.elements, setup.elements, [0.0, 2.0 * PI], [0.0, 2.0 * PI])?;
    let disc = Discretization::new(mesh, basis)?;
    let mut params = SolverParams::laminar(nu, setup.scheme_order);
    params.pressure_tol = setup.pressure_tol;
    params.velocity_tol = setup.velocity_tol;
    let pressure_tol = params.pressure_tol;
    let solver = FlowSolver::new(disc, params, InflowData::Freestream { direction: [1.0, 0.0], speed: 0.0 })?;
    let dt = setup.t_final / steps as f64;
    let disc = &solver.disc;
    let field = |t: f64, c: usize| disc.sample(|x, y| taylor_green_velocity(nu, x, y, t)[c]);
    let mut s = solver.initial_state()?;
    s.u = field(0.0, 0);
    s.v = field(0.0, 1);
    s.p = disc.sample(|x, y| -0.25 * ((2.0 * x).cos() + (2.0 * y).cos()));
    let past: Vec<(f64, Vec<f64>, Vec<f64>)> = (1..setup.scheme_order)
        .map(|j| {
            let t = -(j as f64) * dt;
            (t, field(t, 0), field(t, 1))
        })
        .collect();
    solver.prime_history(&mut s, &past)?;
    let mut max_res: f64 = 0.0;
    for _ in 0..steps {
        let rep = solver.advance(&mut s, dt)?;
        max_res = max_res.max(rep.divergence_residual);
    }
    let t = s.t;
    let energy = |u: &[f64], v: &[f64]| {
        let e: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a * a + b * b)).collect();
        disc.integrate(&e)
    };
    let e0 = energy(&field(0.0, 0), &field(0.0, 1));
    let e = energy(&s.u, &s.v);
    Ok(FlowCheck {
        linf_error: max_velocity_error(disc, &s, |x, y| taylor_green_velocity(nu, x, y, t)),
        steps,
        t,
        max_divergence_residual: max_res,
        pressure_tol,
        energy_error: (e / e0 - (-4.0 * nu * t).exp()).abs(),
    })
}

/// Observed orders `log2(e_h / e_{h/2})` for successive step halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
