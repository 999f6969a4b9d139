//! One semi-implicit BDFk/EXTk step of the coupled momentum, pressure and
//! (k, τ) system.

use serde::{Deserialize, Serialize};

use super::bc::{impose, BoundaryConditions, FaceKind, InflowData};
use super::config::{CaseConfig, Model};
use super::scheme::{bdfext_coefficients, TimeScheme};
use super::state::{ClosureFields, SimulationState};
use crate::error::{Error, Result};
use crate::linsolve::{gmres, pcg, remove_mean, Jacobi, LinearOperator, SolveReport, TwoLevel};
use crate::mesh::WallGeometryFields;
use crate::sem_ops::dealias::Dealias;
use crate::sem_ops::modal::ModalFilter;
use crate::sem_ops::operators::VelocityGradient;
use crate::sem_ops::{Coefficient, Discretization, FilterSpec};
use crate::turbulence::{
    ddes_length_scale, delay_function, evaluate_closure, split_ktau_sources, DdesConstants, LocalClosureState,
    SstConstants, TAU_FLOOR,
};

/// Lower bound on the τ-equation limiter factor where `μ_t = 0`.
const BENTON_FLOOR: f64 = 1e-8;

/// Physical and numerical parameters of a solver instance.
#[derive(Debug, Clone)]
pub struct SolverParams {
    pub model: Model,
    pub nu: f64,
    pub scheme_order: usize,
    pub body_force: [f64; 2],
    /// High-pass relaxation filter (HPF-LES); inactive when `chi == 0`.
    pub filter: Option<FilterSpec>,
    pub dealias: bool,
    pub pressure_tol: f64,
    pub velocity_tol: f64,
    pub scalar_tol: f64,
    pub maxit: usize,
    pub restart: usize,
    pub k_inf: f64,
    pub tau_inf: f64,
    pub sst: SstConstants,
    pub ddes: DdesConstants,
}

impl SolverParams {
    pub fn laminar(nu: f64, scheme_order: usize) -> Self {
        Self {
            model: Model::Laminar,
            nu,
            scheme_order,
            body_force: [0.0; 2],
            filter: None,
            dealias: false,
            pressure_tol: 1e-8,
            velocity_tol: 1e-10,
            scalar_tol: 1e-10,
            maxit: 500,
            restart: 40,
            k_inf: 0.0,
            tau_inf: 0.0,
            sst: SstConstants::default(),
            ddes: DdesConstants::default(),
        }
    }

    pub fn from_config(cfg: &CaseConfig) -> Result<Self> {
        let d = &cfg.discretization;
        let filter = if cfg.case.model == Model::HpfLes {
            Some(FilterSpec::new(d.order, d.filter_modes, d.filter_chi)?)
        } else {
            None
        };
        let sst = SstConstants {
            diffusivity: cfg.freestream.diffusivity,
            ..Default::default()
        };
        Ok(Self {
            model: cfg.case.model,
            nu: cfg.nu(),
            scheme_order: d.scheme_order,
            body_force: cfg.case.body_force,
            filter,
            dealias: d.dealias,
            pressure_tol: cfg.solvers.pressure_tol,
            velocity_tol: cfg.solvers.velocity_tol,
            scalar_tol: cfg.solvers.scalar_tol,
            maxit: cfg.solvers.maxit,
            restart: cfg.solvers.restart,
            k_inf: cfg.k_inf(),
            tau_inf: cfg.tau_inf(),
            sst,
            ddes: DdesConstants::default(),
        })
    }
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepReport {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub order: usize,
    pub pressure: SolveReport,
    pub velocity: [SolveReport; 2],
    pub k: Option<SolveReport>,
    pub tau: Option<SolveReport>,
    /// Residual of the discrete projection (pressure Poisson) equation,
    /// relative to its right-hand side.
    pub divergence_residual: f64,
    /// `‖∇·u‖_{L2}` of the new velocity.
    pub divergence_l2: f64,
}

/// Implicit/explicit split of the closure at one time level.
struct ClosureCoefficients {
    gamma_k: Vec<f64>,
    gamma_tau: Vec<f64>,
    react_k: Vec<f64>,
    react_tau: Vec<f64>,
    src_k: Vec<f64>,
    src_tau: Vec<f64>,
    /// Limiter factor scaling the τ right-hand side.
    benton: Vec<f64>,
    nu_t: Vec<f64>,
    fields: ClosureFields,
    tau_floor: u64,
    ddes_guards: u64,
}

pub struct FlowSolver {
    pub disc: Discretization,
    pub bc: BoundaryConditions,
    pub params: SolverParams,
    pub walls: Option<WallGeometryFields>,
    hmax_points: Vec<f64>,
    filter: Option<ModalFilter>,
    dealias: Option<Dealias>,
    pressure_precond: TwoLevel,
}

/// A right-hand side whose norm overflows means the march has blown up.
fn finite_rhs(step: u64, field: &str, rhs: &[f64]) -> Result<()> {
    let sq: f64 = rhs.iter().map(|v| v * v).sum();
    if sq.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            step,
            message: format!("{field} right-hand side overflowed"),
        })
    }
}

pub fn masked_apply(
    disc: &Discretization,
    mask: &[bool],
    diffusivity: Coefficient<'_>,
    reaction: Coefficient<'_>,
    x: &[f64],
    y: &mut [f64],
) {
    let global = disc.mesh.global_index();
    let xl: Vec<f64> = global.iter().map(|&g| if mask[g] { 0.0 } else { x[g] }).collect();
    let mut yl = vec![0.0; xl.len()];
    disc.helmholtz_apply_into(&xl, diffusivity, reaction, &mut yl);
    y.fill(0.0);
    for (l, &g) in global.iter().enumerate() {
        y[g] += yl[l];
    }
    for (yg, &m) in y.iter_mut().zip(mask) {
        if m {
            *yg = 0.0;
        }
    }
}

fn axpy_ext(weights: &[f64], current: &[f64], past: &[&[f64]]) -> Vec<f64> {
    let mut out: Vec<f64> = current.iter().map(|x| weights[0] * x).collect();
    for (w, p) in weights[1..].iter().zip(past) {
        for (o, x) in out.iter_mut().zip(p.iter()) {
            *o += w * x;
        }
    }
    out
}

impl FlowSolver {
    pub fn new(disc: Discretization, params: SolverParams, inflow: InflowData) -> Result<Self> {
        let bc = BoundaryConditions::new(&disc, inflow)?;
        let walls = if params.model.has_closure() {
            Some(WallGeometryFields::compute(&disc.mesh, &disc.basis)?)
        } else {
            None
        };
        let hmax_points = walls
            .as_ref()
            .map(|w| w.hmax_per_point(&disc.mesh))
            .unwrap_or_default();
        let filter = match &params.filter {
            Some(spec) if spec.chi > 0.0 => Some(ModalFilter::new(&disc.basis, spec)?),
            _ => None,
        };
        let dealias = params.dealias.then(|| Dealias::new(&disc));
        let diag = disc.gather(&disc.helmholtz_diagonal(Coefficient::Constant(1.0), Coefficient::Constant(0.0)));
        let singular = !bc.has_pressure_dirichlet();
        let mask = (!singular).then_some(bc.pressure_mask.as_slice());
        let pressure_precond = TwoLevel::new(&disc, &diag, mask, singular, |e, x, y| {
            disc.element_helmholtz(e, x, Coefficient::Constant(1.0), Coefficient::Constant(0.0), y)
        })?;
        Ok(Self {
            disc,
            bc,
            params,
            walls,
            hmax_points,
            filter,
            dealias,
            pressure_precond,
        })
    }

    pub fn from_config(cfg: &CaseConfig, disc: Discretization) -> Result<Self> {
        let params = SolverParams::from_config(cfg)?;
        let inflow = InflowData::Freestream {
            direction: cfg.flow_direction(),
            speed: 1.0,
        };
        Self::new(disc, params, inflow)
    }

    /// Freestream-initialized state with boundary values imposed.
    pub fn initial_state(&self) -> Result<SimulationState> {
        let n = self.disc.num_local();
        let mut s = SimulationState::new(self.params.model, n);
        let w = self.bc.inflow_data.at(0.0, 0.0, 0.0);
        if matches!(self.bc.inflow_data, InflowData::Freestream { .. }) {
            s.u.fill(w[0]);
            s.v.fill(w[1]);
        }
        if self.params.model.has_closure() {
            s.k.fill(self.params.k_inf);
            s.tau.fill(self.params.tau_inf);
        }
        self.apply_boundary_conditions(&mut s);
        self.refresh_closure(&mut s)?;
        Ok(s)
    }

    /// Impose Dirichlet values for `u`, `v`, `k`, `τ` at the state's time.
    pub fn apply_boundary_conditions(&self, s: &mut SimulationState) {
        let vals = self.bc.velocity_values(s.t);
        impose(&self.disc, &mut s.u, &self.bc.velocity_mask[0], &vals[0]);
        impose(&self.disc, &mut s.v, &self.bc.velocity_mask[1], &vals[1]);
        if self.params.model.has_closure() {
            let kv = self.bc.scalar_values(self.params.k_inf);
            let tv = self.bc.scalar_values(self.params.tau_inf);
            impose(&self.disc, &mut s.k, &self.bc.scalar_mask, &kv);
            impose(&self.disc, &mut s.tau, &self.bc.scalar_mask, &tv);
        }
    }

    pub fn velocity_gradient(&self, u: &[f64], v: &[f64]) -> Vec<VelocityGradient> {
        let (ux, uy) = self.disc.gradient_continuous(u);
        let (vx, vy) = self.disc.gradient_continuous(v);
        (0..u.len())
            .map(|l| VelocityGradient {
                ux: ux[l],
                uy: uy[l],
                vx: vx[l],
                vy: vy[l],
            })
            .collect()
    }

    /// Explicit momentum terms and the viscous term used in the pressure equation.
    fn momentum_terms(&self, u: &[f64], v: &[f64], nu_t: &[f64]) -> ([Vec<f64>; 2], [Vec<f64>; 2]) {
        let disc = &self.disc;
        let n = u.len();
        let (ux, uy) = disc.gradient(u);
        let (vx, vy) = disc.gradient(v);
        let (adv_u, adv_v) = match &self.dealias {
            Some(d) => (d.advect(disc, u, v, u), d.advect(disc, u, v, v)),
            None => (
                (0..n).map(|l| u[l] * ux[l] + v[l] * uy[l]).collect::<Vec<_>>(),
                (0..n).map(|l| u[l] * vx[l] + v[l] * vy[l]).collect::<Vec<_>>(),
            ),
        };
        let f = self.params.body_force;
        let mut nx: Vec<f64> = adv_u.iter().map(|a| f[0] - a).collect();
        let mut ny: Vec<f64> = adv_v.iter().map(|a| f[1] - a).collect();
        if let Some(filter) = &self.filter {
            let chi = filter.spec.chi;
            let hu = filter.highpass(u);
            let hv = filter.highpass(v);
            for l in 0..n {
                nx[l] -= chi * hu[l];
                ny[l] -= chi * hv[l];
            }
        }
        let omega: Vec<f64> = (0..n).map(|l| vx[l] - uy[l]).collect();
        let (wx, wy) = disc.gradient(&disc.mass_average(&omega));
        let nu = self.params.nu;
        let turbulent = self.params.model.has_closure();
        let mut lx = vec![0.0; n];
        let mut ly = vec![0.0; n];
        if turbulent {
            let (tx, ty) = disc.gradient(nu_t);
            for l in 0..n {
                let ne = nu + nu_t[l];
                nx[l] += tx[l] * ux[l] + ty[l] * vx[l];
                ny[l] += tx[l] * uy[l] + ty[l] * vy[l];
                lx[l] = -ne * wy[l] + tx[l] * ux[l] + ty[l] * uy[l];
                ly[l] = ne * wx[l] + tx[l] * vx[l] + ty[l] * vy[l];
            }
        } else {
            for l in 0..n {
                lx[l] = -nu * wy[l];
                ly[l] = nu * wx[l];
            }
        }
        ([nx, ny], [lx, ly])
    }

    /// Fill the history from earlier velocity snapshots, most recent first,
    /// each given as `(t, u, v)`. Only valid for models without a closure.
    pub fn prime_history(&self, s: &mut SimulationState, past: &[(f64, Vec<f64>, Vec<f64>)]) -> Result<()> {
        if self.params.model.has_closure() {
            return Err(Error::Parameter("history priming supports closure-free models only".into()));
        }
        let keep = self.params.scheme_order.saturating_sub(1);
        let mut later = s.t;
        let mut entries = Vec::new();
        for (t, u, v) in past.iter().take(keep) {
            if !(*t < later) {
                return Err(Error::Parameter("history snapshots must be strictly decreasing in time".into()));
            }
            let zero = vec![0.0; u.len()];
            let (e, lv) = self.momentum_terms(u, v, &zero);
            entries.push((later - t, [u.clone(), v.clone()], e, lv));
            later = *t;
        }
        s.history = Default::default();
        for (dt, vel, e, lv) in entries.into_iter().rev() {
            s.history.push(keep, dt, vel, e, lv, None);
        }
        Ok(())
    }

    fn scalar_gradients(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.disc.gradient_continuous(f)
    }

    fn closure_coefficients(&self, s: &SimulationState) -> Result<ClosureCoefficients> {
        let n = s.num_points();
        let nu = self.params.nu;
        let walls = self
            .walls
            .as_ref()
            .ok_or_else(|| Error::Configuration("closure model without wall distance".into()))?;
        let grads = self.velocity_gradient(&s.u, &s.v);
        let (kx, ky) = self.scalar_gradients(&s.k);
        // ∇τ = 2√τ ∇√τ keeps S_τ = 8Γ|∇√τ|² bounded at walls
        let sqrt_tau: Vec<f64> = s.tau.iter().map(|t| t.max(0.0).sqrt()).collect();
        let (qx, qy) = self.scalar_gradients(&sqrt_tau);
        let sst = &self.params.sst;
        let ddes = &self.params.ddes;
        let mut c = ClosureCoefficients {
            gamma_k: vec![nu; n],
            gamma_tau: vec![nu; n],
            react_k: vec![0.0; n],
            react_tau: vec![0.0; n],
            src_k: vec![0.0; n],
            src_tau: vec![0.0; n],
            benton: vec![1.0; n],
            nu_t: vec![0.0; n],
            fields: ClosureFields {
                f1: vec![1.0; n],
                f2: vec![1.0; n],
                f_d: vec![0.0; n],
                l_ratio: vec![1.0; n],
                l_ddes: vec![0.0; n],
            },
            tau_floor: 0,
            ddes_guards: 0,
        };
        let global = self.disc.mesh.global_index();
        for l in 0..n {
            let d = walls.distance[l];
            if self.bc.wall[global[l]] || d <= 0.0 {
                continue;
            }
            if s.tau[l] < TAU_FLOOR {
                c.tau_floor += 1;
            }
            let tau = s.tau[l].max(TAU_FLOOR);
            let k = s.k[l].max(0.0);
            let g = grads[l];
            let st = LocalClosureState {
                k,
                tau,
                grad_k: [kx[l], ky[l]],
                grad_tau: [2.0 * sqrt_tau[l] * qx[l], 2.0 * sqrt_tau[l] * qy[l]],
                strain: g.strain_magnitude(),
                vorticity: g.vorticity_magnitude(),
                wall_distance: d,
                nu,
                rho: 1.0,
            };
            let ev = evaluate_closure(&st, sst, ddes)?;
            let nu_t = ev.mu_t;
            c.nu_t[l] = nu_t;
            c.gamma_k[l] = ev.gamma_k;
            c.gamma_tau[l] = ev.gamma_tau;
            c.fields.f1[l] = ev.blending.f1;
            c.fields.f2[l] = ev.blending.f2;
            let split = split_ktau_sources(&st, &ev, sst);
            c.src_k[l] = split.k_explicit;
            c.react_k[l] = split.k_reaction;
            c.react_tau[l] = split.tau_reaction;
            c.src_tau[l] = split.tau_explicit;
            c.benton[l] = ev.benton.max(BENTON_FLOOR);
            if self.params.model == Model::DdesKtau {
                let (f_d, _) = delay_function(nu_t, nu, d, st.strain, st.vorticity, sst, ddes)?;
                let dd = ddes_length_scale(k, tau, ev.blending.f1, f_d, self.hmax_points[l], 1.0, sst, ddes)?;
                if dd.guarded {
                    c.ddes_guards += 1;
                }
                c.react_k[l] = dd.destruction_rate;
                c.fields.f_d[l] = f_d;
                c.fields.l_ddes[l] = dd.l_ddes;
                c.fields.l_ratio[l] = if dd.l_rans > 0.0 { dd.l_ddes / dd.l_rans } else { 1.0 };
            } else {
                c.fields.l_ddes[l] = k.sqrt() * tau / sst.c_mu();
            }
        }
        Ok(c)
    }

    /// Recompute `ν_t` and closure diagnostics from the current fields.
    pub fn refresh_closure(&self, s: &mut SimulationState) -> Result<()> {
        if !self.params.model.has_closure() {
            return Ok(());
        }
        let c = self.closure_coefficients(s)?;
        s.nu_t = c.nu_t;
        s.closure = c.fields;
        Ok(())
    }

    fn pressure_operator(&self) -> impl Fn(&[f64], &mut [f64]) + '_ {
        let singular = !self.bc.has_pressure_dirichlet();
        move |x: &[f64], y: &mut [f64]| {
            if singular {
                let global = self.disc.mesh.global_index();
                let xl: Vec<f64> = global.iter().map(|&g| x[g]).collect();
                let mut yl = vec![0.0; xl.len()];
                self.disc
                    .helmholtz_apply_into(&xl, Coefficient::Constant(1.0), Coefficient::Constant(0.0), &mut yl);
                y.fill(0.0);
                for (l, &g) in global.iter().enumerate() {
                    y[g] += yl[l];
                }
            } else {
                masked_apply(
                    &self.disc,
                    &self.bc.pressure_mask,
                    Coefficient::Constant(1.0),
                    Coefficient::Constant(0.0),
                    x,
                    y,
                );
            }
        }
    }

    /// Solve `(react M + K_diff) x = rhs` with Dirichlet lifting; `rhs` is the
    /// assembled weak right-hand side and `guess` a global initial iterate.
    #[allow(clippy::too_many_arguments)]
    fn solve_helmholtz(
        &self,
        diffusivity: Coefficient<'_>,
        reaction: Coefficient<'_>,
        mut rhs: Vec<f64>,
        mask: &[bool],
        lift: &[f64],
        guess: &[f64],
        tol: f64,
    ) -> Result<(Vec<f64>, SolveReport)> {
        let disc = &self.disc;
        let ng = disc.num_global();
        let lifted: Vec<f64> = (0..ng).map(|g| if mask[g] { lift[g] } else { 0.0 }).collect();
        if lifted.iter().any(|&x| x != 0.0) {
            let ll = disc.scatter(&lifted);
            let mut al = vec![0.0; ll.len()];
            disc.helmholtz_apply_into(&ll, diffusivity, reaction, &mut al);
            for (l, &g) in disc.mesh.global_index().iter().enumerate() {
                rhs[g] -= al[l];
            }
        }
        for g in 0..ng {
            if mask[g] {
                rhs[g] = 0.0;
            }
        }
        let diag = disc.gather(&disc.helmholtz_diagonal(diffusivity, reaction));
        let pre = Jacobi::new(&diag, Some(mask))?;
        let op = |x: &[f64], y: &mut [f64]| masked_apply(disc, mask, diffusivity, reaction, x, y);
        let mut x: Vec<f64> = (0..ng).map(|g| if mask[g] { 0.0 } else { guess[g] }).collect();
        let report = pcg(&op, &rhs, &pre, &mut x, tol, self.params.maxit, None)?;
        for g in 0..ng {
            x[g] += lifted[g];
        }
        Ok((x, report))
    }

    /// Advance `s` by `dt`.
    pub fn advance(&self, s: &mut SimulationState, dt: f64) -> Result<StepReport> {
        let disc = &self.disc;
        let n = disc.num_local();
        let ng = disc.num_global();
        let order = self.params.scheme_order.min(s.history.depth() + 1);
        let mut dts = vec![dt];
        dts.extend_from_slice(&s.history.dts[..order - 1]);
        let sch: TimeScheme = bdfext_coefficients(order, &dts)?;
        let step = s.step + 1;
        let t_new = s.t + dt;
        let closure = if self.params.model.has_closure() {
            Some(self.closure_coefficients(s)?)
        } else {
            None
        };
        let (expl, visc) = self.momentum_terms(&s.u, &s.v, &s.nu_t);
        let ext_of = |cur: &[Vec<f64>; 2], past: &[[Vec<f64>; 2]], c: usize| {
            let refs: Vec<&[f64]> = past.iter().take(order - 1).map(|p| p[c].as_slice()).collect();
            axpy_ext(&sch.ext, &cur[c], &refs)
        };
        let bdf_sum = |cur: &[f64], past: &[&[f64]]| -> Vec<f64> {
            let mut out: Vec<f64> = cur.iter().map(|x| sch.history_weight(1) / dt * x).collect();
            for (j, p) in past.iter().enumerate().take(order - 1) {
                let w = sch.history_weight(j + 2) / dt;
                for (o, x) in out.iter_mut().zip(p.iter()) {
                    *o += w * x;
                }
            }
            out
        };
        let mut g_mom: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for c in 0..2 {
            let cur = if c == 0 { &s.u } else { &s.v };
            let past: Vec<&[f64]> = s.history.velocity.iter().map(|p| p[c].as_slice()).collect();
            let mut gc = bdf_sum(cur, &past);
            let e = ext_of(&expl, &s.history.explicit, c);
            for (a, b) in gc.iter_mut().zip(&e) {
                *a += b;
            }
            g_mom[c] = gc;
        }

        // pressure
        let lvx = ext_of(&visc, &s.history.viscous, 0);
        let lvy = ext_of(&visc, &s.history.viscous, 1);
        let fx: Vec<f64> = (0..n).map(|l| g_mom[0][l] + lvx[l]).collect();
        let fy: Vec<f64> = (0..n).map(|l| g_mom[1][l] + lvy[l]).collect();
        let mut rhs_p = disc.gather(&disc.weak_divergence(&fx, &fy));
        let ub = self.bc.velocity_values(t_new);
        let global = disc.mesh.global_index();
        for (face, kind) in disc.geom.faces.iter().zip(&self.bc.face_kinds) {
            if *kind != FaceKind::Inflow {
                continue;
            }
            for (k, &l) in face.nodes.iter().enumerate() {
                let g = global[l];
                let un = ub[0][g] * face.normal[k][0] + ub[1][g] * face.normal[k][1];
                rhs_p[g] -= sch.beta0 / dt * face.weights[k] * un;
            }
        }
        let singular = !self.bc.has_pressure_dirichlet();
        if singular {
            remove_mean(&mut rhs_p);
        } else {
            for g in 0..ng {
                if self.bc.pressure_mask[g] {
                    rhs_p[g] = 0.0;
                }
            }
        }
        finite_rhs(step, "pressure", &rhs_p)?;
        let pop = self.pressure_operator();
        // previous pressure as initial iterate
        let mut p_glob = vec![0.0; ng];
        for (l, &g) in global.iter().enumerate() {
            p_glob[g] = s.p[l];
        }
        if !singular {
            for g in 0..ng {
                if self.bc.pressure_mask[g] {
                    p_glob[g] = 0.0;
                }
            }
        }
        let proj = |x: &mut [f64]| remove_mean(x);
        let project: Option<&dyn Fn(&mut [f64])> = if singular { Some(&proj) } else { None };
        let p_report = gmres(
            &pop,
            &rhs_p,
            &self.pressure_precond,
            &mut p_glob,
            self.params.pressure_tol,
            self.params.restart,
            self.params.maxit,
            project,
        )?;
        if !p_report.converged {
            return Err(Error::SolveFailed {
                step,
                field: "pressure".into(),
                report: p_report,
            });
        }
        let divergence_residual = {
            let mut ap = vec![0.0; ng];
            pop.apply(&p_glob, &mut ap);
            let mut r: Vec<f64> = ap.iter().zip(&rhs_p).map(|(a, b)| b - a).collect();
            if singular {
                remove_mean(&mut r);
            }
            let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let bn = rhs_p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if bn > 0.0 {
                rn / bn
            } else {
                rn
            }
        };
        let p_new = disc.scatter(&p_glob);

        // velocity
        let (px, py) = disc.gradient(&p_new);
        let nu = self.params.nu;
        let nu_eff: Vec<f64> = s.nu_t.iter().map(|t| nu + t).collect();
        let react = sch.beta0 / dt;
        let mut vel_new: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let mut vel_reports = [SolveReport::default(); 2];
        for c in 0..2 {
            let grad = if c == 0 { &px } else { &py };
            let w: Vec<f64> = (0..n).map(|l| disc.geom.mass[l] * (g_mom[c][l] - grad[l])).collect();
            let rhs = disc.gather(&w);
            finite_rhs(step, if c == 0 { "u" } else { "v" }, &rhs)?;
            let cur = if c == 0 { &s.u } else { &s.v };
            let guess = {
                let mut gs = vec![0.0; ng];
                for (l, &g) in global.iter().enumerate() {
                    gs[g] = cur[l];
                }
                gs
            };
            let (x, rep) = self.solve_helmholtz(
                Coefficient::Field(&nu_eff),
                Coefficient::Constant(react),
                rhs,
                &self.bc.velocity_mask[c],
                &ub[c],
                &guess,
                self.params.velocity_tol,
            )?;
            if !rep.converged {
                return Err(Error::SolveFailed {
                    step,
                    field: ["u", "v"][c].into(),
                    report: rep,
                });
            }
            vel_reports[c] = rep;
            vel_new[c] = disc.scatter(&x);
        }

        // turbulence scalars
        let mut scalar_reports = (None, None);
        let mut scalar_push = None;
        let mut new_scalars = None;
        if let Some(cc) = &closure {
            let adv_k = disc.advect(&s.u, &s.v, &s.k);
            let adv_t = disc.advect(&s.u, &s.v, &s.tau);
            let ek: Vec<f64> = (0..n).map(|l| cc.src_k[l] - adv_k[l]).collect();
            let et: Vec<f64> = (0..n).map(|l| cc.benton[l] * cc.src_tau[l] - adv_t[l]).collect();
            let cur = [s.k.clone(), s.tau.clone()];
            let expl_s = [ek, et];
            let ones = vec![1.0; n];
            let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
            let mut reps = [SolveReport::default(); 2];
            for c in 0..2 {
                let past: Vec<&[f64]> = s.history.scalars.iter().map(|p| p[c].as_slice()).collect();
                let mut gs = bdf_sum(&cur[c], &past);
                let e = ext_of(&expl_s, &s.history.scalar_explicit, c);
                for (a, b) in gs.iter_mut().zip(&e) {
                    *a += b;
                }
                // the τ equation is divided through by its limiter factor
                let rate: &[f64] = if c == 0 { &ones } else { &cc.benton };
                let w: Vec<f64> = (0..n).map(|l| disc.geom.mass[l] * gs[l] / rate[l]).collect();
                let rhs = disc.gather(&w);
                finite_rhs(step, if c == 0 { "k" } else { "tau" }, &rhs)?;
                let (gamma, r) = if c == 0 {
                    (&cc.gamma_k, &cc.react_k)
                } else {
                    (&cc.gamma_tau, &cc.react_tau)
                };
                let reaction: Vec<f64> = r.iter().zip(rate).map(|(x, b)| react / b + x).collect();
                let inflow_value = if c == 0 { self.params.k_inf } else { self.params.tau_inf };
                let lift = self.bc.scalar_values(inflow_value);
                let mut guess = vec![0.0; ng];
                for (l, &g) in global.iter().enumerate() {
                    guess[g] = cur[c][l];
                }
                let (x, rep) = self.solve_helmholtz(
                    Coefficient::Field(gamma),
                    Coefficient::Field(&reaction),
                    rhs,
                    &self.bc.scalar_mask,
                    &lift,
                    &guess,
                    self.params.scalar_tol,
                )?;
                if !rep.converged {
                    return Err(Error::SolveFailed {
                        step,
                        field: ["k", "tau"][c].into(),
                        report: rep,
                    });
                }
                reps[c] = rep;
                out[c] = disc.scatter(&x);
            }
            let mut clips = [0u64; 2];
            for c in 0..2 {
                for x in out[c].iter_mut() {
                    if *x < 0.0 {
                        *x = 0.0;
                        clips[c] += 1;
                    }
                }
            }
            s.counters.k_clips += clips[0];
            s.counters.tau_clips += clips[1];
            s.counters.tau_floor += cc.tau_floor;
            s.counters.ddes_guards += cc.ddes_guards;
            scalar_reports = (Some(reps[0]), Some(reps[1]));
            scalar_push = Some((cur, expl_s));
            new_scalars = Some(out);
        }

        let keep = self.params.scheme_order.saturating_sub(1);
        let [un, vn] = vel_new;
        let old_u = std::mem::replace(&mut s.u, un);
        let old_v = std::mem::replace(&mut s.v, vn);
        s.history.push(keep, dt, [old_u, old_v], expl, visc, scalar_push);
        if let Some([k, t]) = new_scalars {
            s.k = k;
            s.tau = t;
        }
        s.p = p_new;
        s.t = t_new;
        s.step = step;
        s.check_finite()?;
        self.refresh_closure(s)?;

        let (ux, _) = disc.gradient(&s.u);
        let (_, vy) = disc.gradient(&s.v);
        let div: Vec<f64> = (0..n).map(|l| ux[l] + vy[l]).collect();
        Ok(StepReport {
            step,
            t: t_new,
            dt,
            order,
            pressure: p_report,
            velocity: vel_reports,
            k: scalar_reports.0,
            tau: scalar_reports.1,
            divergence_residual,
            divergence_l2: disc.l2_norm(&div),
        })
    }
}

/// Free-function form of [`FlowSolver::advance`].
pub fn advance_timestep(solver: &FlowSolver, state: &mut SimulationState, dt: f64) -> Result<StepReport> {
    solver.advance(state, dt)
}
