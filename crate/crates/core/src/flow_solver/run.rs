//! Case driver: time loop, adaptive step, outputs and checkpoints.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cfl::cfl_rate;
use super::config::CaseConfig;
use super::output::write_vtk;
use super::state::{EventCounters, SimulationState};
use super::step::{FlowSolver, StepReport};
use crate::error::{Error, Result};
use crate::mesh::plot3d::load_plot3d_mesh_curved;
use crate::mesh::ReferenceBasis;
use crate::postproc::io::{write_surface, Table};
use crate::postproc::{force_coefficients, q_criterion_field, surface_coefficients, FlowReference};
use crate::sem_ops::Discretization;

/// Largest ratio between consecutive adaptive steps.
pub const DT_GROWTH: f64 = 1.2;

pub const SERIES_FILE: &str = "time_series.csv";
pub const SOLVER_LOG_FILE: &str = "solver_log.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const SURFACE_FILE: &str = "surface.csv";

/// Mean Krylov iterations per step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanIterations {
    pub pressure: f64,
    pub velocity: f64,
    pub k: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub case: String,
    pub model: String,
    pub steps: u64,
    pub t: f64,
    pub wall_seconds: f64,
    pub mean_iterations: MeanIterations,
    pub max_divergence_residual: f64,
    pub counters: EventCounters,
    pub k_inf: f64,
    pub tau_inf: f64,
    pub cl: f64,
    pub cd: f64,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub directory: PathBuf,
    pub series: PathBuf,
    pub solver_log: PathBuf,
    pub summary_path: PathBuf,
    pub checkpoint: PathBuf,
    pub fields: Vec<PathBuf>,
    pub summary: RunSummary,
    pub state: SimulationState,
}

/// Read the configured mesh at the configured order.
pub fn load_discretization(cfg: &CaseConfig) -> Result<Discretization> {
    let basis = ReferenceBasis::new(cfg.discretization.order)?;
    if !cfg.mesh.path.exists() {
        return Err(Error::Configuration(format!(
            "mesh file {} does not exist",
            cfg.mesh.path.display()
        )));
    }
    let mesh = load_plot3d_mesh_curved(&cfg.mesh.path, &cfg.mesh.boundary_spec, &basis)?;
    Discretization::new(mesh, basis)
}

/// Step size for the next step: fixed, or CFL-targeted with bounded growth.
pub fn next_dt(cfg: &CaseConfig, disc: &Discretization, s: &SimulationState) -> f64 {
    let c = &cfg.case;
    let remaining = c.t_final - s.t;
    let dt = if let Some(d) = c.dt_fixed {
        d
    } else {
        let rate = cfl_rate(disc, &s.u, &s.v);
        let mut dt = if rate > 0.0 { (c.cfl / rate).min(c.dt_max) } else { c.dt_max };
        match s.history.dts.first() {
            Some(&prev) => dt = dt.min(DT_GROWTH * prev),
            None => {
                if let Some(d0) = c.dt_initial {
                    dt = dt.min(d0);
                }
            }
        }
        dt
    };
    // avoid a sliver of a step at the end
    if remaining < 1.5 * dt && remaining > dt {
        0.5 * remaining
    } else {
        dt.min(remaining)
    }
}

struct Writers {
    series: Table,
    log: Table,
}

impl Writers {
    fn new() -> Self {
        Self {
            series: Table::new(&[
                "step",
                "t",
                "dt",
                "cl",
                "cd",
                "cfl",
                "iterations",
                "div_residual",
            ]),
            log: Table::new(&[
                "step",
                "order",
                "p_iterations",
                "p_residual",
                "u_iterations",
                "u_residual",
                "v_iterations",
                "v_residual",
                "k_iterations",
                "k_residual",
                "tau_iterations",
                "tau_residual",
                "div_l2",
            ]),
        }
    }

    fn record(&mut self, r: &StepReport, cfl: f64, forces: (f64, f64)) {
        let k = r.k.unwrap_or_default();
        let tau = r.tau.unwrap_or_default();
        let iters = r.pressure.iterations + r.velocity[0].iterations + r.velocity[1].iterations + k.iterations + tau.iterations;
        self.series.push_row(&[
            r.step as f64,
            r.t,
            r.dt,
            forces.0,
            forces.1,
            cfl,
            iters as f64,
            r.divergence_residual,
        ]);
        self.log.push_row(&[
            r.step as f64,
            r.order as f64,
            r.pressure.iterations as f64,
            r.pressure.final_residual,
            r.velocity[0].iterations as f64,
            r.velocity[0].final_residual,
            r.velocity[1].iterations as f64,
            r.velocity[1].final_residual,
            k.iterations as f64,
            k.final_residual,
            tau.iterations as f64,
            tau.final_residual,
            r.divergence_l2,
        ]);
    }
}

fn reference(cfg: &CaseConfig, disc: &Discretization) -> FlowReference {
    FlowReference::new(cfg.nu(), cfg.case.aoa, disc.mesh.chord())
}

fn forces(cfg: &CaseConfig, solver: &FlowSolver, s: &SimulationState) -> (f64, f64) {
    let r = reference(cfg, &solver.disc);
    let dist = surface_coefficients(&solver.disc, &s.u, &s.v, &s.p, &r);
    match force_coefficients(&dist, &r) {
        Ok(f) => (f.cl, f.cd),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

pub fn write_checkpoint(path: &Path, s: &SimulationState) -> Result<()> {
    std::fs::write(path, s.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<SimulationState> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SimulationState::from_json(&text)
}

/// Point fields written to each VTK dump.
pub fn write_fields(path: &Path, solver: &FlowSolver, s: &SimulationState) -> Result<()> {
    let disc = &solver.disc;
    let q = q_criterion_field(disc, &s.u, &s.v);
    let c = &s.closure;
    write_vtk(
        path,
        disc,
        &format!("t = {:e}, step {}", s.t, s.step),
        &[
            ("u", &s.u),
            ("v", &s.v),
            ("p", &s.p),
            ("k", &s.k),
            ("tau", &s.tau),
            ("mu_t", &s.nu_t),
            ("F1", &c.f1),
            ("f_d", &c.f_d),
            ("l_ratio", &c.l_ratio),
            ("l_ddes", &c.l_ddes),
            ("Q", &q),
        ],
    )
}

fn summary_text(s: &RunSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "case                 {}", s.case);
    let _ = writeln!(t, "model                {}", s.model);
    let _ = writeln!(t, "steps                {}", s.steps);
    let _ = writeln!(t, "final time           {:.6e}", s.t);
    let _ = writeln!(t, "k_inf                {:.6e}", s.k_inf);
    let _ = writeln!(t, "tau_inf              {:.6e}", s.tau_inf);
    let _ = writeln!(t, "cl                   {:.8e}", s.cl);
    let _ = writeln!(t, "cd                   {:.8e}", s.cd);
    let m = &s.mean_iterations;
    let _ = writeln!(t, "mean iterations      p {:.2}  u,v {:.2}  k {:.2}  tau {:.2}", m.pressure, m.velocity, m.k, m.tau);
    let _ = writeln!(t, "max div residual     {:.3e}", s.max_divergence_residual);
    let c = &s.counters;
    let _ = writeln!(
        t,
        "events               k clips {}  tau clips {}  tau floor {}  ddes guards {}",
        c.k_clips, c.tau_clips, c.tau_floor, c.ddes_guards
    );
    let _ = writeln!(t);
    let _ = writeln!(t, "[timing]");
    let _ = writeln!(t, "wall seconds         {:.3}", s.wall_seconds);
    t
}

/// Run a configured case, writing artifacts into `output_dir` (or the
/// configured directory).
pub fn run_case(cfg: &CaseConfig, output_dir: Option<&Path>) -> Result<RunArtifacts> {
    let disc = load_discretization(cfg)?;
    let solver = FlowSolver::from_config(cfg, disc)?;
    let mut state = match &cfg.case.restart {
        Some(path) => {
            let s = read_checkpoint(path)?;
            if s.num_points() != solver.disc.num_local() || s.model != cfg.case.model {
                return Err(Error::Configuration(format!(
                    "checkpoint {} does not match the case mesh or model",
                    path.display()
                )));
            }
            s
        }
        None => solver.initial_state()?,
    };
    run_with_solver(cfg, &solver, &mut state, output_dir)
}

/// Time loop on an existing solver and state.
pub fn run_with_solver(
    cfg: &CaseConfig,
    solver: &FlowSolver,
    state: &mut SimulationState,
    output_dir: Option<&Path>,
) -> Result<RunArtifacts> {
    let dir = output_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let series = dir.join(SERIES_FILE);
    let solver_log = dir.join(SOLVER_LOG_FILE);
    let checkpoint = dir.join(CHECKPOINT_FILE);
    let summary_path = dir.join(SUMMARY_FILE);
    let started = Instant::now();
    let mut w = Writers::new();
    let mut fields = Vec::new();
    let mut sums = [0usize; 4];
    let mut taken = 0u64;
    let mut max_res: f64 = 0.0;
    let eps = 1e-12 * cfg.case.t_final.max(1.0);
    let out = &cfg.output;
    let max_steps = cfg.case.max_steps;
    while state.t < cfg.case.t_final - eps && max_steps.is_none_or(|m| taken < m) {
        let dt = next_dt(cfg, &solver.disc, state);
        let cfl = dt * cfl_rate(&solver.disc, &state.u, &state.v);
        let previous = state.clone();
        let report = match solver.advance(state, dt) {
            Ok(r) => r,
            Err(e) => {
                *state = previous;
                write_checkpoint(&checkpoint, state)?;
                w.series.write(&series)?;
                w.log.write(&solver_log)?;
                return Err(e);
            }
        };
        taken += 1;
        sums[0] += report.pressure.iterations;
        sums[1] += report.velocity[0].iterations + report.velocity[1].iterations;
        sums[2] += report.k.map_or(0, |r| r.iterations);
        sums[3] += report.tau.map_or(0, |r| r.iterations);
        max_res = max_res.max(report.divergence_residual);
        w.record(&report, cfl, forces(cfg, solver, state));
        if out.field_every > 0 && state.step % out.field_every == 0 {
            let p = dir.join(format!("field_{:06}.vtk", state.step));
            write_fields(&p, solver, state)?;
            fields.push(p);
        }
        if out.checkpoint_every > 0 && state.step % out.checkpoint_every == 0 {
            write_checkpoint(&checkpoint, state)?;
        }
    }
    let final_field = dir.join(format!("field_{:06}.vtk", state.step));
    if !fields.contains(&final_field) {
        write_fields(&final_field, solver, state)?;
        fields.push(final_field);
    }
    write_checkpoint(&checkpoint, state)?;
    w.series.write(&series)?;
    w.log.write(&solver_log)?;
    let r = reference(cfg, &solver.disc);
    let dist = surface_coefficients(&solver.disc, &state.u, &state.v, &state.p, &r);
    if !dist.is_empty() {
        write_surface(&dir.join(SURFACE_FILE), &dist)?;
    }
    let (cl, cd) = forces(cfg, solver, state);
    let n = taken.max(1) as f64;
    let summary = RunSummary {
        case: cfg.case.name.clone(),
        model: cfg.case.model.name().into(),
        steps: state.step,
        t: state.t,
        wall_seconds: started.elapsed().as_secs_f64(),
        mean_iterations: MeanIterations {
            pressure: sums[0] as f64 / n,
            velocity: sums[1] as f64 / (2.0 * n),
            k: sums[2] as f64 / n,
            tau: sums[3] as f64 / n,
        },
        max_divergence_residual: max_res,
        counters: state.counters,
        k_inf: solver.params.k_inf,
        tau_inf: solver.params.tau_inf,
        cl,
        cd,
    };
    std::fs::write(&summary_path, summary_text(&summary)).map_err(|e| Error::io(&summary_path, e))?;
    Ok(RunArtifacts {
        directory: dir,
        series,
        solver_log,
        summary_path,
        checkpoint,
        fields,
        summary,
        state: state.clone(),
    })
}
