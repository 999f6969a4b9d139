//! Named verification suites and their dispatcher.

use std::f64::consts::PI;
use std::path::Path;

use super::algebra::{self, DDES_SAMPLES, DUALITY_SAMPLES};
use super::flows::{self, observed_orders, KovasznaySetup, TaylorGreenSetup};
use super::VerificationReport;
use crate::error::{Error, Result};
use crate::flow_solver::channel::{compare_channel, ChannelSetup};
use crate::flow_solver::step::masked_apply;
use crate::flow_solver::{run_case, CaseConfig};
use crate::linsolve::{pcg, Jacobi};
use crate::mesh::basis::gll_nodes;
use crate::mesh::generate::{self, BoxTags};
use crate::mesh::{BoundaryTag, ReferenceBasis};
use crate::sem_ops::{Coefficient, Discretization};

/// Suites runnable by name; `naca-rans` additionally needs `extended`.
pub const SUITES: &[&str] = &[
    "basis",
    "filters",
    "closure-duality",
    "ddes-algebra",
    "kovasznay",
    "taylor-green",
    "channel",
    "naca-rans",
];

const SEED: u64 = 20240611;

/// Run suite `name`. `work_dir` receives artifacts of suites that write files.
pub fn run_suite(name: &str, extended: bool, work_dir: &Path) -> Result<VerificationReport> {
    match name {
        "basis" => basis(),
        "filters" => {
            let mut r = algebra::filter_weights()?;
            r.merge(algebra::constant_tables());
            Ok(r)
        }
        "closure-duality" => algebra::closure_duality(DUALITY_SAMPLES, SEED),
        "ddes-algebra" => algebra::ddes_algebra(DDES_SAMPLES, SEED),
        "kovasznay" => kovasznay(),
        "taylor-green" => taylor_green(),
        "channel" => channel(),
        "naca-rans" => {
            if !extended {
                return Err(Error::Parameter("suite naca-rans runs only with --extended".into()));
            }
            naca_rans(&NacaSetup::default(), work_dir)
        }
        other => Err(Error::Parameter(format!(
            "unknown suite '{other}'; available: {}",
            SUITES.join(", ")
        ))),
    }
}

/// Max nodal error of the Poisson solve `−∇²u = 2π² sin πx sin πy` on the
/// unit square with `elements²` elements of order `order`.
pub fn poisson_error(order: usize, elements: usize) -> Result<f64> {
    let basis = ReferenceBasis::new(order)?;
    let mesh = generate::rectangle(&basis, elements, elements, [0.0, 1.0], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall))?;
    let disc = Discretization::new(mesh, basis)?;
    let global = disc.mesh.global_index();
    let mut mask = vec![false; disc.num_global()];
    for f in &disc.geom.faces {
        for &l in &f.nodes {
            mask[global[l]] = true;
        }
    }
    let exact = disc.sample(|x, y| (PI * x).sin() * (PI * y).sin());
    let forcing: Vec<f64> = exact.iter().zip(&disc.geom.mass).map(|(u, m)| 2.0 * PI * PI * u * m).collect();
    let mut rhs = disc.gather(&forcing);
    for (r, &m) in rhs.iter_mut().zip(&mask) {
        if m {
            *r = 0.0;
        }
    }
    let one = Coefficient::Constant(1.0);
    let zero = Coefficient::Constant(0.0);
    let diag = disc.gather(&disc.helmholtz_diagonal(one, zero));
    let pre = Jacobi::new(&diag, Some(&mask))?;
    let op = |x: &[f64], y: &mut [f64]| masked_apply(&disc, &mask, one, zero, x, y);
    let mut x = vec![0.0; disc.num_global()];
    let rep = pcg(&op, &rhs, &pre, &mut x, 1e-14, 10_000, None)?;
    if !rep.converged {
        return Err(Error::Parameter(format!("Poisson solve did not converge: {rep}")));
    }
    let u = disc.scatter(&x);
    Ok(u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn basis() -> Result<VerificationReport> {
    let mut r = VerificationReport::new("basis");
    let (mut wsum, mut sym, mut deriv, mut quad) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for n in 1..=16 {
        let b = ReferenceBasis::new(n)?;
        let x = gll_nodes(n);
        wsum = wsum.max((b.weights().iter().sum::<f64>() - 2.0).abs());
        for i in 0..=n {
            sym = sym.max((x[i] + x[n - i]).abs());
        }
        // d/dx x^n = n x^{n-1}
        let f: Vec<f64> = x.iter().map(|v| v.powi(n as i32)).collect();
        let df = b.differentiate(&f);
        for (v, d) in x.iter().zip(&df) {
            deriv = deriv.max((d - n as f64 * v.powi(n as i32 - 1)).abs() / n as f64);
        }
        // exact for degree 2n − 1
        let p = 2 * n - 2;
        let integral: f64 = x.iter().zip(b.weights()).map(|(v, w)| w * v.powi(p as i32)).sum();
        quad = quad.max((integral - 2.0 / (p as f64 + 1.0)).abs());
    }
    r.at_most("GLL weight sum - 2, N=1..16", wsum, 1e-13);
    r.at_most("GLL node symmetry, N=1..16", sym, 1e-14);
    r.at_most("derivative of x^N (scaled), N=1..16", deriv, 1e-10);
    r.at_most("quadrature of x^(2N-2), N=1..16", quad, 1e-13);
    let e4 = poisson_error(4, 4)?;
    let e8 = poisson_error(8, 4)?;
    let e12 = poisson_error(12, 4)?;
    r.at_most("Poisson Linf error N=4", e4, f64::INFINITY);
    r.at_least("Poisson error ratio N=4/N=8", e4 / e8, 100.0);
    r.at_most("Poisson Linf error N=12", e12, 1e-9);
    Ok(r)
}

fn kovasznay() -> Result<VerificationReport> {
    let setup = KovasznaySetup::default();
    let check = flows::kovasznay(&setup)?;
    let mut r = VerificationReport::new("kovasznay");
    r.push("elements", (setup.nx * setup.ny) as f64, "== 8", setup.nx * setup.ny == 8);
    r.at_most("steady Linf velocity error (Re=40, N=8)", check.linf_error, 1e-6);
    r.at_most(
        "max divergence residual / pressure tol",
        check.max_divergence_residual / check.pressure_tol,
        10.0,
    );
    r.push("steps to steady state", check.steps as f64, "< max", check.steps < setup.max_steps);
    Ok(r)
}

/// Step counts for the halving study.
pub const TAYLOR_GREEN_STEPS: [u64; 3] = [20, 40, 80];

fn taylor_green() -> Result<VerificationReport> {
    let mut r = VerificationReport::new("taylor-green");
    for (order, bound) in [(2usize, 1.9), (3, 2.8)] {
        let setup = TaylorGreenSetup {
            scheme_order: order,
            ..Default::default()
        };
        let mut errors = Vec::new();
        let mut last = None;
        let mut worst_div: f64 = 0.0;
        for &steps in &TAYLOR_GREEN_STEPS {
            let c = flows::taylor_green(&setup, steps)?;
            errors.push(c.linf_error);
            worst_div = worst_div.max(c.max_divergence_residual / c.pressure_tol);
            last = Some(c);
        }
        let orders = observed_orders(&errors);
        let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
        r.at_least(format!("BDF{order}/EXT{order} observed order"), min_order, bound);
        if let Some(c) = last {
            r.at_most(format!("BDF{order} energy decay error at finest step"), c.energy_error, 1e-6);
        }
        r.at_most(format!("BDF{order} max divergence residual / pressure tol"), worst_div, 10.0);
    }
    Ok(r)
}

fn channel() -> Result<VerificationReport> {
    let cmp = compare_channel(&ChannelSetup::default())?;
    let mut r = VerificationReport::new("channel");
    r.push(
        "both solves converged",
        (cmp.ktau.converged && cmp.komega.converged) as u8 as f64,
        "== 1",
        cmp.ktau.converged && cmp.komega.converged,
    );
    r.at_most("U profile relative L2 difference k-tau vs k-omega", cmp.l2_difference, 0.01);
    r.within("k-tau log slope over 30<y+<100", cmp.log_slope_ktau, 1.0 / 0.41, 0.05);
    Ok(r)
}

/// Coarse O-grid RANS around NACA 0012.
#[derive(Debug, Clone, Copy)]
pub struct NacaSetup {
    pub reynolds: f64,
    pub aoa: f64,
    pub elements_around: usize,
    pub elements_normal: usize,
    pub order: usize,
    pub farfield_radius: f64,
    /// Height of the first element layer in chords.
    pub first_spacing: f64,
    /// Convective time units to integrate.
    pub t_final: f64,
    pub cfl: f64,
    /// Step cap; the run stops early and reports the forces reached.
    pub max_steps: Option<u64>,
}

impl Default for NacaSetup {
    fn default() -> Self {
        Self {
            reynolds: 6e6,
            aoa: 10.0,
            elements_around: 64,
            elements_normal: 32,
            order: 3,
            farfield_radius: 50.0,
            first_spacing: 2e-5,
            t_final: 20.0,
            cfl: 0.5,
            max_steps: None,
        }
    }
}

pub fn naca_case_config(setup: &NacaSetup, mesh_path: &Path, output: &Path) -> Result<CaseConfig> {
    let text = format!(
        r#"
[case]
name = "naca0012"
reynolds = {re}
aoa = {aoa}
model = "rans_ktau"
t_final = {t}
cfl = {cfl}
dt_max = 0.05
[discretization]
order = {order}
[solvers]
maxit = 4000
restart = 100
[mesh]
path = "{mesh}"
[mesh.boundary_spec]
spline = ["wall"]
chord = 1.0
[[mesh.boundary_spec.blocks]]
jmin = "wall"
jmax = "inflow_outflow"
wrap_i = true
spline_breaks = [[0, 0]]
[output]
directory = "{out}"
"#,
        re = setup.reynolds,
        aoa = setup.aoa,
        t = setup.t_final,
        cfl = setup.cfl,
        order = setup.order,
        mesh = mesh_path.display(),
        out = output.display(),
    );
    let mut cfg = CaseConfig::from_toml_str(&text)?;
    cfg.case.max_steps = setup.max_steps;
    Ok(cfg)
}

pub fn naca_rans(setup: &NacaSetup, work_dir: &Path) -> Result<VerificationReport> {
    std::fs::create_dir_all(work_dir).map_err(|e| Error::io(work_dir, e))?;
    let (xs, ys) = generate::naca_ogrid_points(
        0.12,
        setup.elements_around,
        setup.elements_normal,
        setup.farfield_radius,
        setup.first_spacing,
    )?;
    let mesh_path = work_dir.join("naca0012.p3d");
    generate::write_plot3d(&mesh_path, &xs, &ys)?;
    let cfg = naca_case_config(setup, &mesh_path, &work_dir.join("run"))?;
    let art = run_case(&cfg, None)?;
    let mut r = VerificationReport::new("naca-rans");
    r.at_least("convective times integrated", art.summary.t, setup.t_final * (1.0 - 1e-9));
    r.within("Cl (Re=6e6, AoA=10)", art.summary.cl, 1.08, 0.05);
    r.within("Cd (Re=6e6, AoA=10)", art.summary.cd, 0.0125, 0.20);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_lists_available() {
        let err = run_suite("nope", false, Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("kovasznay") && err.contains("channel"));
    }

    #[test]
    fn extended_suite_needs_flag() {
        assert!(run_suite("naca-rans", false, Path::new(".")).is_err());
    }

    #[test]
    fn poisson_converges_spectrally() {
        let e2 = poisson_error(2, 2).unwrap();
        let e6 = poisson_error(6, 2).unwrap();
        assert!(e6 < 1e-3 * e2, "{e2} {e6}");
    }

    #[test]
    fn naca_config_parses() {
        let cfg = naca_case_config(&NacaSetup::default(), Path::new("m.p3d"), Path::new("out")).unwrap();
        assert_eq!(cfg.discretization.order, 3);
        assert_eq!(cfg.mesh.boundary_spec.blocks.len(), 1);
    }
}
