//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::plot3d::BoundarySpec;
use crate::turbulence::DiffusivityForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Laminar,
    RansKtau,
    DdesKtau,
    HpfLes,
}

impl Model {
    pub fn has_closure(self) -> bool {
        matches!(self, Model::RansKtau | Model::DdesKtau)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Laminar => "laminar",
            Model::RansKtau => "rans_ktau",
            Model::DdesKtau => "ddes_ktau",
            Model::HpfLes => "hpf_les",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSection {
    #[serde(default = "default_name")]
    pub name: String,
    /// Reynolds number based on chord and freestream speed.
    pub reynolds: f64,
    /// Angle of attack in degrees.
    pub aoa: f64,
    pub model: Model,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_final: f64,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default)]
    pub dt_initial: Option<f64>,
    /// Fixed step; disables CFL adaptation when set.
    #[serde(default)]
    pub dt_fixed: Option<f64>,
    #[serde(default)]
    pub body_force: [f64; 2],
    #[serde(default)]
    pub restart: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub order: usize,
    #[serde(default = "default_scheme_order")]
    pub scheme_order: usize,
    #[serde(default = "default_filter_modes")]
    pub filter_modes: usize,
    #[serde(default)]
    pub filter_chi: f64,
    #[serde(default)]
    pub dealias: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreestreamSection {
    #[serde(default = "default_k_inf")]
    pub k_inf: f64,
    /// Defaults to `μ_t/μ = 1e-2` at `k_inf`.
    #[serde(default)]
    pub tau_inf: Option<f64>,
    #[serde(default)]
    pub diffusivity: DiffusivityForm,
}

impl Default for FreestreamSection {
    fn default() -> Self {
        Self {
            k_inf: default_k_inf(),
            tau_inf: None,
            diffusivity: DiffusivityForm::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_pressure_tol")]
    pub pressure_tol: f64,
    #[serde(default = "default_velocity_tol")]
    pub velocity_tol: f64,
    #[serde(default = "default_velocity_tol")]
    pub scalar_tol: f64,
    #[serde(default = "default_maxit")]
    pub maxit: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            pressure_tol: default_pressure_tol(),
            velocity_tol: default_velocity_tol(),
            scalar_tol: default_velocity_tol(),
            maxit: default_maxit(),
            restart: default_restart(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub path: PathBuf,
    #[serde(default)]
    pub boundary_spec: BoundarySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_output_dir")]
    pub directory: PathBuf,
    /// Steps between field dumps; 0 writes only the final state.
    #[serde(default)]
    pub field_every: u64,
    /// Steps between checkpoints; 0 checkpoints only at the end.
    #[serde(default)]
    pub checkpoint_every: u64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_output_dir(),
            field_every: 0,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub case: CaseSection,
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub freestream: FreestreamSection,
    #[serde(default)]
    pub solvers: SolverSection,
    pub mesh: MeshSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_name() -> String {
    "case".into()
}
fn default_cfl() -> f64 {
    0.5
}
fn default_dt_max() -> f64 {
    1e-2
}
fn default_scheme_order() -> usize {
    3
}
fn default_filter_modes() -> usize {
    1
}
fn default_k_inf() -> f64 {
    1e-6
}
fn default_pressure_tol() -> f64 {
    1e-8
}
fn default_velocity_tol() -> f64 {
    1e-10
}
fn default_maxit() -> usize {
    500
}
fn default_restart() -> usize {
    40
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

const REQUIRED: &[(&str, &str)] = &[
    ("case", "reynolds"),
    ("case", "aoa"),
    ("case", "model"),
    ("case", "t_final"),
    ("discretization", "order"),
    ("mesh", "path"),
];

impl CaseConfig {
    /// Parse TOML text, reporting every missing or invalid key at once.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Configuration(e.to_string()))?;
        let mut missing = Vec::new();
        for (section, key) in REQUIRED {
            let present = value
                .get(*section)
                .and_then(|s| s.as_table())
                .is_some_and(|t| t.contains_key(*key));
            if !present {
                missing.push(format!("{section}.{key}"));
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        let cfg: CaseConfig = toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load from a file; relative mesh, output and restart paths are resolved
    /// against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            resolve(&mut cfg.mesh.path);
            resolve(&mut cfg.output.directory);
            if let Some(r) = cfg.case.restart.as_mut() {
                resolve(r);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let c = &self.case;
        if !(c.reynolds > 0.0 && c.reynolds.is_finite()) {
            bad.push(format!("case.reynolds (must be positive, got {})", c.reynolds));
        }
        if !(0.0..=180.0).contains(&c.aoa) {
            bad.push(format!("case.aoa (must lie in [0, 180], got {})", c.aoa));
        }
        if !(c.cfl > 0.0) {
            bad.push(format!("case.cfl (must be positive, got {})", c.cfl));
        }
        if !(c.t_final > 0.0) {
            bad.push(format!("case.t_final (must be positive, got {})", c.t_final));
        }
        if !(c.dt_max > 0.0) {
            bad.push(format!("case.dt_max (must be positive, got {})", c.dt_max));
        }
        if c.dt_fixed.is_some_and(|d| !(d > 0.0)) {
            bad.push("case.dt_fixed (must be positive)".into());
        }
        let d = &self.discretization;
        if !(1..=16).contains(&d.order) {
            bad.push(format!("discretization.order (must lie in 1..=16, got {})", d.order));
        }
        if !(1..=3).contains(&d.scheme_order) {
            bad.push(format!(
                "discretization.scheme_order (must be 1, 2 or 3, got {})",
                d.scheme_order
            ));
        }
        if d.filter_modes > d.order {
            bad.push(format!(
                "discretization.filter_modes (must not exceed order {}, got {})",
                d.order, d.filter_modes
            ));
        }
        if !(d.filter_chi >= 0.0) {
            bad.push(format!("discretization.filter_chi (must be nonnegative, got {})", d.filter_chi));
        }
        let f = &self.freestream;
        if !(f.k_inf >= 0.0) {
            bad.push(format!("freestream.k_inf (must be nonnegative, got {})", f.k_inf));
        }
        if f.tau_inf.is_some_and(|t| !(t >= 0.0)) {
            bad.push("freestream.tau_inf (must be nonnegative)".into());
        }
        let s = &self.solvers;
        for (name, v) in [
            ("solvers.pressure_tol", s.pressure_tol),
            ("solvers.velocity_tol", s.velocity_tol),
            ("solvers.scalar_tol", s.scalar_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                bad.push(format!("{name} (must lie in (0, 1), got {v})"));
            }
        }
        if s.maxit == 0 || s.restart == 0 {
            bad.push("solvers.maxit/solvers.restart (must be positive)".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingKeys(bad))
        }
    }

    /// Kinematic viscosity for unit chord and freestream speed.
    pub fn nu(&self) -> f64 {
        1.0 / self.case.reynolds
    }

    /// Freestream direction `θ̂`.
    pub fn flow_direction(&self) -> [f64; 2] {
        let a = self.case.aoa.to_radians();
        [a.cos(), a.sin()]
    }

    pub fn k_inf(&self) -> f64 {
        self.freestream.k_inf
    }

    /// `τ_∞`, defaulting to the value giving `μ_t/μ = 1e-2`.
    pub fn tau_inf(&self) -> f64 {
        self.freestream.tau_inf.unwrap_or_else(|| {
            if self.freestream.k_inf > 0.0 {
                1e-2 * self.nu() / self.freestream.k_inf
            } else {
                0.0
            }
        })
    }
}
