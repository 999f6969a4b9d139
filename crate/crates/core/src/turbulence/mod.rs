//! Pointwise closure algebra: k-τ SST, the k-ω SST reference form, the
//! Benton limiter and the DDES length scales.

pub mod ddes;
pub mod komega;
pub mod ktau;

use serde::{Deserialize, Serialize};

pub use ddes::{ddes_length_scale, delay_function, DdesEvaluation};
pub use komega::{komega_sources, KomegaEvaluation};
pub use ktau::{
    s_tau, s_tau_from_sqrt,
    benton_factor, blend_constants, blending_state, eddy_viscosity, evaluate_closure, ktau_sources,
    production, split_ktau_sources, BlendedConstants, Blending, ClosureEvaluation, SourceSplit, TauSourceParts,
};

/// Lower bound applied to τ wherever it appears in a denominator
/// (nondimensional, in units of c/U_o).
pub const TAU_FLOOR: f64 = 1e-10;

/// Floor on `√(0.5(S² + Ω²))` in the delay-function denominator.
pub const SHEAR_FLOOR: f64 = 1e-10;

/// Floor on the cross-diffusion term `CD_kω`.
pub const CD_FLOOR: f64 = 1e-10;

/// How the closure diffusivities combine molecular and eddy viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusivityForm {
    /// `Γ = μ + σ μ_t` (Menter).
    #[default]
    Multiplied,
    /// `Γ = μ + μ_t / σ`.
    Divided,
}

impl DiffusivityForm {
    pub fn gamma(self, mu: f64, mu_t: f64, sigma: f64) -> f64 {
        match self {
            DiffusivityForm::Multiplied => mu + sigma * mu_t,
            DiffusivityForm::Divided => mu + mu_t / sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SstConstants {
    pub alpha1: f64,
    pub beta1: f64,
    pub sigma_k1: f64,
    pub sigma_w1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub sigma_k2: f64,
    pub sigma_w2: f64,
    /// `β* = C_μ`.
    pub beta_star: f64,
    pub a1: f64,
    pub kappa: f64,
    pub diffusivity: DiffusivityForm,
}

impl Default for SstConstants {
    fn default() -> Self {
        Self {
            alpha1: 5.0 / 9.0,
            beta1: 0.075,
            sigma_k1: 0.85,
            sigma_w1: 0.5,
            alpha2: 0.44,
            beta2: 0.0828,
            sigma_k2: 1.0,
            sigma_w2: 0.856,
            beta_star: 0.09,
            a1: 0.31,
            kappa: 0.41,
            diffusivity: DiffusivityForm::default(),
        }
    }
}

impl SstConstants {
    pub fn c_mu(&self) -> f64 {
        self.beta_star
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdesConstants {
    pub c_des1: f64,
    pub c_des2: f64,
    pub c_d1: f64,
    pub c_d2: f64,
}

impl Default for DdesConstants {
    fn default() -> Self {
        Self {
            c_des1: 0.78,
            c_des2: 0.61,
            c_d1: 20.0,
            c_d2: 3.0,
        }
    }
}

/// Turbulence and mean-flow quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalClosureState {
    pub k: f64,
    pub tau: f64,
    pub grad_k: [f64; 2],
    pub grad_tau: [f64; 2],
    /// Strain-rate magnitude `√(2 S_ij S_ij)`.
    pub strain: f64,
    /// Vorticity magnitude `√(2 Ω_ij Ω_ij)`.
    pub vorticity: f64,
    pub wall_distance: f64,
    pub nu: f64,
    pub rho: f64,
}

impl LocalClosureState {
    pub fn mu(&self) -> f64 {
        self.rho * self.nu
    }

    pub fn grad_k_dot_grad_tau(&self) -> f64 {
        self.grad_k[0] * self.grad_tau[0] + self.grad_k[1] * self.grad_tau[1]
    }
}
