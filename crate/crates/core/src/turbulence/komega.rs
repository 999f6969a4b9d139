//! k-ω SST source evaluation, kept as the reference form of the k-τ closure.

use super::{SstConstants, CD_FLOOR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KomegaEvaluation {
    pub f1: f64,
    pub f2: f64,
    pub arg1: f64,
    pub arg2: f64,
    pub cd_kw: f64,
    pub mu_t: f64,
    pub p_k: f64,
    /// `α (ρ/μ_t) P_k`.
    pub production_w: f64,
    /// `−ρ β ω²`.
    pub destruction_w: f64,
    /// `2 (1 − F1) ρ σ_ω2 (∇k·∇ω)/ω`.
    pub cross_diffusion_w: f64,
    pub source_k: f64,
    pub source_w: f64,
    /// `√k / (C_μ ω)`.
    pub l_rans: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn komega_sources(
    k: f64,
    omega: f64,
    grad_k: [f64; 2],
    grad_w: [f64; 2],
    strain: f64,
    d: f64,
    nu: f64,
    rho: f64,
    c: &SstConstants,
) -> Result<KomegaEvaluation> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    if !(d > 0.0) {
        return Err(Error::Domain(format!("wall distance must be positive, got {d}")));
    }
    let sqk = k.max(0.0).sqrt();
    let kw = grad_k[0] * grad_w[0] + grad_k[1] * grad_w[1];
    let cd_kw = (2.0 * c.sigma_w2 * kw / omega).max(CD_FLOOR);
    let viscous = 500.0 * nu / (d * d * omega);
    let arg1 = (sqk / (c.beta_star * d * omega))
        .max(viscous)
        .min(4.0 * c.sigma_w2 * k / (cd_kw * d * d));
    let arg2 = (2.0 * sqk / (c.beta_star * d * omega)).max(viscous);
    let f1 = arg1.powi(4).tanh();
    let f2 = (arg2 * arg2).tanh();
    let mu_t = rho * c.a1 * k / (c.a1 * omega).max(f2 * strain);
    let p_k = (mu_t * strain * strain).min(10.0 * c.c_mu() * rho * k * omega);
    let alpha = c.alpha1 * f1 + c.alpha2 * (1.0 - f1);
    let beta = c.beta1 * f1 + c.beta2 * (1.0 - f1);
    let production_w = if mu_t > 0.0 { alpha * rho * p_k / mu_t } else { 0.0 };
    let destruction_w = -rho * beta * omega * omega;
    let cross_diffusion_w = 2.0 * (1.0 - f1) * rho * c.sigma_w2 * kw / omega;
    Ok(KomegaEvaluation {
        f1,
        f2,
        arg1,
        arg2,
        cd_kw,
        mu_t,
        p_k,
        production_w,
        destruction_w,
        cross_diffusion_w,
        source_k: p_k - rho * c.beta_star * k * omega,
        source_w: production_w + destruction_w + cross_diffusion_w,
        l_rans: sqk / (c.c_mu() * omega),
    })
}
