//! k-τ SST closure relations.

use super::{DdesConstants, LocalClosureState, SstConstants, CD_FLOOR, TAU_FLOOR};
use crate::error::{Error, Result};

/// SST blending functions and their arguments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Blending {
    pub f1: f64,
    pub f2: f64,
    pub arg1: f64,
    pub arg2: f64,
    pub cd_kw: f64,
}

/// Closure constants blended by `F1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlendedConstants {
    pub alpha: f64,
    pub beta: f64,
    pub sigma_k: f64,
    pub sigma_w: f64,
    pub c_des: f64,
}

/// Right-hand-side contributions of the τ equation before Benton scaling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TauSourceParts {
    /// `−α (ρ/μ_t) τ² P_k`.
    pub production: f64,
    /// `+ρ β`.
    pub destruction: f64,
    /// `+2 (1 − F1) ρ σ_ω2 τ (∇k·∇τ)`.
    pub cross_diffusion: f64,
    /// `−2 Γ_ω (∇τ·∇τ) / τ`.
    pub s_tau: f64,
}

impl TauSourceParts {
    pub fn total(&self) -> f64 {
        self.production + self.destruction + self.cross_diffusion + self.s_tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClosureEvaluation {
    pub blending: Blending,
    pub constants: BlendedConstants,
    pub mu_t: f64,
    pub p_k: f64,
    pub gamma_k: f64,
    pub gamma_tau: f64,
    /// `ρ β* k / τ`.
    pub k_destruction: f64,
    pub tau_parts: TauSourceParts,
    /// `μ_t / max(10 μ, μ_t)` with `μ_t = ρ k τ`.
    pub benton: f64,
    pub source_k: f64,
    pub source_tau: f64,
}

/// `F1`, `F2`, their arguments and `CD_kω` in τ form.
pub fn blending_state(s: &LocalClosureState, c: &SstConstants) -> Result<Blending> {
    let d = s.wall_distance;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("blending needs positive wall distance, got {d}")));
    }
    if !(s.tau > 0.0) {
        return Err(Error::Domain(format!("blending needs positive tau, got {}", s.tau)));
    }
    let sqk = s.k.max(0.0).sqrt();
    let cd_kw = (-2.0 * c.sigma_w2 * s.grad_k_dot_grad_tau() / s.tau).max(CD_FLOOR);
    let viscous = 500.0 * s.nu * s.tau / (d * d);
    let arg1 = (s.tau * sqk / (c.beta_star * d))
        .max(viscous)
        .min(4.0 * c.sigma_w2 * s.k / (cd_kw * d * d));
    let arg2 = (2.0 * s.tau * sqk / (c.beta_star * d)).max(viscous);
    Ok(Blending {
        f1: arg1.powi(4).tanh(),
        f2: (arg2 * arg2).tanh(),
        arg1,
        arg2,
        cd_kw,
    })
}

/// SST-limited eddy viscosity `ρ a₁ k / max(a₁/τ, F2 S)`.
pub fn eddy_viscosity(s: &LocalClosureState, f2: f64, c: &SstConstants) -> f64 {
    let tau = s.tau.max(0.0);
    let k = s.k.max(0.0);
    s.rho * c.a1 * k * tau / c.a1.max(f2 * s.strain * tau)
}

pub fn blend_constants(f1: f64, c: &SstConstants, d: &DdesConstants) -> Result<BlendedConstants> {
    if !(0.0..=1.0).contains(&f1) {
        return Err(Error::Domain(format!("F1 must lie in [0, 1], got {f1}")));
    }
    let mix = |a: f64, b: f64| a * f1 + b * (1.0 - f1);
    Ok(BlendedConstants {
        alpha: mix(c.alpha1, c.alpha2),
        beta: mix(c.beta1, c.beta2),
        sigma_k: mix(c.sigma_k1, c.sigma_k2),
        sigma_w: mix(c.sigma_w1, c.sigma_w2),
        c_des: mix(d.c_des1, d.c_des2),
    })
}

/// Limited production `min(μ_t S², 10 C_μ ρ k / τ)`.
pub fn production(mu_t: f64, strain: f64, k: f64, tau: f64, rho: f64, c: &SstConstants) -> f64 {
    (mu_t * strain * strain).min(10.0 * c.c_mu() * rho * k / tau.max(TAU_FLOOR))
}

pub fn benton_factor(mu: f64, mu_t: f64) -> f64 {
    let r = (10.0 * mu).max(mu_t);
    if r > 0.0 {
        mu_t / r
    } else {
        0.0
    }
}

/// `S_τ = 2 Γ (∇τ·∇τ) / τ`.
pub fn s_tau(gamma: f64, tau: f64, grad_tau: [f64; 2]) -> f64 {
    2.0 * gamma * (grad_tau[0] * grad_tau[0] + grad_tau[1] * grad_tau[1]) / tau
}

/// `S_τ = 8 Γ (∇τ^{1/2}·∇τ^{1/2})`.
pub fn s_tau_from_sqrt(gamma: f64, grad_sqrt_tau: [f64; 2]) -> f64 {
    8.0 * gamma * (grad_sqrt_tau[0] * grad_sqrt_tau[0] + grad_sqrt_tau[1] * grad_sqrt_tau[1])
}

/// Full k-τ SST evaluation at one off-wall point.
pub fn evaluate_closure(
    s: &LocalClosureState,
    c: &SstConstants,
    d: &DdesConstants,
) -> Result<ClosureEvaluation> {
    let mut st = *s;
    st.tau = st.tau.max(TAU_FLOOR);
    st.k = st.k.max(0.0);
    let blending = blending_state(&st, c)?;
    let constants = blend_constants(blending.f1, c, d)?;
    let mu_t = eddy_viscosity(&st, blending.f2, c);
    let mu = st.mu();
    let mut ev = ClosureEvaluation {
        blending,
        constants,
        mu_t,
        p_k: production(mu_t, st.strain, st.k, st.tau, st.rho, c),
        gamma_k: c.diffusivity.gamma(mu, mu_t, constants.sigma_k),
        gamma_tau: c.diffusivity.gamma(mu, mu_t, constants.sigma_w),
        k_destruction: st.rho * c.beta_star * st.k / st.tau,
        benton: benton_factor(mu, st.rho * st.k * st.tau),
        ..Default::default()
    };
    ev.tau_parts = tau_source_parts(&st, &ev, c);
    let (sk, stau) = ktau_sources(&st, &ev, c);
    ev.source_k = sk;
    ev.source_tau = stau;
    Ok(ev)
}

fn tau_source_parts(s: &LocalClosureState, ev: &ClosureEvaluation, c: &SstConstants) -> TauSourceParts {
    let tau = s.tau.max(TAU_FLOOR);
    let pk_over_mut = if ev.mu_t > 0.0 { ev.p_k / ev.mu_t } else { 0.0 };
    TauSourceParts {
        production: -ev.constants.alpha * s.rho * tau * tau * pk_over_mut,
        destruction: s.rho * ev.constants.beta,
        cross_diffusion: 2.0
            * (1.0 - ev.blending.f1)
            * s.rho
            * c.sigma_w2
            * tau
            * s.grad_k_dot_grad_tau(),
        s_tau: -s_tau(ev.gamma_tau, tau, s.grad_tau),
    }
}

/// `(source_k, source_τ)`; only the τ equation carries the Benton factor.
pub fn ktau_sources(s: &LocalClosureState, ev: &ClosureEvaluation, c: &SstConstants) -> (f64, f64) {
    let parts = tau_source_parts(s, ev, c);
    (ev.p_k - ev.k_destruction, ev.benton * parts.total())
}

/// Linearly implicit form `source = explicit − reaction·φ` of the k and τ
/// sources at the current state, without the limiter factor.
///
/// Only the τ production is taken implicitly; `S_τ`, `ρβ` and the cross
/// term stay explicit so the update does not feed back on a locally small τ.
/// The limiter scales the whole τ right-hand side (sources and diffusion), so
/// callers apply `ev.benton` as a rate factor on the τ equation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceSplit {
    pub k_reaction: f64,
    pub k_explicit: f64,
    pub tau_reaction: f64,
    pub tau_explicit: f64,
}

pub fn split_ktau_sources(s: &LocalClosureState, ev: &ClosureEvaluation, c: &SstConstants) -> SourceSplit {
    let tau = s.tau.max(TAU_FLOOR);
    let pk_over_mut = if ev.mu_t > 0.0 { ev.p_k / ev.mu_t } else { 0.0 };
    let parts = tau_source_parts(s, ev, c);
    SourceSplit {
        k_reaction: s.rho * c.beta_star / tau,
        k_explicit: ev.p_k,
        tau_reaction: ev.constants.alpha * s.rho * pk_over_mut * tau,
        tau_explicit: parts.destruction + parts.cross_diffusion + parts.s_tau,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(k: f64, tau: f64) -> LocalClosureState {
        LocalClosureState {
            k,
            tau,
            wall_distance: 0.1,
            nu: 1e-5,
            rho: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn freestream_limit_switches_off_blending() {
        let mut s = state(1e-3, 0.5);
        s.wall_distance = 1e6;
        let b = blending_state(&s, &SstConstants::default()).unwrap();
        assert!(b.arg1 < 1e-6 && b.arg2 < 1e-6);
        assert!(b.f1 < 1e-20 && b.f2 < 1e-12);
    }

    #[test]
    fn cd_floor_for_aligned_gradients() {
        let mut s = state(1.0, 1.0);
        s.grad_k = [1.0, 0.5];
        s.grad_tau = [2.0, 0.1];
        let b = blending_state(&s, &SstConstants::default()).unwrap();
        assert_eq!(b.cd_kw, 1e-10);
    }

    #[test]
    fn zero_wall_distance_is_domain_error() {
        let mut s = state(1.0, 1.0);
        s.wall_distance = 0.0;
        assert!(matches!(
            blending_state(&s, &SstConstants::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eddy_viscosity_branches() {
        let c = SstConstants::default();
        let s = state(2.0, 3.0);
        assert!((eddy_viscosity(&s, 1.0, &c) - 6.0).abs() < 1e-14);
        let mut s = state(2.0, 3.0);
        s.strain = 100.0;
        assert!((eddy_viscosity(&s, 0.5, &c) - 0.31 * 2.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn blended_constant_sets() {
        let c = SstConstants::default();
        let d = DdesConstants::default();
        let one = blend_constants(1.0, &c, &d).unwrap();
        assert_eq!(
            (one.alpha, one.beta, one.sigma_k, one.sigma_w, one.c_des),
            (5.0 / 9.0, 0.075, 0.85, 0.5, 0.78)
        );
        let zero = blend_constants(0.0, &c, &d).unwrap();
        assert_eq!(
            (zero.alpha, zero.beta, zero.sigma_k, zero.sigma_w, zero.c_des),
            (0.44, 0.0828, 1.0, 0.856, 0.61)
        );
        let half = blend_constants(0.5, &c, &d).unwrap();
        assert!((half.beta - 0.5 * (0.075 + 0.0828)).abs() < 1e-16);
        assert!(blend_constants(1.2, &c, &d).is_err());
    }

    #[test]
    fn destruction_only_k_source() {
        let c = SstConstants::default();
        let ev = evaluate_closure(&state(1.0, 2.0), &c, &DdesConstants::default()).unwrap();
        assert!((ev.source_k + 0.045).abs() < 1e-15);
    }

    #[test]
    fn production_cap() {
        let c = SstConstants::default();
        let (k, tau) = (1.0, 2.0);
        let cap = 10.0 * 0.09 * k / tau;
        let strain = (100.0 * 0.09 * k / tau / 1.5f64).sqrt();
        assert!((production(1.5, strain, k, tau, 1.0, &c) - cap).abs() < 1e-14);
        assert!(production(1.5, 0.1, k, tau, 1.0, &c) < cap);
    }

    #[test]
    fn benton_branches() {
        assert_eq!(benton_factor(1.0, 20.0), 1.0);
        assert!((benton_factor(1.0, 1.0) - 0.1).abs() < 1e-16);
        assert_eq!(benton_factor(1.0, 0.0), 0.0);
    }

    #[test]
    fn s_tau_forms_agree_on_square_field() {
        // τ = q², q = 0.3 + 2x − y, so ∇√τ = (2, −1)
        for &(x, y) in &[(0.1, 0.2), (1.0, -0.5), (0.4, 0.9)] {
            let q: f64 = 0.3 + 2.0 * x - y;
            let tau = q * q;
            let grad_tau = [4.0 * q, -2.0 * q];
            let a = s_tau(1.7, tau, grad_tau);
            let b = s_tau_from_sqrt(1.7, [2.0, -1.0]);
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn eddy_viscosity_derivative_in_k_matches_difference() {
        let c = SstConstants::default();
        let mut s = state(0.7, 0.4);
        s.strain = 3.0;
        let f2 = 0.8;
        let analytic = s.rho * c.a1 / (c.a1 / s.tau).max(f2 * s.strain);
        let h = 1e-6;
        let mut sp = s;
        sp.k += h;
        let fd = (eddy_viscosity(&sp, f2, &c) - eddy_viscosity(&s, f2, &c)) / h;
        assert!((fd - analytic).abs() <= 1e-6 * analytic.abs());
    }

    #[test]
    fn source_split_reproduces_sources() {
        let c = SstConstants::default();
        let st = LocalClosureState {
            k: 0.3,
            tau: 0.07,
            grad_k: [0.4, -1.1],
            grad_tau: [0.2, 0.5],
            strain: 3.0,
            vorticity: 2.0,
            wall_distance: 0.05,
            nu: 1e-3,
            rho: 1.0,
        };
        let ev = evaluate_closure(&st, &c, &DdesConstants::default()).unwrap();
        let sp = split_ktau_sources(&st, &ev, &c);
        assert!((sp.k_explicit - sp.k_reaction * st.k - ev.source_k).abs() < 1e-13);
        let tau_total = ev.benton * (sp.tau_explicit - sp.tau_reaction * st.tau);
        assert!((tau_total - ev.source_tau).abs() < 1e-13 * (1.0 + ev.source_tau.abs()));
    }
}
