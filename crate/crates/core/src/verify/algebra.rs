//! Exact-algebra checks: filter weights, model constants, k-τ/k-ω duality
//! and DDES length-scale identities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VerificationReport;
use crate::error::Result;
use crate::sem_ops::FilterSpec;
use crate::turbulence::{
    ddes_length_scale, delay_function, evaluate_closure, komega_sources, s_tau, s_tau_from_sqrt, DdesConstants,
    LocalClosureState, SstConstants,
};

pub const DUALITY_SAMPLES: usize = 1000;
pub const DDES_SAMPLES: usize = 100_000;
pub const DUALITY_TOL: f64 = 1e-10;

/// Quoted ramp weights for `N = 8`.
pub fn filter_weights() -> Result<VerificationReport> {
    let mut r = VerificationReport::new("filters");
    let m3 = FilterSpec::new(8, 3, 1.0)?;
    r.equals("N=8 m=3 sigma_6", m3.sigma[6], (2.0_f64 / 3.0).powi(2));
    r.equals("N=8 m=3 sigma_7", m3.sigma[7], (1.0_f64 / 3.0).powi(2));
    r.equals("N=8 m=3 sigma_8", m3.sigma[8], 0.0);
    r.equals("N=8 m=3 sigma_5", m3.sigma[5], 1.0);
    let m2 = FilterSpec::new(8, 2, 1.0)?;
    r.equals("N=8 m=2 sigma_7", m2.sigma[7], 0.25);
    r.equals("N=8 m=2 sigma_8", m2.sigma[8], 0.0);
    r.equals("N=8 m=2 sigma_6", m2.sigma[6], 1.0);
    Ok(r)
}

/// SST and DDES constant tables.
pub fn constant_tables() -> VerificationReport {
    let mut r = VerificationReport::new("constants");
    let s = SstConstants::default();
    let d = DdesConstants::default();
    for (name, v, want) in [
        ("alpha1", s.alpha1, 5.0 / 9.0),
        ("beta1", s.beta1, 0.075),
        ("sigma_k1", s.sigma_k1, 0.85),
        ("sigma_w1", s.sigma_w1, 0.5),
        ("alpha2", s.alpha2, 0.44),
        ("beta2", s.beta2, 0.0828),
        ("sigma_k2", s.sigma_k2, 1.0),
        ("sigma_w2", s.sigma_w2, 0.856),
        ("C_mu", s.c_mu(), 0.09),
        ("kappa", s.kappa, 0.41),
        ("a1", s.a1, 0.31),
        ("C_DES1", d.c_des1, 0.78),
        ("C_DES2", d.c_des2, 0.61),
        ("C_d1", d.c_d1, 20.0),
        ("C_d2", d.c_d2, 3.0),
    ] {
        r.equals(name, v, want);
    }
    r
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn signed(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    rng.random_range(-1.0..1.0) * scale
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// k-τ evaluated at `τ = 1/ω`, `∇τ = −∇ω/ω²` against the ω form.
pub fn closure_duality(samples: usize, seed: u64) -> Result<VerificationReport> {
    let c = SstConstants::default();
    let dd = DdesConstants::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "F1",
        "F2",
        "mu_t",
        "CD_kw",
        "l_RANS",
        "P_k",
        "tau production",
        "tau destruction",
        "tau cross-diffusion",
        "k source",
    ];
    let mut worst = [0.0_f64; 10];
    for _ in 0..samples {
        let k = log_uniform(&mut rng, 1e-6, 10.0);
        let omega = log_uniform(&mut rng, 1e-2, 1e5);
        let gk = [signed(&mut rng, 10.0), signed(&mut rng, 10.0)];
        let gw = [signed(&mut rng, omega * 10.0), signed(&mut rng, omega * 10.0)];
        let strain = log_uniform(&mut rng, 1e-3, 1e4);
        let d = log_uniform(&mut rng, 1e-5, 1.0);
        let nu = log_uniform(&mut rng, 1e-7, 1e-2);
        let tau = 1.0 / omega;
        let gt = [-gw[0] / (omega * omega), -gw[1] / (omega * omega)];
        let st = LocalClosureState {
            k,
            tau,
            grad_k: gk,
            grad_tau: gt,
            strain,
            vorticity: strain,
            wall_distance: d,
            nu,
            rho: 1.0,
        };
        let ev = evaluate_closure(&st, &c, &dd)?;
        let w = komega_sources(k, omega, gk, gw, strain, d, nu, 1.0, &c)?;
        let l_rans = ddes_length_scale(k, tau, ev.blending.f1, 0.0, 1.0, 1.0, &c, &dd)?.l_rans;
        // dτ/dt = −τ² dω/dt
        let t2 = tau * tau;
        let pairs = [
            (ev.blending.f1, w.f1),
            (ev.blending.f2, w.f2),
            (ev.mu_t, w.mu_t),
            (ev.blending.cd_kw, w.cd_kw),
            (l_rans, w.l_rans),
            (ev.p_k, w.p_k),
            (ev.tau_parts.production, -t2 * w.production_w),
            (ev.tau_parts.destruction, -t2 * w.destruction_w),
            (ev.tau_parts.cross_diffusion, -t2 * w.cross_diffusion_w),
            (ev.source_k, w.source_k),
        ];
        for (slot, (a, b)) in worst.iter_mut().zip(pairs) {
            *slot = slot.max(rel(a, b));
        }
    }
    let mut r = VerificationReport::new("closure-duality");
    for (name, w) in names.iter().zip(worst) {
        r.at_most(format!("{name} max rel. diff ({samples} states)"), w, DUALITY_TOL);
    }
    Ok(r)
}

/// DDES length-scale identities and bounds over random states.
pub fn ddes_algebra(samples: usize, seed: u64) -> Result<VerificationReport> {
    let c = SstConstants::default();
    let dd = DdesConstants::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rans_dev: f64 = 0.0;
    let mut full_dev: f64 = 0.0;
    let mut violations = 0usize;
    let mut stau_dev: f64 = 0.0;
    for _ in 0..samples {
        let k = log_uniform(&mut rng, 1e-8, 10.0);
        let tau = log_uniform(&mut rng, 1e-5, 1e2);
        let f1 = rng.random::<f64>();
        let h = log_uniform(&mut rng, 1e-5, 1.0);
        let f_d = rng.random::<f64>();
        let a = ddes_length_scale(k, tau, f1, 0.0, h, 1.0, &c, &dd)?;
        rans_dev = rans_dev.max(rel(a.destruction, c.beta_star * k / tau));
        let b = ddes_length_scale(k, tau, f1, 1.0, h, 1.0, &c, &dd)?;
        full_dev = full_dev.max(rel(b.l_ddes, b.l_rans.min(b.l_les)));
        let e = ddes_length_scale(k, tau, f1, f_d, h, 1.0, &c, &dd)?;
        let lo = e.l_rans.min(e.l_les);
        let slack = 4.0 * f64::EPSILON * e.l_rans;
        if e.l_ddes < lo - slack || e.l_ddes > e.l_rans + slack {
            violations += 1;
        }
        let gamma = log_uniform(&mut rng, 1e-6, 1.0);
        let g = [signed(&mut rng, tau), signed(&mut rng, tau)];
        let sq = tau.sqrt();
        let gs = [g[0] / (2.0 * sq), g[1] / (2.0 * sq)];
        stau_dev = stau_dev.max(rel(s_tau(gamma, tau, g), s_tau_from_sqrt(gamma, gs)));
    }
    let (f_d0, r_d0) = delay_function(0.0, 0.0, 0.1, 1.0, 1.0, &c, &dd)?;
    let mut r = VerificationReport::new("ddes-algebra");
    r.at_most("f_d=0: destruction vs rho beta* k/tau (rel)", rans_dev, 1e-13);
    r.at_most("f_d=1: l_DDES vs min(l_RANS, l_LES) (rel)", full_dev, 1e-13);
    r.equals(format!("bounds violations ({samples} states)"), violations as f64, 0.0);
    r.equals("r_d", r_d0, 0.0);
    r.equals("f_d(r_d=0)", f_d0, 1.0);
    r.at_most("S_tau identity (rel)", stau_dev, 1e-12);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_and_constants_pass() {
        assert!(filter_weights().unwrap().overall);
        assert!(constant_tables().overall);
    }

    #[test]
    fn small_duality_sample_passes() {
        let r = closure_duality(200, 7).unwrap();
        assert!(r.overall, "{r}");
    }

    #[test]
    fn small_ddes_sample_passes() {
        let r = ddes_algebra(2000, 7).unwrap();
        assert!(r.overall, "{r}");
    }
}
