//! Fully developed, streamwise-homogeneous channel flow reduced to one
//! wall-normal coordinate, solved with the k-τ SST closure or the k-ω SST
//! reference form.
//!
//! Units: half-height `h = 1`, friction velocity `u_τ = 1`, so `ν = 1/Re_τ`
//! and the driving pressure gradient is unity. The grid spans the wall
//! (`y = 0`) to the centreline (`y = 1`, symmetry).
//!
//! The discrete steady equations are solved with pseudo-transient
//! continuation: damped Newton steps `(I/Δt − J) δ = R` with `Δt` growing as
//! the residual falls. Both closures use the same grid, operators, initial
//! guess and solver. The eddy-viscosity limiter of the k-τ model scales the
//! whole τ right-hand side by a positive factor and so leaves the steady
//! solution unchanged; it is not applied here.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turbulence::{
    blend_constants, evaluate_closure, komega_sources, split_ktau_sources, DdesConstants, LocalClosureState,
    SstConstants,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelClosure {
    KTau,
    KOmega,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSetup {
    pub re_tau: f64,
    /// Grid intervals between wall and centreline.
    pub intervals: usize,
    /// tanh clustering strength toward the wall.
    pub stretch: f64,
    /// Initial pseudo-time step.
    pub initial_dt: f64,
    pub max_iterations: usize,
    /// Converged when every Newton update is below `tol` relative to the field maximum.
    pub tol: f64,
    pub sst: SstConstants,
}

impl Default for ChannelSetup {
    fn default() -> Self {
        Self {
            re_tau: 550.0,
            intervals: 240,
            stretch: 3.2,
            initial_dt: 1e-3,
            max_iterations: 400,
            tol: 1e-10,
            sst: SstConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub closure: ChannelClosure,
    pub re_tau: f64,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub k: Vec<f64>,
    /// `τ`, or `1/ω` for the k-ω solve (0 at the wall).
    pub tau: Vec<f64>,
    pub nu_t: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final max-norm residual of the momentum equation.
    pub residual: f64,
}

impl ChannelProfile {
    /// Wall shear from the converged profile (unity when balanced).
    pub fn wall_shear(&self) -> f64 {
        let nu = 1.0 / self.re_tau;
        nu * derivative(&self.y, &self.u, 0)
    }

    /// Least-squares slope of `U⁺` against `ln y⁺` over `lo < y⁺ < hi`.
    pub fn log_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .y
            .iter()
            .zip(&self.u)
            .map(|(y, u)| (y * self.re_tau, *u))
            .filter(|(yp, _)| *yp > lo && *yp < hi)
            .map(|(yp, u)| (yp.ln(), u))
            .collect();
        if pts.len() < 3 {
            return Err(Error::Parameter(format!("too few points in {lo} < y+ < {hi}")));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Ok(sxy / sxx)
    }

    /// Bulk velocity (trapezoidal).
    pub fn bulk_velocity(&self) -> f64 {
        trapezoid(&self.y, &self.u) / self.y[self.y.len() - 1]
    }
}

fn trapezoid(y: &[f64], f: &[f64]) -> f64 {
    y.windows(2)
        .zip(f.windows(2))
        .map(|(yy, ff)| 0.5 * (ff[0] + ff[1]) * (yy[1] - yy[0]))
        .sum()
}

/// Relative L2 difference `‖a − b‖/‖b‖` of two profiles on the same grid.
pub fn relative_l2(y: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, z)| (x - z) * (x - z)).collect();
    let r: Vec<f64> = b.iter().map(|z| z * z).collect();
    (trapezoid(y, &d) / trapezoid(y, &r)).sqrt()
}

/// Wall-clustered grid on `[0, 1]`.
pub fn channel_grid(intervals: usize, stretch: f64) -> Vec<f64> {
    (0..=intervals)
        .map(|i| {
            let xi = i as f64 / intervals as f64;
            1.0 - (stretch * (1.0 - xi)).tanh() / stretch.tanh()
        })
        .collect()
}

/// Second-order first derivative on a non-uniform grid; zero at the centreline.
fn derivative(y: &[f64], f: &[f64], i: usize) -> f64 {
    let n = y.len() - 1;
    if i == 0 {
        let (h1, h2) = (y[1] - y[0], y[2] - y[1]);
        let a = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
        let b = (h1 + h2) / (h1 * h2);
        let c = -h1 / (h2 * (h1 + h2));
        a * f[0] + b * f[1] + c * f[2]
    } else if i == n {
        0.0
    } else {
        let (h1, h2) = (y[i] - y[i - 1], y[i + 1] - y[i]);
        (h1 * h1 * f[i + 1] - h2 * h2 * f[i - 1] + (h2 * h2 - h1 * h1) * f[i]) / (h1 * h2 * (h1 + h2))
    }
}

/// Conservative `(Γ φ')'` at node `i ≥ 1`, mirrored across the centreline.
fn diffusion(y: &[f64], phi: &[f64], gamma: &[f64], i: usize) -> f64 {
    let n = y.len() - 1;
    if i < n {
        let hm = y[i] - y[i - 1];
        let hp = y[i + 1] - y[i];
        let gm = 0.5 * (gamma[i] + gamma[i - 1]);
        let gp = 0.5 * (gamma[i] + gamma[i + 1]);
        (gp * (phi[i + 1] - phi[i]) / hp - gm * (phi[i] - phi[i - 1]) / hm) / (0.5 * (hm + hp))
    } else {
        let h = y[n] - y[n - 1];
        let g = 0.5 * (gamma[n] + gamma[n - 1]);
        2.0 * g * (phi[n - 1] - phi[n]) / (h * h)
    }
}

/// Point coefficients of the closure: transport diffusivities and the net
/// sources of the two model equations.
struct PointTerms {
    nu_t: f64,
    gamma_k: f64,
    gamma_s: f64,
    source_k: f64,
    source_s: f64,
}

const VARS: usize = 3;
/// Residual at node `i` depends on nodes `i-2..=i+2`.
const BAND: usize = 2;

struct Problem<'a> {
    closure: ChannelClosure,
    y: &'a [f64],
    nu: f64,
    c: &'a SstConstants,
    ddes: DdesConstants,
    /// Dirichlet value of the second model variable at the wall.
    s_wall: f64,
}

impl Problem<'_> {
    fn nodes(&self) -> usize {
        self.y.len() - 1
    }

    /// Expand unknowns (nodes `1..=N`, interleaved `U, k, s`) to full profiles.
    fn expand(&self, x: &[f64]) -> [Vec<f64>; 3] {
        let n = self.nodes();
        let mut u = vec![0.0; n + 1];
        let mut k = vec![0.0; n + 1];
        let mut s = vec![self.s_wall; n + 1];
        for i in 1..=n {
            u[i] = x[VARS * (i - 1)];
            k[i] = x[VARS * (i - 1) + 1];
            s[i] = x[VARS * (i - 1) + 2];
        }
        [u, k, s]
    }

    fn point_terms(&self, u: &[f64], k: &[f64], s: &[f64], sqrt_s: &[f64], i: usize) -> Result<PointTerms> {
        let y = self.y;
        let nu = self.nu;
        let c = self.c;
        let du = derivative(y, u, i);
        let dk = derivative(y, k, i);
        let strain = du.abs();
        let kk = k[i].max(0.0);
        match self.closure {
            ChannelClosure::KTau => {
                let st = LocalClosureState {
                    k: kk,
                    tau: s[i],
                    grad_k: [0.0, dk],
                    // ∇τ = 2√τ ∇√τ, so that S_τ = 8Γ|∇√τ|²
                    grad_tau: [0.0, 2.0 * sqrt_s[i] * derivative(y, sqrt_s, i)],
                    strain,
                    vorticity: strain,
                    wall_distance: y[i],
                    nu,
                    rho: 1.0,
                };
                let ev = evaluate_closure(&st, c, &self.ddes)?;
                let sp = split_ktau_sources(&st, &ev, c);
                Ok(PointTerms {
                    nu_t: ev.mu_t,
                    gamma_k: ev.gamma_k,
                    gamma_s: ev.gamma_tau,
                    source_k: sp.k_explicit - sp.k_reaction * kk,
                    source_s: sp.tau_explicit - sp.tau_reaction * st.tau.max(0.0),
                })
            }
            ChannelClosure::KOmega => {
                let w = s[i].max(f64::MIN_POSITIVE);
                let ev = komega_sources(kk, w, [0.0, dk], [0.0, derivative(y, s, i)], strain, y[i], nu, 1.0, c)?;
                let bc = blend_constants(ev.f1, c, &self.ddes)?;
                Ok(PointTerms {
                    nu_t: ev.mu_t,
                    gamma_k: c.diffusivity.gamma(nu, ev.mu_t, bc.sigma_k),
                    gamma_s: c.diffusivity.gamma(nu, ev.mu_t, bc.sigma_w),
                    source_k: ev.source_k,
                    source_s: ev.source_w,
                })
            }
        }
    }

    /// Closure coefficients on all nodes (wall node laminar).
    fn terms(&self, x: &[f64]) -> Result<([Vec<f64>; 3], Vec<PointTerms>)> {
        let [u, k, s] = self.expand(x);
        let sqrt_s: Vec<f64> = s.iter().map(|v| v.max(0.0).sqrt()).collect();
        let mut out = Vec::with_capacity(u.len());
        out.push(PointTerms {
            nu_t: 0.0,
            gamma_k: self.nu,
            gamma_s: self.nu,
            source_k: 0.0,
            source_s: 0.0,
        });
        for i in 1..u.len() {
            out.push(self.point_terms(&u, &k, &s, &sqrt_s, i)?);
        }
        Ok(([u, k, s], out))
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ([u, k, s], t) = self.terms(x)?;
        let eff: Vec<f64> = t.iter().map(|p| self.nu + p.nu_t).collect();
        let gk: Vec<f64> = t.iter().map(|p| p.gamma_k).collect();
        let gs: Vec<f64> = t.iter().map(|p| p.gamma_s).collect();
        let n = self.nodes();
        let mut r = vec![0.0; VARS * n];
        for i in 1..=n {
            let b = VARS * (i - 1);
            r[b] = diffusion(self.y, &u, &eff, i) + 1.0;
            r[b + 1] = diffusion(self.y, &k, &gk, i) + t[i].source_k;
            r[b + 2] = diffusion(self.y, &s, &gs, i) + t[i].source_s;
        }
        Ok(r)
    }

    /// Banded finite-difference Jacobian by column colouring.
    fn jacobian(&self, x: &[f64], r0: &[f64]) -> Result<DMatrix<f64>> {
        let m = x.len();
        let n = self.nodes();
        let stride = 2 * BAND + 1;
        let mut jac = DMatrix::zeros(m, m);
        let mut xp = x.to_vec();
        for v in 0..VARS {
            for colour in 0..stride {
                let cols: Vec<usize> = (colour..n).step_by(stride).map(|node| VARS * node + v).collect();
                let mut steps = Vec::with_capacity(cols.len());
                for &col in &cols {
                    let h = 1e-7 * x[col].abs().max(1e-12);
                    xp[col] = x[col] + h;
                    steps.push(h);
                }
                let rp = self.residual(&xp)?;
                for (&col, &h) in cols.iter().zip(&steps) {
                    xp[col] = x[col];
                    let node = col / VARS;
                    let lo = node.saturating_sub(BAND);
                    let hi = (node + BAND).min(n - 1);
                    for rn in lo..=hi {
                        for rv in 0..VARS {
                            let row = VARS * rn + rv;
                            jac[(row, col)] = (rp[row] - r0[row]) / h;
                        }
                    }
                }
            }
        }
        Ok(jac)
    }
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Initial profiles shared by both closures: a van Driest style velocity,
/// a linearly decaying `k` and `ω` from the near-wall and log-layer limits.
fn initial_guess(y: &[f64], re_tau: f64, c: &SstConstants) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let kappa = c.kappa;
    let nu = 1.0 / re_tau;
    let u = y
        .iter()
        .map(|&yy| {
            let yp = yy * re_tau;
            (1.0 / kappa) * (1.0 + kappa * yp).ln() + 7.8 * (1.0 - (-yp / 11.0).exp() - yp / 11.0 * (-yp / 3.0).exp())
        })
        .collect();
    let k = y
        .iter()
        .map(|&yy| {
            let yp = yy * re_tau;
            (1.0 - yy) / c.c_mu().sqrt() * (yp / 10.0).min(1.0).powi(2) + 1e-6
        })
        .collect();
    let omega = y
        .iter()
        .map(|&yy| {
            let outer = 1.0 / (c.c_mu().sqrt() * kappa * yy);
            let inner = 6.0 * nu / (c.beta1 * yy * yy);
            inner.max(outer)
        })
        .collect();
    (u, k, omega)
}

/// Steady channel profile for one closure.
pub fn solve_channel(setup: &ChannelSetup, closure: ChannelClosure) -> Result<ChannelProfile> {
    if !(setup.re_tau > 0.0) || setup.intervals < 8 {
        return Err(Error::Parameter("channel needs Re_tau > 0 and at least 8 intervals".into()));
    }
    let nu = 1.0 / setup.re_tau;
    let c = &setup.sst;
    let y = channel_grid(setup.intervals, setup.stretch);
    let n = setup.intervals;
    let (u0, k0, w0) = initial_guess(&y, setup.re_tau, c);
    let s_wall = match closure {
        ChannelClosure::KTau => 0.0,
        ChannelClosure::KOmega => 60.0 * nu / (c.beta1 * y[1] * y[1]),
    };
    let problem = Problem {
        closure,
        y: &y,
        nu,
        c,
        ddes: DdesConstants::default(),
        s_wall,
    };
    let mut x = vec![0.0; VARS * n];
    for i in 1..=n {
        x[VARS * (i - 1)] = u0[i];
        x[VARS * (i - 1) + 1] = k0[i];
        x[VARS * (i - 1) + 2] = match closure {
            ChannelClosure::KTau => 1.0 / w0[i],
            ChannelClosure::KOmega => w0[i],
        };
    }
    let mut r = problem.residual(&x)?;
    let r_start = norm(&r);
    let mut dt = setup.initial_dt;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < setup.max_iterations {
        iterations += 1;
        let mut a = problem.jacobian(&x, &r)?;
        a.neg_mut();
        for d in 0..a.nrows() {
            a[(d, d)] += 1.0 / dt;
        }
        let delta = a
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or_else(|| Error::Breakdown {
                iteration: iterations,
                message: "singular channel Newton matrix".into(),
            })?;
        // keep k and the scale variable positive
        let mut lambda: f64 = 1.0;
        for (j, d) in delta.iter().enumerate() {
            if j % VARS != 0 && *d < 0.0 && x[j] + d < 0.1 * x[j] {
                lambda = lambda.min(0.9 * x[j] / -d);
            }
        }
        let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
        let r_trial = match problem.residual(&trial) {
            Ok(v) if v.iter().all(|e| e.is_finite()) => v,
            _ => {
                dt *= 0.25;
                continue;
            }
        };
        let small = (0..VARS).all(|v| {
            let scale = x.iter().skip(v).step_by(VARS).fold(0.0_f64, |m, e| m.max(e.abs()));
            let step = delta.iter().skip(v).step_by(VARS).fold(0.0_f64, |m, e| m.max(e.abs()));
            lambda * step <= setup.tol * scale
        });
        x = trial;
        r = r_trial;
        dt = (setup.initial_dt * r_start / norm(&r).max(f64::MIN_POSITIVE)).clamp(dt * 0.5, dt * 4.0).min(1e15);
        if small && lambda == 1.0 {
            converged = true;
            break;
        }
    }
    let ([u, k, s], terms) = problem.terms(&x)?;
    let residual = r.iter().step_by(VARS).fold(0.0_f64, |m, e| m.max(e.abs()));
    let tau = match closure {
        ChannelClosure::KTau => s,
        ChannelClosure::KOmega => s.iter().enumerate().map(|(i, w)| if i == 0 { 0.0 } else { 1.0 / w }).collect(),
    };
    Ok(ChannelProfile {
        closure,
        re_tau: setup.re_tau,
        y,
        u,
        k,
        tau,
        nu_t: terms.iter().map(|t| t.nu_t).collect(),
        iterations,
        converged,
        residual,
    })
}

/// k-τ against k-ω on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelComparison {
    pub ktau: ChannelProfile,
    pub komega: ChannelProfile,
    /// `‖U_kτ − U_kω‖₂ / ‖U_kω‖₂`.
    pub l2_difference: f64,
    pub log_slope_ktau: f64,
    pub log_slope_komega: f64,
}

pub fn compare_channel(setup: &ChannelSetup) -> Result<ChannelComparison> {
    let ktau = solve_channel(setup, ChannelClosure::KTau)?;
    let komega = solve_channel(setup, ChannelClosure::KOmega)?;
    Ok(ChannelComparison {
        l2_difference: relative_l2(&ktau.y, &ktau.u, &komega.u),
        log_slope_ktau: ktau.log_slope(30.0, 100.0)?,
        log_slope_komega: komega.log_slope(30.0, 100.0)?,
        ktau,
        komega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_clustered_and_bounded() {
        let y = channel_grid(100, 3.0);
        assert_eq!(y[0], 0.0);
        assert!((y[100] - 1.0).abs() < 1e-15);
        assert!(y[1] - y[0] < y[100] - y[99]);
    }

    #[test]
    fn diffusion_of_poiseuille_balances_forcing() {
        // (ν U')' = −1 with U(0) = 0, U'(1) = 0 gives U = (2y − y²)/(2ν)
        let y = channel_grid(40, 2.0);
        let nu = 0.1;
        let u: Vec<f64> = y.iter().map(|v| (2.0 * v - v * v) / (2.0 * nu)).collect();
        let g = vec![nu; y.len()];
        for i in 1..y.len() {
            assert!((diffusion(&y, &u, &g, i) + 1.0).abs() < 1e-9, "{i}");
        }
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let y = channel_grid(20, 2.5);
        let f: Vec<f64> = y.iter().map(|v| 3.0 * v * v - v + 2.0).collect();
        for i in 0..20 {
            assert!((derivative(&y, &f, i) - (6.0 * y[i] - 1.0)).abs() < 1e-9);
        }
    }
}
