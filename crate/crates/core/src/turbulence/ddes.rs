//! DDES delay function and length scales.

use super::{DdesConstants, SstConstants, SHEAR_FLOOR};
use crate::error::{Error, Result};

/// Smallest `l_DDES` used in the k destruction term.
pub const LENGTH_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DdesEvaluation {
    pub l_rans: f64,
    pub l_les: f64,
    pub l_ddes: f64,
    pub c_des: f64,
    pub f_d: f64,
    /// `ρ k^{3/2} / l_DDES`.
    pub destruction: f64,
    /// Implicit rate `ρ √k / l_DDES`, so that `destruction = rate · k`.
    pub destruction_rate: f64,
    /// Set when `l_DDES` fell below [`LENGTH_FLOOR`] with `k > 0`.
    pub guarded: bool,
}

/// `(f_d, r_d)` from the delay function.
pub fn delay_function(
    nu_t: f64,
    nu: f64,
    d: f64,
    strain: f64,
    vorticity: f64,
    sst: &SstConstants,
    ddes: &DdesConstants,
) -> Result<(f64, f64)> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("delay function needs positive wall distance, got {d}")));
    }
    let shear = (0.5 * (strain * strain + vorticity * vorticity)).sqrt().max(SHEAR_FLOOR);
    let r_d = (nu_t + nu) / (sst.kappa * sst.kappa * d * d * shear);
    let f_d = 1.0 - (ddes.c_d1 * r_d).powf(ddes.c_d2).tanh();
    Ok((f_d, r_d))
}

#[allow(clippy::too_many_arguments)]
pub fn ddes_length_scale(
    k: f64,
    tau: f64,
    f1: f64,
    f_d: f64,
    h_max: f64,
    rho: f64,
    sst: &SstConstants,
    ddes: &DdesConstants,
) -> Result<DdesEvaluation> {
    if !(k >= 0.0 && tau >= 0.0) {
        return Err(Error::Domain(format!("k and tau must be nonnegative, got k={k}, tau={tau}")));
    }
    if !(h_max > 0.0) {
        return Err(Error::Domain(format!("h_max must be positive, got {h_max}")));
    }
    if !(0.0..=1.0).contains(&f_d) || !(0.0..=1.0).contains(&f1) {
        return Err(Error::Domain(format!("f_d and F1 must lie in [0, 1], got {f_d}, {f1}")));
    }
    let sqk = k.sqrt();
    let c_des = ddes.c_des1 * f1 + ddes.c_des2 * (1.0 - f1);
    let l_rans = sqk * tau / sst.c_mu();
    let l_les = c_des * h_max;
    let l_ddes = (1.0 - f_d) * l_rans + f_d * l_rans.min(l_les);
    let guarded = k > 0.0 && l_ddes < LENGTH_FLOOR;
    let rate = if k > 0.0 {
        rho * sqk / l_ddes.max(LENGTH_FLOOR)
    } else {
        0.0
    };
    Ok(DdesEvaluation {
        l_rans,
        l_les,
        l_ddes,
        c_des,
        f_d,
        destruction: rate * k,
        destruction_rate: rate,
        guarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> (SstConstants, DdesConstants) {
        (SstConstants::default(), DdesConstants::default())
    }

    #[test]
    fn delay_function_limits() {
        let (s, d) = consts();
        let (f_d, r_d) = delay_function(0.0, 0.0, 1.0, 1.0, 1.0, &s, &d).unwrap();
        assert_eq!((f_d, r_d), (1.0, 0.0));
        let (f_d, _) = delay_function(1e3, 1.0, 1e-3, 1.0, 1.0, &s, &d).unwrap();
        assert!(f_d < 1e-12);
        assert!(delay_function(0.0, 1.0, 0.0, 1.0, 1.0, &s, &d).is_err());
    }

    #[test]
    fn delay_function_at_unit_argument() {
        let (s, d) = consts();
        // r_d = 0.05 with κ² d² √(0.5(S²+Ω²)) = 1
        let d_wall = 1.0 / s.kappa;
        let (f_d, r_d) = delay_function(0.05, 0.0, d_wall, 1.0, 1.0, &s, &d).unwrap();
        assert!((r_d - 0.05).abs() < 1e-15);
        assert!((f_d - 0.238_405_844_044_234_04).abs() < 1e-12);
    }

    #[test]
    fn rans_limit_reproduces_sst_destruction() {
        let (s, d) = consts();
        let e = ddes_length_scale(0.7, 0.3, 0.4, 0.0, 0.01, 1.0, &s, &d).unwrap();
        assert_eq!(e.l_ddes, e.l_rans);
        let sst = 0.09 * 0.7 / 0.3;
        assert!((e.destruction - sst).abs() < 1e-14 * sst);
    }

    #[test]
    fn quoted_length_scales() {
        let (s, d) = consts();
        let e = ddes_length_scale(1.0, 0.09, 1.0, 1.0, 0.5, 1.0, &s, &d).unwrap();
        assert!((e.l_rans - 1.0).abs() < 1e-15);
        assert!((e.l_les - 0.39).abs() < 1e-15);
        assert!((e.l_ddes - 0.39).abs() < 1e-15);
    }

    #[test]
    fn zero_length_guard() {
        let (s, d) = consts();
        let e = ddes_length_scale(1.0, 0.0, 1.0, 0.0, 0.5, 1.0, &s, &d).unwrap();
        assert!(e.guarded);
        assert!(e.destruction.is_finite());
    }
}
