//! Pointwise flow diagnostics.

use crate::sem_ops::operators::VelocityGradient;
use crate::sem_ops::Discretization;

/// `Q = ½(‖Ω‖² − ‖S‖²)` with Frobenius norms.
pub fn q_criterion(grads: &[VelocityGradient]) -> Vec<f64> {
    grads
        .iter()
        .map(|g| {
            let s12 = 0.5 * (g.uy + g.vx);
            let w12 = 0.5 * (g.uy - g.vx);
            let s2 = g.ux * g.ux + g.vy * g.vy + 2.0 * s12 * s12;
            let w2 = 2.0 * w12 * w12;
            0.5 * (w2 - s2)
        })
        .collect()
}

/// Q-criterion of a velocity field using continuous gradients.
pub fn q_criterion_field(disc: &Discretization, u: &[f64], v: &[f64]) -> Vec<f64> {
    let (ux, uy) = disc.gradient_continuous(u);
    let (vx, vy) = disc.gradient_continuous(v);
    let grads: Vec<VelocityGradient> = (0..u.len())
        .map(|l| VelocityGradient {
            ux: ux[l],
            uy: uy[l],
            vx: vx[l],
            vy: vy[l],
        })
        .collect();
    q_criterion(&grads)
}

/// Velocity component along the freestream direction at `aoa` degrees.
pub fn streamwise_projection(u: &[f64], v: &[f64], aoa: f64) -> Vec<f64> {
    let a = aoa.to_radians();
    let (c, s) = if aoa == 0.0 {
        (1.0, 0.0)
    } else if aoa == 90.0 {
        (0.0, 1.0)
    } else {
        (a.cos(), a.sin())
    };
    u.iter().zip(v).map(|(x, y)| x * c + y * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(ux: f64, uy: f64, vx: f64, vy: f64) -> VelocityGradient {
        VelocityGradient { ux, uy, vx, vy }
    }

    #[test]
    fn canonical_flows() {
        let w = 1.7;
        let a = 0.6;
        let q = q_criterion(&[g(0.0, -w, w, 0.0), g(0.0, 2.3, 0.0, 0.0), g(a, 0.0, 0.0, -a)]);
        assert!((q[0] - w * w).abs() < 1e-15);
        assert_eq!(q[1], 0.0);
        assert!((q[2] + a * a).abs() < 1e-15);
    }

    #[test]
    fn projection_cases() {
        let u = [0.3, -1.0];
        let v = [2.0, 4.0];
        assert_eq!(streamwise_projection(&u, &v, 0.0), u.to_vec());
        assert_eq!(streamwise_projection(&u, &v, 90.0), v.to_vec());
        let r = streamwise_projection(&[1.0], &[1.0], 45.0);
        assert!((r[0] - 2f64.sqrt()).abs() < 1e-15);
    }
}
