//! Advective CFL number on the GLL grid.

use crate::sem_ops::Discretization;

/// Smallest distance from each reference GLL node to a neighbour.
fn node_spacing(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { nodes[i] - nodes[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { f64::INFINITY };
            left.min(right)
        })
        .collect()
}

/// Largest `|u·∇r|/δr + |u·∇s|/δs` over all points (the CFL per unit `Δt`).
pub fn cfl_rate(disc: &Discretization, u: &[f64], v: &[f64]) -> f64 {
    let np = disc.np();
    let npe = np * np;
    let delta = node_spacing(disc.basis.nodes());
    let g = &disc.geom;
    let mut rate: f64 = 0.0;
    for l in 0..u.len() {
        let q = l % npe;
        let (i, j) = (q % np, q / np);
        let ur = u[l] * g.rx[l] + v[l] * g.ry[l];
        let us = u[l] * g.sx[l] + v[l] * g.sy[l];
        rate = rate.max(ur.abs() / delta[i] + us.abs() / delta[j]);
    }
    rate
}

/// `(CFL, Δt)` where `Δt` would give `target` CFL, capped at `dt_max`.
pub fn cfl_estimate(disc: &Discretization, u: &[f64], v: &[f64], dt: f64, target: f64, dt_max: f64) -> (f64, f64) {
    let rate = cfl_rate(disc, u, v);
    let suggestion = if rate > 0.0 { (target / rate).min(dt_max) } else { dt_max };
    (dt * rate, suggestion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{self, BoxTags};
    use crate::mesh::{BoundaryTag, ReferenceBasis};

    fn disc(order: usize, nx: usize) -> Discretization {
        let b = ReferenceBasis::new(order).unwrap();
        let m = generate::rectangle(&b, nx, nx, [0.0, 1.0], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall)).unwrap();
        Discretization::new(m, b).unwrap()
    }

    #[test]
    fn linear_elements_give_dt_over_h() {
        let d = disc(1, 4);
        let n = d.num_local();
        let (cfl, _) = cfl_estimate(&d, &vec![1.0; n], &vec![0.0; n], 0.01, 0.5, 1.0);
        assert!((cfl - 0.01 / 0.25).abs() < 1e-14);
    }

    #[test]
    fn zero_velocity_suggests_cap() {
        let d = disc(4, 2);
        let n = d.num_local();
        let (cfl, dt) = cfl_estimate(&d, &vec![0.0; n], &vec![0.0; n], 0.1, 0.5, 0.02);
        assert_eq!(cfl, 0.0);
        assert_eq!(dt, 0.02);
    }

    #[test]
    fn cfl_is_linear_in_velocity() {
        let d = disc(5, 3);
        let u = d.sample(|x, y| (3.0 * x).sin() + y);
        let v = d.sample(|x, y| x * y - 0.3);
        let u2: Vec<f64> = u.iter().map(|a| 2.0 * a).collect();
        let v2: Vec<f64> = v.iter().map(|a| 2.0 * a).collect();
        let (c1, _) = cfl_estimate(&d, &u, &v, 0.01, 0.5, 1.0);
        let (c2, _) = cfl_estimate(&d, &u2, &v2, 0.01, 0.5, 1.0);
        assert_eq!(c2, 2.0 * c1);
    }
}
