//! Pressure and skin-friction distributions and integrated forces on walls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::BoundaryTag;
use crate::sem_ops::Discretization;

/// Nondimensional reference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowReference {
    pub nu: f64,
    /// Angle of attack in degrees.
    pub aoa: f64,
    pub p_ref: f64,
    pub u_ref: f64,
    pub rho: f64,
    pub chord: f64,
}

impl FlowReference {
    pub fn new(nu: f64, aoa: f64, chord: f64) -> Self {
        Self {
            nu,
            aoa,
            p_ref: 0.0,
            u_ref: 1.0,
            rho: 1.0,
            chord,
        }
    }

    pub fn direction(&self) -> [f64; 2] {
        let a = self.aoa.to_radians();
        [a.cos(), a.sin()]
    }

    fn dynamic_pressure(&self) -> f64 {
        0.5 * self.rho * self.u_ref * self.u_ref
    }
}

/// Wall stations, face by face along each contour. Junction points between
/// faces appear once per face.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDistribution {
    /// Arc length over chord.
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Unit normal pointing out of the fluid (into the body).
    pub normal: Vec<[f64; 2]>,
    /// Surface quadrature weight of each station.
    pub weight: Vec<f64>,
    pub cp: Vec<f64>,
    pub cf: Vec<f64>,
    /// Signed wall shear stress along the streamwise-oriented tangent.
    pub tau_w: Vec<f64>,
    /// Viscous force per unit area exerted on the wall.
    pub viscous_traction: Vec<[f64; 2]>,
    /// First off-wall GLL spacing in viscous units.
    pub dn_plus: Vec<f64>,
    /// Whether every wall contour closes on itself.
    pub closed: bool,
}

impl SurfaceDistribution {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceCoefficients {
    pub cl: f64,
    pub cd: f64,
    pub lift: f64,
    pub drag: f64,
    /// Pressure and viscous parts of the force on the body.
    pub pressure_force: [f64; 2],
    pub viscous_force: [f64; 2],
}

fn inward_neighbour(order: usize, face: usize, i: usize, j: usize) -> (usize, usize) {
    match face {
        0 => (i, 1),
        1 => (order - 1, j),
        2 => (i, order - 1),
        _ => (1, j),
    }
}

/// Order wall faces into contours by matching end points.
fn chain_faces(ends: &[([f64; 2], [f64; 2])], tol: f64) -> (Vec<usize>, bool) {
    let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]) <= tol;
    let mut used = vec![false; ends.len()];
    let mut order = Vec::with_capacity(ends.len());
    let mut closed = true;
    loop {
        let unused: Vec<usize> = (0..ends.len()).filter(|&f| !used[f]).collect();
        if unused.is_empty() {
            break;
        }
        // open contours start at a face without predecessor, closed ones at
        // the most downstream point
        let first = unused
            .iter()
            .copied()
            .find(|&f| !unused.iter().any(|&g| g != f && close(ends[g].1, ends[f].0)))
            .unwrap_or_else(|| {
                unused
                    .iter()
                    .copied()
                    .max_by(|&a, &b| ends[a].0[0].total_cmp(&ends[b].0[0]))
                    .unwrap_or(unused[0])
            });
        let mut cur = first;
        loop {
            used[cur] = true;
            order.push(cur);
            match (0..ends.len()).find(|&f| !used[f] && close(ends[f].0, ends[cur].1)) {
                Some(next) => cur = next,
                None => {
                    if !close(ends[cur].1, ends[first].0) {
                        closed = false;
                    }
                    break;
                }
            }
        }
    }
    (order, closed)
}

/// Sample `Cp`, `Cf`, wall shear and `Δn⁺` at every wall GLL point.
pub fn surface_coefficients(
    disc: &Discretization,
    u: &[f64],
    v: &[f64],
    p: &[f64],
    reference: &FlowReference,
) -> SurfaceDistribution {
    let order = disc.basis.order();
    let np = disc.np();
    let npe = np * np;
    let walls: Vec<_> = disc.geom.faces_with_tag(BoundaryTag::Wall).collect();
    let ends: Vec<_> = walls
        .iter()
        .map(|f| (disc.mesh.point(f.nodes[0]), disc.mesh.point(f.nodes[f.nodes.len() - 1])))
        .collect();
    let scale = disc.area().sqrt().max(1e-300);
    let (order_idx, closed) = chain_faces(&ends, 1e-9 * scale);
    let (ux, uy) = disc.gradient(u);
    let (vx, vy) = disc.gradient(v);
    let q = reference.dynamic_pressure();
    let mu = reference.rho * reference.nu;
    let theta = reference.direction();
    let mut out = SurfaceDistribution {
        closed: closed && !walls.is_empty(),
        ..Default::default()
    };
    let mut arc = 0.0;
    let mut last: Option<[f64; 2]> = None;
    for &fi in &order_idx {
        let f = walls[fi];
        let fnodes = crate::mesh::face_nodes(order, f.face);
        for (k, &l) in f.nodes.iter().enumerate() {
            let pt = disc.mesh.point(l);
            if let Some(prev) = last {
                let d = (pt[0] - prev[0]).hypot(pt[1] - prev[1]);
                // contours are separated by jumps larger than a face
                if d < f.length() * 2.0 {
                    arc += d;
                }
            }
            last = Some(pt);
            let n = f.normal[k];
            let sxx = 2.0 * mu * ux[l];
            let syy = 2.0 * mu * vy[l];
            let sxy = mu * (uy[l] + vx[l]);
            // force on the wall: −σ·n with n out of the fluid
            let traction = [-(sxx * n[0] + sxy * n[1]), -(sxy * n[0] + syy * n[1])];
            let mut tangent = [-n[1], n[0]];
            if tangent[0] * theta[0] + tangent[1] * theta[1] < 0.0 {
                tangent = [-tangent[0], -tangent[1]];
            }
            let tau_w = traction[0] * tangent[0] + traction[1] * tangent[1];
            let (i, j) = fnodes[k];
            let (ia, ja) = inward_neighbour(order, f.face, i, j);
            let adj = disc.mesh.point(f.element * npe + ja * np + ia);
            let dn = (adj[0] - pt[0]).hypot(adj[1] - pt[1]);
            let u_tau = (tau_w.abs() / reference.rho).sqrt();
            out.s.push(arc / reference.chord);
            out.x.push(pt[0]);
            out.y.push(pt[1]);
            out.normal.push(n);
            out.weight.push(f.weights[k]);
            out.cp.push((p[l] - reference.p_ref) / q);
            out.cf.push(tau_w / q);
            out.tau_w.push(tau_w);
            out.viscous_traction.push(traction);
            out.dn_plus.push(u_tau * dn / reference.nu);
        }
    }
    out
}

/// Integrate pressure and viscous loads over closed wall contours.
pub fn force_coefficients(dist: &SurfaceDistribution, reference: &FlowReference) -> Result<ForceCoefficients> {
    if !dist.closed {
        return Err(Error::Geometry("force integration needs closed wall contours".into()));
    }
    let q = reference.dynamic_pressure();
    let mut fp = [0.0; 2];
    let mut fv = [0.0; 2];
    for k in 0..dist.len() {
        let w = dist.weight[k];
        let dp = dist.cp[k] * q;
        fp[0] += w * dp * dist.normal[k][0];
        fp[1] += w * dp * dist.normal[k][1];
        fv[0] += w * dist.viscous_traction[k][0];
        fv[1] += w * dist.viscous_traction[k][1];
    }
    let f = [fp[0] + fv[0], fp[1] + fv[1]];
    let d = reference.direction();
    let drag = f[0] * d[0] + f[1] * d[1];
    let lift = -f[0] * d[1] + f[1] * d[0];
    let denom = q * reference.chord;
    Ok(ForceCoefficients {
        cl: lift / denom,
        cd: drag / denom,
        lift,
        drag,
        pressure_force: fp,
        viscous_force: fv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{self, BoxTags};
    use crate::mesh::ReferenceBasis;
    use std::f64::consts::PI;

    fn cylinder(order: usize) -> Discretization {
        let b = ReferenceBasis::new(order).unwrap();
        let m = generate::annulus(&b, 16, 2, 1.0, 4.0, BoundaryTag::Wall, BoundaryTag::InflowOutflow).unwrap();
        Discretization::new(m, b).unwrap()
    }

    #[test]
    fn stagnation_pressure_gives_unit_cp() {
        let d = cylinder(4);
        let n = d.num_local();
        let p = vec![0.5; n];
        let s = surface_coefficients(&d, &vec![0.0; n], &vec![0.0; n], &p, &FlowReference::new(0.01, 0.0, 2.0));
        assert!(s.closed);
        assert!(s.cp.iter().all(|&c| (c - 1.0).abs() < 1e-15));
        assert!(s.cf.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn uniform_pressure_has_no_net_force() {
        let d = cylinder(6);
        let n = d.num_local();
        let r = FlowReference::new(0.01, 12.0, 2.0);
        let s = surface_coefficients(&d, &vec![0.0; n], &vec![0.0; n], &vec![3.7; n], &r);
        let f = force_coefficients(&s, &r).unwrap();
        assert!(f.cl.abs() < 1e-12 && f.cd.abs() < 1e-12, "{f:?}");
    }

    #[test]
    fn cosine_pressure_on_unit_circle() {
        let d = cylinder(8);
        let p = d.sample(|x, y| x / x.hypot(y));
        let n = d.num_local();
        let r = FlowReference::new(0.01, 0.0, 2.0);
        let s = surface_coefficients(&d, &vec![0.0; n], &vec![0.0; n], &p, &r);
        let f = force_coefficients(&s, &r).unwrap();
        // ∮ cos θ (−cos θ, −sin θ) dθ on the body
        assert!((f.pressure_force[0] + PI).abs() < 1e-10, "{f:?}");
        assert!(f.pressure_force[1].abs() < 1e-12);
    }

    #[test]
    fn couette_skin_friction() {
        let b = ReferenceBasis::new(4).unwrap();
        let tags = BoxTags {
            bottom: BoundaryTag::Wall,
            right: BoundaryTag::Outflow,
            top: BoundaryTag::Inflow,
            left: BoundaryTag::Inflow,
        };
        let h = 0.5;
        let m = generate::rectangle(&b, 3, 2, [0.0, 1.0], [0.0, h], tags).unwrap();
        let d = Discretization::new(m, b).unwrap();
        let (nu, big_u) = (0.02, 1.5);
        let u = d.sample(|_, y| big_u * y / h);
        let n = d.num_local();
        let r = FlowReference::new(nu, 0.0, 1.0);
        let s = surface_coefficients(&d, &u, &vec![0.0; n], &vec![0.0; n], &r);
        assert!(!s.closed);
        assert_eq!(s.len(), 3 * 5);
        let expected = 2.0 * nu * big_u / h;
        assert!(s.cf.iter().all(|c| (c - expected).abs() < 1e-12));
        assert!(s.s.windows(2).all(|w| w[1] >= w[0]));
        assert!(force_coefficients(&s, &r).is_err());
    }
}
