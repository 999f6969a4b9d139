//! Boundary classification, Dirichlet masks and boundary values.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::BoundaryTag;
use crate::sem_ops::Discretization;

/// Resolved role of one boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Wall,
    Inflow,
    Outflow,
    /// Slip plane whose normal is the given coordinate axis.
    Symmetry { axis: usize },
}

/// Dirichlet velocity data on inflow faces as a function of `(x, y, t)`.
#[derive(Clone)]
pub enum InflowData {
    /// Uniform stream `speed · θ̂`.
    Freestream { direction: [f64; 2], speed: f64 },
    Function(Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>),
}

impl InflowData {
    pub fn at(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        match self {
            InflowData::Freestream { direction, speed } => [speed * direction[0], speed * direction[1]],
            InflowData::Function(f) => f(x, y, t),
        }
    }

    /// Direction used to split `inflow_outflow` faces.
    pub fn direction(&self) -> Option<[f64; 2]> {
        match self {
            InflowData::Freestream { direction, .. } => Some(*direction),
            InflowData::Function(_) => None,
        }
    }
}

impl fmt::Debug for InflowData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InflowData::Freestream { direction, speed } => f
                .debug_struct("Freestream")
                .field("direction", direction)
                .field("speed", speed)
                .finish(),
            InflowData::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Per-global-node boundary roles.
#[derive(Debug, Clone)]
pub struct BoundaryConditions {
    /// Role of each entry of `GeometricFactors::faces`.
    pub face_kinds: Vec<FaceKind>,
    /// Dirichlet masks for the `u` and `v` components.
    pub velocity_mask: [Vec<bool>; 2],
    /// Nodes holding `p = 0`.
    pub pressure_mask: Vec<bool>,
    /// Dirichlet nodes for `k` and `τ`.
    pub scalar_mask: Vec<bool>,
    pub wall: Vec<bool>,
    /// Nodes taking velocity from the inflow data (wall nodes excluded).
    pub inflow: Vec<bool>,
    /// Coordinates of each global node.
    pub coords: Vec<[f64; 2]>,
    pub inflow_data: InflowData,
}

/// Classify an `inflow_outflow` face by the sign of `θ̂·n̂` at its midpoint.
pub fn is_inflow(direction: [f64; 2], normal: [f64; 2]) -> bool {
    direction[0] * normal[0] + direction[1] * normal[1] < 0.0
}

impl BoundaryConditions {
    pub fn new(disc: &Discretization, inflow_data: InflowData) -> Result<Self> {
        let ng = disc.num_global();
        let global = disc.mesh.global_index();
        let mut coords = vec![[0.0; 2]; ng];
        for (l, &g) in global.iter().enumerate() {
            coords[g] = disc.mesh.point(l);
        }
        let mut face_kinds = Vec::with_capacity(disc.geom.faces.len());
        for f in &disc.geom.faces {
            let kind = match f.tag {
                BoundaryTag::Wall => FaceKind::Wall,
                BoundaryTag::Inflow => FaceKind::Inflow,
                BoundaryTag::Outflow => FaceKind::Outflow,
                BoundaryTag::InflowOutflow => {
                    let dir = inflow_data.direction().ok_or_else(|| {
                        Error::Configuration(
                            "inflow_outflow faces need a freestream direction".into(),
                        )
                    })?;
                    if is_inflow(dir, f.midpoint_normal()) {
                        FaceKind::Inflow
                    } else {
                        FaceKind::Outflow
                    }
                }
                BoundaryTag::Symmetry => {
                    let axis = if f.normal.iter().all(|n| n[0].abs() > 1.0 - 1e-8) {
                        0
                    } else if f.normal.iter().all(|n| n[1].abs() > 1.0 - 1e-8) {
                        1
                    } else {
                        return Err(Error::Configuration(format!(
                            "symmetry face {} of element {} is not axis-aligned",
                            f.face, f.element
                        )));
                    };
                    FaceKind::Symmetry { axis }
                }
                BoundaryTag::Periodic => {
                    return Err(Error::Configuration(format!(
                        "unresolved periodic face {} of element {}",
                        f.face, f.element
                    )))
                }
            };
            face_kinds.push(kind);
        }
        let mut wall = vec![false; ng];
        let mut inflow = vec![false; ng];
        let mut outflow = vec![false; ng];
        let mut sym = [vec![false; ng], vec![false; ng]];
        for (f, kind) in disc.geom.faces.iter().zip(&face_kinds) {
            for &l in &f.nodes {
                let g = global[l];
                match kind {
                    FaceKind::Wall => wall[g] = true,
                    FaceKind::Inflow => inflow[g] = true,
                    FaceKind::Outflow => outflow[g] = true,
                    FaceKind::Symmetry { axis } => sym[*axis][g] = true,
                }
            }
        }
        for g in 0..ng {
            if wall[g] {
                inflow[g] = false;
            }
        }
        let velocity_mask: [Vec<bool>; 2] = std::array::from_fn(|c| {
            (0..ng).map(|g| wall[g] || inflow[g] || sym[c][g]).collect()
        });
        let scalar_mask = (0..ng).map(|g| wall[g] || inflow[g]).collect();
        Ok(Self {
            face_kinds,
            velocity_mask,
            pressure_mask: outflow,
            scalar_mask,
            wall,
            inflow,
            coords,
            inflow_data,
        })
    }

    pub fn has_pressure_dirichlet(&self) -> bool {
        self.pressure_mask.iter().any(|&m| m)
    }

    /// Global Dirichlet velocity values at time `t` (zero off the mask).
    pub fn velocity_values(&self, t: f64) -> [Vec<f64>; 2] {
        let ng = self.coords.len();
        let mut out = [vec![0.0; ng], vec![0.0; ng]];
        for g in 0..ng {
            if self.inflow[g] {
                let [x, y] = self.coords[g];
                let w = self.inflow_data.at(x, y, t);
                for c in 0..2 {
                    if self.velocity_mask[c][g] {
                        out[c][g] = w[c];
                    }
                }
            }
        }
        out
    }

    /// Global Dirichlet values of a scalar: `inflow_value` on inflow, 0 on walls.
    pub fn scalar_values(&self, inflow_value: f64) -> Vec<f64> {
        self.inflow
            .iter()
            .map(|&i| if i { inflow_value } else { 0.0 })
            .collect()
    }
}

/// Overwrite Dirichlet nodes of local fields with boundary values.
pub fn impose(disc: &Discretization, field: &mut [f64], mask: &[bool], values: &[f64]) {
    for (l, &g) in disc.mesh.global_index().iter().enumerate() {
        if mask[g] {
            field[l] = values[g];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;
    use crate::mesh::ReferenceBasis;

    fn annulus_bc(aoa_deg: f64) -> (Discretization, BoundaryConditions) {
        let b = ReferenceBasis::new(3).unwrap();
        let m = generate::annulus(&b, 16, 2, 0.5, 4.0, BoundaryTag::Wall, BoundaryTag::InflowOutflow).unwrap();
        let d = Discretization::new(m, b).unwrap();
        let a = aoa_deg.to_radians();
        let bc = BoundaryConditions::new(
            &d,
            InflowData::Freestream {
                direction: [a.cos(), a.sin()],
                speed: 1.0,
            },
        )
        .unwrap();
        (d, bc)
    }

    #[test]
    fn zero_incidence_inflow_is_left_half() {
        let (d, bc) = annulus_bc(0.0);
        for (f, k) in d.geom.faces.iter().zip(&bc.face_kinds) {
            if f.tag != BoundaryTag::InflowOutflow {
                continue;
            }
            let n = f.midpoint_normal();
            assert_eq!(*k == FaceKind::Inflow, n[0] < 0.0);
        }
    }

    #[test]
    fn ninety_degrees_inflow_is_bottom_half() {
        let (d, bc) = annulus_bc(90.0);
        for (f, k) in d.geom.faces.iter().zip(&bc.face_kinds) {
            if f.tag == BoundaryTag::InflowOutflow {
                assert_eq!(*k == FaceKind::Inflow, f.midpoint_normal()[1] < -1e-12);
            }
        }
    }

    #[test]
    fn wall_values_are_zero() {
        let (d, bc) = annulus_bc(10.0);
        let vals = bc.velocity_values(0.0);
        let mut u = vec![1.0; d.num_local()];
        impose(&d, &mut u, &bc.velocity_mask[0], &vals[0]);
        for l in d.mesh.tagged_local_nodes(BoundaryTag::Wall) {
            assert_eq!(u[l], 0.0);
        }
        let k = bc.scalar_values(0.3);
        for (g, &w) in bc.wall.iter().enumerate() {
            if w {
                assert_eq!(k[g], 0.0);
            }
        }
    }
}
