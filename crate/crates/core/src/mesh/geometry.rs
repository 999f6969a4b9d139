//! Isoparametric metric terms, mass weights and boundary-face normals.

use super::{BoundaryTag, ReferenceBasis, SpectralMesh};
use crate::error::{Error, Result};

/// Geometry of one boundary face, sampled at its GLL points in traversal order.
#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub element: usize,
    pub face: usize,
    pub tag: BoundaryTag,
    /// Local node indices along the face (counterclockwise).
    pub nodes: Vec<usize>,
    /// Outward unit normals.
    pub normal: Vec<[f64; 2]>,
    /// Surface Jacobian `|dx/dξ|` along the face.
    pub surface_jacobian: Vec<f64>,
    /// Surface quadrature weights (surface Jacobian times GLL weight).
    pub weights: Vec<f64>,
}

impl FaceGeometry {
    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn midpoint_normal(&self) -> [f64; 2] {
        let n = self.normal.len();
        if n % 2 == 1 {
            return self.normal[n / 2];
        }
        let (a, b) = (self.normal[n / 2 - 1], self.normal[n / 2]);
        let m = [a[0] + b[0], a[1] + b[1]];
        let len = m[0].hypot(m[1]);
        [m[0] / len, m[1] / len]
    }
}

#[derive(Debug, Clone)]
pub struct GeometricFactors {
    pub jacobian: Vec<f64>,
    /// `∂r/∂x`, `∂r/∂y`, `∂s/∂x`, `∂s/∂y` per point.
    pub rx: Vec<f64>,
    pub ry: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    /// Diagonal mass matrix (Jacobian times tensor GLL weight).
    pub mass: Vec<f64>,
    pub faces: Vec<FaceGeometry>,
}

impl GeometricFactors {
    pub fn area(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn min_jacobian(&self) -> f64 {
        self.jacobian.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_jacobian(&self) -> f64 {
        self.jacobian.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn faces_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &FaceGeometry> {
        self.faces.iter().filter(move |f| f.tag == tag)
    }
}

/// Reference derivatives `(x_r, x_s, y_r, y_s)` of one element.
pub(crate) fn element_derivatives(
    mesh: &SpectralMesh,
    basis: &ReferenceBasis,
    e: usize,
) -> [Vec<f64>; 4] {
    let np = basis.np();
    let d = basis.deriv_matrix();
    let off = e * np * np;
    let x = &mesh.x()[off..off + np * np];
    let y = &mesh.y()[off..off + np * np];
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; np * np]);
    for j in 0..np {
        for i in 0..np {
            let (mut xr, mut yr, mut xs, mut ys) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..np {
                let dr = d[i * np + k];
                let ds = d[j * np + k];
                xr += dr * x[j * np + k];
                yr += dr * y[j * np + k];
                xs += ds * x[k * np + i];
                ys += ds * y[k * np + i];
            }
            let p = j * np + i;
            out[0][p] = xr;
            out[1][p] = xs;
            out[2][p] = yr;
            out[3][p] = ys;
        }
    }
    out
}

/// Check a single element for a positive Jacobian at every GLL point.
pub(crate) fn check_element(mesh: &SpectralMesh, basis: &ReferenceBasis, e: usize) -> Result<()> {
    let np = basis.np();
    let [xr, xs, yr, ys] = element_derivatives(mesh, basis, e);
    for p in 0..np * np {
        let jac = xr[p] * ys[p] - xs[p] * yr[p];
        if !(jac > 0.0) {
            let z = basis.nodes();
            return Err(Error::Geometry(format!(
                "nonpositive Jacobian {jac:.3e} in element {e} at (r, s) = ({:.4}, {:.4})",
                z[p % np],
                z[p / np]
            )));
        }
    }
    Ok(())
}

pub fn compute_geometric_factors(
    mesh: &SpectralMesh,
    basis: &ReferenceBasis,
) -> Result<GeometricFactors> {
    if basis.order() != mesh.order() {
        return Err(Error::Parameter(format!(
            "basis order {} does not match mesh order {}",
            basis.order(),
            mesh.order()
        )));
    }
    let np = basis.np();
    let n = mesh.num_local();
    let w = basis.weights();
    let mut g = GeometricFactors {
        jacobian: vec![0.0; n],
        rx: vec![0.0; n],
        ry: vec![0.0; n],
        sx: vec![0.0; n],
        sy: vec![0.0; n],
        mass: vec![0.0; n],
        faces: Vec::with_capacity(mesh.boundary_faces().len()),
    };
    let mut derivs = Vec::with_capacity(mesh.num_elements());
    for e in 0..mesh.num_elements() {
        check_element(mesh, basis, e)?;
        let [xr, xs, yr, ys] = element_derivatives(mesh, basis, e);
        let off = e * np * np;
        for j in 0..np {
            for i in 0..np {
                let p = j * np + i;
                let jac = xr[p] * ys[p] - xs[p] * yr[p];
                let l = off + p;
                g.jacobian[l] = jac;
                g.rx[l] = ys[p] / jac;
                g.ry[l] = -xs[p] / jac;
                g.sx[l] = -yr[p] / jac;
                g.sy[l] = xr[p] / jac;
                g.mass[l] = jac * w[i] * w[j];
            }
        }
        derivs.push([xr, xs, yr, ys]);
    }
    for bf in mesh.boundary_faces() {
        let [xr, xs, yr, ys] = &derivs[bf.element];
        let idx = super::face_nodes(mesh.order(), bf.face);
        let mut fg = FaceGeometry {
            element: bf.element,
            face: bf.face,
            tag: bf.tag,
            nodes: Vec::with_capacity(np),
            normal: Vec::with_capacity(np),
            surface_jacobian: Vec::with_capacity(np),
            weights: Vec::with_capacity(np),
        };
        for (k, &(i, j)) in idx.iter().enumerate() {
            let p = j * np + i;
            let t = match bf.face {
                0 => [xr[p], yr[p]],
                1 => [xs[p], ys[p]],
                2 => [-xr[p], -yr[p]],
                _ => [-xs[p], -ys[p]],
            };
            let len = t[0].hypot(t[1]);
            fg.nodes.push(mesh.local_index(bf.element, i, j));
            fg.normal.push([t[1] / len, -t[0] / len]);
            fg.surface_jacobian.push(len);
            fg.weights.push(len * w[k]);
        }
        g.faces.push(fg);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, QuadTopology};

    fn single(vertices: [[f64; 2]; 4], order: usize) -> (SpectralMesh, ReferenceBasis) {
        let b = ReferenceBasis::new(order).unwrap();
        let topo = QuadTopology {
            vertices: vertices.to_vec(),
            elements: vec![[0, 1, 2, 3]],
            boundary_tags: (0..4).map(|f| ((0, f), BoundaryTag::Wall)).collect(),
            ..Default::default()
        };
        (SpectralMesh::build(topo, &b).unwrap(), b)
    }

    #[test]
    fn unit_square_jacobian_is_quarter() {
        let (m, b) = single([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 4);
        let g = compute_geometric_factors(&m, &b).unwrap();
        assert!(g.jacobian.iter().all(|&j| (j - 0.25).abs() < 1e-15));
        assert!((g.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rectangle_two_by_one() {
        let (m, b) = single([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]], 5);
        let g = compute_geometric_factors(&m, &b).unwrap();
        assert!(g.jacobian.iter().all(|&j| (j - 0.5).abs() < 1e-14));
        assert!((g.area() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn bowtie_is_rejected() {
        let (m, b) = single([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], 3);
        let err = compute_geometric_factors(&m, &b).unwrap_err();
        assert!(matches!(err, Error::Geometry(ref s) if s.contains("element 0")));
    }

    #[test]
    fn normals_point_outward_on_box() {
        let b = ReferenceBasis::new(3).unwrap();
        let m = generate::rectangle(&b, 2, 2, [0.0, 1.0], [0.0, 1.0], generate::BoxTags::all(BoundaryTag::Wall))
            .unwrap();
        let g = compute_geometric_factors(&m, &b).unwrap();
        let mut perimeter = 0.0;
        for f in &g.faces {
            for (k, &l) in f.nodes.iter().enumerate() {
                let p = m.point(l);
                let n = f.normal[k];
                assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-14);
                // outward: moving along the normal leaves the unit square
                let q = [p[0] + 1e-3 * n[0], p[1] + 1e-3 * n[1]];
                assert!(q[0] < 0.0 || q[0] > 1.0 || q[1] < 0.0 || q[1] > 1.0);
            }
            perimeter += f.length();
        }
        assert!((perimeter - 4.0).abs() < 1e-13);
    }

    #[test]
    fn annulus_area_converges() {
        let mut prev = f64::INFINITY;
        let exact = std::f64::consts::PI * (4.0 - 1.0);
        for n in [2, 4, 8] {
            let b = ReferenceBasis::new(n).unwrap();
            let m = generate::annulus(&b, 8, 2, 1.0, 2.0, BoundaryTag::Wall, BoundaryTag::InflowOutflow)
                .unwrap();
            let g = compute_geometric_factors(&m, &b).unwrap();
            let err = (g.area() - exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-9);
    }
}
