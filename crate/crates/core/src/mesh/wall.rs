//! Wall distance and per-element grid scale.

use std::collections::HashMap;

use super::basis::lagrange_weights;
use super::{BoundaryTag, ReferenceBasis, SpectralMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct WallGeometryFields {
    /// Distance to the nearest wall per GLL point.
    pub distance: Vec<f64>,
    /// Longest edge arc length divided by N, per element.
    pub hmax: Vec<f64>,
}

impl WallGeometryFields {
    pub fn compute(mesh: &SpectralMesh, basis: &ReferenceBasis) -> Result<Self> {
        Ok(Self {
            distance: compute_wall_distance(mesh, basis)?,
            hmax: compute_hmax(mesh, basis),
        })
    }

    /// `h_max` broadcast to every GLL point of its element.
    pub fn hmax_per_point(&self, mesh: &SpectralMesh) -> Vec<f64> {
        let npe = mesh.np() * mesh.np();
        (0..mesh.num_local()).map(|l| self.hmax[l / npe]).collect()
    }
}

struct WallCurve {
    pts: Vec<[f64; 2]>,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl WallCurve {
    fn lower_bound(&self, q: [f64; 2]) -> f64 {
        let dx = (self.lo[0] - q[0]).max(q[0] - self.hi[0]).max(0.0);
        let dy = (self.lo[1] - q[1]).max(q[1] - self.hi[1]).max(0.0);
        dx.hypot(dy)
    }
}

fn dist2_on_curve(curve: &WallCurve, nodes: &[f64], t: f64, q: [f64; 2]) -> f64 {
    let l = lagrange_weights(nodes, t);
    let (mut x, mut y) = (0.0, 0.0);
    for (k, p) in curve.pts.iter().enumerate() {
        x += l[k] * p[0];
        y += l[k] * p[1];
    }
    (x - q[0]).powi(2) + (y - q[1]).powi(2)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).min(fc).min(fd)
}

/// Uniform bin grid over wall GLL points for nearest-point lookup.
struct PointBins {
    origin: [f64; 2],
    h: f64,
    bins: HashMap<(i64, i64), Vec<usize>>,
    extent: (i64, i64, i64, i64),
}

impl PointBins {
    fn new(points: &[[f64; 2]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let h = span / (points.len() as f64).sqrt().max(1.0);
        let mut bins: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut ext = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for (k, p) in points.iter().enumerate() {
            let key = (((p[0] - lo[0]) / h).floor() as i64, ((p[1] - lo[1]) / h).floor() as i64);
            ext = (ext.0.min(key.0), ext.1.max(key.0), ext.2.min(key.1), ext.3.max(key.1));
            bins.entry(key).or_default().push(k);
        }
        Self {
            origin: lo,
            h,
            bins,
            extent: ext,
        }
    }

    /// Index and distance of the nearest binned point.
    fn nearest(&self, points: &[[f64; 2]], q: [f64; 2]) -> (usize, f64) {
        let kx = (((q[0] - self.origin[0]) / self.h).floor() as i64).clamp(self.extent.0, self.extent.1);
        let ky = (((q[1] - self.origin[1]) / self.h).floor() as i64).clamp(self.extent.2, self.extent.3);
        let max_ring = (self.extent.1 - self.extent.0).max(self.extent.3 - self.extent.2) + 1;
        let mut best = (usize::MAX, f64::INFINITY);
        // distance from q to the clamped bin accounts for queries outside the grid
        let cell_lo = [
            self.origin[0] + kx as f64 * self.h,
            self.origin[1] + ky as f64 * self.h,
        ];
        let outside = {
            let dx = (cell_lo[0] - q[0]).max(q[0] - cell_lo[0] - self.h).max(0.0);
            let dy = (cell_lo[1] - q[1]).max(q[1] - cell_lo[1] - self.h).max(0.0);
            dx.hypot(dy)
        };
        for ring in 0..=max_ring {
            if best.0 != usize::MAX && outside + (ring as f64 - 1.0).max(0.0) * self.h > best.1 {
                break;
            }
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    if let Some(ids) = self.bins.get(&(kx + dx, ky + dy)) {
                        for &k in ids {
                            let d = (points[k][0] - q[0]).hypot(points[k][1] - q[1]);
                            if d < best.1 {
                                best = (k, d);
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

pub fn compute_wall_distance(mesh: &SpectralMesh, basis: &ReferenceBasis) -> Result<Vec<f64>> {
    let walls: Vec<_> = mesh.faces_with_tag(BoundaryTag::Wall).collect();
    if walls.is_empty() {
        return Err(Error::Configuration(
            "wall distance requested but the mesh has no wall faces".into(),
        ));
    }
    let curves: Vec<WallCurve> = walls
        .iter()
        .map(|bf| {
            let pts: Vec<[f64; 2]> = mesh
                .face_local_indices(bf.element, bf.face)
                .into_iter()
                .map(|l| mesh.point(l))
                .collect();
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for p in &pts {
                for d in 0..2 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            // polynomial edges may bulge past their nodal bounding box
            let pad = 0.25 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
            WallCurve {
                pts,
                lo: [lo[0] - pad, lo[1] - pad],
                hi: [hi[0] + pad, hi[1] + pad],
            }
        })
        .collect();
    let cloud: Vec<[f64; 2]> = curves.iter().flat_map(|c| c.pts.iter().copied()).collect();
    let bins = PointBins::new(&cloud);
    let nodes = basis.nodes();
    let np = basis.np();

    let on_wall = {
        let mut flag = vec![false; mesh.num_global()];
        for l in mesh.tagged_local_nodes(BoundaryTag::Wall) {
            flag[mesh.global_index()[l]] = true;
        }
        flag
    };

    let mut out = vec![0.0; mesh.num_local()];
    for (l, d_out) in out.iter_mut().enumerate() {
        if on_wall[mesh.global_index()[l]] {
            continue;
        }
        let q = mesh.point(l);
        let (_, mut best) = bins.nearest(&cloud, q);
        for c in &curves {
            if c.lower_bound(q) >= best {
                continue;
            }
            let (mut kbest, mut dbest) = (0, f64::INFINITY);
            for (k, p) in c.pts.iter().enumerate() {
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                if d < dbest {
                    kbest = k;
                    dbest = d;
                }
            }
            let a = nodes[kbest.saturating_sub(1)];
            let b = nodes[(kbest + 1).min(np - 1)];
            let d2 = golden_min(|t| dist2_on_curve(c, nodes, t, q), a, b);
            best = best.min(d2.sqrt()).min(dbest);
        }
        *d_out = best;
    }
    Ok(out)
}

/// Arc length of an element edge by GLL quadrature of `|dx/dξ|`.
pub fn edge_length(basis: &ReferenceBasis, pts: &[[f64; 2]]) -> f64 {
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    let dx = basis.differentiate(&xs);
    let dy = basis.differentiate(&ys);
    basis
        .weights()
        .iter()
        .enumerate()
        .map(|(k, w)| w * dx[k].hypot(dy[k]))
        .sum()
}

pub fn compute_hmax(mesh: &SpectralMesh, basis: &ReferenceBasis) -> Vec<f64> {
    (0..mesh.num_elements())
        .map(|e| {
            (0..4)
                .map(|edge| edge_length(basis, &mesh.reference_edge(e, edge)))
                .fold(0.0, f64::max)
                / basis.order() as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{self, BoxTags};
    use crate::mesh::QuadTopology;

    #[test]
    fn channel_distance_is_min_to_walls() {
        let b = ReferenceBasis::new(5).unwrap();
        let tags = BoxTags {
            bottom: BoundaryTag::Wall,
            top: BoundaryTag::Wall,
            left: BoundaryTag::Inflow,
            right: BoundaryTag::Outflow,
        };
        let m = generate::rectangle(&b, 3, 4, [0.0, 3.0], [0.0, 2.0], tags).unwrap();
        let d = compute_wall_distance(&m, &b).unwrap();
        for l in 0..m.num_local() {
            let y = m.y()[l];
            assert!((d[l] - y.min(2.0 - y)).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_segment_point_distance() {
        let b = ReferenceBasis::new(4).unwrap();
        let topo = QuadTopology {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            elements: vec![[0, 1, 2, 3]],
            boundary_tags: [
                ((0, 0), BoundaryTag::Wall),
                ((0, 1), BoundaryTag::Outflow),
                ((0, 2), BoundaryTag::Outflow),
                ((0, 3), BoundaryTag::Outflow),
            ]
            .into_iter()
            .collect(),
            ..Default::default()
        };
        let m = SpectralMesh::build(topo, &b).unwrap();
        let d = compute_wall_distance(&m, &b).unwrap();
        for l in 0..m.num_local() {
            assert!((d[l] - m.y()[l]).abs() < 1e-12);
        }
    }

    #[test]
    fn no_wall_is_configuration_error() {
        let b = ReferenceBasis::new(2).unwrap();
        let m = generate::periodic_box(&b, 3, 3, [0.0, 1.0], [0.0, 1.0]).unwrap();
        assert!(matches!(
            compute_wall_distance(&m, &b),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn hmax_rectangles_and_arcs() {
        let b = ReferenceBasis::new(8).unwrap();
        let m = generate::rectangle(&b, 1, 1, [0.0, 1.0], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall))
            .unwrap();
        assert!((compute_hmax(&m, &b)[0] - 0.125).abs() < 1e-14);
        let b7 = ReferenceBasis::new(7).unwrap();
        let m = generate::rectangle(&b7, 1, 1, [0.0, 3.0], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall))
            .unwrap();
        assert!((compute_hmax(&m, &b7)[0] - 3.0 / 7.0).abs() < 1e-14);
    }
}
