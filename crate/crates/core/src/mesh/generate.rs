//! Built-in mesh generators for verification fixtures.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{BoundaryTag, QuadTopology, ReferenceBasis, SpectralMesh};
use crate::error::{Error, Result};

/// Tags for the four sides of a box.
#[derive(Debug, Clone, Copy)]
pub struct BoxTags {
    pub bottom: BoundaryTag,
    pub right: BoundaryTag,
    pub top: BoundaryTag,
    pub left: BoundaryTag,
}

impl BoxTags {
    pub fn all(tag: BoundaryTag) -> Self {
        Self {
            bottom: tag,
            right: tag,
            top: tag,
            left: tag,
        }
    }
}

/// Tensor-product box with arbitrary vertex lines, optionally periodic in x and/or y.
#[derive(Debug, Clone)]
pub struct BoxSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub periodic_x: bool,
    pub periodic_y: bool,
    pub tags: BoxTags,
}

impl BoxSpec {
    pub fn uniform(nx: usize, ny: usize, xr: [f64; 2], yr: [f64; 2], tags: BoxTags) -> Self {
        Self {
            x: linspace(xr[0], xr[1], nx + 1),
            y: linspace(yr[0], yr[1], ny + 1),
            periodic_x: false,
            periodic_y: false,
            tags,
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Vertex lines on `[a, b]` clustered geometrically toward `a` with ratio `growth`.
pub fn geometric_lines(a: f64, b: f64, n: usize, growth: f64) -> Vec<f64> {
    if (growth - 1.0).abs() < 1e-14 {
        return linspace(a, b, n + 1);
    }
    let total = (growth.powi(n as i32) - 1.0) / (growth - 1.0);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(a);
    for i in 0..n {
        acc += growth.powi(i as i32);
        out.push(a + (b - a) * acc / total);
    }
    out[n] = b;
    out
}

pub fn box_mesh(basis: &ReferenceBasis, spec: &BoxSpec) -> Result<SpectralMesh> {
    let nx = spec.x.len().saturating_sub(1);
    let ny = spec.y.len().saturating_sub(1);
    if nx == 0 || ny == 0 {
        return Err(Error::Parameter("box needs at least one element per direction".into()));
    }
    if (spec.periodic_x && nx < 3) || (spec.periodic_y && ny < 3) {
        return Err(Error::Parameter(
            "periodic directions need at least three elements".into(),
        ));
    }
    let mut topo = QuadTopology::default();
    let vx = if spec.periodic_x { nx } else { nx + 1 };
    let vy = if spec.periodic_y { ny } else { ny + 1 };
    for j in 0..vy {
        for i in 0..vx {
            topo.vertices.push([spec.x[i], spec.y[j]]);
        }
    }
    let vid = |i: usize, j: usize| (j % vy) * vx + (i % vx);
    let mut corners = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let e = topo.elements.len();
            topo.elements
                .push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            corners.push([
                [spec.x[i], spec.y[j]],
                [spec.x[i + 1], spec.y[j]],
                [spec.x[i + 1], spec.y[j + 1]],
                [spec.x[i], spec.y[j + 1]],
            ]);
            if j == 0 && !spec.periodic_y {
                topo.boundary_tags.insert((e, 0), spec.tags.bottom);
            }
            if i == nx - 1 && !spec.periodic_x {
                topo.boundary_tags.insert((e, 1), spec.tags.right);
            }
            if j == ny - 1 && !spec.periodic_y {
                topo.boundary_tags.insert((e, 2), spec.tags.top);
            }
            if i == 0 && !spec.periodic_x {
                topo.boundary_tags.insert((e, 3), spec.tags.left);
            }
        }
    }
    if spec.periodic_x {
        topo.periodic_shifts.push([spec.x[nx] - spec.x[0], 0.0]);
    }
    if spec.periodic_y {
        topo.periodic_shifts.push([0.0, spec.y[ny] - spec.y[0]]);
    }
    topo.element_corners = Some(corners);
    SpectralMesh::build(topo, basis)
}

pub fn rectangle(
    basis: &ReferenceBasis,
    nx: usize,
    ny: usize,
    xr: [f64; 2],
    yr: [f64; 2],
    tags: BoxTags,
) -> Result<SpectralMesh> {
    box_mesh(basis, &BoxSpec::uniform(nx, ny, xr, yr, tags))
}

/// Fully periodic box.
pub fn periodic_box(
    basis: &ReferenceBasis,
    nx: usize,
    ny: usize,
    xr: [f64; 2],
    yr: [f64; 2],
) -> Result<SpectralMesh> {
    let mut spec = BoxSpec::uniform(nx, ny, xr, yr, BoxTags::all(BoundaryTag::Periodic));
    spec.periodic_x = true;
    spec.periodic_y = true;
    box_mesh(basis, &spec)
}

/// Annulus `r_in < r < r_out` with exact circular arcs; the reference `r`
/// direction is radial, `s` runs counterclockwise.
pub fn annulus(
    basis: &ReferenceBasis,
    n_theta: usize,
    n_r: usize,
    r_in: f64,
    r_out: f64,
    inner: BoundaryTag,
    outer: BoundaryTag,
) -> Result<SpectralMesh> {
    let radii = linspace(r_in, r_out, n_r + 1);
    annulus_with_radii(basis, n_theta, &radii, inner, outer)
}

pub fn annulus_with_radii(
    basis: &ReferenceBasis,
    n_theta: usize,
    radii: &[f64],
    inner: BoundaryTag,
    outer: BoundaryTag,
) -> Result<SpectralMesh> {
    let n_r = radii.len() - 1;
    if n_theta < 3 || n_r < 1 {
        return Err(Error::Parameter("annulus needs n_theta >= 3 and n_r >= 1".into()));
    }
    let theta = |t: usize| 2.0 * PI * t as f64 / n_theta as f64;
    let mut topo = QuadTopology::default();
    for t in 0..n_theta {
        for &r in radii {
            topo.vertices.push([r * theta(t).cos(), r * theta(t).sin()]);
        }
    }
    let vid = |t: usize, i: usize| (t % n_theta) * (n_r + 1) + i;
    for t in 0..n_theta {
        for i in 0..n_r {
            let e = topo.elements.len();
            topo.elements
                .push([vid(t, i), vid(t, i + 1), vid(t + 1, i + 1), vid(t + 1, i)]);
            if i == 0 {
                topo.boundary_tags.insert((e, 3), inner);
            }
            if i == n_r - 1 {
                topo.boundary_tags.insert((e, 1), outer);
            }
        }
    }
    topo.chord = 2.0 * radii[0];
    let mut mesh = SpectralMesh::build(topo, basis)?;
    let z = basis.nodes();
    for t in 0..n_theta {
        for i in 0..n_r {
            let e = t * n_r + i;
            let (t0, t1) = (theta(t), theta(t + 1));
            let arc = |r: f64| -> Vec<[f64; 2]> {
                z.iter()
                    .map(|&s| {
                        let a = t0 + 0.5 * (s + 1.0) * (t1 - t0);
                        [r * a.cos(), r * a.sin()]
                    })
                    .collect()
            };
            let edges = [
                mesh.reference_edge(e, 0),
                arc(radii[i + 1]),
                mesh.reference_edge(e, 2),
                arc(radii[i]),
            ];
            mesh.set_element_from_edges(e, basis, &edges);
        }
    }
    mesh.unify_shared_nodes();
    Ok(mesh)
}

/// Symmetric NACA 4-digit thickness distribution (closed trailing edge).
pub fn naca_half_thickness(thickness: f64, x: f64) -> f64 {
    5.0 * thickness
        * (0.2969 * x.sqrt() - 0.1260 * x - 0.3516 * x * x + 0.2843 * x.powi(3)
            - 0.1036 * x.powi(4))
}

/// Structured O-grid around a symmetric NACA section, returned as point arrays
/// `x[j][i]`, `y[j][i]` with `i` running around the airfoil (first and last
/// lines coincide at the trailing edge) and `j` running outward.
pub fn naca_ogrid_points(
    thickness: f64,
    n_around: usize,
    n_normal: usize,
    farfield_radius: f64,
    first_spacing: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if n_around < 8 || n_around % 2 != 0 || n_normal < 2 {
        return Err(Error::Parameter(
            "O-grid needs an even n_around >= 8 and n_normal >= 2".into(),
        ));
    }
    // cosine clustering toward both edges, counterclockwise from the trailing edge
    let half = n_around / 2;
    let surface: Vec<(f64, f64)> = (0..=n_around)
        .map(|i| {
            let beta = 2.0 * PI * i as f64 / n_around as f64;
            let xc = 0.5 * (1.0 + beta.cos());
            let yt = naca_half_thickness(thickness, xc);
            let y = if i == 0 || i == n_around || i == half {
                0.0
            } else if i < half {
                yt
            } else {
                -yt
            };
            (xc, y)
        })
        .collect();

    // geometric normal stretching with prescribed first spacing
    let growth = stretching_ratio(farfield_radius, first_spacing, n_normal);
    let mut dist = vec![0.0; n_normal + 1];
    for j in 1..=n_normal {
        dist[j] = dist[j - 1] + first_spacing * growth.powi(j as i32 - 1);
    }
    let total = dist[n_normal];
    let center = (0.5, 0.0);
    let mut xs = vec![vec![0.0; n_around + 1]; n_normal + 1];
    let mut ys = vec![vec![0.0; n_around + 1]; n_normal + 1];
    for i in 0..=n_around {
        let (sx, sy) = surface[i];
        // far-field point on a circle at the same angular position as the
        // surface point seen from mid-chord
        let ang = (sy - center.1).atan2(sx - center.0);
        let (fx, fy) = (
            center.0 + farfield_radius * ang.cos(),
            center.1 + farfield_radius * ang.sin(),
        );
        // local surface normal for near-wall orthogonality
        let ip = if i == n_around { 1 } else { i + 1 };
        let im = if i == 0 { n_around - 1 } else { i - 1 };
        let (tx, ty) = (surface[ip].0 - surface[im].0, surface[ip].1 - surface[im].1);
        let tl = tx.hypot(ty);
        let (mut nx, mut ny) = (ty / tl, -tx / tl);
        if nx * (sx - center.0) + ny * (sy - center.1) < 0.0 {
            nx = -nx;
            ny = -ny;
        }
        for j in 0..=n_normal {
            let f = dist[j] / total;
            // blend normal extrusion near the wall into straight interpolation
            let w = (1.0 - f).powi(4);
            let ex = sx + nx * dist[j];
            let ey = sy + ny * dist[j];
            let lx = sx + f * (fx - sx);
            let ly = sy + f * (fy - sy);
            xs[j][i] = w * ex + (1.0 - w) * lx;
            ys[j][i] = w * ey + (1.0 - w) * ly;
        }
    }
    for j in 0..=n_normal {
        xs[j][n_around] = xs[j][0];
        ys[j][n_around] = ys[j][0];
    }
    Ok((xs, ys))
}

fn stretching_ratio(length: f64, first: f64, n: usize) -> f64 {
    if first * n as f64 >= length {
        return 1.0;
    }
    let (mut lo, mut hi): (f64, f64) = (1.0 + 1e-12, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = first * (mid.powi(n as i32) - 1.0) / (mid - 1.0);
        if s > length {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Write structured 2D point arrays as single-block ASCII Plot3D.
pub fn write_plot3d(path: &std::path::Path, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
    use std::fmt::Write as _;
    let jmax = xs.len();
    let imax = xs[0].len();
    let mut s = String::new();
    let _ = writeln!(s, "1");
    let _ = writeln!(s, "{imax} {jmax}");
    for arr in [xs, ys] {
        for row in arr {
            for v in row {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Vertex-id lookup for merging structured points, keyed by rounded coordinates.
pub(crate) struct PointMerger {
    tol: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<[f64; 2]>,
}

impl PointMerger {
    pub(crate) fn new(tol: f64) -> Self {
        Self {
            tol,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        let h = 4.0 * self.tol;
        ((p[0] / h).floor() as i64, (p[1] / h).floor() as i64)
    }

    pub(crate) fn insert(&mut self, p: [f64; 2]) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let q = self.points[id];
                        if (p[0] - q[0]).abs() <= self.tol && (p[1] - q[1]).abs() <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.cells.entry((kx, ky)).or_default().push(id);
        id
    }

    pub(crate) fn into_points(self) -> Vec<[f64; 2]> {
        self.points
    }
}
