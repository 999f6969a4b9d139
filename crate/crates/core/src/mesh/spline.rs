//! Cubic-spline projection of tagged boundaries.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::{BoundaryTag, ReferenceBasis, SpectralMesh};
use crate::error::{Error, Result};

/// Chord-length parameterized cubic spline through planar points.
#[derive(Debug, Clone)]
pub struct CubicSpline2 {
    s: Vec<f64>,
    pts: Vec<[f64; 2]>,
    /// Second derivatives at the knots, per coordinate.
    m: [Vec<f64>; 2],
}

impl CubicSpline2 {
    /// Natural spline (zero curvature at both ends) for open polylines.
    pub fn natural(pts: &[[f64; 2]]) -> Result<Self> {
        if pts.len() < 4 {
            return Err(Error::Spline(format!(
                "open boundary polyline has {} vertices, need at least 4",
                pts.len()
            )));
        }
        let s = chord_parameters(pts)?;
        let n = pts.len();
        let mut m: [Vec<f64>; 2] = [vec![0.0; n], vec![0.0; n]];
        // tridiagonal system for interior second derivatives
        for d in 0..2 {
            let k = n - 2;
            let mut a = vec![0.0; k];
            let mut b = vec![0.0; k];
            let mut c = vec![0.0; k];
            let mut r = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = s[i] - s[i - 1];
                let h1 = s[i + 1] - s[i];
                a[i - 1] = h0;
                b[i - 1] = 2.0 * (h0 + h1);
                c[i - 1] = h1;
                r[i - 1] = 6.0 * ((pts[i + 1][d] - pts[i][d]) / h1 - (pts[i][d] - pts[i - 1][d]) / h0);
            }
            let sol = thomas(&a, &b, &c, &r);
            m[d][1..n - 1].copy_from_slice(&sol);
        }
        Ok(Self { s, pts: pts.to_vec(), m })
    }

    /// Periodic spline for closed loops; `pts` must not repeat the first point.
    pub fn periodic(pts: &[[f64; 2]]) -> Result<Self> {
        if pts.len() < 4 {
            return Err(Error::Spline(format!(
                "closed boundary loop has {} vertices, need at least 4",
                pts.len()
            )));
        }
        let mut closed = pts.to_vec();
        closed.push(pts[0]);
        let s = chord_parameters(&closed)?;
        let n = pts.len();
        let mut m: [Vec<f64>; 2] = [vec![0.0; n + 1], vec![0.0; n + 1]];
        for d in 0..2 {
            let mut mat = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            for i in 0..n {
                let im = (i + n - 1) % n;
                let ip = (i + 1) % n;
                let h0 = if i == 0 { s[n] - s[n - 1] } else { s[i] - s[i - 1] };
                let h1 = s[i + 1] - s[i];
                mat[(i, im)] += h0;
                mat[(i, i)] += 2.0 * (h0 + h1);
                mat[(i, ip)] += h1;
                let prev = closed[if i == 0 { n - 1 } else { i - 1 }][d];
                rhs[i] = 6.0 * ((closed[i + 1][d] - closed[i][d]) / h1 - (closed[i][d] - prev) / h0);
            }
            let sol = mat
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Spline("singular periodic spline system".into()))?;
            for i in 0..n {
                m[d][i] = sol[i];
            }
            m[d][n] = sol[0];
        }
        Ok(Self { s, pts: closed, m })
    }

    /// Parameter value at knot `k`.
    pub fn knot(&self, k: usize) -> f64 {
        self.s[k]
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        let n = self.s.len();
        let seg = match self.s.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.clamp(1, n - 1) - 1,
        };
        let (s0, s1) = (self.s[seg], self.s[seg + 1]);
        let h = s1 - s0;
        let a = (s1 - t) / h;
        let b = (t - s0) / h;
        let mut out = [0.0; 2];
        for d in 0..2 {
            let (y0, y1) = (self.pts[seg][d], self.pts[seg + 1][d]);
            let (m0, m1) = (self.m[d][seg], self.m[d][seg + 1]);
            out[d] = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        }
        out
    }
}

fn chord_parameters(pts: &[[f64; 2]]) -> Result<Vec<f64>> {
    let mut s = Vec::with_capacity(pts.len());
    s.push(0.0);
    for k in 1..pts.len() {
        let h = (pts[k][0] - pts[k - 1][0]).hypot(pts[k][1] - pts[k - 1][1]);
        if h <= 0.0 {
            return Err(Error::Spline(format!("repeated spline vertex at index {k}")));
        }
        s.push(s[k - 1] + h);
    }
    Ok(s)
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut rp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    rp[0] = r[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        rp[i] = (r[i] - a[i] * rp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = rp[i] - cp[i] * x[i + 1];
    }
    x
}

/// A chain of boundary faces: vertex ids `v[0..=n]`, face `k` joins `v[k]` and `v[k+1]`.
struct Chain {
    vertices: Vec<usize>,
    faces: Vec<(usize, usize)>,
    closed: bool,
}

fn build_chains(mesh: &SpectralMesh, tag: BoundaryTag) -> Result<Vec<Chain>> {
    let faces: Vec<(usize, usize, usize, usize)> = mesh
        .faces_with_tag(tag)
        .map(|bf| {
            let el = mesh.elements()[bf.element];
            (bf.element, bf.face, el[bf.face], el[(bf.face + 1) % 4])
        })
        .collect();
    if faces.is_empty() {
        return Err(Error::Spline(format!("no boundary faces tagged {tag}")));
    }
    let nv = mesh.num_vertices();
    let mut out_face = vec![usize::MAX; nv];
    let mut in_count = vec![0usize; nv];
    for (k, f) in faces.iter().enumerate() {
        if out_face[f.2] != usize::MAX {
            return Err(Error::Spline(format!("boundary {tag} branches at vertex {}", f.2)));
        }
        out_face[f.2] = k;
        in_count[f.3] += 1;
    }
    let breaks = mesh.spline_breaks();
    let is_start = |v: usize| in_count[v] == 0 || breaks.contains(&v);
    let mut used = vec![false; faces.len()];
    let mut chains = Vec::new();
    let walk = |start_face: usize, used: &mut Vec<bool>| -> Chain {
        let mut vertices = vec![faces[start_face].2];
        let mut fs = Vec::new();
        let mut k = start_face;
        loop {
            used[k] = true;
            fs.push((faces[k].0, faces[k].1));
            let v = faces[k].3;
            vertices.push(v);
            if breaks.contains(&v) || out_face[v] == usize::MAX || used[out_face[v]] {
                break;
            }
            k = out_face[v];
        }
        let closed = vertices.first() == vertices.last() && !breaks.contains(&vertices[0]);
        Chain {
            vertices,
            faces: fs,
            closed,
        }
    };
    for k in 0..faces.len() {
        if !used[k] && is_start(faces[k].2) {
            chains.push(walk(k, &mut used));
        }
    }
    for k in 0..faces.len() {
        if !used[k] {
            chains.push(walk(k, &mut used));
        }
    }
    Ok(chains)
}

/// Decay below which a propagated displacement is dropped.
const DECAY_CUTOFF: f64 = 1e-4;

/// Straight segment from `a` to `b` sampled at the GLL nodes.
fn straight(z: &[f64], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    z.iter()
        .map(|&t| {
            let w = 0.5 * (t + 1.0);
            [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
        })
        .collect()
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Displacement of a face from its straight chord, stored from `key.0` to `key.1`.
struct EdgeDisplacement {
    key: (usize, usize),
    disp: Vec<[f64; 2]>,
}

impl EdgeDisplacement {
    /// Displacement oriented from vertex `from`.
    fn oriented(&self, from: usize) -> Vec<[f64; 2]> {
        let mut d = self.disp.clone();
        if from != self.key.0 {
            d.reverse();
        }
        d
    }
}

/// Project the edge GLL points of faces tagged `tag` onto cubic splines
/// through the boundary vertices, then re-blend the element interiors.
///
/// The displacement of each projected face from its chord is carried into
/// the element layers behind it with weight `exp(-d/L)`, `d` the distance
/// from the boundary and `L` the face length, so that thin near-wall layers
/// stay valid when the boundary bulges past them. Vertices never move.
pub fn project_boundary_spline(
    mesh: &SpectralMesh,
    tag: BoundaryTag,
    basis: &ReferenceBasis,
) -> Result<SpectralMesh> {
    let chains = build_chains(mesh, tag)?;
    let z = basis.nodes();
    let n = basis.order();
    let elements = mesh.elements();
    let mut owners: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for (e, el) in elements.iter().enumerate() {
        for f in 0..4 {
            owners.entry(edge_key(el[f], el[(f + 1) % 4])).or_default().push((e, f));
        }
    }
    let face_coords = |e: usize, f: usize| {
        let c = mesh.element_vertex_coords(e);
        (c[f], c[(f + 1) % 4])
    };
    let mut moved: HashMap<(usize, usize), EdgeDisplacement> = HashMap::new();
    for chain in &chains {
        let coords: Vec<[f64; 2]> = chain.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
        let spline = if chain.closed {
            CubicSpline2::periodic(&coords[..coords.len() - 1])?
        } else {
            CubicSpline2::natural(&coords)?
        };
        for (k, &(e, face)) in chain.faces.iter().enumerate() {
            let (s0, s1) = (spline.knot(k), spline.knot(k + 1));
            let (a, b) = face_coords(e, face);
            let chord = straight(z, a, b);
            // displacement along the face traversal, element vertex face -> face+1
            let mut disp: Vec<[f64; 2]> = z
                .iter()
                .zip(&chord)
                .map(|(&t, c)| {
                    let p = spline.eval(s0 + 0.5 * (t + 1.0) * (s1 - s0));
                    [p[0] - c[0], p[1] - c[1]]
                })
                .collect();
            disp[0] = [0.0; 2];
            disp[n] = [0.0; 2];
            let length = (b[0] - a[0]).hypot(b[1] - a[1]);
            let (mut ce, mut cf) = (e, face);
            let mut from = elements[e][face];
            let mut depth = 0.0;
            let mut weight = 1.0;
            loop {
                let el = elements[ce];
                let (va, vb) = (el[cf], el[(cf + 1) % 4]);
                let key = edge_key(va, vb);
                if moved.contains_key(&key) {
                    break;
                }
                let mut d: Vec<[f64; 2]> = disp.iter().map(|p| [weight * p[0], weight * p[1]]).collect();
                if from != key.0 {
                    d.reverse();
                }
                moved.insert(key, EdgeDisplacement { key, disp: d });
                // opposite face, traversed parallel to the current one
                let of = (cf + 2) % 4;
                let (oa, ob) = (el[(of + 1) % 4], el[of]);
                let (pa, pb) = face_coords(ce, cf);
                let (qa, qb) = face_coords(ce, of);
                depth += (0.5 * (pa[0] + pb[0] - qa[0] - qb[0])).hypot(0.5 * (pa[1] + pb[1] - qa[1] - qb[1]));
                weight = (-depth / length).exp();
                if weight < DECAY_CUTOFF {
                    break;
                }
                let okey = edge_key(oa, ob);
                let Some(next) = owners[&okey].iter().find(|&&(oe, _)| oe != ce).copied() else {
                    break;
                };
                if from == va {
                    from = oa;
                } else {
                    from = ob;
                }
                if mesh.boundary_faces().iter().any(|bf| bf.element == ce && bf.face == of) {
                    break;
                }
                (ce, cf) = next;
            }
        }
    }
    let mut out = mesh.clone();
    let mut touched = Vec::new();
    for (e, el) in elements.iter().enumerate() {
        // reference edges: [v0->v1, v1->v2, v3->v2, v0->v3]
        let ends = [(el[0], el[1]), (el[1], el[2]), (el[3], el[2]), (el[0], el[3])];
        if !ends.iter().any(|&(a, b)| moved.contains_key(&edge_key(a, b))) {
            continue;
        }
        let c = mesh.element_vertex_coords(e);
        let cends = [(c[0], c[1]), (c[1], c[2]), (c[3], c[2]), (c[0], c[3])];
        let mut edges = [
            out.reference_edge(e, 0),
            out.reference_edge(e, 1),
            out.reference_edge(e, 2),
            out.reference_edge(e, 3),
        ];
        for (r, &(a, b)) in ends.iter().enumerate() {
            if let Some(m) = moved.get(&edge_key(a, b)) {
                let d = m.oriented(a);
                edges[r] = straight(z, cends[r].0, cends[r].1)
                    .iter()
                    .zip(&d)
                    .map(|(p, q)| [p[0] + q[0], p[1] + q[1]])
                    .collect();
            }
        }
        out.set_element_from_edges(e, basis, &edges);
        touched.push(e);
    }
    out.unify_shared_nodes();
    for &e in &touched {
        super::geometry::check_element(&out, basis, e).map_err(|err| match err {
            Error::Geometry(msg) => Error::Geometry(format!("spline projection of {tag}: {msg}")),
            other => other,
        })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::QuadTopology;
    use std::f64::consts::PI;

    /// Polygonal annulus: straight edges between vertices on circles.
    fn polygon_annulus(n_theta: usize, order: usize) -> (SpectralMesh, ReferenceBasis) {
        let b = ReferenceBasis::new(order).unwrap();
        let mut topo = QuadTopology::default();
        for t in 0..n_theta {
            let a = 2.0 * PI * t as f64 / n_theta as f64;
            topo.vertices.push([a.cos(), a.sin()]);
            topo.vertices.push([3.0 * a.cos(), 3.0 * a.sin()]);
        }
        for t in 0..n_theta {
            let t1 = (t + 1) % n_theta;
            let e = topo.elements.len();
            topo.elements.push([2 * t, 2 * t + 1, 2 * t1 + 1, 2 * t1]);
            topo.boundary_tags.insert((e, 3), BoundaryTag::Wall);
            topo.boundary_tags.insert((e, 1), BoundaryTag::InflowOutflow);
        }
        (SpectralMesh::build(topo, &b).unwrap(), b)
    }

    /// Annulus with radial layers at `radii`.
    fn layered_annulus(n_theta: usize, radii: &[f64], order: usize) -> (SpectralMesh, ReferenceBasis) {
        let b = ReferenceBasis::new(order).unwrap();
        let mut topo = QuadTopology::default();
        let nr = radii.len();
        for t in 0..n_theta {
            let a = 2.0 * PI * t as f64 / n_theta as f64;
            for &r in radii {
                topo.vertices.push([r * a.cos(), r * a.sin()]);
            }
        }
        for t in 0..n_theta {
            let t1 = (t + 1) % n_theta;
            for k in 0..nr - 1 {
                let e = topo.elements.len();
                topo.elements.push([t * nr + k, t * nr + k + 1, t1 * nr + k + 1, t1 * nr + k]);
                if k == 0 {
                    topo.boundary_tags.insert((e, 3), BoundaryTag::Wall);
                }
                if k == nr - 2 {
                    topo.boundary_tags.insert((e, 1), BoundaryTag::InflowOutflow);
                }
            }
        }
        (SpectralMesh::build(topo, &b).unwrap(), b)
    }

    #[test]
    fn bulge_thicker_than_first_layer_stays_valid() {
        // sagitta 1 - cos(pi/16) ~ 0.019 against a first layer of 0.001
        let (m, b) = layered_annulus(16, &[1.0, 1.001, 1.01, 1.1, 3.0], 4);
        let p = project_boundary_spline(&m, BoundaryTag::Wall, &b).unwrap();
        for e in 0..p.num_elements() {
            crate::mesh::geometry::check_element(&p, &b, e).unwrap();
        }
        p.check_conformity(1e-10).unwrap();
        let mut worst: f64 = 0.0;
        for l in p.tagged_local_nodes(BoundaryTag::Wall) {
            let q = p.point(l);
            worst = worst.max((q[0].hypot(q[1]) - 1.0).abs());
        }
        assert!(worst < 1e-4, "radial deviation {worst}");
    }

    #[test]
    fn circle_projection_is_accurate() {
        let (m, b) = polygon_annulus(16, 7);
        let p = project_boundary_spline(&m, BoundaryTag::Wall, &b).unwrap();
        let mut worst: f64 = 0.0;
        for l in p.tagged_local_nodes(BoundaryTag::Wall) {
            let q = p.point(l);
            worst = worst.max((q[0].hypot(q[1]) - 1.0).abs());
        }
        assert!(worst < 1e-4, "radial deviation {worst}");
        // vertices are unchanged
        assert_eq!(p.vertices(), m.vertices());
    }

    #[test]
    fn projection_is_idempotent() {
        let (m, b) = polygon_annulus(12, 5);
        let p1 = project_boundary_spline(&m, BoundaryTag::Wall, &b).unwrap();
        let p2 = project_boundary_spline(&p1, BoundaryTag::Wall, &b).unwrap();
        for l in 0..p1.num_local() {
            assert!((p1.x()[l] - p2.x()[l]).abs() < 1e-12);
            assert!((p1.y()[l] - p2.y()[l]).abs() < 1e-12);
        }
    }

    #[test]
    fn natural_spline_reproduces_line() {
        let pts: Vec<[f64; 2]> = (0..5).map(|k| [k as f64 * 0.3, 1.0 + k as f64 * 0.6]).collect();
        let s = CubicSpline2::natural(&pts).unwrap();
        let total = s.knot(4);
        for k in 0..=20 {
            let t = total * k as f64 / 20.0;
            let p = s.eval(t);
            assert!((p[1] - (1.0 + 2.0 * p[0])).abs() < 1e-13);
        }
    }

    #[test]
    fn short_open_polyline_is_rejected() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(CubicSpline2::natural(&pts), Err(Error::Spline(_))));
    }
}
