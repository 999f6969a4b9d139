//! Curvilinear quadrilateral spectral-element meshes.
//!
//! Local node layout is element-major: node `(i, j)` of element `e` lives at
//! `e * np^2 + j * np + i`, with `i` running along the reference `r` direction.
//! Element vertices are ordered counterclockwise starting at `(r, s) = (-1, -1)`;
//! face `f` joins vertex `f` to vertex `(f + 1) % 4`.

pub mod basis;
pub mod generate;
pub mod geometry;
pub mod plot3d;
pub mod spline;
pub mod wall;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use basis::ReferenceBasis;
pub use geometry::GeometricFactors;
pub use wall::WallGeometryFields;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    /// No-slip solid surface.
    Wall,
    /// Far-field boundary; inflow or outflow decided by the flow direction.
    InflowOutflow,
    /// Always Dirichlet velocity from the case's boundary data.
    Inflow,
    /// Always natural (zero-traction) outflow.
    Outflow,
    /// Axis-aligned slip plane.
    Symmetry,
    /// Marks faces fused through periodic connectivity. Such faces are
    /// interior after numbering and never appear in the boundary list.
    Periodic,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryTag::Wall => "wall",
            BoundaryTag::InflowOutflow => "inflow_outflow",
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::Symmetry => "symmetry",
            BoundaryTag::Periodic => "periodic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFace {
    pub element: usize,
    pub face: usize,
    pub tag: BoundaryTag,
}

/// Linear quadrilateral topology: the input to [`SpectralMesh::build`].
#[derive(Debug, Clone, Default)]
pub struct QuadTopology {
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 4]>,
    /// Tag per boundary face, keyed by `(element, face)`.
    pub boundary_tags: HashMap<(usize, usize), BoundaryTag>,
    /// Translations identifying periodic images (used by conformity checks only).
    pub periodic_shifts: Vec<[f64; 2]>,
    /// Vertices at which boundary splines must break (corners).
    pub spline_breaks: BTreeSet<usize>,
    /// Per-element corner coordinates overriding `vertices`; needed where a
    /// periodic seam gives one vertex id two physical images.
    pub element_corners: Option<Vec<[[f64; 2]; 4]>>,
    pub chord: f64,
}

/// Spectral-element mesh of order `N` with GLL point clouds and global numbering.
#[derive(Debug, Clone)]
pub struct SpectralMesh {
    order: usize,
    elements: Vec<[usize; 4]>,
    vertices: Vec<[f64; 2]>,
    corners: Vec<[[f64; 2]; 4]>,
    x: Vec<f64>,
    y: Vec<f64>,
    global: Vec<usize>,
    n_global: usize,
    boundary: Vec<BoundaryFace>,
    periodic_shifts: Vec<[f64; 2]>,
    spline_breaks: BTreeSet<usize>,
    chord: f64,
}

/// `(i, j)` pairs of face `face` in counterclockwise traversal order.
pub fn face_nodes(order: usize, face: usize) -> Vec<(usize, usize)> {
    let n = order;
    match face {
        0 => (0..=n).map(|i| (i, 0)).collect(),
        1 => (0..=n).map(|j| (n, j)).collect(),
        2 => (0..=n).rev().map(|i| (i, n)).collect(),
        3 => (0..=n).rev().map(|j| (0, j)).collect(),
        _ => panic!("face index {face} out of range"),
    }
}

impl SpectralMesh {
    /// Builds straight-sided GLL geometry and conforming global numbering.
    pub fn build(topology: QuadTopology, basis: &ReferenceBasis) -> Result<Self> {
        let QuadTopology {
            vertices,
            elements,
            boundary_tags,
            periodic_shifts,
            spline_breaks,
            element_corners,
            chord,
        } = topology;
        if elements.is_empty() {
            return Err(Error::Geometry("mesh has no elements".into()));
        }
        // compact vertex ids to those referenced by elements
        let mut remap = vec![usize::MAX; vertices.len()];
        let mut compact = Vec::new();
        for el in &elements {
            for &v in el {
                if v >= vertices.len() {
                    return Err(Error::Geometry(format!("vertex id {v} out of range")));
                }
                if remap[v] == usize::MAX {
                    remap[v] = compact.len();
                    compact.push(vertices[v]);
                }
            }
        }
        let corners: Vec<[[f64; 2]; 4]> = match element_corners {
            Some(c) if c.len() == elements.len() => c,
            Some(_) => {
                return Err(Error::Geometry(
                    "element corner list does not match element count".into(),
                ))
            }
            None => elements.iter().map(|el| el.map(|v| vertices[v])).collect(),
        };
        let elements: Vec<[usize; 4]> = elements
            .iter()
            .map(|el| [remap[el[0]], remap[el[1]], remap[el[2]], remap[el[3]]])
            .collect();
        let spline_breaks = spline_breaks
            .into_iter()
            .filter(|&v| v < remap.len() && remap[v] != usize::MAX)
            .map(|v| remap[v])
            .collect();
        let vertices = compact;

        let order = basis.order();
        let np = order + 1;
        let ne = elements.len();

        // edges keyed by sorted vertex pair
        let mut edge_uses: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (e, el) in elements.iter().enumerate() {
            for f in 0..4 {
                let (a, b) = (el[f], el[(f + 1) % 4]);
                if a == b {
                    return Err(Error::Geometry(format!(
                        "element {e} has degenerate face {f}"
                    )));
                }
                edge_uses.entry((a.min(b), a.max(b))).or_default().push((e, f));
            }
        }
        let mut edge_keys: Vec<(usize, usize)> = edge_uses.keys().copied().collect();
        edge_keys.sort_unstable();
        let edge_index: HashMap<(usize, usize), usize> =
            edge_keys.iter().enumerate().map(|(k, &key)| (key, k)).collect();

        let mut boundary = Vec::new();
        for key in &edge_keys {
            let uses = &edge_uses[key];
            match uses.len() {
                1 => {
                    let (e, f) = uses[0];
                    let tag = boundary_tags.get(&(e, f)).copied().ok_or_else(|| {
                        Error::Configuration(format!(
                            "boundary face (element {e}, face {f}) has no tag"
                        ))
                    })?;
                    if tag == BoundaryTag::Periodic {
                        return Err(Error::Configuration(format!(
                            "face (element {e}, face {f}) tagged periodic but has no partner"
                        )));
                    }
                    boundary.push(BoundaryFace {
                        element: e,
                        face: f,
                        tag,
                    });
                }
                2 => {
                    for u in uses {
                        if let Some(tag) = boundary_tags.get(u) {
                            if *tag != BoundaryTag::Periodic {
                                return Err(Error::Configuration(format!(
                                    "interior face (element {}, face {}) carries tag {tag}",
                                    u.0, u.1
                                )));
                            }
                        }
                    }
                }
                n => {
                    return Err(Error::Geometry(format!(
                        "edge {key:?} shared by {n} elements (non-manifold mesh)"
                    )))
                }
            }
        }
        boundary.sort_by_key(|b| (b.element, b.face));

        // global numbering: vertices, then edge interiors, then element interiors
        let nv = vertices.len();
        let n_edge_interior = order.saturating_sub(1);
        let edge_base = nv;
        let interior_base = nv + edge_keys.len() * n_edge_interior;
        let n_interior = n_edge_interior * n_edge_interior;
        let n_global = interior_base + ne * n_interior;
        let mut global = vec![usize::MAX; ne * np * np];
        for (e, el) in elements.iter().enumerate() {
            let base = e * np * np;
            let corners = [(0, 0), (order, 0), (order, order), (0, order)];
            for (c, &(i, j)) in corners.iter().enumerate() {
                global[base + j * np + i] = el[c];
            }
            for f in 0..4 {
                let (a, b) = (el[f], el[(f + 1) % 4]);
                let eid = edge_index[&(a.min(b), a.max(b))];
                let nodes = face_nodes(order, f);
                for k in 1..order {
                    let (i, j) = nodes[k];
                    let pos = if a < b { k - 1 } else { order - 1 - k };
                    global[base + j * np + i] = edge_base + eid * n_edge_interior + pos;
                }
            }
            for j in 1..order {
                for i in 1..order {
                    global[base + j * np + i] =
                        interior_base + e * n_interior + (j - 1) * n_edge_interior + (i - 1);
                }
            }
        }

        let mut mesh = Self {
            order,
            elements,
            vertices,
            corners,
            x: vec![0.0; ne * np * np],
            y: vec![0.0; ne * np * np],
            global,
            n_global,
            boundary,
            periodic_shifts,
            spline_breaks,
            chord: if chord > 0.0 { chord } else { 1.0 },
        };
        for e in 0..ne {
            let c = mesh.element_vertex_coords(e);
            let edges: [Vec<[f64; 2]>; 4] = std::array::from_fn(|f| {
                let (p, q) = reference_edge_endpoints(&c, f);
                basis
                    .nodes()
                    .iter()
                    .map(|&t| {
                        let w = 0.5 * (t + 1.0);
                        [p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]
                    })
                    .collect()
            });
            mesh.set_element_from_edges(e, basis, &edges);
        }
        mesh.unify_shared_nodes();
        Ok(mesh)
    }

    /// Make coincident copies of a global node bitwise identical (periodic
    /// images are left alone).
    pub(crate) fn unify_shared_nodes(&mut self) {
        let mut first = vec![usize::MAX; self.n_global];
        for l in 0..self.global.len() {
            let g = self.global[l];
            if first[g] == usize::MAX {
                first[g] = l;
                continue;
            }
            let f = first[g];
            let scale = 1.0 + self.x[f].abs().max(self.y[f].abs());
            if (self.x[l] - self.x[f]).abs() <= 1e-9 * scale
                && (self.y[l] - self.y[f]).abs() <= 1e-9 * scale
            {
                self.x[l] = self.x[f];
                self.y[l] = self.y[f];
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn np(&self) -> usize {
        self.order + 1
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_local(&self) -> usize {
        self.x.len()
    }

    pub fn num_global(&self) -> usize {
        self.n_global
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn global_index(&self) -> &[usize] {
        &self.global
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    pub fn periodic_shifts(&self) -> &[[f64; 2]] {
        &self.periodic_shifts
    }

    pub fn spline_breaks(&self) -> &BTreeSet<usize> {
        &self.spline_breaks
    }

    pub fn set_spline_breaks(&mut self, breaks: BTreeSet<usize>) {
        self.spline_breaks = breaks;
    }

    /// Reference chord length `c`.
    pub fn chord(&self) -> f64 {
        self.chord
    }

    pub fn set_chord(&mut self, chord: f64) {
        self.chord = chord;
    }

    #[inline]
    pub fn local_index(&self, e: usize, i: usize, j: usize) -> usize {
        let np = self.order + 1;
        e * np * np + j * np + i
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.x[idx], self.y[idx]]
    }

    pub fn element_vertex_coords(&self, e: usize) -> [[f64; 2]; 4] {
        self.corners[e]
    }

    /// Faces with the given tag.
    pub fn faces_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryFace> {
        self.boundary.iter().filter(move |b| b.tag == tag)
    }

    /// Local indices of the nodes on a face, counterclockwise.
    pub fn face_local_indices(&self, e: usize, face: usize) -> Vec<usize> {
        face_nodes(self.order, face)
            .into_iter()
            .map(|(i, j)| self.local_index(e, i, j))
            .collect()
    }

    /// Replace element geometry by Gordon-Hall blending of four edge curves.
    ///
    /// `edges` are sampled at the GLL nodes in reference orientation:
    /// `[bottom(r), right(s), top(r), left(s)]`.
    pub fn set_element_from_edges(
        &mut self,
        e: usize,
        basis: &ReferenceBasis,
        edges: &[Vec<[f64; 2]>; 4],
    ) {
        let pts = gordon_hall(basis, edges);
        let np = self.np();
        for (k, p) in pts.into_iter().enumerate() {
            self.x[e * np * np + k] = p[0];
            self.y[e * np * np + k] = p[1];
        }
    }

    /// Edge curve of element `e` in reference orientation (see [`Self::set_element_from_edges`]).
    pub fn reference_edge(&self, e: usize, edge: usize) -> Vec<[f64; 2]> {
        let n = self.order;
        let idx: Vec<(usize, usize)> = match edge {
            0 => (0..=n).map(|i| (i, 0)).collect(),
            1 => (0..=n).map(|j| (n, j)).collect(),
            2 => (0..=n).map(|i| (i, n)).collect(),
            3 => (0..=n).map(|j| (0, j)).collect(),
            _ => panic!("edge index {edge} out of range"),
        };
        idx.into_iter()
            .map(|(i, j)| self.point(self.local_index(e, i, j)))
            .collect()
    }

    /// Valence of every local node (number of local copies of its global node).
    pub fn multiplicity(&self) -> Vec<f64> {
        let mut count = vec![0.0; self.n_global];
        for &g in &self.global {
            count[g] += 1.0;
        }
        self.global.iter().map(|&g| count[g]).collect()
    }

    /// Check that all local copies of each global node coincide, modulo periodic shifts.
    pub fn check_conformity(&self, tol: f64) -> Result<()> {
        let mut first: Vec<Option<[f64; 2]>> = vec![None; self.n_global];
        for (l, &g) in self.global.iter().enumerate() {
            let p = self.point(l);
            match first[g] {
                None => first[g] = Some(p),
                Some(q) => {
                    let close = |a: [f64; 2], b: [f64; 2]| {
                        (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
                    };
                    let mut ok = close(p, q);
                    if !ok {
                        for s in &self.periodic_shifts {
                            for sign in [1.0, -1.0] {
                                let shifted = [q[0] + sign * s[0], q[1] + sign * s[1]];
                                if close(p, shifted) {
                                    ok = true;
                                }
                            }
                        }
                        // corners may be shifted in both directions at once
                        if !ok && self.periodic_shifts.len() == 2 {
                            let (a, b) = (self.periodic_shifts[0], self.periodic_shifts[1]);
                            for sa in [1.0, -1.0] {
                                for sb in [1.0, -1.0] {
                                    let shifted =
                                        [q[0] + sa * a[0] + sb * b[0], q[1] + sa * a[1] + sb * b[1]];
                                    if close(p, shifted) {
                                        ok = true;
                                    }
                                }
                            }
                        }
                    }
                    if !ok {
                        return Err(Error::Geometry(format!(
                            "non-conforming node {g}: ({}, {}) vs ({}, {})",
                            p[0], p[1], q[0], q[1]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Local indices of all nodes lying on faces with `tag`.
    pub fn tagged_local_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut on = vec![false; self.n_global];
        for b in self.faces_with_tag(tag) {
            for l in self.face_local_indices(b.element, b.face) {
                on[self.global[l]] = true;
            }
        }
        (0..self.num_local()).filter(|&l| on[self.global[l]]).collect()
    }
}

fn reference_edge_endpoints(c: &[[f64; 2]; 4], edge: usize) -> ([f64; 2], [f64; 2]) {
    match edge {
        0 => (c[0], c[1]),
        1 => (c[1], c[2]),
        2 => (c[3], c[2]),
        3 => (c[0], c[3]),
        _ => unreachable!(),
    }
}

/// Transfinite (Gordon-Hall) interpolation of the element interior from its edges.
pub fn gordon_hall(basis: &ReferenceBasis, edges: &[Vec<[f64; 2]>; 4]) -> Vec<[f64; 2]> {
    let np = basis.np();
    let n = basis.order();
    let z = basis.nodes();
    let [bottom, right, top, left] = edges;
    let c00 = bottom[0];
    let c10 = bottom[n];
    let c01 = top[0];
    let c11 = top[n];
    let mut out = vec![[0.0; 2]; np * np];
    for j in 0..np {
        let s = z[j];
        for i in 0..np {
            let r = z[i];
            let mut p = [0.0; 2];
            for d in 0..2 {
                let edge_part = 0.5 * (1.0 - s) * bottom[i][d]
                    + 0.5 * (1.0 + s) * top[i][d]
                    + 0.5 * (1.0 - r) * left[j][d]
                    + 0.5 * (1.0 + r) * right[j][d];
                let corner_part = 0.25
                    * ((1.0 - r) * (1.0 - s) * c00[d]
                        + (1.0 + r) * (1.0 - s) * c10[d]
                        + (1.0 - r) * (1.0 + s) * c01[d]
                        + (1.0 + r) * (1.0 + s) * c11[d]);
                p[d] = edge_part - corner_part;
            }
            // edges themselves are reproduced exactly
            if j == 0 {
                p = bottom[i];
            } else if j == n {
                p = top[i];
            } else if i == 0 {
                p = left[j];
            } else if i == n {
                p = right[j];
            }
            out[j * np + i] = p;
        }
    }
    out
}
