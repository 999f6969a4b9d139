//! ASCII 2D Plot3D grid reader (single or multi-block).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generate::PointMerger;
use super::{BoundaryTag, QuadTopology, ReferenceBasis, SpectralMesh};
use crate::error::{Error, Result};

/// One structured block; points stored `i`-fastest.
#[derive(Debug, Clone)]
pub struct Block {
    pub imax: usize,
    pub jmax: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Block {
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let k = j * self.imax + i;
        [self.x[k], self.y[k]]
    }
}

/// Tag assignment and import options for one block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub imin: Option<BoundaryTag>,
    pub imax: Option<BoundaryTag>,
    pub jmin: Option<BoundaryTag>,
    pub jmax: Option<BoundaryTag>,
    /// First and last `i` lines coincide (O-grid seam).
    #[serde(default)]
    pub wrap_i: bool,
    #[serde(default)]
    pub wrap_j: bool,
    /// Structured cells agglomerated per element in `(i, j)`.
    #[serde(default = "unit_coarsen")]
    pub coarsen: [usize; 2],
    /// Structured `(i, j)` vertices where boundary splines break.
    #[serde(default)]
    pub spline_breaks: Vec<[usize; 2]>,
}

fn unit_coarsen() -> [usize; 2] {
    [1, 1]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub blocks: Vec<BlockSpec>,
    /// Tags whose boundaries are projected onto cubic splines after import.
    #[serde(default)]
    pub spline: Vec<BoundaryTag>,
    #[serde(default)]
    pub chord: Option<f64>,
}

struct Tokens<'a> {
    path: &'a Path,
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let items: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .flat_map(|(n, line)| line.split_whitespace().map(move |t| (n + 1, t)))
            .collect();
        let last_line = text.lines().count().max(1);
        Self {
            path,
            items,
            pos: 0,
            last_line,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.err(self.last_line, format!("unexpected end of file reading {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, t) = self.next(what)?;
        t.parse::<usize>()
            .map_err(|_| self.err(line, format!("expected integer {what}, found '{t}'")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let (line, t) = self.next(what)?;
        let v = t.replace(['D', 'd'], "E");
        let x = v
            .parse::<f64>()
            .map_err(|_| self.err(line, format!("expected real {what}, found '{t}'")))?;
        if !x.is_finite() {
            return Err(self.err(line, format!("non-finite coordinate '{t}'")));
        }
        Ok(x)
    }
}

/// Parse ASCII Plot3D text into blocks.
pub fn parse_plot3d(path: &Path, text: &str) -> Result<Vec<Block>> {
    let first_line: Vec<&str> = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().collect())
        .unwrap_or_default();
    if text.bytes().any(|b| b == 0) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "binary Plot3D is not supported".into(),
        });
    }
    let mut tok = Tokens::new(path, text);
    let nblocks = match first_line.len() {
        0 => return Err(tok.err(1, "empty file")),
        1 => {
            let (line, _) = tok.items[0];
            let n = tok.usize("block count")?;
            if n == 0 {
                return Err(tok.err(line, "block count must be positive"));
            }
            n
        }
        2 | 3 => 1,
        _ => return Err(tok.err(1, "malformed header")),
    };
    let dims_per_block = if nblocks == 1 && first_line.len() > 1 {
        first_line.len()
    } else {
        // probe the first dimension line after the block count
        let (line, _) = tok
            .items
            .get(tok.pos)
            .copied()
            .ok_or_else(|| tok.err(1, "missing block dimensions"))?;
        tok.items[tok.pos..].iter().take_while(|(l, _)| *l == line).count()
    };
    if !(2..=3).contains(&dims_per_block) {
        return Err(tok.err(1, "expected 2 or 3 dimensions per block"));
    }
    let mut dims = Vec::with_capacity(nblocks);
    for b in 0..nblocks {
        let line = tok.items.get(tok.pos).map(|t| t.0).unwrap_or(tok.last_line);
        let imax = tok.usize(&format!("imax of block {b}"))?;
        let jmax = tok.usize(&format!("jmax of block {b}"))?;
        if dims_per_block == 3 {
            let kmax = tok.usize(&format!("kmax of block {b}"))?;
            if kmax != 1 {
                return Err(tok.err(line, format!("block {b} is 3D (kmax = {kmax})")));
            }
        }
        if imax < 2 || jmax < 2 {
            return Err(tok.err(line, format!("block {b} has fewer than 2 points per direction")));
        }
        dims.push((imax, jmax));
    }
    let mut blocks = Vec::with_capacity(nblocks);
    for (b, &(imax, jmax)) in dims.iter().enumerate() {
        let n = imax * jmax;
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            x.push(tok.f64(&format!("x coordinate of block {b}"))?);
        }
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            y.push(tok.f64(&format!("y coordinate of block {b}"))?);
        }
        if dims_per_block == 3 {
            for _ in 0..n {
                tok.f64(&format!("z coordinate of block {b}"))?;
            }
        }
        blocks.push(Block { imax, jmax, x, y });
    }
    if let Some(&(line, t)) = tok.items.get(tok.pos) {
        return Err(tok.err(line, format!("trailing data '{t}' after last block")));
    }
    Ok(blocks)
}

pub fn read_plot3d(path: &Path) -> Result<Vec<Block>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_plot3d(path, &text)
}

/// Build a linear-geometry spectral-element mesh from structured blocks.
///
/// Coincident points (within a relative tolerance) are merged across blocks and
/// across wrap seams, so shared block faces become interior.
pub fn blocks_to_mesh(
    blocks: &[Block],
    spec: &BoundarySpec,
    basis: &ReferenceBasis,
) -> Result<SpectralMesh> {
    if spec.blocks.len() != blocks.len() {
        return Err(Error::Configuration(format!(
            "boundary spec lists {} blocks, grid has {}",
            spec.blocks.len(),
            blocks.len()
        )));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for b in blocks {
        for k in 0..b.x.len() {
            lo[0] = lo[0].min(b.x[k]);
            hi[0] = hi[0].max(b.x[k]);
            lo[1] = lo[1].min(b.y[k]);
            hi[1] = hi[1].max(b.y[k]);
        }
    }
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let mut merger = PointMerger::new(1e-10 * scale);

    let mut topo = QuadTopology::default();
    // side tags keyed by merged vertex pair, resolved after merging
    let mut side_tags: Vec<([usize; 2], Option<BoundaryTag>, usize)> = Vec::new();
    let mut breaks = BTreeSet::new();

    for (bi, (block, bs)) in blocks.iter().zip(&spec.blocks).enumerate() {
        let [ci, cj] = bs.coarsen;
        if ci == 0 || cj == 0 {
            return Err(Error::Configuration(format!("block {bi}: coarsening factor must be positive")));
        }
        if (block.imax - 1) % ci != 0 || (block.jmax - 1) % cj != 0 {
            return Err(Error::Configuration(format!(
                "block {bi}: cell counts ({}, {}) not divisible by coarsening ({ci}, {cj})",
                block.imax - 1,
                block.jmax - 1
            )));
        }
        let ni = (block.imax - 1) / ci;
        let nj = (block.jmax - 1) / cj;
        for (wrap, first, last, dir) in [
            (bs.wrap_i, (0..block.jmax).map(|j| block.point(0, j)).collect::<Vec<_>>(),
             (0..block.jmax).map(|j| block.point(block.imax - 1, j)).collect::<Vec<_>>(), "i"),
            (bs.wrap_j, (0..block.imax).map(|i| block.point(i, 0)).collect(),
             (0..block.imax).map(|i| block.point(i, block.jmax - 1)).collect(), "j"),
        ] {
            if wrap {
                for (p, q) in first.iter().zip(&last) {
                    if (p[0] - q[0]).abs() > 1e-10 * scale || (p[1] - q[1]).abs() > 1e-10 * scale {
                        return Err(Error::Geometry(format!(
                            "block {bi}: declared {dir} wrap seam lines do not coincide"
                        )));
                    }
                }
            }
        }
        let mut vid = vec![0usize; (ni + 1) * (nj + 1)];
        for ej in 0..=nj {
            for ei in 0..=ni {
                vid[ej * (ni + 1) + ei] = merger.insert(block.point(ei * ci, ej * cj));
            }
        }
        for br in &bs.spline_breaks {
            let [i, j] = *br;
            if i >= block.imax || j >= block.jmax || i % ci != 0 || j % cj != 0 {
                return Err(Error::Configuration(format!(
                    "block {bi}: spline break ({i}, {j}) is not an element vertex"
                )));
            }
            breaks.insert(vid[(j / cj) * (ni + 1) + i / ci]);
        }
        // orientation from total signed area of the block's cells
        let mut area = 0.0;
        let v = |ei: usize, ej: usize| block.point(ei * ci, ej * cj);
        for ej in 0..nj {
            for ei in 0..ni {
                area += signed_area([v(ei, ej), v(ei + 1, ej), v(ei + 1, ej + 1), v(ei, ej + 1)]);
            }
        }
        let flip = area < 0.0;
        for ej in 0..nj {
            for ei in 0..ni {
                let id = |a: usize, b: usize| vid[b * (ni + 1) + a];
                let quad = if flip {
                    [id(ei, ej), id(ei, ej + 1), id(ei + 1, ej + 1), id(ei + 1, ej)]
                } else {
                    [id(ei, ej), id(ei + 1, ej), id(ei + 1, ej + 1), id(ei, ej + 1)]
                };
                let pts = if flip {
                    [v(ei, ej), v(ei, ej + 1), v(ei + 1, ej + 1), v(ei + 1, ej)]
                } else {
                    [v(ei, ej), v(ei + 1, ej), v(ei + 1, ej + 1), v(ei, ej + 1)]
                };
                if signed_area(pts) <= 0.0 {
                    return Err(Error::Geometry(format!(
                        "block {bi}: cell ({}, {}) is degenerate or inverted",
                        ei * ci,
                        ej * cj
                    )));
                }
                let e = topo.elements.len();
                topo.elements.push(quad);
                if ej == 0 {
                    side_tags.push(([id(ei, ej), id(ei + 1, ej)], bs.jmin, e));
                }
                if ej == nj - 1 {
                    side_tags.push(([id(ei, ej + 1), id(ei + 1, ej + 1)], bs.jmax, e));
                }
                if ei == 0 {
                    side_tags.push(([id(ei, ej), id(ei, ej + 1)], bs.imin, e));
                }
                if ei == ni - 1 {
                    side_tags.push(([id(ei + 1, ej), id(ei + 1, ej + 1)], bs.imax, e));
                }
            }
        }
    }
    topo.vertices = merger.into_points();

    for (pair, tag, e) in side_tags {
        let el = topo.elements[e];
        let face = (0..4)
            .find(|&f| {
                let (a, b) = (el[f], el[(f + 1) % 4]);
                (a == pair[0] && b == pair[1]) || (a == pair[1] && b == pair[0])
            })
            .ok_or_else(|| Error::Geometry(format!("element {e}: degenerate block side")))?;
        if let Some(tag) = tag {
            topo.boundary_tags.insert((e, face), tag);
        }
    }
    // fused seam faces may carry no tag; drop tags on faces that became interior
    let mut uses = std::collections::HashMap::new();
    for el in &topo.elements {
        for f in 0..4 {
            let (a, b) = (el[f], el[(f + 1) % 4]);
            *uses.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let elements = topo.elements.clone();
    topo.boundary_tags.retain(|&(e, f), _| {
        let (a, b) = (elements[e][f], elements[e][(f + 1) % 4]);
        uses[&(a.min(b), a.max(b))] == 1
    });
    topo.spline_breaks = breaks;
    topo.chord = spec.chord.unwrap_or(1.0);
    SpectralMesh::build(topo, basis)
}

fn signed_area(p: [[f64; 2]; 4]) -> f64 {
    let mut a = 0.0;
    for k in 0..4 {
        let (q, r) = (p[k], p[(k + 1) % 4]);
        a += q[0] * r[1] - r[0] * q[1];
    }
    0.5 * a
}

/// Read a Plot3D file and build a linear-geometry mesh; splines declared in
/// `spec.spline` are applied afterwards by [`load_plot3d_mesh_curved`].
pub fn load_plot3d_mesh(
    path: &Path,
    spec: &BoundarySpec,
    basis: &ReferenceBasis,
) -> Result<SpectralMesh> {
    let blocks = read_plot3d(path)?;
    blocks_to_mesh(&blocks, spec, basis)
}

/// As [`load_plot3d_mesh`], followed by spline projection of every tag in `spec.spline`.
pub fn load_plot3d_mesh_curved(
    path: &Path,
    spec: &BoundarySpec,
    basis: &ReferenceBasis,
) -> Result<SpectralMesh> {
    let mut mesh = load_plot3d_mesh(path, spec, basis)?;
    for &tag in &spec.spline {
        mesh = super::spline::project_boundary_spline(&mesh, tag, basis)?;
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Result<Vec<Block>> {
        parse_plot3d(Path::new("t.p3d"), s)
    }

    #[test]
    fn single_block_without_count() {
        let b = p("2 2\n0 1 0 1\n0 0 1 1\n").unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].point(1, 1), [1.0, 1.0]);
    }

    #[test]
    fn fortran_exponents_and_count_header() {
        let b = p("1\n2 2 1\n0 1.0D0 0 1\n0 0 1d0 1\n0 0 0 0\n").unwrap();
        assert_eq!(b[0].point(1, 0), [1.0, 0.0]);
    }

    #[test]
    fn truncated_data_reports_line() {
        let err = p("1\n3 3\n0 1 2\n0 1 2\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_token_reports_its_line() {
        let err = p("2 2\n0 1\n0 x\n0 0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
