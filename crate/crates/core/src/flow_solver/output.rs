//! Legacy VTK field dumps.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sem_ops::Discretization;

/// Write point fields on the GLL grid, each element split into `N×N` quads.
pub fn write_vtk(path: &Path, disc: &Discretization, title: &str, fields: &[(&str, &[f64])]) -> Result<()> {
    let np = disc.np();
    let npe = np * np;
    let ne = disc.mesh.num_elements();
    let n = disc.num_local();
    let x = disc.mesh.x();
    let y = disc.mesh.y();
    let mut s = String::with_capacity(64 * n * (fields.len() + 1));
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for l in 0..n {
        let _ = writeln!(s, "{:e} {:e} 0", x[l], y[l]);
    }
    let cells_per = (np - 1) * (np - 1);
    let nc = ne * cells_per;
    let _ = writeln!(s, "CELLS {nc} {}", nc * 5);
    for e in 0..ne {
        for j in 0..np - 1 {
            for i in 0..np - 1 {
                let a = e * npe + j * np + i;
                let _ = writeln!(s, "4 {} {} {} {}", a, a + 1, a + np + 1, a + np);
            }
        }
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        s.push_str("9\n");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    for (name, f) in fields {
        if f.len() != n {
            continue;
        }
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in f.iter() {
            let v = if v.is_finite() { *v } else { 0.0 };
            let _ = writeln!(s, "{v:e}");
        }
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
