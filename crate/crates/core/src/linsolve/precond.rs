//! Jacobi and two-level additive (element Schwarz + vertex coarse space) preconditioners.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::LinearOperator;
use crate::error::{Error, Result};
use crate::sem_ops::Discretization;

/// Coarse problems above this vertex count fall back to plain Jacobi.
pub const MAX_COARSE_VERTICES: usize = 6000;

#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    /// `diag` is the assembled diagonal; masked (Dirichlet) entries map to identity.
    pub fn new(diag: &[f64], mask: Option<&[bool]>) -> Result<Self> {
        let mut inv_diag = Vec::with_capacity(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            if mask.is_some_and(|m| m[i]) {
                inv_diag.push(0.0);
            } else if d > 0.0 {
                inv_diag.push(1.0 / d);
            } else {
                return Err(Error::Parameter(format!("nonpositive diagonal {d:.3e} at row {i}")));
            }
        }
        Ok(Self { inv_diag })
    }
}

impl LinearOperator for Jacobi {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.inv_diag) {
            *yi = xi * di;
        }
    }
}

/// Element-block Schwarz smoother: exact inverses of the principal
/// submatrices of the assembled operator on each element's nodes, combined
/// with inverse-multiplicity weights (restricted additive Schwarz).
struct ElementSchwarz {
    /// Row-major inverse per element, `npe × npe`.
    inverses: Vec<Vec<f64>>,
    /// Row-major unassembled element matrices, `ne × npe × npe`.
    local: Vec<f64>,
}

/// Two-level preconditioner: an exact Galerkin solve on the bilinear vertex
/// space followed by element Schwarz on the updated residual (Jacobi plus
/// coarse, additively, if the element blocks are unavailable). Not
/// symmetric; meant for GMRES.
pub struct TwoLevel {
    jacobi: Jacobi,
    schwarz: Option<ElementSchwarz>,
    /// Bilinear hat values at the element GLL points, `[corner][point]`.
    hats: [Vec<f64>; 4],
    elements: Vec<[usize; 4]>,
    global: Vec<usize>,
    inv_mult: Vec<f64>,
    mask: Option<Vec<bool>>,
    coarse: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    nv: usize,
    npe: usize,
}

impl TwoLevel {
    /// `element_apply(e, x_e, y_e)` applies the local (unassembled) element operator.
    pub fn new(
        disc: &Discretization,
        diag: &[f64],
        mask: Option<&[bool]>,
        singular: bool,
        element_apply: impl Fn(usize, &[f64], &mut [f64]),
    ) -> Result<Self> {
        let jacobi = Jacobi::new(diag, mask)?;
        let np = disc.np();
        let npe = np * np;
        let z = disc.basis.nodes();
        let hats: [Vec<f64>; 4] = std::array::from_fn(|c| {
            let (sr, ss) = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)][c];
            let mut h = vec![0.0; npe];
            for j in 0..np {
                for i in 0..np {
                    h[j * np + i] = 0.25 * (1.0 + sr * z[i]) * (1.0 + ss * z[j]);
                }
            }
            h
        });
        let mesh = &disc.mesh;
        let nv = mesh.num_vertices();
        let global = mesh.global_index().to_vec();
        let inv_mult = disc.multiplicity.iter().map(|m| 1.0 / m).collect();
        let mask_vec = mask.map(|m| m.to_vec());
        let schwarz = element_schwarz(&global, npe, mesh.num_elements(), mask, &element_apply);
        if schwarz.is_none() {
            log::warn!("element Schwarz blocks not invertible; using Jacobi");
        }
        let mut out = Self {
            jacobi,
            schwarz,
            hats,
            elements: mesh.elements().to_vec(),
            global,
            inv_mult,
            mask: mask_vec,
            coarse: None,
            nv,
            npe,
        };
        if nv > MAX_COARSE_VERTICES {
            log::warn!("coarse space with {nv} vertices exceeds limit; using Jacobi only");
            return Ok(out);
        }
        let mut ac = DMatrix::<f64>::zeros(nv, nv);
        let mut xin = vec![0.0; npe];
        let mut yout = vec![0.0; npe];
        for (e, el) in out.elements.iter().enumerate() {
            let local_hats: [Vec<f64>; 4] = std::array::from_fn(|c| out.masked_hat(e, c));
            for c in 0..4 {
                xin.copy_from_slice(&local_hats[c]);
                element_apply(e, &xin, &mut yout);
                for r in 0..4 {
                    let v: f64 = local_hats[r].iter().zip(&yout).map(|(a, b)| a * b).sum();
                    ac[(el[r], el[c])] += v;
                }
            }
        }
        let mean_diag = (0..nv).map(|i| ac[(i, i)]).sum::<f64>() / nv as f64;
        for i in 0..nv {
            if ac[(i, i)].abs() <= 1e-14 * mean_diag.abs().max(1e-300) {
                // vertex fully constrained by Dirichlet data
                for j in 0..nv {
                    ac[(i, j)] = 0.0;
                    ac[(j, i)] = 0.0;
                }
                ac[(i, i)] = 1.0;
            }
        }
        if singular {
            let eps = mean_diag / nv as f64;
            ac.add_scalar_mut(eps);
        }
        out.coarse = Some(ac.lu());
        Ok(out)
    }

    fn masked_hat(&self, e: usize, c: usize) -> Vec<f64> {
        let mut h = self.hats[c].clone();
        if let Some(mask) = &self.mask {
            for (p, hp) in h.iter_mut().enumerate() {
                if mask[self.global[e * self.npe + p]] {
                    *hp = 0.0;
                }
            }
        }
        h
    }
}

fn element_schwarz(
    global: &[usize],
    npe: usize,
    ne: usize,
    mask: Option<&[bool]>,
    element_apply: &impl Fn(usize, &[f64], &mut [f64]),
) -> Option<ElementSchwarz> {
    let mut local = vec![0.0; ne * npe * npe];
    let mut xin = vec![0.0; npe];
    let mut yout = vec![0.0; npe];
    for e in 0..ne {
        for q in 0..npe {
            xin.iter_mut().for_each(|v| *v = 0.0);
            xin[q] = 1.0;
            element_apply(e, &xin, &mut yout);
            for p in 0..npe {
                local[(e * npe + p) * npe + q] = yout[p];
            }
        }
    }
    // assembled entries coupling nodes shared between elements
    let mut shared: HashMap<(usize, usize), f64> = HashMap::new();
    let mut count = vec![0u32; global.iter().max().map_or(0, |m| m + 1)];
    for &g in global {
        count[g] += 1;
    }
    for e in 0..ne {
        for p in 0..npe {
            let gp = global[e * npe + p];
            if count[gp] < 2 {
                continue;
            }
            for q in 0..npe {
                let gq = global[e * npe + q];
                if count[gq] < 2 {
                    continue;
                }
                *shared.entry((gp, gq)).or_default() += local[(e * npe + p) * npe + q];
            }
        }
    }
    let mut inverses = Vec::with_capacity(ne);
    for e in 0..ne {
        let g = &global[e * npe..(e + 1) * npe];
        let mut a = DMatrix::<f64>::zeros(npe, npe);
        for p in 0..npe {
            for q in 0..npe {
                a[(p, q)] = if count[g[p]] >= 2 && count[g[q]] >= 2 {
                    shared[&(g[p], g[q])]
                } else {
                    local[(e * npe + p) * npe + q]
                };
            }
        }
        if let Some(m) = mask {
            for p in 0..npe {
                if m[g[p]] {
                    for q in 0..npe {
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                    }
                    a[(p, p)] = 1.0;
                }
            }
        }
        let mut inv = a.try_inverse()?;
        if let Some(m) = mask {
            for p in 0..npe {
                if m[g[p]] {
                    inv[(p, p)] = 0.0;
                }
            }
        }
        inverses.push(inv.transpose().as_slice().to_vec());
    }
    Some(ElementSchwarz { inverses, local })
}

impl TwoLevel {
    fn schwarz_apply(&self, sw: &ElementSchwarz, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut xe = vec![0.0; self.npe];
        for (e, inv) in sw.inverses.iter().enumerate() {
            let base = e * self.npe;
            for p in 0..self.npe {
                xe[p] = x[self.global[base + p]];
            }
            for p in 0..self.npe {
                let row = &inv[p * self.npe..(p + 1) * self.npe];
                let v: f64 = row.iter().zip(&xe).map(|(a, b)| a * b).sum();
                y[self.global[base + p]] += self.inv_mult[base + p] * v;
            }
        }
    }

    /// `x − A c` from the element matrices, zero on masked rows.
    fn residual_update(&self, sw: &ElementSchwarz, x: &[f64], c: &[f64]) -> Vec<f64> {
        let mut r = x.to_vec();
        let npe = self.npe;
        let mut ce = vec![0.0; npe];
        for e in 0..self.elements.len() {
            let base = e * npe;
            for p in 0..npe {
                ce[p] = c[self.global[base + p]];
            }
            let k = &sw.local[base * npe..(base + npe) * npe];
            for p in 0..npe {
                let v: f64 = k[p * npe..(p + 1) * npe].iter().zip(&ce).map(|(a, b)| a * b).sum();
                r[self.global[base + p]] -= v;
            }
        }
        if let Some(m) = &self.mask {
            for (ri, &mi) in r.iter_mut().zip(m) {
                if mi {
                    *ri = 0.0;
                }
            }
        }
        r
    }

    fn coarse_apply(&self, x: &[f64]) -> Option<Vec<f64>> {
        let lu = self.coarse.as_ref()?;
        let mut rc = DVector::<f64>::zeros(self.nv);
        for (e, el) in self.elements.iter().enumerate() {
            for p in 0..self.npe {
                let l = e * self.npe + p;
                let g = self.global[l];
                if self.mask.as_ref().is_some_and(|m| m[g]) {
                    continue;
                }
                let r = x[g] * self.inv_mult[l];
                for c in 0..4 {
                    rc[el[c]] += self.hats[c][p] * r;
                }
            }
        }
        let xc = lu.solve(&rc)?;
        let mut coarse = vec![0.0; x.len()];
        for (e, el) in self.elements.iter().enumerate() {
            for p in 0..self.npe {
                let l = e * self.npe + p;
                let g = self.global[l];
                if self.mask.as_ref().is_some_and(|m| m[g]) {
                    continue;
                }
                coarse[g] = (0..4).map(|c| self.hats[c][p] * xc[el[c]]).sum();
            }
        }
        Some(coarse)
    }
}

impl LinearOperator for TwoLevel {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let coarse = self.coarse_apply(x);
        match (&self.schwarz, coarse) {
            (Some(sw), Some(c)) => {
                let r = self.residual_update(sw, x, &c);
                self.schwarz_apply(sw, &r, y);
                for (yi, ci) in y.iter_mut().zip(&c) {
                    *yi += ci;
                }
            }
            (Some(sw), None) => self.schwarz_apply(sw, x, y),
            (None, c) => {
                self.jacobi.apply(x, y);
                if let Some(c) = c {
                    for (yi, ci) in y.iter_mut().zip(&c) {
                        *yi += ci;
                    }
                }
            }
        }
    }
}

