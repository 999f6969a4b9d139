//! Over-integrated (dealiased) advection.

use super::{Discretization, ScalarField};
use crate::mesh::basis::gauss_legendre;

/// Gauss-Legendre fine grid with `⌈3N/2⌉ + 1` points per direction.
#[derive(Debug, Clone)]
pub struct Dealias {
    np: usize,
    nq: usize,
    /// Interpolation GLL → GL, `nq × np` row-major.
    interp: Vec<f64>,
    weights: Vec<f64>,
}

impl Dealias {
    pub fn new(disc: &Discretization) -> Self {
        let n = disc.basis.order();
        let nq = (3 * n).div_ceil(2) + 1;
        let (pts, weights) = gauss_legendre(nq);
        Self {
            np: disc.np(),
            nq,
            interp: disc.basis.interpolation_matrix(&pts),
            weights,
        }
    }

    pub fn fine_points(&self) -> usize {
        self.nq
    }

    fn to_fine(&self, f: &[f64]) -> Vec<f64> {
        let (np, nq) = (self.np, self.nq);
        let mut tmp = vec![0.0; nq * np];
        let mut out = vec![0.0; nq * nq];
        for j in 0..np {
            for a in 0..nq {
                let mut acc = 0.0;
                for i in 0..np {
                    acc += self.interp[a * np + i] * f[j * np + i];
                }
                tmp[j * nq + a] = acc;
            }
        }
        for b in 0..nq {
            for a in 0..nq {
                let mut acc = 0.0;
                for j in 0..np {
                    acc += self.interp[b * np + j] * tmp[j * nq + a];
                }
                out[b * nq + a] = acc;
            }
        }
        out
    }

    fn from_fine_transpose(&self, g: &[f64], out: &mut [f64]) {
        let (np, nq) = (self.np, self.nq);
        let mut tmp = vec![0.0; np * nq];
        for b in 0..nq {
            for i in 0..np {
                let mut acc = 0.0;
                for a in 0..nq {
                    acc += self.interp[a * np + i] * g[b * nq + a];
                }
                tmp[b * np + i] = acc;
            }
        }
        for j in 0..np {
            for i in 0..np {
                let mut acc = 0.0;
                for b in 0..nq {
                    acc += self.interp[b * np + j] * tmp[b * np + i];
                }
                out[j * np + i] = acc;
            }
        }
    }

    /// Weak-form advection `∫ φ (u·∇f) dA` evaluated on the fine grid (unassembled).
    pub fn weak_advection(&self, disc: &Discretization, u: &[f64], v: &[f64], f: &[f64]) -> ScalarField {
        let (fx, fy) = disc.gradient(f);
        let npe = self.np * self.np;
        let mut out = vec![0.0; f.len()];
        for e in 0..disc.mesh.num_elements() {
            let r = e * npe..(e + 1) * npe;
            let uf = self.to_fine(&u[r.clone()]);
            let vf = self.to_fine(&v[r.clone()]);
            let fxf = self.to_fine(&fx[r.clone()]);
            let fyf = self.to_fine(&fy[r.clone()]);
            let jf = self.to_fine(&disc.geom.jacobian[r.clone()]);
            let mut g = vec![0.0; self.nq * self.nq];
            for b in 0..self.nq {
                for a in 0..self.nq {
                    let q = b * self.nq + a;
                    g[q] = self.weights[a] * self.weights[b] * jf[q] * (uf[q] * fxf[q] + vf[q] * fyf[q]);
                }
            }
            self.from_fine_transpose(&g, &mut out[r]);
        }
        out
    }

    /// Dealiased pointwise advection: weak form projected with the assembled mass.
    pub fn advect(&self, disc: &Discretization, u: &[f64], v: &[f64], f: &[f64]) -> ScalarField {
        let w = disc.gather(&self.weak_advection(disc, u, v, f));
        let pointwise: Vec<f64> = w.iter().zip(&disc.mass_global).map(|(a, m)| a / m).collect();
        disc.scatter(&pointwise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{self, BoxTags};
    use crate::mesh::{BoundaryTag, ReferenceBasis};

    #[test]
    fn dealiased_advection_matches_for_resolved_product() {
        let b = ReferenceBasis::new(6).unwrap();
        let m = generate::rectangle(&b, 2, 2, [0.0, 1.0], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall))
            .unwrap();
        let d = Discretization::new(m, b).unwrap();
        let u = d.sample(|x, _| x);
        let v = d.sample(|_, y| -y);
        let f = d.sample(|x, y| x * x + y);
        let exact = d.sample(|x, y| 2.0 * x * x - y);
        let a = Dealias::new(&d).advect(&d, &u, &v, &f);
        for (p, q) in a.iter().zip(&exact) {
            assert!((p - q).abs() < 1e-2);
        }
    }
}
