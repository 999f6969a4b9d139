//! Gradient, weak Helmholtz and weak divergence kernels (sum factorization).

use super::{Discretization, ScalarField};
use crate::error::{Error, Result};

/// Constant or pointwise coefficient.
#[derive(Debug, Clone, Copy)]
pub enum Coefficient<'a> {
    Constant(f64),
    Field(&'a [f64]),
}

impl Coefficient<'_> {
    #[inline]
    pub fn at(&self, l: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f[l],
        }
    }

    fn min(&self) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Reference derivatives of one element: `(∂f/∂r, ∂f/∂s)`.
#[inline]
pub(crate) fn ref_derivs(d: &[f64], np: usize, f: &[f64], fr: &mut [f64], fs: &mut [f64]) {
    for j in 0..np {
        for i in 0..np {
            let mut ar = 0.0;
            let mut as_ = 0.0;
            for k in 0..np {
                ar += d[i * np + k] * f[j * np + k];
                as_ += d[j * np + k] * f[k * np + i];
            }
            fr[j * np + i] = ar;
            fs[j * np + i] = as_;
        }
    }
}

/// `out += D_r^T wr + D_s^T ws` on one element.
#[inline]
pub(crate) fn ref_derivs_transpose(d: &[f64], np: usize, wr: &[f64], ws: &[f64], out: &mut [f64]) {
    for j in 0..np {
        for i in 0..np {
            let mut acc = 0.0;
            for k in 0..np {
                acc += d[k * np + i] * wr[j * np + k] + d[k * np + j] * ws[k * np + i];
            }
            out[j * np + i] += acc;
        }
    }
}

impl Discretization {
    /// Physical gradient `(∂f/∂x, ∂f/∂y)` per element (discontinuous across faces).
    pub fn gradient(&self, f: &[f64]) -> (ScalarField, ScalarField) {
        let np = self.np();
        let npe = np * np;
        let d = self.basis.deriv_matrix();
        let mut fx = vec![0.0; f.len()];
        let mut fy = vec![0.0; f.len()];
        let mut fr = vec![0.0; npe];
        let mut fs = vec![0.0; npe];
        let g = &self.geom;
        for e in 0..self.mesh.num_elements() {
            let off = e * npe;
            ref_derivs(d, np, &f[off..off + npe], &mut fr, &mut fs);
            for p in 0..npe {
                let l = off + p;
                fx[l] = g.rx[l] * fr[p] + g.sx[l] * fs[p];
                fy[l] = g.ry[l] * fr[p] + g.sy[l] * fs[p];
            }
        }
        (fx, fy)
    }

    /// Gradient followed by mass-weighted averaging onto continuous fields.
    pub fn gradient_continuous(&self, f: &[f64]) -> (ScalarField, ScalarField) {
        let (fx, fy) = self.gradient(f);
        (self.mass_average(&fx), self.mass_average(&fy))
    }

    /// Weak Helmholtz action `M (reaction f) + K_diffusivity f` (unassembled).
    pub fn helmholtz_apply(
        &self,
        f: &[f64],
        diffusivity: Coefficient<'_>,
        reaction: Coefficient<'_>,
    ) -> Result<ScalarField> {
        if !(diffusivity.min() > 0.0) {
            return Err(Error::Parameter("diffusivity must be positive".into()));
        }
        if reaction.min() < 0.0 {
            return Err(Error::Parameter("reaction must be nonnegative".into()));
        }
        let mut out = vec![0.0; f.len()];
        self.helmholtz_apply_into(f, diffusivity, reaction, &mut out);
        Ok(out)
    }

    /// Unchecked kernel behind [`Self::helmholtz_apply`].
    pub fn helmholtz_apply_into(
        &self,
        f: &[f64],
        diffusivity: Coefficient<'_>,
        reaction: Coefficient<'_>,
        out: &mut [f64],
    ) {
        let np = self.np();
        let npe = np * np;
        for e in 0..self.mesh.num_elements() {
            let off = e * npe;
            self.element_helmholtz(e, &f[off..off + npe], diffusivity, reaction, &mut out[off..off + npe]);
        }
    }

    /// Helmholtz action restricted to element `e` (local element vectors).
    pub fn element_helmholtz(
        &self,
        e: usize,
        f: &[f64],
        diffusivity: Coefficient<'_>,
        reaction: Coefficient<'_>,
        out: &mut [f64],
    ) {
        let np = self.np();
        let npe = np * np;
        let off = e * npe;
        let d = self.basis.deriv_matrix();
        let mut fr = [0.0; 17 * 17];
        let mut fs = [0.0; 17 * 17];
        ref_derivs(d, np, f, &mut fr[..npe], &mut fs[..npe]);
        for p in 0..npe {
            let l = off + p;
            let nu = diffusivity.at(l);
            let (a, b, c) = (self.g[0][l], self.g[1][l], self.g[2][l]);
            let wr = nu * (a * fr[p] + b * fs[p]);
            let ws = nu * (b * fr[p] + c * fs[p]);
            fr[p] = wr;
            fs[p] = ws;
            out[p] = reaction.at(l) * self.geom.mass[l] * f[p];
        }
        ref_derivs_transpose(d, np, &fr[..npe], &fs[..npe], out);
    }

    /// Diagonal of the unassembled Helmholtz operator.
    pub fn helmholtz_diagonal(&self, diffusivity: Coefficient<'_>, reaction: Coefficient<'_>) -> ScalarField {
        let np = self.np();
        let npe = np * np;
        let d = self.basis.deriv_matrix();
        let mut out = vec![0.0; self.num_local()];
        for e in 0..self.mesh.num_elements() {
            let off = e * npe;
            for j in 0..np {
                for i in 0..np {
                    let l = off + j * np + i;
                    let mut acc = reaction.at(l) * self.geom.mass[l];
                    for k in 0..np {
                        let lk = off + j * np + k;
                        acc += diffusivity.at(lk) * self.g[0][lk] * d[k * np + i] * d[k * np + i];
                        let lk = off + k * np + i;
                        acc += diffusivity.at(lk) * self.g[2][lk] * d[k * np + j] * d[k * np + j];
                    }
                    acc += 2.0 * diffusivity.at(l) * self.g[1][l] * d[i * np + i] * d[j * np + j];
                    out[l] = acc;
                }
            }
        }
        out
    }

    /// Weak divergence `∫ ∇φ · (fx, fy) dA` per local node (unassembled).
    pub fn weak_divergence(&self, fx: &[f64], fy: &[f64]) -> ScalarField {
        let np = self.np();
        let npe = np * np;
        let d = self.basis.deriv_matrix();
        let g = &self.geom;
        let mut out = vec![0.0; fx.len()];
        let mut wr = vec![0.0; npe];
        let mut ws = vec![0.0; npe];
        for e in 0..self.mesh.num_elements() {
            let off = e * npe;
            for p in 0..npe {
                let l = off + p;
                let m = g.mass[l];
                wr[p] = m * (g.rx[l] * fx[l] + g.ry[l] * fy[l]);
                ws[p] = m * (g.sx[l] * fx[l] + g.sy[l] * fy[l]);
            }
            ref_derivs_transpose(d, np, &wr, &ws, &mut out[off..off + npe]);
        }
        out
    }

    /// Pointwise advection `(u·∇) f`.
    pub fn advect(&self, u: &[f64], v: &[f64], f: &[f64]) -> ScalarField {
        let (fx, fy) = self.gradient(f);
        (0..f.len()).map(|l| u[l] * fx[l] + v[l] * fy[l]).collect()
    }
}

/// Velocity-gradient invariants at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct VelocityGradient {
    pub ux: f64,
    pub uy: f64,
    pub vx: f64,
    pub vy: f64,
}

impl VelocityGradient {
    /// Strain-rate magnitude `sqrt(2 S_ij S_ij)`.
    pub fn strain_magnitude(&self) -> f64 {
        let s12 = 0.5 * (self.uy + self.vx);
        (2.0 * (self.ux * self.ux + self.vy * self.vy + 2.0 * s12 * s12)).sqrt()
    }

    /// Vorticity magnitude `sqrt(2 Ω_ij Ω_ij) = |∂v/∂x − ∂u/∂y|`.
    pub fn vorticity_magnitude(&self) -> f64 {
        (self.vx - self.uy).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{self, BoxTags};
    use crate::mesh::{BoundaryTag, QuadTopology, ReferenceBasis, SpectralMesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn skewed(order: usize) -> Discretization {
        let b = ReferenceBasis::new(order).unwrap();
        let topo = QuadTopology {
            vertices: vec![
                [0.0, 0.0],
                [1.0, 0.1],
                [2.1, 0.0],
                [-0.1, 1.0],
                [1.1, 1.2],
                [2.0, 1.1],
            ],
            elements: vec![[0, 1, 4, 3], [1, 2, 5, 4]],
            boundary_tags: [
                ((0, 0), BoundaryTag::Wall),
                ((0, 2), BoundaryTag::Wall),
                ((0, 3), BoundaryTag::Wall),
                ((1, 0), BoundaryTag::Wall),
                ((1, 1), BoundaryTag::Wall),
                ((1, 2), BoundaryTag::Wall),
            ]
            .into_iter()
            .collect(),
            ..Default::default()
        };
        Discretization::new(SpectralMesh::build(topo, &b).unwrap(), b).unwrap()
    }

    #[test]
    fn gradient_of_linear_field_is_exact() {
        let d = skewed(5);
        let f = d.sample(|x, y| 3.0 * x + 2.0 * y);
        let (fx, fy) = d.gradient(&f);
        assert!(fx.iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert!(fy.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn constants_are_in_the_stiffness_null_space() {
        let d = skewed(4);
        let out = d
            .helmholtz_apply(&vec![1.0; d.num_local()], Coefficient::Constant(1.3), Coefficient::Constant(0.0))
            .unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn helmholtz_is_symmetric() {
        let d = skewed(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nu: Vec<f64> = (0..d.num_local()).map(|_| rng.random_range(0.5..2.0)).collect();
        for _ in 0..20 {
            let f: Vec<f64> = (0..d.num_local()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..d.num_local()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let af = d.helmholtz_apply(&f, Coefficient::Field(&nu), Coefficient::Constant(0.7)).unwrap();
            let ag = d.helmholtz_apply(&g, Coefficient::Field(&nu), Coefficient::Constant(0.7)).unwrap();
            let a: f64 = g.iter().zip(&af).map(|(x, y)| x * y).sum();
            let b: f64 = f.iter().zip(&ag).map(|(x, y)| x * y).sum();
            assert!((a - b).abs() <= 1e-11 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn diagonal_matches_unit_vector_application() {
        let d = skewed(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nu: Vec<f64> = (0..d.num_local()).map(|_| rng.random_range(0.5..2.0)).collect();
        let diag = d.helmholtz_diagonal(Coefficient::Field(&nu), Coefficient::Constant(0.3));
        for l in (0..d.num_local()).step_by(3) {
            let mut e = vec![0.0; d.num_local()];
            e[l] = 1.0;
            let a = d.helmholtz_apply(&e, Coefficient::Field(&nu), Coefficient::Constant(0.3)).unwrap();
            assert!((a[l] - diag[l]).abs() < 1e-12);
        }
    }

    #[test]
    fn nonpositive_diffusivity_is_rejected() {
        let d = skewed(2);
        let f = vec![0.0; d.num_local()];
        assert!(d
            .helmholtz_apply(&f, Coefficient::Constant(0.0), Coefficient::Constant(0.0))
            .is_err());
    }

    #[test]
    fn weak_divergence_integrates_by_parts() {
        // ∫∇φ·F = ∮φ F·n − ∫φ ∇·F; with φ ≡ 1 only the boundary flux remains
        let b = ReferenceBasis::new(6).unwrap();
        let m = generate::rectangle(&b, 2, 2, [0.0, 1.0], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall))
            .unwrap();
        let d = Discretization::new(m, b).unwrap();
        let fx = d.sample(|x, y| x * x + y);
        let fy = d.sample(|x, _| x);
        let w = d.weak_divergence(&fx, &fy);
        let total: f64 = w.iter().sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn strain_and_vorticity_magnitudes() {
        let rot = VelocityGradient { ux: 0.0, uy: -2.0, vx: 2.0, vy: 0.0 };
        assert!(rot.strain_magnitude().abs() < 1e-15);
        assert!((rot.vorticity_magnitude() - 4.0).abs() < 1e-15);
        let shear = VelocityGradient { ux: 0.0, uy: 3.0, vx: 0.0, vy: 0.0 };
        assert!((shear.strain_magnitude() - 3.0).abs() < 1e-15);
    }
}
