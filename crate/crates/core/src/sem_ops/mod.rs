//! Tensor-product spectral-element operators on a fixed mesh.

pub mod dealias;
pub mod modal;
pub mod operators;

use crate::error::Result;
use crate::mesh::geometry::compute_geometric_factors;
use crate::mesh::{GeometricFactors, ReferenceBasis, SpectralMesh};

pub use modal::FilterSpec;
pub use operators::Coefficient;

/// Nodal values in local (element-major) layout, `E * (N+1)^2` entries.
pub type ScalarField = Vec<f64>;

/// Basis, mesh, geometry and gather-scatter data bundled for operator evaluation.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub basis: ReferenceBasis,
    pub mesh: SpectralMesh,
    pub geom: GeometricFactors,
    /// Local copy count of each node's global index.
    pub multiplicity: Vec<f64>,
    /// Assembled diagonal mass matrix (global layout).
    pub mass_global: Vec<f64>,
    /// Stiffness metric `J w (∇r·∇r, ∇r·∇s, ∇s·∇s)` per local point.
    pub(crate) g: [Vec<f64>; 3],
}

impl Discretization {
    pub fn new(mesh: SpectralMesh, basis: ReferenceBasis) -> Result<Self> {
        let geom = compute_geometric_factors(&mesh, &basis)?;
        let multiplicity = mesh.multiplicity();
        let n = mesh.num_local();
        let mut g: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
        for l in 0..n {
            let (rx, ry, sx, sy) = (geom.rx[l], geom.ry[l], geom.sx[l], geom.sy[l]);
            let m = geom.mass[l];
            g[0][l] = m * (rx * rx + ry * ry);
            g[1][l] = m * (rx * sx + ry * sy);
            g[2][l] = m * (sx * sx + sy * sy);
        }
        let mut d = Self {
            basis,
            mesh,
            geom,
            multiplicity,
            mass_global: Vec::new(),
            g,
        };
        d.mass_global = d.gather(&d.geom.mass);
        Ok(d)
    }

    pub fn num_local(&self) -> usize {
        self.mesh.num_local()
    }

    pub fn num_global(&self) -> usize {
        self.mesh.num_global()
    }

    pub fn np(&self) -> usize {
        self.basis.np()
    }

    /// Sum local contributions into global nodes.
    pub fn gather(&self, local: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_global()];
        for (l, &g) in self.mesh.global_index().iter().enumerate() {
            out[g] += local[l];
        }
        out
    }

    /// Copy global values to every local copy.
    pub fn scatter(&self, global: &[f64]) -> Vec<f64> {
        self.mesh.global_index().iter().map(|&g| global[g]).collect()
    }

    pub fn scatter_into(&self, global: &[f64], local: &mut [f64]) {
        for (l, &g) in self.mesh.global_index().iter().enumerate() {
            local[l] = global[g];
        }
    }

    /// Direct stiffness summation: shared nodes receive the sum of all copies.
    pub fn dssum(&self, f: &[f64]) -> ScalarField {
        self.scatter(&self.gather(f))
    }

    /// Multiplicity-weighted average of shared copies (projection onto continuous fields).
    pub fn average(&self, f: &[f64]) -> ScalarField {
        let mut s = self.dssum(f);
        for (v, m) in s.iter_mut().zip(&self.multiplicity) {
            *v /= m;
        }
        s
    }

    /// Mass-weighted average of shared copies; the natural projection for
    /// discontinuous derivative fields.
    pub fn mass_average(&self, f: &[f64]) -> ScalarField {
        let weighted: Vec<f64> = f.iter().zip(&self.geom.mass).map(|(a, m)| a * m).collect();
        let num = self.gather(&weighted);
        let out: Vec<f64> = num
            .iter()
            .zip(&self.mass_global)
            .map(|(n, m)| n / m)
            .collect();
        self.scatter(&out)
    }

    /// `∫ f dA` for a local field.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.geom.mass).map(|(a, m)| a * m).sum()
    }

    pub fn area(&self) -> f64 {
        self.geom.area()
    }

    /// Discrete L2 norm of a local field.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.geom.mass)
            .map(|(a, m)| a * a * m)
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluate a function at every GLL point.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        self.mesh
            .x()
            .iter()
            .zip(self.mesh.y())
            .map(|(&x, &y)| f(x, y))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{self, BoxTags};
    use crate::mesh::BoundaryTag;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc() -> Discretization {
        let b = ReferenceBasis::new(4).unwrap();
        let m = generate::rectangle(&b, 3, 2, [0.0, 1.5], [0.0, 1.0], BoxTags::all(BoundaryTag::Wall))
            .unwrap();
        Discretization::new(m, b).unwrap()
    }

    #[test]
    fn dssum_of_ones_is_valence() {
        let d = disc();
        let s = d.dssum(&vec![1.0; d.num_local()]);
        assert_eq!(s, d.multiplicity);
        assert!(s.iter().any(|&v| v == 4.0));
    }

    #[test]
    fn average_preserves_continuous_fields() {
        let d = disc();
        let f = d.sample(|x, y| (3.0 * x).sin() * y);
        let a = d.average(&f);
        for (u, v) in f.iter().zip(&a) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn dssum_conserves_sum() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..d.num_local()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = d.gather(&f);
        let total_local: f64 = f.iter().sum();
        let total_global: f64 = g.iter().sum();
        assert!((total_local - total_global).abs() < 1e-12);
    }
}
