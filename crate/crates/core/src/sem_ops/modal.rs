//! Legendre modal transforms and the high-pass-filter relaxation operators.

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::mesh::ReferenceBasis;

/// Quadratic-ramp modal low-pass filter and relaxation rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Number of damped top modes.
    pub modes: usize,
    /// Per-mode weights `σ_0..σ_N`.
    pub sigma: Vec<f64>,
    /// Relaxation rate `χ` (1/time).
    pub chi: f64,
}

impl FilterSpec {
    pub fn new(order: usize, modes: usize, chi: f64) -> Result<Self> {
        if modes > order {
            return Err(Error::Parameter(format!(
                "filter mode count {modes} exceeds polynomial order {order}"
            )));
        }
        if !(chi >= 0.0) || !chi.is_finite() {
            return Err(Error::Parameter(format!("relaxation rate must be nonnegative, got {chi}")));
        }
        let mut sigma = vec![1.0; order + 1];
        for i in 1..=modes {
            let r = (modes - i) as f64 / modes as f64;
            sigma[order - modes + i] = r * r;
        }
        Ok(Self { modes, sigma, chi })
    }

    /// Filter acting only on the highest mode (`σ_N = 0`), i.e. a one-mode ramp.
    pub fn last_mode(order: usize, chi: f64) -> Result<Self> {
        Self::new(order, 1.min(order), chi)
    }

    pub fn order(&self) -> usize {
        self.sigma.len() - 1
    }
}

/// Precomputed 1D nodal filter matrix `V diag(σ) V^{-1}`.
#[derive(Debug, Clone)]
pub struct ModalFilter {
    np: usize,
    matrix: Vec<f64>,
    pub spec: FilterSpec,
}

impl ModalFilter {
    pub fn new(basis: &ReferenceBasis, spec: &FilterSpec) -> Result<Self> {
        if spec.order() != basis.order() {
            return Err(Error::Parameter(format!(
                "filter built for order {} applied to order {}",
                spec.order(),
                basis.order()
            )));
        }
        let np = basis.np();
        let v = basis.vandermonde();
        let vi = basis.inv_vandermonde();
        let mut matrix = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                let mut acc = 0.0;
                for k in 0..np {
                    acc += v[i * np + k] * spec.sigma[k] * vi[k * np + j];
                }
                matrix[i * np + j] = acc;
            }
        }
        Ok(Self {
            np,
            matrix,
            spec: spec.clone(),
        })
    }

    pub fn lowpass(&self, f: &[f64]) -> ScalarField {
        tensor_apply(&self.matrix, self.np, f)
    }

    /// `f − lowpass(f)`.
    pub fn highpass(&self, f: &[f64]) -> ScalarField {
        let lp = self.lowpass(f);
        f.iter().zip(&lp).map(|(a, b)| a - b).collect()
    }
}

/// Apply `A ⊗ A` elementwise: `out_e = A f_e A^T` in `(s, r)` matrix layout.
pub(crate) fn tensor_apply(a: &[f64], np: usize, f: &[f64]) -> ScalarField {
    let npe = np * np;
    let mut out = vec![0.0; f.len()];
    let mut tmp = vec![0.0; npe];
    for (fe, oe) in f.chunks_exact(npe).zip(out.chunks_exact_mut(npe)) {
        for j in 0..np {
            for i in 0..np {
                let mut acc = 0.0;
                for k in 0..np {
                    acc += a[i * np + k] * fe[j * np + k];
                }
                tmp[j * np + i] = acc;
            }
        }
        for j in 0..np {
            for i in 0..np {
                let mut acc = 0.0;
                for k in 0..np {
                    acc += a[j * np + k] * tmp[k * np + i];
                }
                oe[j * np + i] = acc;
            }
        }
    }
    out
}

/// Nodal values → tensor Legendre coefficients; coefficient `(p, q)` of
/// element `e` is stored at `e*np^2 + q*np + p` (`p` along `r`).
pub fn to_modal(basis: &ReferenceBasis, f: &[f64]) -> ScalarField {
    tensor_apply(basis.inv_vandermonde(), basis.np(), f)
}

pub fn from_modal(basis: &ReferenceBasis, coeffs: &[f64]) -> ScalarField {
    tensor_apply(basis.vandermonde(), basis.np(), coeffs)
}

pub fn lowpass_filter(basis: &ReferenceBasis, f: &[f64], spec: &FilterSpec) -> Result<ScalarField> {
    Ok(ModalFilter::new(basis, spec)?.lowpass(f))
}

pub fn highpass_apply(basis: &ReferenceBasis, f: &[f64], spec: &FilterSpec) -> Result<ScalarField> {
    Ok(ModalFilter::new(basis, spec)?.highpass(f))
}
