//! Variable-step BDFk/EXTk coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScheme {
    pub order: usize,
    /// Current step size `Δt = t_{n+1} − t_n`.
    pub dt: f64,
    /// `β₀` such that `du/dt ≈ (β₀ u^{n+1} − Σ b_j u^{n+1−j}) / Δt`.
    pub beta0: f64,
    /// Derivative weights on `u^{n+1}, u^n, …` (sum to zero).
    pub bdf: Vec<f64>,
    /// Extrapolation weights on `u^n, u^{n−1}, …` (sum to one).
    pub ext: Vec<f64>,
}

impl TimeScheme {
    /// `b_j = −bdf[j] Δt` for `j ≥ 1`.
    pub fn history_weight(&self, j: usize) -> f64 {
        -self.bdf[j] * self.dt
    }
}

/// Derivative at `0` of the Lagrange basis through `nodes`.
fn lagrange_derivative_at_zero(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|j| {
            let mut total = 0.0;
            for m in 0..n {
                if m == j {
                    continue;
                }
                let mut term = 1.0 / (nodes[j] - nodes[m]);
                for (q, &tq) in nodes.iter().enumerate() {
                    if q != j && q != m {
                        term *= (0.0 - tq) / (nodes[j] - tq);
                    }
                }
                total += term;
            }
            total
        })
        .collect()
}

fn lagrange_at_zero(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &tm)| (0.0 - tm) / (nodes[j] - tm))
                .product()
        })
        .collect()
}

/// Coefficients for `order ∈ {1,2,3}`; `dts[0]` is the current step and
/// `dts[j]` the step `j` levels back.
pub fn bdfext_coefficients(order: usize, dts: &[f64]) -> Result<TimeScheme> {
    if !(1..=3).contains(&order) {
        return Err(Error::Parameter(format!("time scheme order must be 1, 2 or 3, got {order}")));
    }
    if dts.len() < order {
        return Err(Error::Parameter(format!(
            "order {order} needs {order} step sizes, got {}",
            dts.len()
        )));
    }
    if dts[..order].iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Parameter("step sizes must be positive".into()));
    }
    // times relative to t_{n+1}
    let mut times = vec![0.0];
    let mut acc = 0.0;
    for &d in &dts[..order] {
        acc -= d;
        times.push(acc);
    }
    let bdf = lagrange_derivative_at_zero(&times);
    let ext = lagrange_at_zero(&times[1..]);
    let dt = dts[0];
    Ok(TimeScheme {
        order,
        dt,
        beta0: bdf[0] * dt,
        bdf,
        ext,
    })
}
