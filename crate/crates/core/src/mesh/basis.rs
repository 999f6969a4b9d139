//! Gauss-Lobatto-Legendre reference basis on [-1, 1].

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 16;

/// Nodal GLL basis of order `N` together with its modal (Legendre) transform.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `deriv[i * np + j] = l_j'(x_i)`.
    deriv: Vec<f64>,
    /// `vandermonde[i * np + k] = P_k(x_i)`.
    vandermonde: Vec<f64>,
    /// Inverse of the Vandermonde matrix (nodal to modal).
    inv_vandermonde: Vec<f64>,
}

impl ReferenceBasis {
    pub fn new(order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::Parameter(format!(
                "polynomial order {order} outside 1..={MAX_ORDER}"
            )));
        }
        let nodes = gll_nodes(order);
        let np = order + 1;
        let n = order as f64;
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let p = legendre(order, x).0;
                2.0 / (n * (n + 1.0) * p * p)
            })
            .collect();

        let pn: Vec<f64> = nodes.iter().map(|&x| legendre(order, x).0).collect();
        let mut deriv = vec![0.0; np * np];
        for i in 0..np {
            let mut diag = 0.0;
            for j in 0..np {
                if i != j {
                    let d = pn[i] / (pn[j] * (nodes[i] - nodes[j]));
                    deriv[i * np + j] = d;
                    diag -= d;
                }
            }
            // negative-sum diagonal keeps every row sum at round-off level
            deriv[i * np + i] = diag;
        }

        let mut vandermonde = vec![0.0; np * np];
        for (i, &x) in nodes.iter().enumerate() {
            let all = legendre_all(order, x);
            vandermonde[i * np..(i + 1) * np].copy_from_slice(&all);
        }
        // Discrete orthogonality of the GLL rule: V^T W V = diag(gamma) with
        // gamma_k = 2/(2k+1) for k < N and 2/N for k = N.
        let mut inv_vandermonde = vec![0.0; np * np];
        for k in 0..np {
            let gamma = if k < order {
                2.0 / (2.0 * k as f64 + 1.0)
            } else {
                2.0 / n
            };
            for i in 0..np {
                inv_vandermonde[k * np + i] = weights[i] * vandermonde[i * np + k] / gamma;
            }
        }

        Ok(Self {
            order,
            nodes,
            weights,
            deriv,
            vandermonde,
            inv_vandermonde,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of nodes per direction, `N + 1`.
    pub fn np(&self) -> usize {
        self.order + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn deriv_matrix(&self) -> &[f64] {
        &self.deriv
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.deriv[i * (self.order + 1) + j]
    }

    pub fn vandermonde(&self) -> &[f64] {
        &self.vandermonde
    }

    pub fn inv_vandermonde(&self) -> &[f64] {
        &self.inv_vandermonde
    }

    /// Apply the nodal differentiation matrix to samples at the nodes.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let np = self.np();
        assert_eq!(values.len(), np);
        (0..np)
            .map(|i| (0..np).map(|j| self.d(i, j) * values[j]).sum())
            .collect()
    }

    /// Values of the Lagrange cardinal functions at `x`.
    pub fn lagrange_at(&self, x: f64) -> Vec<f64> {
        lagrange_weights(&self.nodes, x)
    }

    /// Interpolation matrix (rows = targets) from the GLL nodes to `targets`.
    pub fn interpolation_matrix(&self, targets: &[f64]) -> Vec<f64> {
        let np = self.np();
        let mut m = vec![0.0; targets.len() * np];
        for (r, &x) in targets.iter().enumerate() {
            m[r * np..(r + 1) * np].copy_from_slice(&self.lagrange_at(x));
        }
        m
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        let d2 = d0 + (2.0 * kf - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// `[P_0(x), ..., P_n(x)]`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p);
    }
    out
}

/// Roots of `(1 - x^2) P_N'(x)` in increasing order.
pub fn gll_nodes(order: usize) -> Vec<f64> {
    let np = order + 1;
    let n = order as f64;
    let mut nodes = vec![0.0; np];
    for (i, node) in nodes.iter_mut().enumerate() {
        // Chebyshev-Gauss-Lobatto start, Newton on x P_N - P_{N-1} = 0
        let mut x = -(std::f64::consts::PI * i as f64 / n).cos();
        for _ in 0..100 {
            let pn = legendre(order, x).0;
            let pm = legendre(order - 1, x).0;
            let dx = (x * pn - pm) / ((n + 1.0) * pn);
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *node = x;
    }
    nodes[0] = -1.0;
    nodes[order] = 1.0;
    if order % 2 == 0 {
        nodes[order / 2] = 0.0;
    }
    // enforce exact antisymmetry
    for i in 0..np / 2 {
        let a = 0.5 * (nodes[order - i] - nodes[i]);
        nodes[i] = -a;
        nodes[order - i] = a;
    }
    nodes
}

/// Gauss-Legendre nodes and weights with `count` points.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let n = count;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, x).1;
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Lagrange cardinal function values at `x` for the given distinct nodes.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let np = nodes.len();
    let mut out = vec![0.0; np];
    for j in 0..np {
        if (x - nodes[j]).abs() == 0.0 {
            out[j] = 1.0;
            return out;
        }
    }
    for j in 0..np {
        let mut l = 1.0;
        for m in 0..np {
            if m != j {
                l *= (x - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
        out[j] = l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_is_two_point_rule() {
        let b = ReferenceBasis::new(1).unwrap();
        assert_eq!(b.nodes(), &[-1.0, 1.0]);
        assert!((b.weights()[0] - 1.0).abs() < 1e-15);
        assert!((b.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn order_two_matches_root_find() {
        // Oracle: bisection on (1-x^2) P_2'(x) = (1-x^2) 3x, weights 2/(N(N+1) P_N^2).
        let f = |x: f64| (1.0 - x * x) * 3.0 * x;
        let (mut lo, mut hi) = (-0.5, 0.7);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let p2 = |x: f64| 0.5 * (3.0 * x * x - 1.0);
        let w = |x: f64| 2.0 / (6.0 * p2(x) * p2(x));

        let b = ReferenceBasis::new(2).unwrap();
        assert!((b.nodes()[1] - root).abs() < 1e-14);
        assert!((b.weights()[0] - w(-1.0)).abs() < 1e-14);
        assert!((b.weights()[1] - w(root)).abs() < 1e-14);
        assert!((b.weights()[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((b.weights()[1] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_is_differentiated_exactly() {
        let b = ReferenceBasis::new(3).unwrap();
        let f: Vec<f64> = b.nodes().iter().map(|x| x * x * x).collect();
        let df = b.differentiate(&f);
        for (x, d) in b.nodes().iter().zip(&df) {
            assert!((d - 3.0 * x * x).abs() <= 1e-13, "{d} vs {}", 3.0 * x * x);
        }
    }

    #[test]
    fn invariants_hold_for_all_orders() {
        for n in 1..=MAX_ORDER {
            let b = ReferenceBasis::new(n).unwrap();
            let x = b.nodes();
            assert_eq!(x[0], -1.0);
            assert_eq!(x[n], 1.0);
            assert!(x.windows(2).all(|w| w[1] > w[0]));
            let s: f64 = b.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "N={n}: {s}");
            for i in 0..=n {
                let row: f64 = (0..=n).map(|j| b.d(i, j)).sum();
                assert!(row.abs() < 1e-12, "N={n} row {i}: {row}");
            }
            // nodes are roots of (1-x^2) P_N'
            for &xi in &x[1..n] {
                assert!(legendre(n, xi).1.abs() < 1e-10 * (n * n) as f64);
            }
        }
    }

    #[test]
    fn degree_n_exactness_of_derivative() {
        for n in 1..=12 {
            let b = ReferenceBasis::new(n).unwrap();
            let f: Vec<f64> = b.nodes().iter().map(|x| x.powi(n as i32)).collect();
            let df = b.differentiate(&f);
            for (x, d) in b.nodes().iter().zip(&df) {
                let exact = n as f64 * x.powi(n as i32 - 1);
                assert!((d - exact).abs() < 1e-11, "N={n}");
            }
        }
    }

    #[test]
    fn out_of_range_order_rejected() {
        assert!(matches!(ReferenceBasis::new(0), Err(Error::Parameter(_))));
        assert!(matches!(ReferenceBasis::new(17), Err(Error::Parameter(_))));
    }

    #[test]
    fn vandermonde_inverse_is_exact() {
        for n in 1..=12 {
            let b = ReferenceBasis::new(n).unwrap();
            let np = n + 1;
            for i in 0..np {
                for j in 0..np {
                    let s: f64 = (0..np)
                        .map(|k| b.inv_vandermonde()[i * np + k] * b.vandermonde()[k * np + j])
                        .sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((s - e).abs() < 1e-12, "N={n} ({i},{j}) {s}");
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }
}
