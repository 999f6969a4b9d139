//! Restarted, right-preconditioned GMRES with modified Gram-Schmidt.

use super::{norm, LinearOperator, Projection, SolveReport};
use crate::error::{Error, Result};

/// Relative residual reduction a restart cycle must achieve to count as progress.
const STAGNATION_FACTOR: f64 = 1.0 - 1e-8;

/// Solve `A x = rhs` starting from the contents of `x`.
///
/// Residuals in the report are relative to `‖rhs‖` (after projection). A
/// restart cycle that fails to reduce the true residual ends the solve with
/// `converged = false`.
pub fn gmres(
    a: &dyn LinearOperator,
    rhs: &[f64],
    precond: &dyn LinearOperator,
    x: &mut [f64],
    tol: f64,
    restart: usize,
    maxit: usize,
    project: Projection<'_>,
) -> Result<SolveReport> {
    let n = rhs.len();
    let restart = restart.max(1);
    let mut b = rhs.to_vec();
    if let Some(p) = project {
        p(&mut b);
        p(x);
    }
    let bnorm = norm(&b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(SolveReport {
            iterations: 0,
            initial_residual: 0.0,
            final_residual: 0.0,
            converged: true,
        });
    }
    let mut report = SolveReport::default();
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
    let mut h = vec![vec![0.0; restart]; restart + 1];
    let mut cs = vec![0.0; restart];
    let mut sn = vec![0.0; restart];
    let mut g = vec![0.0; restart + 1];
    let mut previous_cycle = f64::INFINITY;
    loop {
        a.apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        if let Some(p) = project {
            p(&mut r);
        }
        let beta = norm(&r);
        if !beta.is_finite() {
            return Err(Error::Breakdown {
                iteration: report.iterations,
                message: format!("non-finite residual norm {beta}"),
            });
        }
        if report.iterations == 0 {
            report.initial_residual = beta / bnorm;
        }
        report.final_residual = beta / bnorm;
        if report.final_residual <= tol {
            report.converged = true;
            return Ok(report);
        }
        if report.iterations >= maxit || beta > STAGNATION_FACTOR * previous_cycle {
            return Ok(report);
        }
        previous_cycle = beta;

        v.clear();
        z.clear();
        v.push(r.iter().map(|t| t / beta).collect());
        g.fill(0.0);
        g[0] = beta;
        let mut k = 0;
        while k < restart && report.iterations < maxit {
            let mut zk = vec![0.0; n];
            precond.apply(&v[k], &mut zk);
            if let Some(p) = project {
                p(&mut zk);
            }
            a.apply(&zk, &mut w);
            if let Some(p) = project {
                p(&mut w);
            }
            z.push(zk);
            for i in 0..=k {
                let hik = super::dot(&w, &v[i]);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hnext = norm(&w);
            h[k + 1][k] = hnext;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let den = h[k][k].hypot(h[k + 1][k]);
            if den == 0.0 {
                break;
            }
            cs[k] = h[k][k] / den;
            sn[k] = h[k + 1][k] / den;
            h[k][k] = den;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            report.iterations += 1;
            k += 1;
            let happy = hnext <= 1e-14 * beta;
            if g[k].abs() <= tol * bnorm || happy {
                break;
            }
            v.push(w.iter().map(|t| t / hnext).collect());
        }
        if k == 0 {
            // no direction could be added; another cycle would repeat this one
            return Ok(report);
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&z[j]) {
                *xi += yj * zi;
            }
        }
        if let Some(p) = project {
            p(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::Identity;

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        let rhs = [1.0, -2.0, 0.5];
        let mut x = vec![0.0; 3];
        let rep = gmres(&a, &rhs, &Identity, &mut x, 1e-12, 10, 100, None).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(x, rhs);
    }

    #[test]
    fn non_finite_rhs_breaks_down() {
        let a = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        let rhs = [1.0, f64::INFINITY];
        let mut x = vec![0.0; 2];
        let err = gmres(&a, &rhs, &Identity, &mut x, 1e-12, 10, 100, None).unwrap_err();
        assert!(matches!(err, Error::Breakdown { iteration: 0, .. }));
    }

    #[test]
    fn zero_operator_terminates() {
        let a = |_: &[f64], y: &mut [f64]| y.fill(0.0);
        let mut x = vec![0.0; 3];
        let rep = gmres(&a, &[1.0, 2.0, 3.0], &Identity, &mut x, 1e-12, 10, 100, None).unwrap();
        assert!(!rep.converged);
    }
}
