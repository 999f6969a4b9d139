//! Preconditioned conjugate gradients.

use super::{dot, norm, LinearOperator, Projection, SolveReport};
use crate::error::{Error, Result};

/// Solve `A x = rhs` starting from the contents of `x`.
///
/// Residuals in the report are relative to `‖rhs‖` (after projection).
pub fn pcg(
    a: &dyn LinearOperator,
    rhs: &[f64],
    precond: &dyn LinearOperator,
    x: &mut [f64],
    tol: f64,
    maxit: usize,
    project: Projection<'_>,
) -> Result<SolveReport> {
    let n = rhs.len();
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
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if let Some(p) = project {
        p(&mut r);
    }
    let r0 = norm(&r) / bnorm;
    let mut report = SolveReport {
        iterations: 0,
        initial_residual: r0,
        final_residual: r0,
        converged: r0 <= tol,
    };
    if report.converged {
        return Ok(report);
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    if let Some(p) = project {
        p(&mut z);
    }
    let mut pdir = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=maxit {
        a.apply(&pdir, &mut ap);
        if let Some(p) = project {
            p(&mut ap);
        }
        let pap = dot(&pdir, &ap);
        if !(pap > 0.0) {
            return Err(Error::Breakdown {
                iteration: it,
                message: format!("nonpositive curvature p·Ap = {pap:.3e}"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * ap[i];
        }
        report.iterations = it;
        report.final_residual = norm(&r) / bnorm;
        if report.final_residual <= tol {
            report.converged = true;
            break;
        }
        precond.apply(&r, &mut z);
        if let Some(p) = project {
            p(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            pdir[i] = z[i] + beta * pdir[i];
        }
    }
    if let Some(p) = project {
        p(x);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::Identity;

    #[test]
    fn diagonal_system_with_exact_jacobi_takes_one_iteration() {
        let d = [1.0, 4.0, 9.0, 0.5];
        let a = |x: &[f64], y: &mut [f64]| {
            for i in 0..4 {
                y[i] = d[i] * x[i];
            }
        };
        let m = |x: &[f64], y: &mut [f64]| {
            for i in 0..4 {
                y[i] = x[i] / d[i];
            }
        };
        let mut x = vec![0.0; 4];
        let rep = pcg(&a, &[1.0, 2.0, 3.0, 4.0], &m, &mut x, 1e-12, 10, None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert!((x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        let mut x = vec![3.0; 5];
        let rep = pcg(&a, &[0.0; 5], &Identity, &mut x, 1e-10, 10, None).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let a = |x: &[f64], y: &mut [f64]| {
            y[0] = x[0];
            y[1] = -x[1];
        };
        let mut x = vec![0.0; 2];
        let err = pcg(&a, &[0.0, 1.0], &Identity, &mut x, 1e-10, 10, None).unwrap_err();
        assert!(matches!(err, Error::Breakdown { iteration: 1, .. }));
    }
}
