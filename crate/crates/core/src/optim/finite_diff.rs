//! Central finite-difference Jacobians, used as the validation oracle for
//! every analytic Jacobian in the crate and as the LM fallback.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Central differences with per-coordinate step
/// `h_i = eps^(1/3) * max(|theta_i|, 1)`.
pub fn finite_difference_jacobian<F>(residuals: &F, theta: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<DVector<f64>>,
{
    let base = residuals(theta)
        .filter(|r| r.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::FitFailed("non-finite residuals at expansion point".into()))?;
    let m = base.len();
    let p = theta.len();
    let step_scale = f64::EPSILON.cbrt();

    let mut jac = DMatrix::zeros(m, p);
    let mut work = theta.to_vec();
    for j in 0..p {
        let h = step_scale * theta[j].abs().max(1.0);
        work[j] = theta[j] + h;
        let plus = residuals(&work)
            .filter(|r| r.iter().all(|x| x.is_finite()))
            .ok_or_else(|| {
                Error::FitFailed(format!("non-finite residuals perturbing parameter {j}"))
            })?;
        work[j] = theta[j] - h;
        let minus = residuals(&work)
            .filter(|r| r.iter().all(|x| x.is_finite()))
            .ok_or_else(|| {
                Error::FitFailed(format!("non-finite residuals perturbing parameter {j}"))
            })?;
        work[j] = theta[j];
        if plus.len() != m || minus.len() != m {
            return Err(Error::invalid("residual length changed under perturbation"));
        }
        let scale = 0.5 / h;
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) * scale;
        }
    }
    Ok(jac)
}

/// Largest relative deviation between two Jacobians, entry-wise against the
/// max-norm of the reference. Handy in gradient-check tests.
pub fn max_relative_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let scale = b.amax().max(1e-300);
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_scalar() {
        let f = |t: &[f64]| Some(DVector::from_vec(vec![t[0] * t[0]]));
        let jac = finite_difference_jacobian(&f, &[3.0]).unwrap();
        assert_abs_diff_eq!(jac[(0, 0)], 6.0, epsilon = 1e-8);
    }

    #[test]
    fn linear_map_is_exact() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 4.0, -1.0]);
        let m2 = m.clone();
        let f = move |t: &[f64]| Some(&m2 * DVector::from_column_slice(t));
        let jac = finite_difference_jacobian(&f, &[0.3, -0.7, 2.0]).unwrap();
        assert!(max_relative_deviation(&jac, &m) < 1e-10);
    }

    #[test]
    fn propagates_non_finite_evaluations() {
        let f = |t: &[f64]| {
            if t[0] > 1.0 {
                Some(DVector::from_vec(vec![f64::INFINITY]))
            } else {
                Some(DVector::from_vec(vec![t[0]]))
            }
        };
        assert!(finite_difference_jacobian(&f, &[1.0]).is_err());
    }
}
