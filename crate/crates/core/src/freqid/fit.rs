//! Weighted parametric transfer-function fitting on a nonparametric FRF.
//!
//! Minimizes `V(theta) = sum_k |G_hat(w_k) - G(w_k, theta)|^2 / var_k` with
//! Levenberg-Marquardt, started from a variance-weighted linear least-squares
//! (Levy-style) estimate. The returned cost never exceeds the cost of the
//! initial guess.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::lpm::Frf;
use super::tf::RationalTf;
use crate::error::{Error, Result};
use crate::optim::{levenberg_marquardt, LeastSquaresProblem, LmOptions, LmOutcome};

#[derive(Debug, Clone)]
pub struct TfFitOptions {
    pub allow_unstable: bool,
    pub lm: LmOptions,
}

impl Default for TfFitOptions {
    fn default() -> Self {
        Self {
            allow_unstable: false,
            lm: LmOptions::default().with_label("parametric-tf"),
        }
    }
}

/// Effective per-line variances: zeros (noiseless or single-period records)
/// are replaced by the median nonzero variance, or by 1 everywhere when no
/// information exists (unweighted fit). All values are floored at 1e-12 of
/// the largest variance so that numerically-zero residual variances cannot
/// concentrate the whole weight on a handful of lines.
pub fn effective_variances(variance: &[f64]) -> Vec<f64> {
    let mut nonzero: Vec<f64> = variance.iter().copied().filter(|v| *v > 0.0).collect();
    if nonzero.is_empty() {
        return vec![1.0; variance.len()];
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = nonzero[nonzero.len() / 2];
    let max = *nonzero.last().unwrap();
    let floor = max * 1e-12;
    variance
        .iter()
        .map(|v| if *v > 0.0 { *v } else { median }.max(floor))
        .collect()
}

struct TfResidualProblem<'a> {
    frf: &'a Frf,
    sigma: Vec<f64>,
    na: usize,
    nb: usize,
}

impl TfResidualProblem<'_> {
    fn split(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let b = theta[..=self.nb].to_vec();
        let mut a = vec![1.0];
        a.extend_from_slice(&theta[self.nb + 1..]);
        (b, a)
    }

    fn eval_poly(coeffs: &[f64], z_inv: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z_inv + c;
        }
        acc
    }
}

impl LeastSquaresProblem for TfResidualProblem<'_> {
    fn residuals(&self, theta: &[f64]) -> Option<DVector<f64>> {
        let (b, a) = self.split(theta);
        let f = self.frf.len();
        let mut r = DVector::zeros(2 * f);
        for k in 0..f {
            let z_inv = Complex64::new(0.0, -self.frf.omega[k]).exp();
            let den = Self::eval_poly(&a, z_inv);
            if den.norm() < 1e-300 {
                return None;
            }
            let g = Self::eval_poly(&b, z_inv) / den;
            let diff = (g - self.frf.response[k]) / self.sigma[k];
            r[2 * k] = diff.re;
            r[2 * k + 1] = diff.im;
        }
        Some(r)
    }

    fn jacobian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let (b, a) = self.split(theta);
        let f = self.frf.len();
        let p = theta.len();
        let mut jac = DMatrix::zeros(2 * f, p);
        for k in 0..f {
            let z_inv = Complex64::new(0.0, -self.frf.omega[k]).exp();
            let den = Self::eval_poly(&a, z_inv);
            if den.norm() < 1e-300 {
                return None;
            }
            let g = Self::eval_poly(&b, z_inv) / den;
            let mut zj = Complex64::new(1.0, 0.0);
            for j in 0..=self.nb {
                let d = zj / den / self.sigma[k];
                jac[(2 * k, j)] = d.re;
                jac[(2 * k + 1, j)] = d.im;
                zj *= z_inv;
            }
            let mut zi = z_inv;
            for i in 1..=self.na {
                let d = -g * zi / den / self.sigma[k];
                jac[(2 * k, self.nb + i)] = d.re;
                jac[(2 * k + 1, self.nb + i)] = d.im;
                zi *= z_inv;
            }
        }
        Some(jac)
    }
}

/// Variance-weighted linear least-squares initial guess:
/// `G_hat * A(theta) ~ B(theta)` with `a_0 = 1`.
fn levy_initial_guess(frf: &Frf, sigma: &[f64], na: usize, nb: usize) -> Result<Vec<f64>> {
    let f = frf.len();
    let p = nb + 1 + na;
    let mut m = DMatrix::<f64>::zeros(2 * f, p);
    let mut rhs = DVector::<f64>::zeros(2 * f);
    for k in 0..f {
        let z_inv = Complex64::new(0.0, -frf.omega[k]).exp();
        let w = 1.0 / sigma[k];
        let g = frf.response[k];
        let mut zj = Complex64::new(1.0, 0.0);
        for j in 0..=nb {
            m[(2 * k, j)] = zj.re * w;
            m[(2 * k + 1, j)] = zj.im * w;
            zj *= z_inv;
        }
        let mut zi = z_inv;
        for i in 1..=na {
            let coeff = -g * zi;
            m[(2 * k, nb + i)] = coeff.re * w;
            m[(2 * k + 1, nb + i)] = coeff.im * w;
            zi *= z_inv;
        }
        rhs[2 * k] = g.re * w;
        rhs[2 * k + 1] = g.im * w;
    }
    let svd = m.svd(true, true);
    let sv_max = svd.singular_values.max();
    if !(sv_max > 0.0) {
        return Err(Error::Singular("degenerate FRF regression".into()));
    }
    let theta = svd
        .solve(&rhs, sv_max * 1e-13)
        .map_err(|e| Error::Singular(e.to_string()))?;
    Ok(theta.as_slice().to_vec())
}

/// Fits `G(q, theta)` of orders `(n_a, n_b)` to the FRF, minimizing the
/// variance-weighted cost. Returns the model and the LM convergence trace.
pub fn fit_parametric_tf(
    frf: &Frf,
    na: usize,
    nb: usize,
    opts: &TfFitOptions,
) -> Result<(RationalTf, LmOutcome)> {
    if frf.is_empty() {
        return Err(Error::invalid("empty FRF"));
    }
    if 2 * frf.len() < na + nb + 1 {
        return Err(Error::invalid("FRF has fewer equations than parameters"));
    }
    let sigma: Vec<f64> = effective_variances(&frf.variance)
        .into_iter()
        .map(|v| v.sqrt())
        .collect();

    let problem = TfResidualProblem { frf, sigma: sigma.clone(), na, nb };
    let theta0 = levy_initial_guess(frf, &sigma, na, nb)?;
    let outcome = levenberg_marquardt(&problem, &theta0, &opts.lm)?;

    let (b, a) = problem.split(&outcome.theta);
    let tf = RationalTf::new_with_stability_override(b, a, true)?;
    if !opts.allow_unstable && !tf.is_stable() {
        return Err(Error::Unstable(
            "fitted denominator has poles on or outside the unit circle".into(),
        ));
    }
    Ok((tf, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{finite_difference_jacobian, max_relative_deviation};
    use approx::assert_abs_diff_eq;

    fn frf_from_tf(tf: &RationalTf, lines: usize, n: usize, variance: f64) -> Frf {
        let omega: Vec<f64> = (1..=lines)
            .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
            .collect();
        let response: Vec<Complex64> = omega.iter().map(|&w| tf.freq_response(w)).collect();
        Frf::new(omega, response, vec![variance; lines]).unwrap()
    }

    #[test]
    fn recovers_third_order_system() {
        let truth =
            RationalTf::new(vec![0.4, -0.3, 0.12, 0.05], vec![1.0, -1.5, 0.8, -0.15]).unwrap();
        let frf = frf_from_tf(&truth, 120, 400, 1.0);
        let (fit, _) = fit_parametric_tf(&frf, 3, 3, &TfFitOptions::default()).unwrap();
        for (got, want) in fit
            .numerator()
            .iter()
            .chain(fit.denominator())
            .zip(truth.numerator().iter().chain(truth.denominator()))
        {
            assert!(
                (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                "coefficient {got} vs {want}"
            );
        }
    }

    #[test]
    fn zero_order_fit_is_weighted_mean() {
        let omega = vec![0.5, 1.0, 1.5];
        let response = vec![
            Complex64::new(2.0, 0.1),
            Complex64::new(3.0, -0.1),
            Complex64::new(4.0, 0.0),
        ];
        let variance = vec![1.0, 0.5, 2.0];
        let frf = Frf::new(omega, response.clone(), variance.clone()).unwrap();
        let (fit, _) = fit_parametric_tf(&frf, 0, 0, &TfFitOptions::default()).unwrap();
        // Real scalar b0 minimizing sum |G_k - b0|^2 / var_k.
        let num: f64 = response
            .iter()
            .zip(&variance)
            .map(|(g, v)| g.re / v)
            .sum();
        let den: f64 = variance.iter().map(|v| 1.0 / v).sum();
        assert_abs_diff_eq!(fit.numerator()[0], num / den, epsilon = 1e-10);
    }

    #[test]
    fn scaling_variances_leaves_minimizer_unchanged() {
        let truth = RationalTf::new(vec![0.3, 0.1], vec![1.0, -0.6]).unwrap();
        let base = frf_from_tf(&truth, 50, 200, 1.0);
        let doubled = Frf::new(
            base.omega.clone(),
            base.response.clone(),
            base.variance.iter().map(|v| 2.0 * v).collect(),
        )
        .unwrap();
        let (fit_a, _) = fit_parametric_tf(&base, 1, 1, &TfFitOptions::default()).unwrap();
        let (fit_b, _) = fit_parametric_tf(&doubled, 1, 1, &TfFitOptions::default()).unwrap();
        for (x, y) in fit_a
            .numerator()
            .iter()
            .chain(fit_a.denominator())
            .zip(fit_b.numerator().iter().chain(fit_b.denominator()))
        {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let truth = RationalTf::new(vec![0.4, -0.2, 0.1], vec![1.0, -1.1, 0.4]).unwrap();
        let frf = frf_from_tf(&truth, 40, 160, 0.7);
        let sigma: Vec<f64> = effective_variances(&frf.variance)
            .into_iter()
            .map(|v| v.sqrt())
            .collect();
        let problem = TfResidualProblem {
            frf: &frf,
            sigma,
            na: 2,
            nb: 2,
        };
        let theta = vec![0.35, -0.15, 0.12, -1.0, 0.35];
        let analytic = problem.jacobian(&theta).unwrap();
        let numeric =
            finite_difference_jacobian(&|t: &[f64]| problem.residuals(t), &theta).unwrap();
        assert!(max_relative_deviation(&analytic, &numeric) < 1e-6);
    }

    #[test]
    fn lm_never_exceeds_initial_cost() {
        let truth = RationalTf::new(vec![0.5, -0.2], vec![1.0, -0.7]).unwrap();
        let frf = frf_from_tf(&truth, 60, 240, 1.0);
        let sigma: Vec<f64> = vec![1.0; frf.len()];
        let problem = TfResidualProblem {
            frf: &frf,
            sigma: sigma.clone(),
            na: 1,
            nb: 1,
        };
        let theta0 = levy_initial_guess(&frf, &sigma, 1, 1).unwrap();
        let init_cost = problem
            .residuals(&theta0)
            .unwrap()
            .norm_squared();
        let (_, outcome) = fit_parametric_tf(&frf, 1, 1, &TfFitOptions::default()).unwrap();
        assert!(outcome.cost <= init_cost + 1e-15);
    }
}
