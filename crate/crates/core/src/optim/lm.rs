//! Levenberg-Marquardt for weighted nonlinear least squares.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::finite_diff::finite_difference_jacobian;
use crate::error::{Error, Result};

/// A weighted nonlinear least-squares problem `min_theta sum_i w_i r_i(theta)^2`.
pub trait LeastSquaresProblem {
    /// Residual vector at `theta`. `None` signals a diverged or otherwise
    /// unusable evaluation; during iteration that rejects the trial step.
    fn residuals(&self, theta: &[f64]) -> Option<DVector<f64>>;

    /// Analytic Jacobian `d r / d theta` at `theta`. The default `None`
    /// falls back to central finite differences.
    fn jacobian(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Optional positive per-residual weights `w_i`.
    fn residual_weights(&self) -> Option<&[f64]> {
        None
    }
}

/// Damping schedule and stopping tolerances.
#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_damping: f64,
    /// Multiplier applied to the damping on a rejected step (> 1).
    pub damping_increase: f64,
    /// Multiplier applied on an accepted step (in (0, 1)).
    pub damping_decrease: f64,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub cost_tolerance: f64,
    /// Optional wall-clock deadline; exceeding it aborts with
    /// [`Error::BudgetExceeded`].
    pub deadline: Option<Instant>,
    /// Label used in budget errors and traces.
    pub label: String,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_damping: 1e-3,
            damping_increase: 10.0,
            damping_decrease: 0.1,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-10,
            cost_tolerance: 1e-10,
            deadline: None,
            label: "lm".to_string(),
        }
    }
}

impl LmOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0
            || !(self.initial_damping > 0.0)
            || !(self.damping_increase > 1.0)
            || !(self.damping_decrease > 0.0 && self.damping_decrease < 1.0)
            || !(self.gradient_tolerance > 0.0)
            || !(self.step_tolerance > 0.0)
            || !(self.cost_tolerance > 0.0)
        {
            return Err(Error::invalid("invalid Levenberg-Marquardt options"));
        }
        Ok(())
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmTermination {
    GradientTolerance,
    StepTolerance,
    CostTolerance,
    MaxIterations,
    /// The damping grew past its ceiling without finding a downhill step.
    DampingSaturated,
}

/// One row of the convergence trace (initial point plus accepted steps).
#[derive(Debug, Clone, Copy)]
pub struct LmIteration {
    pub iteration: usize,
    pub cost: f64,
    pub damping: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub theta: Vec<f64>,
    pub cost: f64,
    pub trace: Vec<LmIteration>,
    pub termination: LmTermination,
    pub iterations: usize,
}

impl LmOutcome {
    /// Serializes the trace as `iteration,cost,damping,gradient_norm` CSV.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,cost,damping,gradient_norm\n");
        for row in &self.trace {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e}\n",
                row.iteration, row.cost, row.damping, row.gradient_norm
            ));
        }
        out
    }
}

const DAMPING_CEILING: f64 = 1e14;

fn weighted_cost(r: &DVector<f64>, sqrt_w: Option<&DVector<f64>>) -> f64 {
    match sqrt_w {
        Some(sw) => r.iter().zip(sw.iter()).map(|(ri, wi)| (ri * wi).powi(2)).sum(),
        None => r.norm_squared(),
    }
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Minimizes the weighted residual sum of squares starting at `theta0`.
///
/// Steps solve `(J^T J + lambda diag(J^T J)) delta = -J^T r` through an SVD
/// of the damped augmented system, so rank-deficient directions receive the
/// minimum-norm component. Scaling the damping by `diag(J^T J)` makes the
/// iterate sequence invariant under a uniform rescaling of the weights.
pub fn levenberg_marquardt<P: LeastSquaresProblem>(
    problem: &P,
    theta0: &[f64],
    opts: &LmOptions,
) -> Result<LmOutcome> {
    opts.validate()?;
    let p = theta0.len();
    if p == 0 {
        return Err(Error::invalid("empty parameter vector"));
    }

    let sqrt_w: Option<DVector<f64>> = match problem.residual_weights() {
        Some(w) => {
            if w.iter().any(|wi| !(*wi > 0.0)) {
                return Err(Error::invalid("residual weights must be positive"));
            }
            Some(DVector::from_iterator(w.len(), w.iter().map(|wi| wi.sqrt())))
        }
        None => None,
    };

    let eval = |theta: &[f64]| -> Option<DVector<f64>> {
        let r = problem.residuals(theta)?;
        if all_finite(&r) {
            Some(r)
        } else {
            None
        }
    };

    let mut theta = DVector::from_column_slice(theta0);
    let mut residual = eval(theta.as_slice()).ok_or_else(|| {
        Error::FitFailed(format!("{}: non-finite residuals at initial point", opts.label))
    })?;
    if let Some(sw) = &sqrt_w {
        if sw.len() != residual.len() {
            return Err(Error::invalid("weight length does not match residual length"));
        }
    }
    let mut cost = weighted_cost(&residual, sqrt_w.as_ref());
    let mut damping = opts.initial_damping;

    let jacobian_at = |theta: &DVector<f64>| -> Result<DMatrix<f64>> {
        match problem.jacobian(theta.as_slice()) {
            Some(j) => {
                if j.iter().all(|x| x.is_finite()) {
                    Ok(j)
                } else {
                    Err(Error::FitFailed(format!(
                        "{}: non-finite Jacobian entries",
                        opts.label
                    )))
                }
            }
            None => finite_difference_jacobian(
                &|t: &[f64]| problem.residuals(t),
                theta.as_slice(),
            ),
        }
    };

    let mut trace = Vec::new();
    let mut termination = LmTermination::MaxIterations;
    let mut iterations_done = 0;

    let mut jac = jacobian_at(&theta)?;
    'outer: for iteration in 0..opts.max_iterations {
        iterations_done = iteration + 1;
        if let Some(deadline) = opts.deadline {
            if Instant::now() >= deadline {
                return Err(Error::BudgetExceeded(opts.label.clone()));
            }
        }

        // Apply weights by row scaling.
        let (jw, rw) = match &sqrt_w {
            Some(sw) => {
                let mut jw = jac.clone();
                for (i, wi) in sw.iter().enumerate() {
                    for j in 0..p {
                        jw[(i, j)] *= *wi;
                    }
                }
                let rweighted =
                    DVector::from_iterator(residual.len(), residual.iter().zip(sw.iter()).map(|(r, w)| r * w));
                (jw, rweighted)
            }
            None => (jac.clone(), residual.clone()),
        };

        let gradient = jw.transpose() * &rw;
        let gradient_norm = gradient.amax();
        if iteration == 0 {
            trace.push(LmIteration {
                iteration: 0,
                cost,
                damping,
                gradient_norm,
            });
        }
        if gradient_norm <= opts.gradient_tolerance {
            termination = LmTermination::GradientTolerance;
            break;
        }

        // Column norms of the weighted Jacobian scale the damping.
        let col_scale: Vec<f64> = (0..p)
            .map(|j| jw.column(j).norm_squared().sqrt())
            .collect();

        loop {
            if let Some(deadline) = opts.deadline {
                if Instant::now() >= deadline {
                    return Err(Error::BudgetExceeded(opts.label.clone()));
                }
            }
            // Augmented system [Jw; sqrt(lambda) * diag(col_scale)] delta = [-rw; 0].
            let m = rw.len();
            let mut aug = DMatrix::zeros(m + p, p);
            aug.view_mut((0, 0), (m, p)).copy_from(&jw);
            let sqrt_damping = damping.sqrt();
            for j in 0..p {
                aug[(m + j, j)] = sqrt_damping * col_scale[j];
            }
            let mut rhs = DVector::zeros(m + p);
            rhs.rows_mut(0, m).copy_from(&(-&rw));

            let svd = aug.svd(true, true);
            let sv_max = svd.singular_values.max();
            let cutoff = if sv_max > 0.0 { sv_max * 1e-13 } else { f64::MAX };
            let delta = svd
                .solve(&rhs, cutoff)
                .map_err(|e| Error::Singular(format!("{}: {e}", opts.label)))?;

            let trial = &theta + &delta;
            let trial_result = eval(trial.as_slice());
            let improved = match &trial_result {
                Some(r) => weighted_cost(r, sqrt_w.as_ref()) < cost,
                None => false,
            };

            if improved {
                let new_residual = trial_result.unwrap();
                let new_cost = weighted_cost(&new_residual, sqrt_w.as_ref());
                let cost_drop = cost - new_cost;
                let step_small = delta.norm() <= opts.step_tolerance * (theta.norm() + opts.step_tolerance);
                theta = trial;
                residual = new_residual;
                cost = new_cost;
                damping = (damping * opts.damping_decrease).max(1e-16);
                trace.push(LmIteration {
                    iteration: iteration + 1,
                    cost,
                    damping,
                    gradient_norm,
                });
                if step_small {
                    termination = LmTermination::StepTolerance;
                    break 'outer;
                }
                if cost_drop <= opts.cost_tolerance * cost.max(opts.cost_tolerance) {
                    termination = LmTermination::CostTolerance;
                    break 'outer;
                }
                jac = jacobian_at(&theta)?;
                break;
            }

            damping *= opts.damping_increase;
            if damping > DAMPING_CEILING {
                termination = LmTermination::DampingSaturated;
                break 'outer;
            }
        }
    }

    Ok(LmOutcome {
        theta: theta.as_slice().to_vec(),
        cost,
        trace,
        termination,
        iterations: iterations_done,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Linear {
        m: DMatrix<f64>,
        y: DVector<f64>,
        weights: Option<Vec<f64>>,
    }

    impl LeastSquaresProblem for Linear {
        fn residuals(&self, theta: &[f64]) -> Option<DVector<f64>> {
            let t = DVector::from_column_slice(theta);
            Some(&self.m * t - &self.y)
        }

        fn jacobian(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
            Some(self.m.clone())
        }

        fn residual_weights(&self) -> Option<&[f64]> {
            self.weights.as_deref()
        }
    }

    struct Rosenbrock;

    impl LeastSquaresProblem for Rosenbrock {
        fn residuals(&self, theta: &[f64]) -> Option<DVector<f64>> {
            Some(DVector::from_vec(vec![
                10.0 * (theta[1] - theta[0] * theta[0]),
                1.0 - theta[0],
            ]))
        }
    }

    #[test]
    fn solves_linear_least_squares_exactly() {
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 0.5, -1.0, 2.0, 0.3, 0.3, 2.0, -1.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let exact = (m.transpose() * &m)
            .lu()
            .solve(&(m.transpose() * &y))
            .unwrap();
        let problem = Linear { m, y, weights: None };
        let out = levenberg_marquardt(&problem, &[0.0, 0.0], &LmOptions::default()).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(out.theta[i], exact[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn rosenbrock_reaches_global_minimum() {
        let out = levenberg_marquardt(&Rosenbrock, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        assert_abs_diff_eq!(out.theta[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.theta[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn uniform_weight_scaling_leaves_iterates_unchanged() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 1.5, 0.7, -0.2]);
        let y = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let base = Linear {
            m: m.clone(),
            y: y.clone(),
            weights: Some(vec![1.0, 2.0, 0.5]),
        };
        let scaled = Linear {
            m,
            y,
            weights: Some(vec![7.0, 14.0, 3.5]),
        };
        let opts = LmOptions::default().with_max_iterations(5);
        let a = levenberg_marquardt(&base, &[0.1, -0.3], &opts).unwrap();
        let b = levenberg_marquardt(&scaled, &[0.1, -0.3], &opts).unwrap();
        assert_eq!(a.trace.len(), b.trace.len());
        assert_eq!(a.theta, b.theta);
    }

    #[test]
    fn accepted_trace_strictly_decreases() {
        let out = levenberg_marquardt(&Rosenbrock, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1].cost < w[0].cost);
        }
    }

    #[test]
    fn non_finite_start_is_an_error() {
        struct Bad;
        impl LeastSquaresProblem for Bad {
            fn residuals(&self, _: &[f64]) -> Option<DVector<f64>> {
                Some(DVector::from_vec(vec![f64::NAN]))
            }
        }
        assert!(levenberg_marquardt(&Bad, &[0.0], &LmOptions::default()).is_err());
    }
}
