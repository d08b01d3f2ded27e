//! Forward-sensitivity simulation for parameterized state-space models.
//!
//! Simulating the output Jacobian of `x(t+1) = f(x,u)`, `y(t) = g(x,u)` with
//! respect to all model parameters reduces to propagating the state
//! sensitivity `S(t+1) = (df/dx) S(t) + df/dtheta` alongside the state, one
//! pass over the record, linear in its length.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};

/// Per-step Jacobian callbacks of a single-input single-output state-space
/// model with a flat parameter vector.
pub trait DynamicModelJacobians {
    fn state_dim(&self) -> usize;
    fn param_count(&self) -> usize;

    /// `f(x, u)`.
    fn state_update(&self, x: &DVector<f64>, u: f64) -> DVector<f64>;
    /// `g(x, u)`.
    fn output(&self, x: &DVector<f64>, u: f64) -> f64;

    /// `(df/dx, df/dtheta)` evaluated at `(x, u)`.
    fn state_jacobians(&self, x: &DVector<f64>, u: f64) -> (DMatrix<f64>, DMatrix<f64>);
    /// `(dg/dx, dg/dtheta)` evaluated at `(x, u)`.
    fn output_jacobians(&self, x: &DVector<f64>, u: f64) -> (RowDVector<f64>, RowDVector<f64>);
}

/// Output sequence together with its Jacobian w.r.t. every model parameter.
#[derive(Debug, Clone)]
pub struct SensitivitySimulation {
    pub output: Vec<f64>,
    /// `T x p` matrix, row `t` holding `dy(t)/dtheta`.
    pub jacobian: DMatrix<f64>,
}

/// Plain forward simulation with a divergence bound on states and output.
pub fn simulate_dynamic<M: DynamicModelJacobians>(
    model: &M,
    input: &[f64],
    x0: Option<&DVector<f64>>,
    divergence_bound: f64,
) -> Result<Vec<f64>> {
    let n = model.state_dim();
    let mut x = match x0 {
        Some(v) => {
            if v.len() != n {
                return Err(Error::invalid("initial state dimension mismatch"));
            }
            v.clone()
        }
        None => DVector::zeros(n),
    };
    let mut output = Vec::with_capacity(input.len());
    for (t, &u) in input.iter().enumerate() {
        let y = model.output(&x, u);
        if !y.is_finite() || y.abs() > divergence_bound {
            return Err(Error::Diverged {
                index: t,
                detail: format!("output magnitude {:.3e}", y.abs()),
            });
        }
        output.push(y);
        x = model.state_update(&x, u);
        if x.iter().any(|v| !v.is_finite() || v.abs() > divergence_bound) {
            return Err(Error::Diverged {
                index: t,
                detail: "state left the divergence bound".into(),
            });
        }
    }
    Ok(output)
}

/// Forward simulation propagating output sensitivities to all parameters.
///
/// The initial state is treated as parameter-independent, so `S(0) = 0`.
pub fn simulate_with_output_jacobian<M: DynamicModelJacobians>(
    model: &M,
    input: &[f64],
    x0: Option<&DVector<f64>>,
    divergence_bound: f64,
) -> Result<SensitivitySimulation> {
    let n = model.state_dim();
    let p = model.param_count();
    let t_len = input.len();
    let mut x = match x0 {
        Some(v) => {
            if v.len() != n {
                return Err(Error::invalid("initial state dimension mismatch"));
            }
            v.clone()
        }
        None => DVector::zeros(n),
    };
    let mut sens = DMatrix::<f64>::zeros(n, p);
    let mut output = Vec::with_capacity(t_len);
    let mut jacobian = DMatrix::<f64>::zeros(t_len, p);

    for (t, &u) in input.iter().enumerate() {
        let y = model.output(&x, u);
        if !y.is_finite() || y.abs() > divergence_bound {
            return Err(Error::Diverged {
                index: t,
                detail: format!("output magnitude {:.3e}", y.abs()),
            });
        }
        output.push(y);

        let (gx, gtheta) = model.output_jacobians(&x, u);
        let dy = &gx * &sens + gtheta;
        jacobian.row_mut(t).copy_from(&dy);

        let (fx, ftheta) = model.state_jacobians(&x, u);
        sens = &fx * sens + ftheta;
        x = model.state_update(&x, u);
        if x.iter().any(|v| !v.is_finite() || v.abs() > divergence_bound) {
            return Err(Error::Diverged {
                index: t,
                detail: "state left the divergence bound".into(),
            });
        }
        if sens.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                index: t,
                detail: "sensitivity recursion became non-finite".into(),
            });
        }
    }

    Ok(SensitivitySimulation { output, jacobian })
}
