//! Surrogate glucoregulatory plant: a Bergman-type minimal model with a
//! saturating insulin-delivery term.
//!
//! States: plasma glucose `G` (mg/dL), insulin action `X` (1/min), plasma
//! insulin `I` (pmol/L). Input `u` is the exogenous insulin delivery rate
//! (pmol/min). The delivery term is measured relative to the basal-sustaining
//! rate `u_b = Ib * Vi * n_clear`, and saturates as `u` grows, which is what
//! makes the small-signal gain depend on the operating point:
//!
//! ```text
//! dG/dt = -p1 (G - Gb) - X G
//! dX/dt = -p2 X + p3 (I - Ib)
//! dI/dt = -n_clear (I - Ib) + (u - u_b) / (Vi (1 + s u / u_ref))
//! ```
//!
//! Default parameter values are plausible but are configuration, not
//! physiology: the plant exists to exercise the identification pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::SampledRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalModelParams {
    /// Glucose self-regulation rate (1/min).
    pub p1: f64,
    /// Insulin-action decay rate (1/min).
    pub p2: f64,
    /// Insulin-action gain ((1/min) per (pmol/L)).
    pub p3: f64,
    /// Basal glucose (mg/dL).
    pub gb: f64,
    /// Basal plasma insulin (pmol/L).
    pub ib: f64,
    /// Insulin clearance rate (1/min).
    pub n_clear: f64,
    /// Insulin distribution volume (L).
    pub vi: f64,
    /// Saturation strength of the delivery nonlinearity (dimensionless).
    pub saturation: f64,
    /// Delivery rate scale of the saturation (pmol/min).
    pub u_ref: f64,
}

impl Default for MinimalModelParams {
    fn default() -> Self {
        Self {
            p1: 0.02,
            p2: 0.025,
            p3: 4.0e-6,
            gb: 180.0,
            ib: 60.0,
            n_clear: 0.09,
            vi: 12.0,
            saturation: 1.5,
            u_ref: 325.0,
        }
    }
}

impl MinimalModelParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.p1, self.p2, self.p3, self.n_clear];
        if rates.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::invalid("all plant rates must be strictly positive"));
        }
        if !(self.gb > 0.0 && self.ib > 0.0 && self.vi > 0.0) {
            return Err(Error::invalid("Gb, Ib and Vi must be positive"));
        }
        if !(self.saturation > 0.0 && self.u_ref > 0.0) {
            return Err(Error::invalid("saturation and u_ref must be positive"));
        }
        Ok(())
    }

    /// Delivery rate that exactly sustains the basal insulin level `Ib`.
    pub fn basal_rate(&self) -> f64 {
        self.ib * self.vi * self.n_clear
    }

    fn delivery(&self, u: f64) -> f64 {
        (u - self.basal_rate()) / (self.vi * (1.0 + self.saturation * u / self.u_ref))
    }

    /// Right-hand side of the ODE at state `(G, X, I)` under input `u`.
    pub fn vector_field(&self, state: [f64; 3], u: f64) -> [f64; 3] {
        let [g, x, i] = state;
        [
            -self.p1 * (g - self.gb) - x * g,
            -self.p2 * x + self.p3 * (i - self.ib),
            -self.n_clear * (i - self.ib) + self.delivery(u),
        ]
    }
}

/// Algebraic steady state of the plant under constant delivery
/// `basal_insulin` (pmol/min). Errors when the implied insulin action leaves
/// no positive-glucose equilibrium.
pub fn equilibrium(params: &MinimalModelParams, basal_insulin: f64) -> Result<[f64; 3]> {
    params.validate()?;
    if !(basal_insulin >= 0.0) {
        return Err(Error::invalid("basal insulin rate must be nonnegative"));
    }
    let i_eq = params.ib + params.delivery(basal_insulin) / params.n_clear;
    let x_eq = params.p3 * (i_eq - params.ib) / params.p2;
    let denom = params.p1 + x_eq;
    if !(denom > 0.0) {
        return Err(Error::invalid(format!(
            "no positive-glucose equilibrium: insulin action {x_eq:.3e} cancels glucose decay"
        )));
    }
    let g_eq = params.p1 * params.gb / denom;
    if !(g_eq > 0.0) || !g_eq.is_finite() {
        return Err(Error::invalid("no positive-glucose equilibrium"));
    }
    Ok([g_eq, x_eq, i_eq])
}

/// Default number of RK4 sub-steps per sampling interval.
pub const DEFAULT_SUBSTEPS: usize = 10;

/// Simulates the plant on a sampled insulin record with fixed-step RK4 at
/// `substeps` internal steps per sampling interval and zero-order-hold input.
/// When `init` is absent the simulation starts from the equilibrium of the
/// record's offset level.
pub fn simulate_plant(
    params: &MinimalModelParams,
    insulin: &SampledRecord,
    init: Option<[f64; 3]>,
) -> Result<SampledRecord> {
    simulate_plant_substeps(params, insulin, init, DEFAULT_SUBSTEPS)
}

pub fn simulate_plant_substeps(
    params: &MinimalModelParams,
    insulin: &SampledRecord,
    init: Option<[f64; 3]>,
    substeps: usize,
) -> Result<SampledRecord> {
    params.validate()?;
    if substeps == 0 {
        return Err(Error::invalid("at least one RK4 substep required"));
    }
    if insulin.samples().iter().any(|u| !(*u >= 0.0)) {
        return Err(Error::invalid("insulin samples must be nonnegative"));
    }
    let mut state = match init {
        Some(s) => s,
        None => equilibrium(params, insulin.offset())?,
    };
    let h = insulin.sampling_minutes() / substeps as f64;

    let mut glucose = Vec::with_capacity(insulin.len());
    for (t, &u) in insulin.samples().iter().enumerate() {
        glucose.push(state[0]);
        for _ in 0..substeps {
            state = rk4_step(params, state, u, h);
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                index: t,
                detail: "plant state became non-finite".into(),
            });
        }
    }

    let mean = glucose.iter().sum::<f64>() / glucose.len() as f64;
    SampledRecord::new(
        glucose,
        insulin.sampling_minutes(),
        insulin.period_length(),
        insulin.period_count(),
        mean,
    )
}

fn rk4_step(params: &MinimalModelParams, state: [f64; 3], u: f64, h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| {
        [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
    };
    let k1 = params.vector_field(state, u);
    let k2 = params.vector_field(add(state, k1, 0.5 * h), u);
    let k3 = params.vector_field(add(state, k2, 0.5 * h), u);
    let k4 = params.vector_field(add(state, k3, h), u);
    [
        state[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        state[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}
