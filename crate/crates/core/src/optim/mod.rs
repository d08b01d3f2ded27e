//! Shared nonlinear least-squares machinery.

mod finite_diff;
mod lm;
mod sensitivity;

pub use finite_diff::{finite_difference_jacobian, max_relative_deviation};
pub use lm::{
    levenberg_marquardt, LeastSquaresProblem, LmIteration, LmOptions, LmOutcome, LmTermination,
};
pub use sensitivity::{
    simulate_dynamic, simulate_with_output_jacobian, DynamicModelJacobians, SensitivitySimulation,
};
