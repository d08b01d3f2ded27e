//! Linear identification backbone: nonparametric FRF via the Local Polynomial
//! Method, weighted parametric transfer-function fitting, and state-space
//! realization for nonlinear state-space initialization.

mod bla;
mod fit;
mod lpm;
mod ss;
mod tf;

pub use bla::{estimate_bla, estimate_bla_records, infer_excited_lines, BlaEstimate};
pub use fit::{effective_variances, fit_parametric_tf, TfFitOptions};
pub use lpm::{estimate_frf_lpm, Frf, LpmOptions};
pub use ss::{realize_state_space, LinearSs};
pub use tf::{polynomial_roots, RationalTf};
