//! Benchmark data generation: the surrogate glucoregulatory ODE plant plus
//! exactly known synthetic systems used as recovery oracles.

mod minimal;
mod synthetic;

pub use minimal::{
    equilibrium, simulate_plant, simulate_plant_substeps, MinimalModelParams, DEFAULT_SUBSTEPS,
};
pub use synthetic::{simulate_synthetic, SyntheticPnlssSpec, SyntheticSpec, SyntheticWienerSpec};
