//! Nonlinear system identification toolkit and benchmark harness.
//!
//! The crate fits and compares five model families on periodic multi-level
//! excitation data: a parametric best linear approximation (BLA), Wiener
//! models with polynomial or sigmoid-network nonlinearities, Wiener-Schetzen
//! models on orthonormal basis functions, polynomial nonlinear state-space
//! (PNLSS) models, and neural-network state-space (NN-NLSS) models. A
//! surrogate glucoregulatory ODE plant and exactly known synthetic systems
//! provide benchmark data.
//!
//! Data-parallel sections (per-operating-point generation, estimation and
//! scoring) run on rayon when the default `parallel` feature is enabled and
//! fall back to sequential loops without it; results are bit-identical
//! either way.

pub mod error;
pub mod exec;
pub mod freqid;
pub mod nlss;
pub mod optim;
pub mod plant;
pub mod ser;
pub mod signals;

pub use error::{Error, Result};
