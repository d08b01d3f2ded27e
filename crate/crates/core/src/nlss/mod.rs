//! Nonlinear state-space models: polynomial (PNLSS) and neural-network based
//! structures, state estimation and the full identification pipelines.

mod monomials;

pub use monomials::MonomialBasis;
