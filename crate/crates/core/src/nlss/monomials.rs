//! Monomial bases over the state vector and input, with a deterministic
//! graded-lexicographic ordering that is preserved through serialization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered monomials `x_1^e1 * ... * x_n^en * u^eu` whose total degree lies
/// in `degrees`. The exponent tuples are generated degree by degree in
/// lexicographically descending order, and stored explicitly so a reloaded
/// model evaluates identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialBasis {
    state_dim: usize,
    degrees: Vec<u32>,
    /// Exponent tuples of length `state_dim + 1`; the last entry is the
    /// input exponent.
    exponents: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(state_dim: usize, degrees: &[u32]) -> Result<Self> {
        let mut sorted: Vec<u32> = degrees.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.iter().any(|d| *d == 0) {
            return Err(Error::invalid(
                "degree 0 not allowed: constants are not part of the basis",
            ));
        }
        let vars = state_dim + 1;
        let mut exponents = Vec::new();
        for &d in &sorted {
            let mut tuple = vec![0u32; vars];
            enumerate_degree(d, 0, &mut tuple, &mut exponents);
        }
        Ok(Self {
            state_dim,
            degrees: sorted,
            exponents,
        })
    }

    /// Empty basis (no nonlinear terms).
    pub fn empty(state_dim: usize) -> Self {
        Self {
            state_dim,
            degrees: Vec::new(),
            exponents: Vec::new(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Evaluates every monomial at `(x, u)` into `out` (length `len()`).
    pub fn eval_into(&self, x: &[f64], u: f64, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.state_dim);
        debug_assert_eq!(out.len(), self.exponents.len());
        for (slot, tuple) in out.iter_mut().zip(&self.exponents) {
            let mut acc = 1.0;
            for (i, &e) in tuple.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if i < self.state_dim { x[i] } else { u };
                acc *= powi(base, e);
            }
            *slot = acc;
        }
    }

    pub fn eval(&self, x: &[f64], u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, u, &mut out);
        out
    }

    /// Partial derivative of every monomial with respect to variable `var`
    /// (`0..state_dim` for states, `state_dim` for the input).
    pub fn eval_derivative_into(&self, x: &[f64], u: f64, var: usize, out: &mut [f64]) {
        debug_assert!(var <= self.state_dim);
        for (slot, tuple) in out.iter_mut().zip(&self.exponents) {
            let e_var = tuple[var];
            if e_var == 0 {
                *slot = 0.0;
                continue;
            }
            let mut acc = e_var as f64;
            for (i, &e) in tuple.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if i < self.state_dim { x[i] } else { u };
                let exp = if i == var { e - 1 } else { e };
                if exp > 0 {
                    acc *= powi(base, exp);
                }
            }
            *slot = acc;
        }
    }
}

fn powi(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Fills `out` with all tuples of the given remaining degree, assigning
/// positions from `pos` onwards, descending in the leading exponent.
fn enumerate_degree(remaining: u32, pos: usize, tuple: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let vars = tuple.len();
    if pos == vars - 1 {
        tuple[pos] = remaining;
        out.push(tuple.clone());
        tuple[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        tuple[pos] = e;
        enumerate_degree(remaining - e, pos + 1, tuple, out);
        tuple[pos] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_state_degree_two_in_graded_lex_order() {
        let basis = MonomialBasis::new(1, &[2]).unwrap();
        assert_eq!(
            basis.exponents(),
            &[vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(basis.eval(&[2.0], 3.0), vec![4.0, 6.0, 9.0]);
    }

    #[test]
    fn zero_point_evaluates_to_zeros() {
        let basis = MonomialBasis::new(2, &[2, 3]).unwrap();
        assert!(basis.eval(&[0.0, 0.0], 0.0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn two_states_degree_two_has_six_monomials() {
        let basis = MonomialBasis::new(2, &[2]).unwrap();
        assert_eq!(basis.len(), 6);
    }

    #[test]
    fn derivative_matches_hand_computation() {
        // x^2, xu, u^2 at (x, u) = (2, 3); d/dx = [2x, u, 0].
        let basis = MonomialBasis::new(1, &[2]).unwrap();
        let mut out = vec![0.0; 3];
        basis.eval_derivative_into(&[2.0], 3.0, 0, &mut out);
        assert_eq!(out, vec![4.0, 3.0, 0.0]);
        basis.eval_derivative_into(&[2.0], 3.0, 1, &mut out);
        assert_eq!(out, vec![0.0, 2.0, 6.0]);
    }

    #[test]
    fn ordering_survives_serialization() {
        let basis = MonomialBasis::new(3, &[2, 3]).unwrap();
        let json = serde_json::to_string(&basis).unwrap();
        let back: MonomialBasis = serde_json::from_str(&json).unwrap();
        assert_eq!(basis, back);
    }
}
